#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace adloc {

struct ResolvedFace {
    std::filesystem::path path;
    /// The file is a bold cut, so no synthetic emboldening is needed.
    bool bold_face = false;
};

/// Font files from one directory, indexed by family. "DejaVuSans-Bold.ttf"
/// and a request for "DejaVu Sans" meet at the key "dejavusans".
class FontSource {
public:
    FontSource() = default;
    /// Throws Error(FontUnresolvable) if `default_face` is non-empty but
    /// absent from the directory.
    FontSource(const std::filesystem::path& directory, std::string default_face);

    /// Falls back to the default face for unknown families. Throws
    /// Error(FontUnresolvable) when neither is available.
    ResolvedFace resolve(std::string_view family, bool bold) const;

    bool has_family(std::string_view family) const;
    const std::string& default_face() const { return default_face_; }

    static std::string normalize_family(std::string_view family);

private:
    struct Variants {
        std::filesystem::path regular;
        std::filesystem::path bold;
    };
    std::map<std::string, Variants> families_;
    std::string default_face_;
};

}  // namespace adloc
