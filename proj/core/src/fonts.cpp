#include "adloc/fonts.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "adloc/error.hpp"

namespace adloc {
namespace {

bool is_font_file(const std::filesystem::path& p) {
    auto ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".ttf" || ext == ".otf" || ext == ".ttc";
}

struct StemInfo {
    std::string family;
    bool bold = false;
    bool slanted = false;
};

StemInfo parse_stem(const std::string& stem) {
    StemInfo info;
    std::string style;
    const auto dash = stem.rfind('-');
    std::string family = stem;
    if (dash != std::string::npos) {
        style = FontSource::normalize_family(stem.substr(dash + 1));
        static constexpr std::array<std::string_view, 10> kStyles{
            "regular", "book", "bold", "italic", "oblique", "bolditalic", "boldoblique", "medium", "light", "black"};
        if (std::find(kStyles.begin(), kStyles.end(), style) != kStyles.end()) {
            family = stem.substr(0, dash);
        } else {
            style.clear();
        }
    }
    info.family = FontSource::normalize_family(family);
    info.bold = style.find("bold") != std::string::npos || style == "black";
    info.slanted = style.find("italic") != std::string::npos || style.find("oblique") != std::string::npos;
    return info;
}

}  // namespace

std::string FontSource::normalize_family(std::string_view family) {
    std::string out;
    for (unsigned char c : family) {
        if (std::isalnum(c)) out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

FontSource::FontSource(const std::filesystem::path& directory, std::string default_face)
    : default_face_(std::move(default_face)) {
    std::error_code ec;
    if (std::filesystem::is_directory(directory, ec)) {
        std::vector<std::filesystem::path> files;
        for (const auto& entry : std::filesystem::recursive_directory_iterator(directory, ec)) {
            if (entry.is_regular_file() && is_font_file(entry.path())) files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            const auto info = parse_stem(f.stem().string());
            if (info.slanted || info.family.empty()) continue;
            auto& v = families_[info.family];
            auto& slot = info.bold ? v.bold : v.regular;
            if (slot.empty()) slot = f;
        }
    }
    if (!default_face_.empty() && !has_family(default_face_)) {
        throw Error(ErrorCode::FontUnresolvable,
                    "default face '" + default_face_ + "' not found in " + directory.string());
    }
}

bool FontSource::has_family(std::string_view family) const {
    return families_.count(normalize_family(family)) > 0;
}

ResolvedFace FontSource::resolve(std::string_view family, bool bold) const {
    auto it = families_.find(normalize_family(family));
    if (it == families_.end() && !default_face_.empty()) it = families_.find(normalize_family(default_face_));
    if (it == families_.end()) {
        throw Error(ErrorCode::FontUnresolvable, "no face for '" + std::string(family) + "' and no default face");
    }
    const Variants& v = it->second;
    if (bold && !v.bold.empty()) return {v.bold, true};
    if (!v.regular.empty()) return {v.regular, false};
    return {v.bold, true};
}

}  // namespace adloc
