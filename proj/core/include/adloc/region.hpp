#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "adloc/geometry.hpp"

namespace adloc {

/// The closed annotation taxonomy. Only Translatable regions are erased,
/// translated and re-rendered.
enum class Category { Brand, Translatable, Certification };

std::string_view to_string(Category c);
/// Throws Error(InvalidCategory) for anything outside the taxonomy.
Category category_from_string(std::string_view s);

struct TextRegion {
    std::string id;
    geometry::Quad quad;
    Category category = Category::Translatable;
    std::string text;
    double confidence = 0.0;
    std::string locale;

    friend bool operator==(const TextRegion&, const TextRegion&) = default;
};

/// Checks the region invariants: non-degenerate quad, confidence in [0,1].
void validate(const TextRegion& region);

void to_json(nlohmann::json& j, const TextRegion& r);
void from_json(const nlohmann::json& j, TextRegion& r);

struct LocalePair {
    std::string source;
    std::string target;

    friend bool operator==(const LocalePair&, const LocalePair&) = default;
};

/// Locale pairs the system is configured to localize between.
class LocaleTable {
public:
    /// es-US<->en-US, en-US->fr-CA, it-IT->en-US, fr-CA->en-US, sv-SE->en-US, nl-NL->en-US.
    static LocaleTable defaults();

    LocaleTable() = default;
    explicit LocaleTable(std::vector<LocalePair> pairs) : pairs_(std::move(pairs)) {}

    bool supports(std::string_view src, std::string_view tgt) const;
    /// Throws Error(UnsupportedPair).
    void require(std::string_view src, std::string_view tgt) const;
    void add(LocalePair pair);
    const std::vector<LocalePair>& pairs() const { return pairs_; }

private:
    std::vector<LocalePair> pairs_;
};

/// Number of Unicode scalar values in a UTF-8 string (invalid bytes count as one each).
std::size_t utf8_length(std::string_view s);
std::u32string utf8_decode(std::string_view s);
std::string utf8_encode(std::u32string_view s);

}  // namespace adloc
