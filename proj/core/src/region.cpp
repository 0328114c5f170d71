#include "adloc/region.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "adloc/error.hpp"

namespace adloc {

std::string_view to_string(Category c) {
    switch (c) {
        case Category::Brand: return "Brand";
        case Category::Translatable: return "Translatable";
        case Category::Certification: return "Certification";
    }
    return "Translatable";
}

Category category_from_string(std::string_view s) {
    if (s == "Brand") return Category::Brand;
    if (s == "Translatable") return Category::Translatable;
    if (s == "Certification") return Category::Certification;
    throw Error(ErrorCode::InvalidCategory, "unknown category '" + std::string(s) + "'");
}

void validate(const TextRegion& region) {
    if (geometry::is_degenerate(region.quad)) {
        throw Error(ErrorCode::DegenerateQuad, "region '" + region.id + "' has a degenerate quad");
    }
    if (!(region.confidence >= 0.0 && region.confidence <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "region '" + region.id + "' confidence outside [0,1]");
    }
}

void to_json(nlohmann::json& j, const TextRegion& r) {
    j = nlohmann::json{{"id", r.id},
                       {"quad", r.quad},
                       {"category", to_string(r.category)},
                       {"text", r.text},
                       {"confidence", r.confidence},
                       {"locale", r.locale}};
}

void from_json(const nlohmann::json& j, TextRegion& r) {
    if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "region must be an object");
    r.id = j.value("id", std::string{});
    if (!j.contains("quad")) throw Error(ErrorCode::InvalidArgument, "region is missing 'quad'");
    r.quad = j.at("quad").get<geometry::Quad>();
    if (j.contains("category")) {
        if (!j.at("category").is_string()) {
            throw Error(ErrorCode::InvalidCategory, "category must be a string");
        }
        r.category = category_from_string(j.at("category").get<std::string>());
    } else {
        r.category = Category::Translatable;
    }
    r.text = j.value("text", std::string{});
    r.confidence = j.value("confidence", 0.0);
    r.locale = j.value("locale", std::string{});
}

LocaleTable LocaleTable::defaults() {
    return LocaleTable({{"es-US", "en-US"},
                        {"en-US", "es-US"},
                        {"en-US", "fr-CA"},
                        {"it-IT", "en-US"},
                        {"fr-CA", "en-US"},
                        {"sv-SE", "en-US"},
                        {"nl-NL", "en-US"}});
}

bool LocaleTable::supports(std::string_view src, std::string_view tgt) const {
    return std::any_of(pairs_.begin(), pairs_.end(),
                       [&](const LocalePair& p) { return p.source == src && p.target == tgt; });
}

void LocaleTable::require(std::string_view src, std::string_view tgt) const {
    if (!supports(src, tgt)) {
        throw Error(ErrorCode::UnsupportedPair,
                    "locale pair " + std::string(src) + " -> " + std::string(tgt) + " is not supported");
    }
}

void LocaleTable::add(LocalePair pair) {
    if (!supports(pair.source, pair.target)) pairs_.push_back(std::move(pair));
}

std::u32string utf8_decode(std::string_view s) {
    std::u32string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        const auto b0 = static_cast<unsigned char>(s[i]);
        int len = b0 < 0x80 ? 1 : (b0 >> 5) == 0x6 ? 2 : (b0 >> 4) == 0xE ? 3 : (b0 >> 3) == 0x1E ? 4 : 0;
        if (len == 0 || i + len > s.size()) {
            out.push_back(0xFFFD);
            ++i;
            continue;
        }
        char32_t cp = len == 1 ? b0 : len == 2 ? (b0 & 0x1F) : len == 3 ? (b0 & 0x0F) : (b0 & 0x07);
        bool ok = true;
        for (int k = 1; k < len; ++k) {
            const auto b = static_cast<unsigned char>(s[i + k]);
            if ((b & 0xC0) != 0x80) {
                ok = false;
                break;
            }
            cp = (cp << 6) | (b & 0x3F);
        }
        if (!ok) {
            out.push_back(0xFFFD);
            ++i;
            continue;
        }
        out.push_back(cp);
        i += len;
    }
    return out;
}

std::size_t utf8_length(std::string_view s) { return utf8_decode(s).size(); }

std::string utf8_encode(std::u32string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char32_t cp : s) {
        if (cp < 0x80) {
            out.push_back(static_cast<char>(cp));
        } else if (cp < 0x800) {
            out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else if (cp < 0x10000) {
            out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else {
            out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        }
    }
    return out;
}

}  // namespace adloc
