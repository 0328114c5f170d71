#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "adloc/error.hpp"
#include "adloc/reimposition.hpp"

namespace adloc::reimposition {

void validate(const SizingParams& params) {
    if (!(params.step > 0.0)) throw Error(ErrorCode::InvalidArgument, "sizing step must be > 0");
    if (!(params.floor_ratio > 0.0 && params.floor_ratio < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "floor ratio must lie in (0, 1)");
    }
}

FontSizeEstimate estimate_font_size(geometry::BoxDims dims, std::size_t original_chars,
                                    std::size_t translated_chars, const SizingParams& params) {
    validate(params);
    if (original_chars == 0) throw Error(ErrorCode::InvalidArgument, "original text is empty");
    if (!(dims.w > 0.0) || !(dims.h > 0.0)) throw Error(ErrorCode::DegenerateBox, "box has zero width or height");

    const double w = dims.w;
    const double h = dims.h;
    const double original_size = std::min(w, h);
    double size = original_size;
    const double min_size = params.floor_ratio * original_size;
    const auto n_orig = static_cast<double>(original_chars);
    const auto n_trans = static_cast<double>(translated_chars);

    double capacity = w * h / (size * size);
    bool shrank = false;
    if (n_trans > n_orig) {
        shrank = true;
        while (capacity < n_trans && size > min_size) {
            size = size - params.step;
            capacity = w * h / (size * size);
        }
    }
    return {size, shrank && capacity < n_trans};
}

FontSizeEstimate estimate_font_size(geometry::Point p1, geometry::Point p2, std::string_view original_text,
                                    std::string_view translated_text, const SizingParams& params) {
    const auto dims = geometry::box_dims(p1, p2);
    return estimate_font_size(dims, utf8_length(original_text), utf8_length(translated_text), params);
}

void validate(const TypographySpec& spec) {
    if (!(spec.size > 0.0)) throw Error(ErrorCode::InvalidArgument, "font size must be > 0");
    for (int c : {spec.color.r, spec.color.g, spec.color.b}) {
        if (c < 0 || c > 255) throw Error(ErrorCode::InvalidArgument, "colour component outside 0-255");
    }
}

void to_json(nlohmann::json& j, const TypographySpec& t) {
    j = nlohmann::json{{"family", t.family},
                       {"size", t.size},
                       {"color", {t.color.r, t.color.g, t.color.b}},
                       {"hex", backends::to_hex(t.color)},
                       {"bold", t.bold},
                       {"italic", t.italic},
                       {"underline", t.underline},
                       {"rotation", t.rotation}};
}

void from_json(const nlohmann::json& j, TypographySpec& t) {
    t.family = j.at("family").get<std::string>();
    t.size = j.at("size").get<double>();
    const auto& c = j.at("color");
    t.color = backends::Rgb{c.at(0).get<int>(), c.at(1).get<int>(), c.at(2).get<int>()};
    t.bold = j.value("bold", false);
    t.italic = j.value("italic", false);
    t.underline = j.value("underline", false);
    t.rotation = j.value("rotation", 0.0);
}

void to_json(nlohmann::json& j, const TranslationUnit& u) {
    j = nlohmann::json{{"region", u.region},
                       {"source_text", u.source_text},
                       {"target_text", u.target_text},
                       {"typography", u.typography},
                       {"overflow", u.overflow}};
}

void from_json(const nlohmann::json& j, TranslationUnit& u) {
    u.region = j.at("region").get<TextRegion>();
    u.source_text = j.at("source_text").get<std::string>();
    u.target_text = j.at("target_text").get<std::string>();
    u.typography = j.at("typography").get<TypographySpec>();
    u.overflow = j.value("overflow", false);
}

}  // namespace adloc::reimposition
