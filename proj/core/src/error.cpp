#include "adloc/error.hpp"

#include <array>
#include <utility>

namespace adloc {
namespace {

constexpr std::array<std::pair<ErrorCode, std::string_view>, 20> kNames{{
    {ErrorCode::InvalidArgument, "invalid-argument"},
    {ErrorCode::DegenerateBox, "degenerate-box"},
    {ErrorCode::DegenerateQuad, "degenerate-quad"},
    {ErrorCode::DimensionMismatch, "dimension-mismatch"},
    {ErrorCode::BackendUnavailable, "backend-unavailable"},
    {ErrorCode::MalformedResponse, "malformed-response"},
    {ErrorCode::UnsupportedPair, "unsupported-pair"},
    {ErrorCode::InconsistentStyleReport, "inconsistent-style-report"},
    {ErrorCode::FontUnresolvable, "font-unresolvable"},
    {ErrorCode::InvalidTransition, "invalid-transition"},
    {ErrorCode::InvalidCategory, "invalid-category"},
    {ErrorCode::RejectWithoutNotes, "reject-without-notes"},
    {ErrorCode::UndecodableImage, "undecodable-image"},
    {ErrorCode::EmptyReference, "empty-reference"},
    {ErrorCode::NotFound, "not-found"},
    {ErrorCode::Conflict, "conflict"},
    {ErrorCode::StoreUnreadable, "store-unreadable"},
    {ErrorCode::PortInUse, "port-in-use"},
    {ErrorCode::IoError, "io-error"},
    {ErrorCode::Unauthorized, "unauthorized"},
}};

}  // namespace

std::string_view to_string(ErrorCode code) {
    for (const auto& [c, name] : kNames) {
        if (c == code) return name;
    }
    return "unknown";
}

std::optional<ErrorCode> error_code_from_string(std::string_view s) {
    for (const auto& [c, name] : kNames) {
        if (name == s) return c;
    }
    return std::nullopt;
}

}  // namespace adloc
