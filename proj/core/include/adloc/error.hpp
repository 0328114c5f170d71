#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace adloc {

/// Closed set of failure kinds shared by the pipeline, the backends and the
/// HTTP API. The string form (see to_string) is the wire-level `code`.
enum class ErrorCode {
    InvalidArgument,
    DegenerateBox,
    DegenerateQuad,
    DimensionMismatch,
    BackendUnavailable,
    MalformedResponse,
    UnsupportedPair,
    InconsistentStyleReport,
    FontUnresolvable,
    InvalidTransition,
    InvalidCategory,
    RejectWithoutNotes,
    UndecodableImage,
    EmptyReference,
    NotFound,
    Conflict,
    StoreUnreadable,
    PortInUse,
    IoError,
    Unauthorized,
};

std::string_view to_string(ErrorCode code);
std::optional<ErrorCode> error_code_from_string(std::string_view s);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Raised by live adapters once the retry budget is exhausted.
class BackendUnavailableError : public Error {
public:
    BackendUnavailableError(const std::string& message, int attempts)
        : Error(ErrorCode::BackendUnavailable, message), attempts_(attempts) {}

    int attempts() const noexcept { return attempts_; }

private:
    int attempts_;
};

}  // namespace adloc
