#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace syntonize {

enum class ErrorCode {
    InvalidArgument,
    InvalidRatio,
    InsufficientEdges,
    DisconnectedGraph,
    NotAnEdge,
    WouldDisconnect,
    AlreadyConnected,
    SelfLoop,
    DimensionMismatch,
    TooManyElements,
    EmptyArray,
    Parse,
    Io,
};

std::string_view to_string(ErrorCode code);

// All library failures are reported through this type; code() carries the
// machine-readable category.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace syntonize
