#include "syntonize/error.hpp"

namespace syntonize {

std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidRatio: return "InvalidRatio";
    case ErrorCode::InsufficientEdges: return "InsufficientEdges";
    case ErrorCode::DisconnectedGraph: return "DisconnectedGraph";
    case ErrorCode::NotAnEdge: return "NotAnEdge";
    case ErrorCode::WouldDisconnect: return "WouldDisconnect";
    case ErrorCode::AlreadyConnected: return "AlreadyConnected";
    case ErrorCode::SelfLoop: return "SelfLoop";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::TooManyElements: return "TooManyElements";
    case ErrorCode::EmptyArray: return "EmptyArray";
    case ErrorCode::Parse: return "Parse";
    case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code)
{
}

} // namespace syntonize
