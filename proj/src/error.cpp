#include "poskit/error.hpp"

namespace poskit {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::TargetNotFound: return "TargetNotFound";
    case ErrorCode::PoolTooSmall: return "PoolTooSmall";
    case ErrorCode::IncompatibleVariant: return "IncompatibleVariant";
    case ErrorCode::SourceExhausted: return "SourceExhausted";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::ValueNotFound: return "ValueNotFound";
    case ErrorCode::DivisionByZero: return "DivisionByZero";
    case ErrorCode::UnsupportedNode: return "UnsupportedNode";
    case ErrorCode::GenerationExhausted: return "GenerationExhausted";
    case ErrorCode::BackendUnavailable: return "BackendUnavailable";
    case ErrorCode::MalformedResponse: return "MalformedResponse";
    case ErrorCode::EmptySubset: return "EmptySubset";
    case ErrorCode::MixedConditions: return "MixedConditions";
    case ErrorCode::MissingDirection: return "MissingDirection";
    case ErrorCode::SpanMismatch: return "SpanMismatch";
    case ErrorCode::Config: return "Config";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Parse: return "Parse";
  }
  return "Unknown";
}

}  // namespace poskit
