#include "egopriv/error.hpp"

namespace egopriv {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::DimensionMismatch: return "dimension_mismatch";
    case ErrorCode::MissingEmbedding: return "missing_embedding";
    case ErrorCode::MalformedFile: return "malformed_file";
    case ErrorCode::InvalidLabel: return "invalid_label";
    case ErrorCode::EmptyInput: return "empty_input";
    case ErrorCode::MissingField: return "missing_field";
    case ErrorCode::NumericError: return "numeric_error";
    case ErrorCode::Io: return "io";
  }
  return "unknown";
}

}  // namespace egopriv
