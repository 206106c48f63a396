#include "lab/error.hpp"

namespace lab {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::empty_domain: return "empty-domain";
    case ErrorCode::regime: return "regime";
    case ErrorCode::schema: return "schema";
    case ErrorCode::solver: return "solver";
    case ErrorCode::size_limit: return "size-limit";
  }
  return "unknown";
}

}  // namespace lab
