#include "distill/errors.hpp"

namespace distill {

const char* format_error_name(FormatErrorKind kind) {
  switch (kind) {
    case FormatErrorKind::kTruncated:
      return "Truncated";
    case FormatErrorKind::kTrailingBytes:
      return "TrailingBytes";
    case FormatErrorKind::kBadMagic:
      return "BadMagic";
    case FormatErrorKind::kBadVersion:
      return "BadVersion";
    case FormatErrorKind::kCrcMismatch:
      return "CrcMismatch";
    case FormatErrorKind::kLabelOutOfRange:
      return "LabelOutOfRange";
    case FormatErrorKind::kNonFiniteValue:
      return "NonFiniteValue";
  }
  return "Unknown";
}

FormatError::FormatError(FormatErrorKind kind, std::uint64_t offset, const std::string& detail)
    : DataError(std::string(format_error_name(kind)) + " at byte " + std::to_string(offset) +
                ": " + detail),
      kind_(kind),
      offset_(offset) {}

}  // namespace distill
