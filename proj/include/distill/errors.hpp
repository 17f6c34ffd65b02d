#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace distill {

// Precondition violated by a numeric argument (dimension mismatch, zero norm,
// size out of range, non-finite value).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Invalid or inconsistent configuration, detected before any work starts.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input data that cannot be used (missing file, malformed text, bad labels).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Evaluation cannot be carried out on the given selection or test set.
class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class FormatErrorKind {
  kTruncated,
  kTrailingBytes,
  kBadMagic,
  kBadVersion,
  kCrcMismatch,
  kLabelOutOfRange,
  kNonFiniteValue,
};

const char* format_error_name(FormatErrorKind kind);

// Binary embedding file rejected by the reader. Carries the byte offset at
// which the problem was detected.
class FormatError : public DataError {
 public:
  FormatError(FormatErrorKind kind, std::uint64_t offset, const std::string& detail);

  FormatErrorKind kind() const { return kind_; }
  std::uint64_t offset() const { return offset_; }

 private:
  FormatErrorKind kind_;
  std::uint64_t offset_;
};

}  // namespace distill
