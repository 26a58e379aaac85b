#pragma once

#include <stdexcept>
#include <string>

namespace hdbn {

// Base of every error thrown by the library. Callers that only want a
// one-line diagnostic can catch this and print what().
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shapes that do not chain (joint counts, channel widths, class counts).
class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what) : Error("dimension error: " + what) {}
};

// An operation was handed a sequence tagged with the wrong modality.
class ModalityError : public Error {
 public:
  explicit ModalityError(const std::string& what) : Error("modality error: " + what) {}
};

// Malformed files: bad magic, truncated payloads, ragged CSV rows.
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what) : Error("format error: " + what) {}
};

class ArgumentError : public Error {
 public:
  explicit ArgumentError(const std::string& what) : Error("argument error: " + what) {}
};

// Score matrices / label sets whose sample ids do not match.
class AlignmentError : public Error {
 public:
  explicit AlignmentError(const std::string& what) : Error("alignment error: " + what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("config error: " + what) {}
};

// A pluggable component (e.g. a pose lifter) broke its output contract.
class ContractError : public Error {
 public:
  explicit ContractError(const std::string& what) : Error("contract violation: " + what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error("io error: " + what) {}
};

}  // namespace hdbn
