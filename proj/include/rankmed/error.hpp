#pragma once

#include <stdexcept>
#include <string>

namespace rankmed {

/// Base of every error raised for invalid input. The CLI maps these to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shape mismatch, empty input, or a parameter outside its domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

enum class IngestErrc {
  file_not_found,
  empty_file,
  missing_label_column,
  unknown_column,
  duplicate_column,
  ragged_row,
  missing_value,
  non_numeric_cell,
  too_few_instances,
  no_features,
};

inline const char* to_string(IngestErrc code) {
  switch (code) {
    case IngestErrc::file_not_found: return "file_not_found";
    case IngestErrc::empty_file: return "empty_file";
    case IngestErrc::missing_label_column: return "missing_label_column";
    case IngestErrc::unknown_column: return "unknown_column";
    case IngestErrc::duplicate_column: return "duplicate_column";
    case IngestErrc::ragged_row: return "ragged_row";
    case IngestErrc::missing_value: return "missing_value";
    case IngestErrc::non_numeric_cell: return "non_numeric_cell";
    case IngestErrc::too_few_instances: return "too_few_instances";
    case IngestErrc::no_features: return "no_features";
  }
  return "unknown";
}

class IngestError : public Error {
 public:
  IngestError(IngestErrc code, const std::string& what)
      : Error(std::string(to_string(code)) + ": " + what), code_(code) {}

  IngestErrc code() const noexcept { return code_; }

 private:
  IngestErrc code_;
};

/// A feature whose (class-balanced) deviation is zero cannot be standardized.
class ZeroDeviationError : public DomainError {
 public:
  explicit ZeroDeviationError(std::string feature)
      : DomainError("feature '" + feature + "' has zero deviation; drop it before standardizing"),
        feature_(std::move(feature)) {}

  const std::string& feature() const noexcept { return feature_; }

 private:
  std::string feature_;
};

}  // namespace rankmed
