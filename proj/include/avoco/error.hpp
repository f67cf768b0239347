// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace avoco {

/// Base for every error raised by the library. The category decides the CLI
/// exit code (validation = 1, numeric = 2, io = 3).
class Error : public std::runtime_error {
 public:
  enum class Category { kValidation, kNumeric, kIo };

  Error(Category category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  Category category() const noexcept { return category_; }

 private:
  Category category_;
};

/// Dimension or length mismatch between operands.
class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& what) : Error(Category::kValidation, "shape error: " + what) {}
};

/// A hyperparameter or argument outside its documented range.
class ParameterError : public Error {
 public:
  explicit ParameterError(const std::string& what)
      : Error(Category::kValidation, "parameter error: " + what) {}
};

/// Input outside the mathematical domain of a formula.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(Category::kValidation, "domain error: " + what) {}
};

/// Malformed token sequence (missing or repeated placeholder, ...).
class StructureError : public Error {
 public:
  explicit StructureError(const std::string& what)
      : Error(Category::kValidation, "structure error: " + what) {}
};

/// API misuse, e.g. a backward pass fed a cache from another network.
class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(Category::kValidation, "usage error: " + what) {}
};

/// NaN/Inf encountered where finite values are required.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(Category::kNumeric, "numeric error: " + what) {}
};

/// Filesystem failure.
class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(Category::kIo, "io error: " + what) {}
};

/// Corrupt or truncated binary/CSV input. Carries the byte offset (binary) or
/// line number (text) where parsing stopped.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t position)
      : Error(Category::kIo, "format error at " + std::to_string(position) + ": " + what), position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// File carries a recognised magic but an unsupported version, or a
/// checkpoint whose architecture does not match the requested one.
class VersionError : public Error {
 public:
  explicit VersionError(const std::string& what) : Error(Category::kIo, "version error: " + what) {}
};

}  // namespace avoco
