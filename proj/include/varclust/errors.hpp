#pragma once

#include <stdexcept>
#include <string>

namespace varclust {

/// Bad input: dimension mismatch, constraint violation, malformed data.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// A numerical precondition failed (indefinite operator, singular Gram, ...).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace varclust
