#pragma once

#include <stdexcept>
#include <string>

namespace tim {

/// Inconsistent matrix dimensions between operands.
class DimensionError : public std::invalid_argument {
 public:
  explicit DimensionError(const std::string& what) : std::invalid_argument(what) {}
};

/// A Gram matrix U^T U or V^T V lost positive definiteness (smallest pivot
/// below 1e-12 of the largest), so the factorization is rank-deficient.
class RankDeficiencyError : public std::runtime_error {
 public:
  explicit RankDeficiencyError(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid argument values (counts out of range, malformed configs).
class ArgumentError : public std::invalid_argument {
 public:
  explicit ArgumentError(const std::string& what) : std::invalid_argument(what) {}
};

/// Malformed input file.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace tim
