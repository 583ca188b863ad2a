#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace polycert {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Class ids are 0-based. A classifier that declines to answer returns kAbstain.
using Label = int;
inline constexpr Label kAbstain = -1;

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Precondition violated by a caller-supplied argument.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. `offset` is the byte position where parsing stopped.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::uint64_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

/// Enumeration or problem size beyond the configured budget.
class SizeError : public Error {
 public:
  using Error::Error;
};

}  // namespace polycert
