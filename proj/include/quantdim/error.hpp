#pragma once

#include <stdexcept>
#include <string>

namespace quantdim {

/// Process exit codes used by the command-line tool.
enum class ExitCode : int {
  Ok = 0,
  Config = 1,
  Divergence = 2,
  DepthExhausted = 3,
};

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what, ExitCode code = ExitCode::Config)
      : std::runtime_error(what), code_(code) {}
  ExitCode code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

/// Malformed or inconsistent measure / run specification.
class SpecError : public Error {
 public:
  explicit SpecError(const std::string& what) : Error("spec error: " + what) {}
};

/// Dyadic index arithmetic would overflow 64-bit keys.
class CapacityError : public Error {
 public:
  explicit CapacityError(const std::string& what) : Error("capacity error: " + what) {}
};

/// Building a measure tree failed (e.g. a non-finite cube integral).
class ConstructionError : public Error {
 public:
  explicit ConstructionError(const std::string& what)
      : Error("construction error: " + what, ExitCode::Divergence) {}
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error("domain error: " + what) {}
};

/// Root finding for the critical exponent found no sign change.
class NoCrossingError : public Error {
 public:
  explicit NoCrossingError(const std::string& what)
      : Error("no crossing: " + what, ExitCode::Divergence) {}
};

/// The sandwich bracket for q_r is empty or inverted.
class BracketError : public Error {
 public:
  explicit BracketError(const std::string& what)
      : Error("bracket error: " + what, ExitCode::Divergence) {}
};

/// Refinement ran into the truncation depth of the measure tree.
class DepthLimitError : public Error {
 public:
  DepthLimitError(const std::string& what, double best_max_j)
      : Error("depth limit: " + what, ExitCode::DepthExhausted), best_max_j_(best_max_j) {}
  double best_max_j() const noexcept { return best_max_j_; }

 private:
  double best_max_j_;
};

/// Unknown registry name.
class LookupError : public Error {
 public:
  explicit LookupError(const std::string& what) : Error("lookup error: " + what) {}
};

}  // namespace quantdim
