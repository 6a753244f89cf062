#pragma once

#include <stdexcept>
#include <string>

namespace msqkd {

/// Shapes that do not fit together (matrix products, registers, attack dimensions).
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Inputs outside the physical or admissible domain: non-Hermitian states,
/// inadmissible noise, non-unitary attacks, brackets without a sign change.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A simulation produced no key-generating (case 2) rounds.
class NoKeyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace msqkd
