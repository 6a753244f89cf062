#pragma once

#include <random>

#include "msqkd/attacks.hpp"
#include "msqkd/qmath.hpp"
#include "msqkd/rng.hpp"

namespace testing_support {

inline msqkd::ComplexMatrix random_matrix(std::size_t rows, std::size_t cols, msqkd::CounterRng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  msqkd::ComplexMatrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = {g(rng), g(rng)};
  }
  return m;
}

/// G G^dagger / tr, full rank with probability one.
inline msqkd::ComplexMatrix random_density(std::size_t n, msqkd::CounterRng& rng) {
  const auto g = random_matrix(n, n, rng);
  auto rho = g * g.adjoint();
  return rho * (1.0 / rho.trace().real());
}

inline msqkd::ComplexMatrix random_hermitian(std::size_t n, msqkd::CounterRng& rng) {
  const auto g = random_matrix(n, n, rng);
  return (g + g.adjoint()) * 0.5;
}

}  // namespace testing_support
