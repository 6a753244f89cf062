#pragma once

namespace msqkd::tol {

/// Hermiticity, unitarity and normalization checks on freshly built objects.
inline constexpr double kConstruction = 1e-12;

/// Same checks after a chain of matrix products (evolution, isometries, sums of tables).
inline constexpr double kEvolution = 1e-10;

/// Probabilities below this have no post-measurement state.
inline constexpr double kNegligibleProbability = 1e-15;

/// Eigenvalues within this of [0, 1] are clamped before taking logarithms.
inline constexpr double kSpectrumClamp = 1e-10;

/// Target off-diagonal Frobenius norm for the Jacobi eigensolver.
inline constexpr double kJacobiOffDiagonal = 1e-12;

}  // namespace msqkd::tol
