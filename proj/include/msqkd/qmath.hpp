// Dense complex linear algebra and entropy functions for small registers.
//
// Registers are ordered most-significant first: for a product space
// A (x) B the basis index is a * dim(B) + b.

#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace msqkd {

using Complex = std::complex<double>;

/// Row-major dense complex matrix.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols);
  ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries);
  /// Nested initializer: {{a, b}, {c, d}}.
  ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> rows);

  static ComplexMatrix identity(std::size_t n);
  static ComplexMatrix zeros(std::size_t rows, std::size_t cols) { return {rows, cols}; }
  static ComplexMatrix diagonal(std::span<const double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }

  Complex& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Complex& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const Complex> entries() const noexcept { return data_; }

  ComplexMatrix adjoint() const;
  Complex trace() const;
  double frobenius_norm() const;

  /// Column c as a vector.
  std::vector<Complex> column(std::size_t c) const;

  bool is_hermitian(double tol) const;
  bool is_unitary(double tol) const;
  /// M^dagger M = I (isometry, possibly rectangular).
  bool has_orthonormal_columns(double tol) const;

  ComplexMatrix& operator+=(const ComplexMatrix& rhs);
  ComplexMatrix& operator-=(const ComplexMatrix& rhs);
  ComplexMatrix& operator*=(Complex scale);

  friend ComplexMatrix operator+(ComplexMatrix lhs, const ComplexMatrix& rhs) { return lhs += rhs; }
  friend ComplexMatrix operator-(ComplexMatrix lhs, const ComplexMatrix& rhs) { return lhs -= rhs; }
  friend ComplexMatrix operator*(ComplexMatrix lhs, Complex s) { return lhs *= s; }
  friend ComplexMatrix operator*(Complex s, ComplexMatrix rhs) { return rhs *= s; }
  friend ComplexMatrix operator*(const ComplexMatrix& lhs, const ComplexMatrix& rhs);

  friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> data_;
};

/// Largest entrywise modulus of a - b; shapes must match.
double max_abs_difference(const ComplexMatrix& a, const ComplexMatrix& b);

/// Ket with an explicit normalization flag. Branch vectors produced during
/// attack evolution are sub-normalized; their squared norm is a probability.
class StateVector {
 public:
  enum class Norm { kNormalized, kSubNormalized };

  StateVector() = default;
  /// Throws DomainError if `norm` is kNormalized and the squared norm is not 1.
  explicit StateVector(std::vector<Complex> amplitudes, Norm norm = Norm::kNormalized);

  static StateVector basis(std::size_t dim, std::size_t index);

  std::size_t dimension() const noexcept { return amps_.size(); }
  Norm normalization() const noexcept { return norm_; }
  std::span<const Complex> amplitudes() const noexcept { return amps_; }
  const Complex& operator[](std::size_t i) const { return amps_[i]; }

  double norm_squared() const;
  /// |psi><psi|
  ComplexMatrix projector() const;

 private:
  std::vector<Complex> amps_;
  Norm norm_ = Norm::kNormalized;
};

/// <a|b>
Complex inner_product(std::span<const Complex> a, std::span<const Complex> b);
inline Complex inner_product(const StateVector& a, const StateVector& b) {
  return inner_product(a.amplitudes(), b.amplitudes());
}
std::vector<Complex> apply(const ComplexMatrix& m, std::span<const Complex> v);
StateVector tensor_product(const StateVector& a, const StateVector& b);

/// Nonnegative weights, optionally required to sum to one.
class ProbabilityDistribution {
 public:
  ProbabilityDistribution() = default;
  /// Throws DomainError on a weight below -1e-12 or, when `normalized`, a sum off 1 by more than 1e-10.
  explicit ProbabilityDistribution(std::vector<double> weights, bool normalized = true);

  std::size_t size() const noexcept { return weights_.size(); }
  double operator[](std::size_t i) const { return weights_[i]; }
  std::span<const double> weights() const noexcept { return weights_; }
  bool normalized() const noexcept { return normalized_; }
  double total() const;

 private:
  std::vector<double> weights_;
  bool normalized_ = true;
};

// --- Register manipulation -------------------------------------------------

ComplexMatrix tensor_product(const ComplexMatrix& a, const ComplexMatrix& b);

/// Reduced operator over the subsystems listed in `keep` (any order; the
/// result orders them as in `subsystem_dims`).
ComplexMatrix partial_trace(const ComplexMatrix& rho, std::span<const std::size_t> subsystem_dims,
                            std::span<const std::size_t> keep);

/// Bell basis in the order phi+, phi-, psi+, psi-.
const std::array<StateVector, 4>& bell_basis();

/// Tr(P_k rho) for the four Bell projectors on a two-qubit operator.
ProbabilityDistribution bell_measure(const ComplexMatrix& rho);

struct ZMeasurement {
  ProbabilityDistribution probabilities;
  /// Renormalized post-measurement operators; absent for outcomes of probability < 1e-15.
  std::array<std::optional<ComplexMatrix>, 2> post_states;
};

/// Computational-basis measurement of one qubit (index 0 = most significant)
/// of a multi-qubit density operator.
ZMeasurement z_measure(const ComplexMatrix& rho, std::size_t qubit);

// --- Spectra and entropies -------------------------------------------------

/// Closed-form eigenvalues of a 2x2 Hermitian matrix, descending.
std::pair<double, double> eig2_hermitian(const ComplexMatrix& m);

/// Eigenvalues of a Hermitian matrix by cyclic Jacobi rotations, ascending.
std::vector<double> hermitian_eigenvalues(const ComplexMatrix& m);

/// -sum p log2 p with 0 log 0 = 0.
double shannon_entropy(std::span<const double> p);
inline double shannon_entropy(const ProbabilityDistribution& p) { return shannon_entropy(p.weights()); }
inline double shannon_entropy(std::initializer_list<double> p) {
  return shannon_entropy(std::span<const double>(p.begin(), p.size()));
}

/// h(x) = H(x, 1 - x).
double binary_entropy(double x);

/// Shannon entropy of the spectrum, in bits.
double von_neumann_entropy(const ComplexMatrix& rho);

}  // namespace msqkd
