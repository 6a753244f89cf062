#include "msqkd/qmath.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "msqkd/errors.hpp"
#include "msqkd/tolerances.hpp"

namespace msqkd {

namespace {

void require_same_shape(const ComplexMatrix& a, const ComplexMatrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(what) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()));
  }
}

void require_density_like(const ComplexMatrix& rho, const char* what) {
  if (!rho.is_square()) throw DimensionError(std::string(what) + ": operator is not square");
  if (!rho.is_hermitian(tol::kEvolution)) throw DomainError(std::string(what) + ": operator is not Hermitian");
  if (std::abs(rho.trace() - Complex(1.0)) > tol::kEvolution) {
    throw DomainError(std::string(what) + ": operator trace is not 1");
  }
}

double off_diagonal_norm(const ComplexMatrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (i != j) s += std::norm(a(i, j));
    }
  }
  return std::sqrt(s);
}

}  // namespace

// --- ComplexMatrix ---------------------------------------------------------

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols) {}

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (data_.size() != rows_ * cols_) {
    throw DimensionError("ComplexMatrix: " + std::to_string(data_.size()) + " entries for a " +
                         std::to_string(rows_) + "x" + std::to_string(cols_) + " matrix");
  }
}

ComplexMatrix::ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> rows)
    : rows_(rows.size()), cols_(rows.size() == 0 ? 0 : rows.begin()->size()) {
  data_.reserve(rows_ * cols_);
  for (const auto& row : rows) {
    if (row.size() != cols_) throw DimensionError("ComplexMatrix: ragged initializer");
    data_.insert(data_.end(), row.begin(), row.end());
  }
}

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const double> values) {
  ComplexMatrix m(values.size(), values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
  return m;
}

ComplexMatrix ComplexMatrix::adjoint() const {
  ComplexMatrix out(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) out(c, r) = std::conj((*this)(r, c));
  }
  return out;
}

Complex ComplexMatrix::trace() const {
  if (!is_square()) throw DimensionError("trace: matrix is not square");
  Complex t = 0.0;
  for (std::size_t i = 0; i < rows_; ++i) t += (*this)(i, i);
  return t;
}

double ComplexMatrix::frobenius_norm() const {
  double s = 0.0;
  for (const auto& z : data_) s += std::norm(z);
  return std::sqrt(s);
}

std::vector<Complex> ComplexMatrix::column(std::size_t c) const {
  std::vector<Complex> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

bool ComplexMatrix::is_hermitian(double tol) const {
  if (!is_square()) return false;
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = i; j < cols_; ++j) {
      if (std::abs((*this)(i, j) - std::conj((*this)(j, i))) > tol) return false;
    }
  }
  return true;
}

bool ComplexMatrix::is_unitary(double tol) const {
  return is_square() && has_orthonormal_columns(tol);
}

bool ComplexMatrix::has_orthonormal_columns(double tol) const {
  if (rows_ < cols_) return false;
  return max_abs_difference(adjoint() * (*this), identity(cols_)) <= tol;
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& rhs) {
  require_same_shape(*this, rhs, "operator+");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += rhs.data_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& rhs) {
  require_same_shape(*this, rhs, "operator-");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= rhs.data_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(Complex scale) {
  for (auto& z : data_) z *= scale;
  return *this;
}

ComplexMatrix operator*(const ComplexMatrix& lhs, const ComplexMatrix& rhs) {
  if (lhs.cols() != rhs.rows()) {
    throw DimensionError("matrix product: inner dimensions " + std::to_string(lhs.cols()) + " and " +
                         std::to_string(rhs.rows()));
  }
  ComplexMatrix out(lhs.rows(), rhs.cols());
  for (std::size_t i = 0; i < lhs.rows(); ++i) {
    for (std::size_t k = 0; k < lhs.cols(); ++k) {
      const Complex a = lhs(i, k);
      if (a == Complex(0.0)) continue;
      for (std::size_t j = 0; j < rhs.cols(); ++j) out(i, j) += a * rhs(k, j);
    }
  }
  return out;
}

double max_abs_difference(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_shape(a, b, "max_abs_difference");
  double m = 0.0;
  for (std::size_t i = 0; i < a.entries().size(); ++i) {
    m = std::max(m, std::abs(a.entries()[i] - b.entries()[i]));
  }
  return m;
}

// --- StateVector -----------------------------------------------------------

StateVector::StateVector(std::vector<Complex> amplitudes, Norm norm) : amps_(std::move(amplitudes)), norm_(norm) {
  if (norm_ == Norm::kNormalized && std::abs(norm_squared() - 1.0) > tol::kConstruction) {
    throw DomainError("StateVector: squared norm " + std::to_string(norm_squared()) + " is not 1");
  }
}

StateVector StateVector::basis(std::size_t dim, std::size_t index) {
  if (index >= dim) throw DimensionError("StateVector::basis: index out of range");
  std::vector<Complex> amps(dim);
  amps[index] = 1.0;
  return StateVector(std::move(amps));
}

double StateVector::norm_squared() const {
  double s = 0.0;
  for (const auto& z : amps_) s += std::norm(z);
  return s;
}

ComplexMatrix StateVector::projector() const {
  const std::size_t n = amps_.size();
  ComplexMatrix p(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) p(i, j) = amps_[i] * std::conj(amps_[j]);
  }
  return p;
}

Complex inner_product(std::span<const Complex> a, std::span<const Complex> b) {
  if (a.size() != b.size()) throw DimensionError("inner_product: dimension mismatch");
  Complex s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

std::vector<Complex> apply(const ComplexMatrix& m, std::span<const Complex> v) {
  if (m.cols() != v.size()) throw DimensionError("apply: matrix/vector dimension mismatch");
  std::vector<Complex> out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    Complex s = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) s += m(i, j) * v[j];
    out[i] = s;
  }
  return out;
}

StateVector tensor_product(const StateVector& a, const StateVector& b) {
  std::vector<Complex> amps(a.dimension() * b.dimension());
  for (std::size_t i = 0; i < a.dimension(); ++i) {
    for (std::size_t j = 0; j < b.dimension(); ++j) amps[i * b.dimension() + j] = a[i] * b[j];
  }
  const bool both = a.normalization() == StateVector::Norm::kNormalized &&
                    b.normalization() == StateVector::Norm::kNormalized;
  return StateVector(std::move(amps), both ? StateVector::Norm::kNormalized : StateVector::Norm::kSubNormalized);
}

// --- ProbabilityDistribution -----------------------------------------------

ProbabilityDistribution::ProbabilityDistribution(std::vector<double> weights, bool normalized)
    : weights_(std::move(weights)), normalized_(normalized) {
  for (double& w : weights_) {
    if (!(w >= -tol::kConstruction)) throw DomainError("ProbabilityDistribution: negative or NaN weight");
    w = std::max(w, 0.0);
  }
  if (normalized_ && std::abs(total() - 1.0) > tol::kEvolution) {
    throw DomainError("ProbabilityDistribution: weights sum to " + std::to_string(total()));
  }
}

double ProbabilityDistribution::total() const { return std::accumulate(weights_.begin(), weights_.end(), 0.0); }

// --- Register manipulation -------------------------------------------------

ComplexMatrix tensor_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const Complex s = a(i, j);
      if (s == Complex(0.0)) continue;
      for (std::size_t k = 0; k < b.rows(); ++k) {
        for (std::size_t l = 0; l < b.cols(); ++l) out(i * b.rows() + k, j * b.cols() + l) = s * b(k, l);
      }
    }
  }
  return out;
}

ComplexMatrix partial_trace(const ComplexMatrix& rho, std::span<const std::size_t> subsystem_dims,
                            std::span<const std::size_t> keep) {
  if (!rho.is_square()) throw DimensionError("partial_trace: operator is not square");
  const std::size_t n = subsystem_dims.size();
  std::size_t total = 1;
  for (std::size_t d : subsystem_dims) {
    if (d == 0) throw DimensionError("partial_trace: zero subsystem dimension");
    total *= d;
  }
  if (total != rho.rows()) {
    throw DimensionError("partial_trace: subsystem dimensions multiply to " + std::to_string(total) +
                         ", operator has dimension " + std::to_string(rho.rows()));
  }
  std::vector<bool> kept(n, false);
  for (std::size_t k : keep) {
    if (k >= n) throw DimensionError("partial_trace: kept subsystem index out of range");
    if (kept[k]) throw DimensionError("partial_trace: duplicate kept subsystem");
    kept[k] = true;
  }

  // strides of the full register
  std::vector<std::size_t> stride(n, 1);
  for (std::size_t s = n; s-- > 1;) stride[s - 1] = stride[s] * subsystem_dims[s];

  std::size_t kept_dim = 1;
  std::size_t traced_dim = 1;
  std::vector<std::size_t> kept_idx;
  std::vector<std::size_t> traced_idx;
  for (std::size_t s = 0; s < n; ++s) {
    if (kept[s]) {
      kept_idx.push_back(s);
      kept_dim *= subsystem_dims[s];
    } else {
      traced_idx.push_back(s);
      traced_dim *= subsystem_dims[s];
    }
  }

  // full-register offset contributed by a mixed-radix index over a subset of subsystems
  auto offsets = [&](const std::vector<std::size_t>& subset, std::size_t count) {
    std::vector<std::size_t> out(count, 0);
    for (std::size_t v = 0; v < count; ++v) {
      std::size_t rem = v;
      std::size_t off = 0;
      for (std::size_t t = subset.size(); t-- > 0;) {
        const std::size_t d = subsystem_dims[subset[t]];
        off += (rem % d) * stride[subset[t]];
        rem /= d;
      }
      out[v] = off;
    }
    return out;
  };
  const auto kept_off = offsets(kept_idx, kept_dim);
  const auto traced_off = offsets(traced_idx, traced_dim);

  ComplexMatrix out(kept_dim, kept_dim);
  for (std::size_t i = 0; i < kept_dim; ++i) {
    for (std::size_t j = 0; j < kept_dim; ++j) {
      Complex s = 0.0;
      for (std::size_t t = 0; t < traced_dim; ++t) s += rho(kept_off[i] + traced_off[t], kept_off[j] + traced_off[t]);
      out(i, j) = s;
    }
  }
  return out;
}

const std::array<StateVector, 4>& bell_basis() {
  static const std::array<StateVector, 4> basis = [] {
    const double r = 1.0 / std::sqrt(2.0);
    return std::array<StateVector, 4>{
        StateVector({r, 0.0, 0.0, r}),   // phi+
        StateVector({r, 0.0, 0.0, -r}),  // phi-
        StateVector({0.0, r, r, 0.0}),   // psi+
        StateVector({0.0, r, -r, 0.0}),  // psi-
    };
  }();
  return basis;
}

ProbabilityDistribution bell_measure(const ComplexMatrix& rho) {
  if (rho.rows() != 4 || rho.cols() != 4) throw DimensionError("bell_measure: expected a 4x4 operator");
  require_density_like(rho, "bell_measure");
  std::vector<double> p(4);
  for (std::size_t k = 0; k < 4; ++k) {
    const auto& b = bell_basis()[k];
    p[k] = inner_product(b.amplitudes(), apply(rho, b.amplitudes())).real();
  }
  return ProbabilityDistribution(std::move(p));
}

ZMeasurement z_measure(const ComplexMatrix& rho, std::size_t qubit) {
  if (!rho.is_square()) throw DimensionError("z_measure: operator is not square");
  std::size_t n_qubits = 0;
  while ((std::size_t{1} << n_qubits) < rho.rows()) ++n_qubits;
  if ((std::size_t{1} << n_qubits) != rho.rows()) throw DimensionError("z_measure: dimension is not a power of two");
  if (qubit >= n_qubits) throw DimensionError("z_measure: qubit index outside the register");
  require_density_like(rho, "z_measure");

  const std::size_t mask = std::size_t{1} << (n_qubits - 1 - qubit);
  std::array<ComplexMatrix, 2> branch{ComplexMatrix(rho.rows(), rho.cols()), ComplexMatrix(rho.rows(), rho.cols())};
  std::array<double, 2> prob{0.0, 0.0};
  for (std::size_t i = 0; i < rho.rows(); ++i) {
    for (std::size_t j = 0; j < rho.cols(); ++j) {
      const bool bi = (i & mask) != 0;
      if (bi != ((j & mask) != 0)) continue;
      branch[bi](i, j) = rho(i, j);
    }
    prob[(i & mask) != 0] += rho(i, i).real();
  }
  ZMeasurement out{ProbabilityDistribution({std::max(prob[0], 0.0), std::max(prob[1], 0.0)}), {}};
  for (int b = 0; b < 2; ++b) {
    if (prob[b] >= tol::kNegligibleProbability) out.post_states[b] = branch[b] * Complex(1.0 / prob[b]);
  }
  return out;
}

// --- Spectra and entropies -------------------------------------------------

std::pair<double, double> eig2_hermitian(const ComplexMatrix& m) {
  if (m.rows() != 2 || m.cols() != 2) throw DimensionError("eig2_hermitian: expected a 2x2 matrix");
  const double a = m(0, 0).real();
  const double d = m(1, 1).real();
  const double half_gap = 0.5 * (a - d);
  const double radius = std::sqrt(half_gap * half_gap + std::norm(m(0, 1)));
  const double mid = 0.5 * (a + d);
  return {mid + radius, mid - radius};
}

std::vector<double> hermitian_eigenvalues(const ComplexMatrix& m) {
  if (!m.is_square()) throw DimensionError("hermitian_eigenvalues: matrix is not square");
  if (!m.is_hermitian(tol::kEvolution)) throw DomainError("hermitian_eigenvalues: matrix is not Hermitian");
  const std::size_t n = m.rows();
  ComplexMatrix a = m;
  const double target = tol::kJacobiOffDiagonal * std::max(1.0, a.frobenius_norm());

  for (int sweep = 0; sweep < 100 && off_diagonal_norm(a) > target; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const Complex z = a(p, q);
        const double r = std::abs(z);
        if (r == 0.0) continue;
        // Phase D = diag(1, e^{-i phi}) makes the pivot real, then a real rotation zeroes it.
        const Complex phase = z / r;
        const double theta = 0.5 * std::atan2(2.0 * r, a(p, p).real() - a(q, q).real());
        const double c = std::cos(theta);
        const double s = std::sin(theta);
        // Columns: A <- A J, with J = D R, D = diag(1, conj(phase)) on (p, q).
        for (std::size_t k = 0; k < n; ++k) {
          const Complex akp = a(k, p);
          const Complex akq = a(k, q) * std::conj(phase);
          a(k, p) = akp * c + akq * s;
          a(k, q) = -akp * s + akq * c;
        }
        // Rows: A <- J^dagger A.
        for (std::size_t k = 0; k < n; ++k) {
          const Complex apk = a(p, k);
          const Complex aqk = a(q, k) * phase;
          a(p, k) = apk * c + aqk * s;
          a(q, k) = -apk * s + aqk * c;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
      }
    }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a(i, i).real();
  std::sort(ev.begin(), ev.end());
  return ev;
}

double shannon_entropy(std::span<const double> p) {
  double h = 0.0;
  for (double x : p) {
    if (x < -tol::kConstruction) throw DomainError("shannon_entropy: negative weight");
    if (x > 0.0) h -= x * std::log2(x);
  }
  return h;
}

double binary_entropy(double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

double von_neumann_entropy(const ComplexMatrix& rho) {
  if (!rho.is_square()) throw DimensionError("von_neumann_entropy: operator is not square");
  if (!rho.is_hermitian(tol::kEvolution)) throw DomainError("von_neumann_entropy: operator is not Hermitian");
  std::vector<double> spectrum;
  if (rho.rows() == 2) {
    const auto [hi, lo] = eig2_hermitian(rho);
    spectrum = {lo, hi};
  } else {
    spectrum = hermitian_eigenvalues(rho);
  }
  for (double& x : spectrum) {
    if (x < -tol::kSpectrumClamp || x > 1.0 + tol::kSpectrumClamp) {
      throw DomainError("von_neumann_entropy: eigenvalue " + std::to_string(x) + " outside [0, 1]");
    }
    x = std::clamp(x, 0.0, 1.0);
  }
  return shannon_entropy(spectrum);
}

}  // namespace msqkd
