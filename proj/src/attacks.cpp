#include "msqkd/attacks.hpp"

#include <cmath>
#include <random>
#include <string>

#include "msqkd/errors.hpp"
#include "msqkd/tolerances.hpp"

namespace msqkd {

void NoiseParameters::validate() const {
  for (double v : {q, qm, qr}) {
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("noise parameters must lie in [0, 1]");
  }
}

bool NoiseParameters::admissible() const noexcept {
  const bool in_range = q >= 0.0 && q < 0.5 && qm >= 0.0 && qm < 0.5 && qr >= 0.0 && qr <= 1.0;
  return in_range && (1.0 - q) * (1.0 - qm) > q * qm;
}

void NoiseParameters::require_admissible() const {
  validate();
  if (!admissible()) {
    throw DomainError("inadmissible noise (Q=" + std::to_string(q) + ", Q_M=" + std::to_string(qm) +
                      "): Q and Q_M must be below 1/2");
  }
}

CollectiveAttack::CollectiveAttack(std::size_t ancilla_dim, ComplexMatrix u1, ComplexMatrix u2)
    : ancilla_dim_(ancilla_dim), u1_(std::move(u1)), u2_(std::move(u2)) {
  if (ancilla_dim_ == 0) throw DimensionError("CollectiveAttack: ancilla_dim must be at least 1");
  const std::size_t n = 2 * ancilla_dim_;
  for (const auto* u : {&u1_, &u2_}) {
    if (u->rows() != n || u->cols() != n) {
      throw DimensionError("CollectiveAttack: expected " + std::to_string(n) + "x" + std::to_string(n) +
                           " unitaries for ancilla_dim " + std::to_string(ancilla_dim_));
    }
    if (!u->is_unitary(tol::kEvolution)) throw DomainError("CollectiveAttack: U1/U2 must be unitary");
  }
}

UntrustedAttack::UntrustedAttack(std::size_t ancilla_dim, StateVector source, ComplexMatrix v1, ComplexMatrix v2)
    : ancilla_dim_(ancilla_dim), source_(std::move(source)), v1_(std::move(v1)), v2_(std::move(v2)) {
  if (ancilla_dim_ == 0) throw DimensionError("UntrustedAttack: ancilla_dim must be at least 1");
  const std::size_t n = 2 * ancilla_dim_;
  if (source_.dimension() != n) {
    throw DimensionError("UntrustedAttack: source must have dimension " + std::to_string(n));
  }
  if (std::abs(source_.norm_squared() - 1.0) > tol::kConstruction) {
    throw DomainError("UntrustedAttack: source state is not normalized");
  }
  if (v1_.rows() != n || v1_.cols() != n) throw DimensionError("UntrustedAttack: V1 must be " + std::to_string(n) + " square");
  if (!v1_.is_unitary(tol::kEvolution)) throw DomainError("UntrustedAttack: V1 must be unitary");
  if (v2_.rows() != 2 * n || v2_.cols() != n) {
    throw DimensionError("UntrustedAttack: V2 must map dimension " + std::to_string(n) + " into " + std::to_string(2 * n));
  }
  if (!v2_.has_orthonormal_columns(tol::kEvolution)) throw DomainError("UntrustedAttack: V2 must be an isometry");
}

void StochasticChannel::validate() const {
  noise.validate();
  double s = 0.0;
  for (double w : wrong_bell_split) {
    if (w < 0.0) throw DomainError("wrong_bell_split entries must be nonnegative");
    s += w;
  }
  if (std::abs(s - 1.0) > tol::kConstruction) throw DomainError("wrong_bell_split must sum to 1");
}

ComplexMatrix random_unitary(std::size_t n, CounterRng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  ComplexMatrix z(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) z(r, c) = Complex(gauss(rng), gauss(rng));
  }
  // Modified Gram-Schmidt on columns; R gets a positive real diagonal, so Q is Haar distributed.
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t k = 0; k < c; ++k) {
      Complex proj = 0.0;
      for (std::size_t r = 0; r < n; ++r) proj += std::conj(z(r, k)) * z(r, c);
      for (std::size_t r = 0; r < n; ++r) z(r, c) -= proj * z(r, k);
    }
    double norm = 0.0;
    for (std::size_t r = 0; r < n; ++r) norm += std::norm(z(r, c));
    norm = std::sqrt(norm);
    for (std::size_t r = 0; r < n; ++r) z(r, c) /= norm;
  }
  return z;
}

CollectiveAttack identity_attack(std::size_t ancilla_dim) {
  if (ancilla_dim == 0) throw DimensionError("identity_attack: ancilla_dim must be at least 1");
  return {ancilla_dim, ComplexMatrix::identity(2 * ancilla_dim), ComplexMatrix::identity(2 * ancilla_dim)};
}

CollectiveAttack random_collective_attack(std::size_t ancilla_dim, std::uint64_t seed) {
  if (ancilla_dim < 1 || ancilla_dim > 8) throw DimensionError("random_collective_attack: ancilla_dim must be in [1, 8]");
  CounterRng rng(seed, StreamTag::kAttack, 0);
  auto u1 = random_unitary(2 * ancilla_dim, rng);
  auto u2 = random_unitary(2 * ancilla_dim, rng);
  return {ancilla_dim, std::move(u1), std::move(u2)};
}

CollectiveAttack entangling_probe_attack() {
  // basis |qubit, ancilla>: |a, b> -> |a, a xor b>
  ComplexMatrix cnot(4, 4);
  cnot(0, 0) = 1.0;
  cnot(1, 1) = 1.0;
  cnot(3, 2) = 1.0;
  cnot(2, 3) = 1.0;
  return {2, std::move(cnot), ComplexMatrix::identity(4)};
}

UntrustedAttack honest_source() {
  const double r = 1.0 / std::sqrt(2.0);
  StateVector source({r, 0.0, 0.0, r});
  // V2 = sum_m |m>|0> <Bell_m|, an 8x4 isometry.
  ComplexMatrix v2(8, 4);
  for (std::size_t m = 0; m < 4; ++m) {
    const auto& bell = bell_basis()[m];
    for (std::size_t col = 0; col < 4; ++col) v2(m * 2, col) = std::conj(bell[col]);
  }
  return {2, std::move(source), ComplexMatrix::identity(4), std::move(v2)};
}

UntrustedAttack random_untrusted_attack(std::size_t ancilla_dim, std::uint64_t seed) {
  if (ancilla_dim < 1 || ancilla_dim > 8) throw DimensionError("random_untrusted_attack: ancilla_dim must be in [1, 8]");
  CounterRng rng(seed, StreamTag::kAttack, 1);
  const std::size_t n = 2 * ancilla_dim;
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Complex> amps(n);
  double norm = 0.0;
  for (auto& a : amps) {
    a = Complex(gauss(rng), gauss(rng));
    norm += std::norm(a);
  }
  for (auto& a : amps) a /= std::sqrt(norm);
  auto v1 = random_unitary(n, rng);
  const auto big = random_unitary(2 * n, rng);
  ComplexMatrix v2(2 * n, n);
  for (std::size_t r = 0; r < 2 * n; ++r) {
    for (std::size_t c = 0; c < n; ++c) v2(r, c) = big(r, c);
  }
  return {ancilla_dim, StateVector(std::move(amps)), std::move(v1), std::move(v2)};
}

PerturbedRound sample_stochastic(const StochasticChannel& channel, const RoundContext& context, CounterRng& rng) {
  const auto& noise = channel.noise;
  PerturbedRound out;
  out.outcomes.assign(context.outcomes.begin(), context.outcomes.end());

  std::optional<std::uint8_t> first;
  std::optional<std::uint8_t> previous;
  for (auto& bit : out.outcomes) {
    if (!bit) continue;
    if (previous) {
      const bool flip = rng.bernoulli(noise.q);
      bit = static_cast<std::uint8_t>(*previous ^ static_cast<std::uint8_t>(flip));
    } else {
      first = bit;
    }
    previous = bit;
  }

  if (!first) {
    out.announcement = BellOutcome::kPhiPlus;
    if (rng.bernoulli(noise.qr)) {
      const double u = rng.uniform();
      const auto& w = channel.wrong_bell_split;
      if (u < w[0]) {
        out.announcement = BellOutcome::kPhiMinus;
      } else if (u < w[0] + w[1]) {
        out.announcement = BellOutcome::kPsiPlus;
      } else {
        out.announcement = BellOutcome::kPsiMinus;
      }
    }
    return out;
  }

  const bool wrong_class = rng.bernoulli(noise.qm);
  const bool consistent = (*first == *previous) != wrong_class;
  if (consistent) {
    out.announcement = is_consistent(context.announcement) ? context.announcement
                                                           : (rng.bit() ? BellOutcome::kPhiMinus : BellOutcome::kPhiPlus);
  } else {
    out.announcement = rng.bit() ? BellOutcome::kPsiMinus : BellOutcome::kPsiPlus;
  }
  out.bit_at_tp = static_cast<std::uint8_t>(*previous ^ static_cast<std::uint8_t>(rng.bernoulli(noise.q)));
  return out;
}

}  // namespace msqkd
