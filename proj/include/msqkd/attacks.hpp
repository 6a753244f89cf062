// Adversary models for the mediating third party (TP).
//
// Register convention for attack operators: travelling qubit (x) ancilla,
// basis index = qubit * ancilla_dim + ancilla. The ancilla starts in |0>.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "msqkd/qmath.hpp"
#include "msqkd/rng.hpp"

namespace msqkd {

/// Observed error triple.
///   q  - probability that two parties' measured bits differ
///   qm - probability of a wrong (in)consistency class in all-measure rounds
///   qr - probability of a non-phi+ announcement in all-reflect rounds
struct NoiseParameters {
  double q = 0.0;
  double qm = 0.0;
  double qr = 0.0;

  /// Throws DomainError unless every entry is in [0, 1].
  void validate() const;
  /// Q, Q_M in [0, 1/2) so that matched-key events dominate: (1-Q)(1-Q_M) > Q Q_M.
  bool admissible() const noexcept;
  /// Throws DomainError if not admissible().
  void require_admissible() const;

  static NoiseParameters uniform(double q) noexcept { return {q, q, q}; }
};

/// Semi-honest TP: U1 acts after the first party, U2 after the second.
class CollectiveAttack {
 public:
  /// Throws DimensionError on a size other than 2*ancilla_dim, DomainError if not unitary.
  CollectiveAttack(std::size_t ancilla_dim, ComplexMatrix u1, ComplexMatrix u2);

  std::size_t ancilla_dim() const noexcept { return ancilla_dim_; }
  const ComplexMatrix& u1() const noexcept { return u1_; }
  const ComplexMatrix& u2() const noexcept { return u2_; }

 private:
  std::size_t ancilla_dim_;
  ComplexMatrix u1_;
  ComplexMatrix u2_;
};

/// Untrusted TP: arbitrary source state on qubit (x) ancilla, a unitary V1
/// between the parties, and an isometry V2 from qubit (x) ancilla into
/// announcement (4 levels: phi+, phi-, psi+, psi-) (x) ancilla.
class UntrustedAttack {
 public:
  UntrustedAttack(std::size_t ancilla_dim, StateVector source, ComplexMatrix v1, ComplexMatrix v2);

  std::size_t ancilla_dim() const noexcept { return ancilla_dim_; }
  const StateVector& source() const noexcept { return source_; }
  const ComplexMatrix& v1() const noexcept { return v1_; }
  const ComplexMatrix& v2() const noexcept { return v2_; }

 private:
  std::size_t ancilla_dim_;
  StateVector source_;
  ComplexMatrix v1_;
  ComplexMatrix v2_;
};

/// Classical error channel reproducing the (Q, Q_M, Q_R) tables.
struct StochasticChannel {
  NoiseParameters noise;
  /// Distribution of a wrong all-reflect announcement over (phi-, psi+, psi-).
  std::array<double, 3> wrong_bell_split{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};

  void validate() const;
};

// --- Constructors for named attacks ----------------------------------------

CollectiveAttack identity_attack(std::size_t ancilla_dim);

/// Haar-distributed U1, U2 (QR of complex Gaussian matrices), deterministic in seed.
/// ancilla_dim must be in [1, 8].
CollectiveAttack random_collective_attack(std::size_t ancilla_dim, std::uint64_t seed);

/// Ancilla copies the computational basis: U1|a, 0> = |a, a>; U2 = I.
CollectiveAttack entangling_probe_attack();

/// Untrusted model instantiated to honest behavior: the source is phi+ with
/// the ancilla as TP's retained half, V1 = I, and V2 is the Bell-measurement isometry.
UntrustedAttack honest_source();

/// Random source, Haar V1 and the first columns of a Haar unitary as V2.
UntrustedAttack random_untrusted_attack(std::size_t ancilla_dim, std::uint64_t seed);

/// Haar-random n x n unitary.
ComplexMatrix random_unitary(std::size_t n, CounterRng& rng);

// --- Stochastic channel ----------------------------------------------------

enum class Choice : std::uint8_t { kReflect, kMeasure };

/// Announcement order matches bell_basis(): phi+, phi-, psi+, psi-.
enum class BellOutcome : std::uint8_t { kPhiPlus = 0, kPhiMinus = 1, kPsiPlus = 2, kPsiMinus = 3 };

inline bool is_consistent(BellOutcome b) noexcept {
  return b == BellOutcome::kPhiPlus || b == BellOutcome::kPhiMinus;
}

/// Noiseless round produced by the honest protocol, before the channel acts.
struct RoundContext {
  std::span<const Choice> choices;
  /// Bit of every measuring party (all equal when noiseless); absent for reflecting parties.
  std::span<const std::optional<std::uint8_t>> outcomes;
  BellOutcome announcement = BellOutcome::kPhiPlus;
};

struct PerturbedRound {
  std::vector<std::optional<std::uint8_t>> outcomes;
  BellOutcome announcement = BellOutcome::kPhiPlus;
  /// Last measured bit after its final hop to TP (used by the sqkd variant's Z readout).
  std::optional<std::uint8_t> bit_at_tp;
};

/// Apply the channel to one round:
///  - each measured bit after the first differs from the previous measured bit with probability Q;
///  - if anyone measured, the announcement class (consistent phi+/- vs inconsistent psi+/-) follows
///    first == last measured bit, flipped with probability Q_M; consistent announcements keep the
///    noiseless phi+/phi- coin, inconsistent ones split evenly between psi+ and psi-;
///  - if everyone reflected, a wrong outcome is announced with probability Q_R, distributed by
///    wrong_bell_split.
PerturbedRound sample_stochastic(const StochasticChannel& channel, const RoundContext& context, CounterRng& rng);

}  // namespace msqkd
