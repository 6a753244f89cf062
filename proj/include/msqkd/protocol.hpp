// Round engine, case sifting and statistics estimation for the circular
// mediated protocol with L >= 2 classical parties.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "msqkd/attacks.hpp"

namespace msqkd {

enum class Variant : std::uint8_t {
  kMediated,  ///< TP Bell-measures every round and announces the outcome.
  kSqkd,      ///< Trusted TP: Z readout on all-measure rounds, which then carry a TP key bit.
};

struct ProtocolConfig {
  int parties = 2;
  std::uint64_t rounds = 0;
  Variant variant = Variant::kMediated;
  std::uint64_t seed = 0;
  double test_fraction = 0.1;
  /// Worker threads; 0 means SQKD_THREADS or the hardware default.
  unsigned threads = 0;
  /// Keep every TrialRecord in the result. Large runs can switch this off
  /// and still get statistics, keys and resource counts.
  bool keep_trials = true;

  /// Throws DomainError unless parties >= 2, rounds >= 1 and test_fraction in (0, 1).
  void validate() const;
};

enum class CaseLabel : std::uint8_t {
  kCase1,         ///< everyone reflected: honesty check
  kCase2,         ///< everyone measured, announcement accepted: key or test round
  kCase3,         ///< mixed choices: discarded
  kDiscardedPsi,  ///< everyone measured, psi+/psi- announced: discarded
};

struct TrialRecord {
  std::uint64_t round_index = 0;
  std::vector<Choice> choices;
  std::vector<std::optional<std::uint8_t>> outcomes;
  /// Absent only for sqkd all-measure rounds, which carry tp_outcome instead.
  std::optional<BellOutcome> announcement;
  std::optional<std::uint8_t> tp_outcome;
  CaseLabel label = CaseLabel::kCase3;
  /// All-measure round whose bits are revealed for parameter estimation.
  bool test_round = false;

  friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

/// Pure function of the choices and the announcement.
///   all reflect -> case1; all measure + phi+/- -> case2; all measure + psi+/- -> discarded_psi;
///   otherwise case3.
CaseLabel classify_case(std::span<const Choice> choices, std::optional<BellOutcome> announcement);

using Table2 = std::array<std::array<double, 2>, 2>;

struct EstimatedNoise {
  NoiseParameters value;
  /// Binomial standard errors; zero for exact statistics.
  NoiseParameters standard_error;
};

/// Observed tables. Indices [i][j] are (first party's bit, last party's bit).
///
/// p_c[i][j] = P(last = j and consistent announcement | first = i, all measured)
/// p_w[i][j] = P(last = j and inconsistent announcement | first = i, all measured)
/// p[i][j]   = P(first = i, last = j | consistent)               (raw-key distribution)
/// q         = same as p, named for the untrusted scenario
/// joint[m][i][j] = P(first = i, last = j, announcement m | all measured)
/// reflect_bell[m] = P(announcement m | all reflected)
struct SiftedStatistics {
  int parties = 2;
  bool exact = false;

  std::array<std::uint64_t, 4> case_counts{};  ///< indexed by CaseLabel
  std::uint64_t reflect_rounds = 0;
  std::uint64_t tested_measure_rounds = 0;
  std::array<std::uint64_t, 2> tested_first_bit{};  ///< tested all-measure rounds per first bit
  std::array<std::array<std::array<std::uint64_t, 2>, 2>, 4> measure_counts{};  ///< [m][i][j], tested rounds
  std::array<std::uint64_t, 4> reflect_counts{};

  Table2 p_c{};
  Table2 p_w{};
  Table2 p{};
  Table2 q{};
  std::array<Table2, 4> joint{};
  std::array<double, 2> first_marginal{};
  std::array<double, 4> reflect_bell{};
  EstimatedNoise noise{};

  /// Set when parties > 2: no key-rate analysis backs these tables.
  bool unproven_multiparty = false;

  /// Rebuild every derived table from the integer counts.
  void finalize_from_counts();
  /// Rebuild p_c, p_w, p, q, the marginal and the noise estimate from
  /// `joint` and `reflect_bell`.
  void derive_from_joint();
};

struct RawKeys {
  /// One bit string per party (C_1 .. C_L).
  std::vector<std::vector<std::uint8_t>> party_keys;
  /// TP's key for the sqkd variant; empty otherwise.
  std::vector<std::uint8_t> tp_key;
};

/// Resource accounting in noiseless counting: Bell states prepared by TP,
/// fresh qubits resent by measuring parties, and qubit hops.
struct ResourceTally {
  std::uint64_t bell_pairs = 0;
  std::uint64_t resent_qubits = 0;
  std::uint64_t qubit_hops = 0;
  std::uint64_t raw_key_bits = 0;
};

struct SimulationResult {
  std::vector<TrialRecord> trials;
  SiftedStatistics statistics;
  RawKeys keys;
  ResourceTally resources;
  /// Human-readable notes, e.g. a case that never occurred.
  std::vector<std::string> warnings;
};

/// One round under the stochastic channel, with randomness derived from (seed, round_index).
TrialRecord run_round(const ProtocolConfig& config, const StochasticChannel& channel, std::uint64_t round_index);

/// Full protocol run. Deterministic in config.seed regardless of thread count.
/// Throws NoKeyError if no case-2 round occurred.
SimulationResult run_simulation(const ProtocolConfig& config, const StochasticChannel& channel);

/// Two-party run sampling quantum trajectories under an exact unitary attack.
SimulationResult run_simulation(const ProtocolConfig& config, const CollectiveAttack& attack);
SimulationResult run_simulation(const ProtocolConfig& config, const UntrustedAttack& attack);

/// Tables the stochastic channel induces in the two-party protocol (no sampling).
SiftedStatistics expected_statistics(const StochasticChannel& channel);

/// Exact branch-vector evolution under a semi-honest attack.
SiftedStatistics exact_statistics_semi_honest(const CollectiveAttack& attack);

/// Exact evolution of the adversarial source under an untrusted attack.
SiftedStatistics exact_statistics_untrusted(const UntrustedAttack& attack);

/// TP ancilla branches after a semi-honest attack in the all-measure case:
/// E[a][b][j] is the ancilla vector for first bit a, second bit b and
/// returned qubit j (norm squared = probability given a).
struct SemiHonestBranches {
  std::array<std::array<std::array<std::vector<Complex>, 2>, 2>, 2> e;
};
SemiHonestBranches semi_honest_branches(const CollectiveAttack& attack);

/// g[m][i][j]: TP register after V2 for announcement m, Alice bit i, Bob bit j
/// (norm squared = joint probability in the all-measure branch).
struct UntrustedBranches {
  std::array<std::array<std::array<std::vector<Complex>, 2>, 2>, 4> g;
};
UntrustedBranches untrusted_branches(const UntrustedAttack& attack);

/// Thread count from the SQKD_THREADS environment variable, else hardware concurrency.
unsigned default_thread_count();

std::string to_string(CaseLabel label);
std::string to_string(BellOutcome outcome);
std::string to_string(Variant variant);

}  // namespace msqkd
