#include "msqkd/protocol.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <iterator>
#include <string>
#include <thread>

#include "msqkd/errors.hpp"
#include "msqkd/tolerances.hpp"

namespace msqkd {

namespace {

constexpr std::uint64_t kChunk = 1 << 15;

std::size_t index_of(CaseLabel c) { return static_cast<std::size_t>(c); }
std::size_t index_of(BellOutcome b) { return static_cast<std::size_t>(b); }

bool all_equal(std::span<const Choice> choices, Choice c) {
  return std::all_of(choices.begin(), choices.end(), [c](Choice x) { return x == c; });
}

std::vector<Complex> slice(std::span<const Complex> v, std::size_t block, std::size_t width) {
  return {v.begin() + static_cast<std::ptrdiff_t>(block * width),
          v.begin() + static_cast<std::ptrdiff_t>((block + 1) * width)};
}

double norm2(std::span<const Complex> v) {
  double s = 0.0;
  for (const auto& a : v) s += std::norm(a);
  return s;
}

/// |bit> (x) ancilla vector.
std::vector<Complex> embed(std::uint8_t bit, std::span<const Complex> ancilla) {
  std::vector<Complex> out(2 * ancilla.size());
  std::copy(ancilla.begin(), ancilla.end(), out.begin() + static_cast<std::ptrdiff_t>(bit * ancilla.size()));
  return out;
}

double binomial_se(double p, std::uint64_t n) {
  if (n == 0) return 0.0;
  return std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(n));
}

}  // namespace

void SiftedStatistics::derive_from_joint() {
  auto& s = *this;
  s.first_marginal = {0.0, 0.0};
  double consistent = 0.0;
  for (std::size_t m = 0; m < 4; ++m) {
    for (std::size_t i = 0; i < 2; ++i) {
      for (std::size_t j = 0; j < 2; ++j) {
        s.first_marginal[i] += s.joint[m][i][j];
        if (m < 2) consistent += s.joint[m][i][j];
      }
    }
  }
  double pc_total = 0.0;
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      const double c = s.joint[0][i][j] + s.joint[1][i][j];
      const double w = s.joint[2][i][j] + s.joint[3][i][j];
      s.p_c[i][j] = s.first_marginal[i] > 0.0 ? c / s.first_marginal[i] : 0.0;
      s.p_w[i][j] = s.first_marginal[i] > 0.0 ? w / s.first_marginal[i] : 0.0;
      s.q[i][j] = consistent > 0.0 ? c / consistent : 0.0;
      pc_total += s.p_c[i][j];
    }
  }
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) s.p[i][j] = pc_total > 0.0 ? s.p_c[i][j] / pc_total : 0.0;
  }

  double q = 0.0;
  double qm = 0.0;
  for (std::size_t m = 0; m < 4; ++m) {
    q += s.joint[m][0][1] + s.joint[m][1][0];
    // wrong class: consistent announcement on differing bits, or inconsistent on equal bits
    qm += m < 2 ? s.joint[m][0][1] + s.joint[m][1][0] : s.joint[m][0][0] + s.joint[m][1][1];
  }
  s.noise.value = {q, qm, 1.0 - s.reflect_bell[0]};
  if (s.exact) {
    s.noise.standard_error = {};
  } else {
    s.noise.standard_error = {binomial_se(q, s.tested_measure_rounds), binomial_se(qm, s.tested_measure_rounds),
                              binomial_se(s.noise.value.qr, s.reflect_rounds)};
  }
}

namespace {

// --- Sampled rounds ---------------------------------------------------------

struct ChunkResult {
  std::vector<TrialRecord> trials;
  SiftedStatistics stats;
  RawKeys keys;
  ResourceTally resources;
};

void account(const ProtocolConfig& config, TrialRecord& r, ChunkResult& out) {
  const auto parties = static_cast<std::size_t>(config.parties);
  auto& st = out.stats;
  ++st.case_counts[index_of(r.label)];

  ++out.resources.bell_pairs;
  out.resources.qubit_hops += parties + 1;
  for (auto c : r.choices) out.resources.resent_qubits += c == Choice::kMeasure ? 1 : 0;

  if (r.label == CaseLabel::kCase1) {
    ++st.reflect_rounds;
    ++st.reflect_counts[index_of(*r.announcement)];
    return;
  }
  if (!all_equal(r.choices, Choice::kMeasure)) return;

  if (r.label == CaseLabel::kCase2) ++out.resources.raw_key_bits;
  const std::uint8_t first = *r.outcomes.front();
  const std::uint8_t last = *r.outcomes.back();
  if (r.test_round) {
    ++st.tested_measure_rounds;
    ++st.tested_first_bit[first];
    // The sqkd variant has no Bell announcement here; TP's Z bit agreeing
    // with the first party counts as a consistent class.
    std::size_t m = 0;
    if (r.announcement) {
      m = index_of(*r.announcement);
    } else {
      m = *r.tp_outcome == first ? index_of(BellOutcome::kPhiPlus) : index_of(BellOutcome::kPsiPlus);
    }
    ++st.measure_counts[m][first][last];
  } else if (r.label == CaseLabel::kCase2) {
    for (std::size_t p = 0; p < parties; ++p) out.keys.party_keys[p].push_back(*r.outcomes[p]);
    if (r.tp_outcome) out.keys.tp_key.push_back(*r.tp_outcome);
  }
}

template <typename RoundFn>
SimulationResult run_rounds(const ProtocolConfig& config, RoundFn&& make_round) {
  const std::uint64_t chunks = (config.rounds + kChunk - 1) / kChunk;
  std::vector<ChunkResult> results(chunks);
  std::atomic<std::uint64_t> next{0};
  const auto parties = static_cast<std::size_t>(config.parties);

  auto worker = [&] {
    for (std::uint64_t c = next++; c < chunks; c = next++) {
      auto& out = results[c];
      out.keys.party_keys.assign(parties, {});
      const std::uint64_t begin = c * kChunk;
      const std::uint64_t end = std::min(config.rounds, begin + kChunk);
      if (config.keep_trials) out.trials.reserve(end - begin);
      for (std::uint64_t idx = begin; idx < end; ++idx) {
        TrialRecord r = make_round(idx);
        if (all_equal(r.choices, Choice::kMeasure)) {
          CounterRng pick(config.seed, StreamTag::kTestSubset, idx);
          r.test_round = pick.bernoulli(config.test_fraction);
        }
        account(config, r, out);
        if (config.keep_trials) out.trials.push_back(std::move(r));
      }
    }
  };

  unsigned threads = config.threads != 0 ? config.threads : default_thread_count();
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, chunks));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  // Merge in chunk order so keys and trials do not depend on scheduling.
  SimulationResult result;
  auto& st = result.statistics;
  st.parties = config.parties;
  st.unproven_multiparty = config.parties > 2;
  result.keys.party_keys.assign(parties, {});
  if (config.keep_trials) result.trials.reserve(config.rounds);
  for (auto& c : results) {
    for (std::size_t k = 0; k < 4; ++k) {
      st.case_counts[k] += c.stats.case_counts[k];
      st.reflect_counts[k] += c.stats.reflect_counts[k];
      for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 2; ++j) st.measure_counts[k][i][j] += c.stats.measure_counts[k][i][j];
      }
    }
    st.reflect_rounds += c.stats.reflect_rounds;
    st.tested_measure_rounds += c.stats.tested_measure_rounds;
    for (std::size_t i = 0; i < 2; ++i) st.tested_first_bit[i] += c.stats.tested_first_bit[i];
    for (std::size_t p = 0; p < parties; ++p) {
      auto& dst = result.keys.party_keys[p];
      dst.insert(dst.end(), c.keys.party_keys[p].begin(), c.keys.party_keys[p].end());
    }
    result.keys.tp_key.insert(result.keys.tp_key.end(), c.keys.tp_key.begin(), c.keys.tp_key.end());
    result.resources.bell_pairs += c.resources.bell_pairs;
    result.resources.resent_qubits += c.resources.resent_qubits;
    result.resources.qubit_hops += c.resources.qubit_hops;
    result.resources.raw_key_bits += c.resources.raw_key_bits;
    if (config.keep_trials) {
      std::move(c.trials.begin(), c.trials.end(), std::back_inserter(result.trials));
    }
    c = ChunkResult{};
  }
  st.finalize_from_counts();

  for (auto label : {CaseLabel::kCase1, CaseLabel::kCase2, CaseLabel::kCase3, CaseLabel::kDiscardedPsi}) {
    if (st.case_counts[index_of(label)] == 0) {
      if (label == CaseLabel::kDiscardedPsi && st.noise.value.qm == 0.0) continue;
      result.warnings.push_back(to_string(label) + " never occurred in " + std::to_string(config.rounds) + " rounds");
    }
  }
  if (st.tested_measure_rounds == 0) result.warnings.emplace_back("no all-measure round fell in the test subset");
  if (st.unproven_multiparty) {
    result.warnings.emplace_back("statistics for more than two parties have no accompanying key-rate analysis");
  }
  if (st.case_counts[index_of(CaseLabel::kCase2)] == 0) {
    throw NoKeyError("no case-2 round in " + std::to_string(config.rounds) + " rounds; no raw key");
  }
  return result;
}

std::vector<Choice> draw_choices(int parties, CounterRng& rng) {
  std::vector<Choice> choices(static_cast<std::size_t>(parties));
  for (auto& c : choices) c = rng.bit() ? Choice::kMeasure : Choice::kReflect;
  return choices;
}

// --- Trajectory sampling for unitary attacks --------------------------------
//
// Every choice pattern has finitely many outcome histories. Each history's
// probability is the product of conditional Born probabilities obtained by
// collapsing and renormalizing a state vector step by step.

struct Leaf {
  std::array<std::optional<std::uint8_t>, 2> outcomes;
  BellOutcome announcement = BellOutcome::kPhiPlus;
  double probability = 0.0;
};

struct LeafTable {
  std::vector<Leaf> leaves;
  std::vector<double> cumulative;

  void finish() {
    cumulative.clear();
    double acc = 0.0;
    for (const auto& l : leaves) cumulative.push_back(acc += l.probability);
  }
  const Leaf& sample(double u) const {
    const double x = u * cumulative.back();
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), x);
    if (it == cumulative.end()) --it;
    return leaves[static_cast<std::size_t>(it - cumulative.begin())];
  }
};

/// Projects the qubit at `stride` (blocks of width `inner`, repeating with
/// period 2*inner) onto |bit> and renormalizes. Returns the Born probability.
double collapse(std::vector<Complex>& psi, std::size_t inner, std::uint8_t bit) {
  double p = 0.0;
  for (std::size_t k = 0; k < psi.size(); ++k) {
    if ((k / inner) % 2 != bit) {
      psi[k] = 0.0;
    } else {
      p += std::norm(psi[k]);
    }
  }
  if (p > 0.0) {
    const double s = 1.0 / std::sqrt(p);
    for (auto& a : psi) a *= s;
  }
  return p;
}

/// Applies a (2d x 2d) operator to the trailing qubit (x) ancilla factor of
/// each leading block of `psi`.
std::vector<Complex> apply_trailing(const ComplexMatrix& u, const std::vector<Complex>& psi) {
  const std::size_t n = u.cols();
  const std::size_t blocks = psi.size() / n;
  std::vector<Complex> out(blocks * u.rows());
  for (std::size_t b = 0; b < blocks; ++b) {
    const auto part = msqkd::apply(u, std::span<const Complex>(psi).subspan(b * n, n));
    std::copy(part.begin(), part.end(), out.begin() + static_cast<std::ptrdiff_t>(b * u.rows()));
  }
  return out;
}

LeafTable collective_leaves(const CollectiveAttack& attack, Choice alice, Choice bob) {
  const std::size_t d = attack.ancilla_dim();
  // register H (x) qubit (x) ancilla
  std::vector<Complex> start(4 * d);
  const double r = 1.0 / std::sqrt(2.0);
  start[0] = r;
  start[2 * d + d] = r;

  LeafTable table;
  auto finish_leaf = [&](std::vector<Complex> psi, std::array<std::optional<std::uint8_t>, 2> outs, double prob) {
    psi = apply_trailing(attack.u2(), psi);
    for (std::size_t m = 0; m < 4; ++m) {
      const auto& bell = bell_basis()[m];
      std::vector<Complex> anc(d);
      for (std::size_t hq = 0; hq < 4; ++hq) {
        for (std::size_t a = 0; a < d; ++a) anc[a] += std::conj(bell[hq]) * psi[hq * d + a];
      }
      table.leaves.push_back({outs, static_cast<BellOutcome>(m), prob * norm2(anc)});
    }
  };
  auto after_alice = [&](std::vector<Complex> psi, std::optional<std::uint8_t> a_out, double prob) {
    psi = apply_trailing(attack.u1(), psi);
    if (bob == Choice::kReflect) {
      finish_leaf(psi, {a_out, std::nullopt}, prob);
      return;
    }
    for (std::uint8_t b = 0; b < 2; ++b) {
      auto branch = psi;
      const double pb = collapse(branch, d, b);
      if (pb > tol::kNegligibleProbability) finish_leaf(std::move(branch), {a_out, b}, prob * pb);
    }
  };
  if (alice == Choice::kReflect) {
    after_alice(start, std::nullopt, 1.0);
  } else {
    for (std::uint8_t a = 0; a < 2; ++a) {
      auto branch = start;
      const double pa = collapse(branch, d, a);
      if (pa > tol::kNegligibleProbability) after_alice(std::move(branch), a, pa);
    }
  }
  table.finish();
  return table;
}

LeafTable untrusted_leaves(const UntrustedAttack& attack, Choice alice, Choice bob) {
  const std::size_t d = attack.ancilla_dim();
  const std::vector<Complex> start(attack.source().amplitudes().begin(), attack.source().amplitudes().end());

  LeafTable table;
  auto finish_leaf = [&](const std::vector<Complex>& psi, std::array<std::optional<std::uint8_t>, 2> outs, double prob) {
    const auto out = msqkd::apply(attack.v2(), psi);
    for (std::size_t m = 0; m < 4; ++m) {
      table.leaves.push_back({outs, static_cast<BellOutcome>(m),
                              prob * norm2(std::span<const Complex>(out).subspan(m * d, d))});
    }
  };
  auto after_alice = [&](std::vector<Complex> psi, std::optional<std::uint8_t> a_out, double prob) {
    psi = msqkd::apply(attack.v1(), psi);
    if (bob == Choice::kReflect) {
      finish_leaf(psi, {a_out, std::nullopt}, prob);
      return;
    }
    for (std::uint8_t b = 0; b < 2; ++b) {
      auto branch = psi;
      const double pb = collapse(branch, d, b);
      if (pb > tol::kNegligibleProbability) finish_leaf(branch, {a_out, b}, prob * pb);
    }
  };
  if (alice == Choice::kReflect) {
    after_alice(start, std::nullopt, 1.0);
  } else {
    for (std::uint8_t a = 0; a < 2; ++a) {
      auto branch = start;
      const double pa = collapse(branch, d, a);
      if (pa > tol::kNegligibleProbability) after_alice(std::move(branch), a, pa);
    }
  }
  table.finish();
  return table;
}

template <typename Attack, typename LeafFn>
SimulationResult run_attack_simulation(const ProtocolConfig& config, const Attack& attack, LeafFn leaves_for) {
  config.validate();
  if (config.parties != 2) throw DomainError("unitary-attack simulation supports exactly two parties");
  if (config.variant != Variant::kMediated) throw DomainError("unitary-attack simulation supports the mediated variant only");

  std::array<LeafTable, 4> tables;  // index alice*2 + bob, Choice values as bits
  for (std::size_t a = 0; a < 2; ++a) {
    for (std::size_t b = 0; b < 2; ++b) {
      tables[a * 2 + b] = leaves_for(attack, static_cast<Choice>(a), static_cast<Choice>(b));
    }
  }
  return run_rounds(config, [&](std::uint64_t idx) {
    CounterRng rng(config.seed, StreamTag::kRound, idx);
    TrialRecord r;
    r.round_index = idx;
    r.choices = draw_choices(2, rng);
    const auto& leaf = tables[static_cast<std::size_t>(r.choices[0]) * 2 + static_cast<std::size_t>(r.choices[1])]
                           .sample(rng.uniform());
    r.outcomes = {leaf.outcomes[0], leaf.outcomes[1]};
    r.announcement = leaf.announcement;
    r.label = classify_case(r.choices, r.announcement);
    return r;
  });
}

}  // namespace

void ProtocolConfig::validate() const {
  if (parties < 2) throw DomainError("parties must be at least 2");
  if (rounds < 1) throw DomainError("rounds must be at least 1");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw DomainError("test_fraction must lie in (0, 1)");
}

CaseLabel classify_case(std::span<const Choice> choices, std::optional<BellOutcome> announcement) {
  if (all_equal(choices, Choice::kReflect)) return CaseLabel::kCase1;
  if (all_equal(choices, Choice::kMeasure)) {
    if (!announcement || is_consistent(*announcement)) return CaseLabel::kCase2;
    return CaseLabel::kDiscardedPsi;
  }
  return CaseLabel::kCase3;
}

void SiftedStatistics::finalize_from_counts() {
  exact = false;
  for (std::size_t m = 0; m < 4; ++m) {
    reflect_bell[m] = reflect_rounds > 0 ? static_cast<double>(reflect_counts[m]) / static_cast<double>(reflect_rounds) : 0.0;
    for (std::size_t i = 0; i < 2; ++i) {
      for (std::size_t j = 0; j < 2; ++j) {
        joint[m][i][j] = tested_measure_rounds > 0 ? static_cast<double>(measure_counts[m][i][j]) /
                                                         static_cast<double>(tested_measure_rounds)
                                                   : 0.0;
      }
    }
  }
  derive_from_joint();
}

TrialRecord run_round(const ProtocolConfig& config, const StochasticChannel& channel, std::uint64_t round_index) {
  CounterRng rng(config.seed, StreamTag::kRound, round_index);
  TrialRecord r;
  r.round_index = round_index;
  r.choices = draw_choices(config.parties, rng);

  // Noiseless physics: the first measurement collapses phi+ to |ii>, every
  // later measurement repeats i, and TP then finds phi+ or phi- at random.
  const auto coin_bit = static_cast<std::uint8_t>(rng.bit());
  const auto coin_bell = rng.bit() ? BellOutcome::kPhiMinus : BellOutcome::kPhiPlus;
  std::vector<std::optional<std::uint8_t>> ideal(r.choices.size());
  bool anyone_measured = false;
  for (std::size_t p = 0; p < r.choices.size(); ++p) {
    if (r.choices[p] == Choice::kMeasure) {
      ideal[p] = coin_bit;
      anyone_measured = true;
    }
  }
  const RoundContext context{r.choices, ideal, anyone_measured ? coin_bell : BellOutcome::kPhiPlus};
  auto perturbed = sample_stochastic(channel, context, rng);

  r.outcomes = std::move(perturbed.outcomes);
  if (config.variant == Variant::kSqkd && all_equal(r.choices, Choice::kMeasure)) {
    r.tp_outcome = perturbed.bit_at_tp;
  } else {
    r.announcement = perturbed.announcement;
  }
  r.label = classify_case(r.choices, r.announcement);
  return r;
}

SimulationResult run_simulation(const ProtocolConfig& config, const StochasticChannel& channel) {
  config.validate();
  channel.validate();
  return run_rounds(config, [&](std::uint64_t idx) { return run_round(config, channel, idx); });
}

SimulationResult run_simulation(const ProtocolConfig& config, const CollectiveAttack& attack) {
  return run_attack_simulation(config, attack, collective_leaves);
}

SimulationResult run_simulation(const ProtocolConfig& config, const UntrustedAttack& attack) {
  return run_attack_simulation(config, attack, untrusted_leaves);
}

SiftedStatistics expected_statistics(const StochasticChannel& channel) {
  channel.validate();
  const auto& n = channel.noise;
  SiftedStatistics s;
  s.exact = true;
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      const double flip = i == j ? 1.0 - n.q : n.q;
      const double cons = i == j ? 1.0 - n.qm : n.qm;
      for (std::size_t m = 0; m < 4; ++m) {
        s.joint[m][i][j] = 0.5 * flip * 0.5 * (m < 2 ? cons : 1.0 - cons);
      }
    }
  }
  s.reflect_bell = {1.0 - n.qr, n.qr * channel.wrong_bell_split[0], n.qr * channel.wrong_bell_split[1],
                    n.qr * channel.wrong_bell_split[2]};
  s.derive_from_joint();
  return s;
}

SemiHonestBranches semi_honest_branches(const CollectiveAttack& attack) {
  const std::size_t d = attack.ancilla_dim();
  SemiHonestBranches out;
  for (std::uint8_t a = 0; a < 2; ++a) {
    const auto after_u1 = attack.u1().column(a * d);
    for (std::uint8_t b = 0; b < 2; ++b) {
      const auto ek = slice(after_u1, b, d);
      const auto after_u2 = msqkd::apply(attack.u2(), embed(b, ek));
      for (std::size_t j = 0; j < 2; ++j) out.e[a][b][j] = slice(after_u2, j, d);
    }
  }
  return out;
}

SiftedStatistics exact_statistics_semi_honest(const CollectiveAttack& attack) {
  const std::size_t d = attack.ancilla_dim();
  const auto br = semi_honest_branches(attack);
  SiftedStatistics s;
  s.exact = true;
  // TP holds H = a, so phi+/phi- each carry half of the B' = a branch and
  // psi+/psi- each carry half of the B' = 1 - a branch.
  for (std::size_t a = 0; a < 2; ++a) {
    for (std::size_t b = 0; b < 2; ++b) {
      const double same = norm2(br.e[a][b][a]);
      const double other = norm2(br.e[a][b][1 - a]);
      s.joint[0][a][b] = s.joint[1][a][b] = 0.25 * same;
      s.joint[2][a][b] = s.joint[3][a][b] = 0.25 * other;
    }
  }

  // Reflect branch: sum_h |h>_H (x) U2 U1 |h, 0> / sqrt(2), Bell-measured on (H, B').
  std::array<std::vector<Complex>, 2> travelled;
  for (std::size_t h = 0; h < 2; ++h) travelled[h] = msqkd::apply(attack.u2(), attack.u1().column(h * d));
  for (std::size_t m = 0; m < 4; ++m) {
    const auto& bell = bell_basis()[m];
    std::vector<Complex> anc(d);
    for (std::size_t h = 0; h < 2; ++h) {
      for (std::size_t q = 0; q < 2; ++q) {
        const Complex c = std::conj(bell[h * 2 + q]) / std::sqrt(2.0);
        for (std::size_t k = 0; k < d; ++k) anc[k] += c * travelled[h][q * d + k];
      }
    }
    s.reflect_bell[m] = norm2(anc);
  }
  s.derive_from_joint();
  return s;
}

UntrustedBranches untrusted_branches(const UntrustedAttack& attack) {
  const std::size_t d = attack.ancilla_dim();
  UntrustedBranches out;
  for (std::uint8_t i = 0; i < 2; ++i) {
    const auto gi = slice(attack.source().amplitudes(), i, d);
    const auto after_v1 = msqkd::apply(attack.v1(), embed(i, gi));
    for (std::uint8_t j = 0; j < 2; ++j) {
      const auto gij = slice(after_v1, j, d);
      const auto after_v2 = msqkd::apply(attack.v2(), embed(j, gij));
      for (std::size_t m = 0; m < 4; ++m) out.g[m][i][j] = slice(after_v2, m, d);
    }
  }
  return out;
}

SiftedStatistics exact_statistics_untrusted(const UntrustedAttack& attack) {
  const std::size_t d = attack.ancilla_dim();
  const auto br = untrusted_branches(attack);
  SiftedStatistics s;
  s.exact = true;
  for (std::size_t m = 0; m < 4; ++m) {
    for (std::size_t i = 0; i < 2; ++i) {
      for (std::size_t j = 0; j < 2; ++j) s.joint[m][i][j] = norm2(br.g[m][i][j]);
    }
  }
  const auto reflected = msqkd::apply(attack.v2(), msqkd::apply(attack.v1(), attack.source().amplitudes()));
  for (std::size_t m = 0; m < 4; ++m) s.reflect_bell[m] = norm2(std::span<const Complex>(reflected).subspan(m * d, d));
  s.derive_from_joint();
  return s;
}

unsigned default_thread_count() {
  if (const char* env = std::getenv("SQKD_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::string to_string(CaseLabel label) {
  switch (label) {
    case CaseLabel::kCase1: return "case1";
    case CaseLabel::kCase2: return "case2";
    case CaseLabel::kCase3: return "case3";
    case CaseLabel::kDiscardedPsi: return "discarded_psi";
  }
  return "unknown";
}

std::string to_string(BellOutcome outcome) {
  switch (outcome) {
    case BellOutcome::kPhiPlus: return "phi+";
    case BellOutcome::kPhiMinus: return "phi-";
    case BellOutcome::kPsiPlus: return "psi+";
    case BellOutcome::kPsiMinus: return "psi-";
  }
  return "unknown";
}

std::string to_string(Variant variant) { return variant == Variant::kSqkd ? "sqkd" : "mediated"; }

}  // namespace msqkd
