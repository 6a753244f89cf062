#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "msqkd/errors.hpp"
#include "msqkd/io.hpp"
#include "msqkd/protocol.hpp"
#include "../oracles/density_oracle.hpp"

using namespace msqkd;

namespace {

constexpr Choice R = Choice::kReflect;
constexpr Choice M = Choice::kMeasure;

ProtocolConfig config(int parties, std::uint64_t rounds, std::uint64_t seed) {
  ProtocolConfig c;
  c.parties = parties;
  c.rounds = rounds;
  c.seed = seed;
  return c;
}

double within_sigmas(double observed, double p, double n) {
  const double sigma = std::sqrt(std::max(p * (1.0 - p), 1e-300) / n);
  return std::abs(observed - p) / sigma;
}

std::string csv(const SimulationResult& r) {
  std::ostringstream out;
  write_trial_log(r.trials, out);
  return out.str();
}

/// Pearson statistic of tested all-measure counts and reflect counts against exact tables.
std::pair<double, double> chi_square(const SiftedStatistics& sampled, const SiftedStatistics& exact) {
  double measure = 0.0;
  const auto n = static_cast<double>(sampled.tested_measure_rounds);
  for (std::size_t m = 0; m < 4; ++m) {
    for (std::size_t i = 0; i < 2; ++i) {
      for (std::size_t j = 0; j < 2; ++j) {
        const double e = n * exact.joint[m][i][j];
        if (e < 1e-9) {
          CHECK(sampled.measure_counts[m][i][j] == 0);
          continue;
        }
        const double o = static_cast<double>(sampled.measure_counts[m][i][j]);
        measure += (o - e) * (o - e) / e;
      }
    }
  }
  double reflect = 0.0;
  const auto nr = static_cast<double>(sampled.reflect_rounds);
  for (std::size_t m = 0; m < 4; ++m) {
    const double e = nr * exact.reflect_bell[m];
    if (e < 1e-9) continue;
    const double o = static_cast<double>(sampled.reflect_counts[m]);
    reflect += (o - e) * (o - e) / e;
  }
  return {measure, reflect};
}

}  // namespace

TEST_CASE("classify_case") {
  CHECK(classify_case(std::array{R, R}, BellOutcome::kPhiPlus) == CaseLabel::kCase1);
  CHECK(classify_case(std::array{M, M}, BellOutcome::kPsiMinus) == CaseLabel::kDiscardedPsi);
  CHECK(classify_case(std::array{M, M}, BellOutcome::kPhiMinus) == CaseLabel::kCase2);
  for (auto b : {BellOutcome::kPhiPlus, BellOutcome::kPhiMinus, BellOutcome::kPsiPlus, BellOutcome::kPsiMinus}) {
    CHECK(classify_case(std::array{M, R, M}, b) == CaseLabel::kCase3);
    CHECK(classify_case(std::array{R, M}, b) == CaseLabel::kCase3);
  }
  CHECK(classify_case(std::array{M, M, M}, std::nullopt) == CaseLabel::kCase2);
}

TEST_CASE("run_round under zero noise") {
  const auto cfg = config(2, 1, 77);
  const StochasticChannel channel{};
  int seen_mm = 0;
  int phi_minus = 0;
  for (std::uint64_t k = 0; k < 4000; ++k) {
    const auto r = run_round(cfg, channel, k);
    REQUIRE(r.choices.size() == 2);
    for (std::size_t p = 0; p < 2; ++p) CHECK(r.outcomes[p].has_value() == (r.choices[p] == M));
    if (r.choices[0] == R && r.choices[1] == R) {
      CHECK(r.announcement == BellOutcome::kPhiPlus);
      CHECK(r.label == CaseLabel::kCase1);
    } else if (r.choices[0] == M && r.choices[1] == M) {
      CHECK(r.outcomes[0] == r.outcomes[1]);
      CHECK(r.label == CaseLabel::kCase2);
      ++seen_mm;
      phi_minus += r.announcement == BellOutcome::kPhiMinus;
    } else {
      CHECK(r.label == CaseLabel::kCase3);
    }
  }
  CHECK(within_sigmas(static_cast<double>(phi_minus) / seen_mm, 0.5, seen_mm) < 3.0);
}

TEST_CASE("two-party noiseless simulation") {
  const auto res = run_simulation(config(2, 100'000, 5), StochasticChannel{});
  std::map<std::string, int> patterns;
  for (const auto& t : res.trials) {
    std::string key;
    for (auto c : t.choices) key += c == M ? 'M' : 'R';
    ++patterns[key];
  }
  REQUIRE(patterns.size() == 4);
  for (const auto& [k, n] : patterns) CHECK(within_sigmas(n / 1e5, 0.25, 1e5) < 3.0);
  CHECK(res.keys.party_keys[0] == res.keys.party_keys[1]);
  CHECK_FALSE(res.keys.party_keys[0].empty());
  CHECK(res.keys.tp_key.empty());
}

TEST_CASE("injected noise is recovered within three standard errors") {
  const StochasticChannel channel{{0.1, 0.1, 0.1}};
  const auto res = run_simulation(config(2, 1'000'000, 2024), channel);
  const auto& n = res.statistics.noise;
  CHECK(std::abs(n.value.q - 0.1) < 3 * n.standard_error.q);
  CHECK(std::abs(n.value.qm - 0.1) < 3 * n.standard_error.qm);
  CHECK(std::abs(n.value.qr - 0.1) < 3 * n.standard_error.qr);
  for (std::size_t i = 0; i < 2; ++i) {
    double mass = 0.0;
    for (std::size_t j = 0; j < 2; ++j) mass += res.statistics.p_c[i][j] + res.statistics.p_w[i][j];
    CHECK(std::abs(mass - 1.0) < 1e-12);
  }
}

TEST_CASE("three-party noiseless simulation") {
  const auto res = run_simulation(config(3, 100'000, 8), StochasticChannel{});
  const auto& counts = res.statistics.case_counts;
  CHECK(within_sigmas(counts[1] / 1e5, 1.0 / 8.0, 1e5) < 3.0);
  CHECK(counts[3] == 0);
  CHECK(res.keys.party_keys.size() == 3);
  CHECK(res.keys.party_keys[0] == res.keys.party_keys[1]);
  CHECK(res.keys.party_keys[1] == res.keys.party_keys[2]);
  CHECK(res.statistics.unproven_multiparty);

  int all_measure = 0;
  int phi_minus = 0;
  for (const auto& t : res.trials) {
    if (t.label == CaseLabel::kCase1) CHECK(t.announcement == BellOutcome::kPhiPlus);
    if (t.label == CaseLabel::kCase2) {
      ++all_measure;
      phi_minus += t.announcement == BellOutcome::kPhiMinus;
    }
  }
  CHECK(within_sigmas(static_cast<double>(phi_minus) / all_measure, 0.5, all_measure) < 3.0);
}

TEST_CASE("sifting uses only non-test case-2 rounds") {
  const auto res = run_simulation(config(2, 50'000, 31), StochasticChannel{{0.2, 0.2, 0.2}});
  std::size_t key_rounds = 0;
  for (const auto& t : res.trials) {
    if (t.label == CaseLabel::kCase2 && !t.test_round) {
      ++key_rounds;
      for (const auto& o : t.outcomes) CHECK(o.has_value());
    }
    if (t.label == CaseLabel::kCase3 || t.label == CaseLabel::kCase1) CHECK_FALSE(t.test_round);
  }
  CHECK(res.keys.party_keys[0].size() == key_rounds);
  CHECK(res.resources.raw_key_bits == res.statistics.case_counts[1]);
}

TEST_CASE("trial lists do not depend on the thread count") {
  auto cfg = config(3, 200'000, 99);
  const StochasticChannel channel{{0.05, 0.1, 0.2}};
  cfg.threads = 1;
  const auto one = run_simulation(cfg, channel);
  cfg.threads = 7;
  const auto seven = run_simulation(cfg, channel);
  CHECK(one.trials == seven.trials);
  CHECK(csv(one) == csv(seven));
  CHECK(one.keys.party_keys == seven.keys.party_keys);
}

TEST_CASE("keep_trials off still yields statistics and keys") {
  auto cfg = config(2, 20'000, 4);
  const auto full = run_simulation(cfg, StochasticChannel{{0.1, 0.1, 0.1}});
  cfg.keep_trials = false;
  const auto lean = run_simulation(cfg, StochasticChannel{{0.1, 0.1, 0.1}});
  CHECK(lean.trials.empty());
  CHECK(lean.keys.party_keys == full.keys.party_keys);
  CHECK(lean.statistics.measure_counts == full.statistics.measure_counts);
}

TEST_CASE("no case-2 round raises NoKeyError") {
  CHECK_THROWS_AS(run_simulation(config(12, 3, 1), StochasticChannel{}), NoKeyError);
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(run_simulation(config(1, 10, 1), StochasticChannel{}), DomainError);
  CHECK_THROWS_AS(run_simulation(config(2, 0, 1), StochasticChannel{}), DomainError);
  auto c = config(2, 10, 1);
  c.test_fraction = 1.0;
  CHECK_THROWS_AS(c.validate(), DomainError);
}

TEST_CASE("sqkd variant replaces the all-measure announcement with a Z readout") {
  auto cfg = config(3, 20'000, 12);
  cfg.variant = Variant::kSqkd;
  const auto res = run_simulation(cfg, StochasticChannel{});
  for (const auto& t : res.trials) {
    const bool all_measure = t.choices[0] == M && t.choices[1] == M && t.choices[2] == M;
    CHECK(t.tp_outcome.has_value() == all_measure);
    CHECK(t.announcement.has_value() == !all_measure);
  }
  CHECK(res.keys.tp_key == res.keys.party_keys[0]);
  std::ostringstream out;
  write_trial_log(res.trials, out);
  CHECK(out.str().find(",Z") != std::string::npos);
}

TEST_CASE("exact statistics of the identity attack") {
  for (std::size_t d : {1u, 3u}) {
    const auto s = exact_statistics_semi_honest(identity_attack(d));
    CHECK(std::abs(s.p_c[0][0] - 1.0) < 1e-12);
    CHECK(std::abs(s.p_c[1][1] - 1.0) < 1e-12);
    CHECK(std::abs(s.p_c[0][1]) < 1e-12);
    CHECK(std::abs(s.p_c[1][0]) < 1e-12);
    for (const auto& row : s.p_w) CHECK(std::abs(row[0]) + std::abs(row[1]) < 1e-12);
    CHECK(std::abs(s.reflect_bell[0] - 1.0) < 1e-12);
    CHECK(std::abs(s.p[0][0] - 0.5) < 1e-12);
  }
}

TEST_CASE("exact untrusted statistics with a qubit flip in V1") {
  const auto honest = honest_source();
  const ComplexMatrix x{{0, 1}, {1, 0}};
  const UntrustedAttack flipped(2, honest.source(), tensor_product(x, ComplexMatrix::identity(2)), honest.v2());
  const auto s = exact_statistics_untrusted(flipped);
  CHECK(std::abs(s.joint[2][0][1] + s.joint[3][0][1] - 0.5) < 1e-12);
  CHECK(std::abs(s.joint[2][1][0] + s.joint[3][1][0] - 0.5) < 1e-12);
  CHECK(std::abs(s.noise.value.q - 1.0) < 1e-12);
  // all-measure rounds now announce psi only
  for (std::size_t m = 0; m < 2; ++m) {
    for (const auto& row : s.joint[m]) CHECK(std::abs(row[0]) + std::abs(row[1]) < 1e-12);
  }
}

TEST_CASE("exact untrusted statistics conserve probability") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto s = exact_statistics_untrusted(random_untrusted_attack(1 + seed % 4, seed));
    double total = 0.0;
    for (const auto& t : s.joint) {
      for (const auto& row : t) total += row[0] + row[1];
    }
    CHECK(std::abs(total - 1.0) < 1e-10);
    double reflect = 0.0;
    for (double v : s.reflect_bell) reflect += v;
    CHECK(std::abs(reflect - 1.0) < 1e-10);
    CHECK(std::abs(s.q[0][0] + s.q[0][1] + s.q[1][0] + s.q[1][1] - 1.0) < 1e-10);
  }
}

TEST_CASE("exact semi-honest branches agree with full-register evolution") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto a = random_collective_attack(1 + seed % 4, seed);
    const auto s = exact_statistics_semi_honest(a);
    const auto br = semi_honest_branches(a);
    for (std::size_t i = 0; i < 2; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < 2; ++j) {
        row += s.p_c[i][j] + s.p_w[i][j];
        double n = 0.0;
        for (const auto& c : br.e[i][j][i]) n += std::norm(c);
        CHECK(std::abs(n - s.p_c[i][j]) < 1e-12);
      }
      CHECK(std::abs(row - 1.0) < 1e-12);
    }
    CHECK(std::abs(s.p[0][0] + s.p[0][1] + s.p[1][0] + s.p[1][1] - 1.0) < 1e-10);
  }
}

TEST_CASE("sampled unitary-attack runs converge to exact statistics") {
  SUBCASE("collective, chi-square at 10^6 rounds") {
    const auto attack = random_collective_attack(2, 404);
    const auto res = run_simulation(config(2, 1'000'000, 1), attack);
    const auto [measure, reflect] = chi_square(res.statistics, exact_statistics_semi_honest(attack));
    CHECK(measure < 37.70);  // 15 degrees of freedom, p = 0.001
    CHECK(reflect < 16.27);  // 3 degrees of freedom
  }
  SUBCASE("untrusted, chi-square at 10^6 rounds") {
    const auto attack = random_untrusted_attack(2, 405);
    const auto res = run_simulation(config(2, 1'000'000, 2), attack);
    const auto [measure, reflect] = chi_square(res.statistics, exact_statistics_untrusted(attack));
    CHECK(measure < 37.70);
    CHECK(reflect < 16.27);
  }
  SUBCASE("collective, every cell within 4 sigma at 10^7 rounds") {
    const auto attack = random_collective_attack(3, 406);
    auto cfg = config(2, 10'000'000, 3);
    cfg.keep_trials = false;
    const auto res = run_simulation(cfg, attack);
    const auto exact = exact_statistics_semi_honest(attack);
    const auto& s = res.statistics;
    const auto n = static_cast<double>(s.tested_measure_rounds);
    for (std::size_t m = 0; m < 4; ++m) {
      for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 2; ++j) CHECK(within_sigmas(s.joint[m][i][j], exact.joint[m][i][j], n) < 4.0);
      }
      CHECK(within_sigmas(s.reflect_bell[m], exact.reflect_bell[m], static_cast<double>(s.reflect_rounds)) < 4.0);
    }
    for (std::size_t i = 0; i < 2; ++i) {
      for (std::size_t j = 0; j < 2; ++j) {
        const double ni = static_cast<double>(s.tested_first_bit[i]);
        CHECK(within_sigmas(s.p_c[i][j], exact.p_c[i][j], ni) < 4.0);
        CHECK(within_sigmas(s.p_w[i][j], exact.p_w[i][j], ni) < 4.0);
      }
    }
  }
}

TEST_CASE("unitary-attack simulation is two-party only") {
  CHECK_THROWS_AS(run_simulation(config(3, 10, 1), identity_attack(1)), DomainError);
}

TEST_CASE("expected statistics of the stochastic channel") {
  const auto s = expected_statistics(StochasticChannel{{0.1, 0.1, 0.1}});
  CHECK(std::abs(s.p_c[0][0] - 0.81) < 1e-12);
  CHECK(std::abs(s.p_c[0][1] - 0.01) < 1e-12);
  CHECK(std::abs(s.p_w[0][0] - 0.09) < 1e-12);
  CHECK(std::abs(s.p_w[0][1] - 0.09) < 1e-12);
  CHECK(std::abs(s.noise.value.q - 0.1) < 1e-12);
  CHECK(std::abs(s.noise.value.qm - 0.1) < 1e-12);
  CHECK(std::abs(s.noise.value.qr - 0.1) < 1e-12);
  CHECK(std::abs(s.reflect_bell[1] - 0.1 / 3) < 1e-12);
}

TEST_CASE("statistics JSON round-trip") {
  const auto res = run_simulation(config(2, 20'000, 6), StochasticChannel{{0.1, 0.1, 0.1}});
  const auto doc = to_json(res.statistics);
  const auto back = statistics_from_json(doc);
  CHECK(back.joint == res.statistics.joint);
  CHECK(back.p_c == res.statistics.p_c);
  CHECK(back.noise.value.q == res.statistics.noise.value.q);
  CHECK(back.noise.standard_error.qm == res.statistics.noise.standard_error.qm);

  auto counts_only = doc;
  counts_only.erase("joint");
  const auto rebuilt = statistics_from_json(counts_only);
  CHECK(rebuilt.joint == res.statistics.joint);
  CHECK_THROWS_AS(statistics_from_json(nlohmann::json::object()), DomainError);
}

TEST_CASE("trial log format") {
  auto cfg = config(3, 40, 2);
  const auto res = run_simulation(cfg, StochasticChannel{});
  std::ostringstream out;
  write_trial_log(res.trials, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "round_index,choices,outcomes,announcement,case");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 4);
  }
  CHECK(rows == 40);
}
