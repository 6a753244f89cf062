#include <doctest.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "msqkd/errors.hpp"
#include "msqkd/keyrate.hpp"
#include "../oracles/density_oracle.hpp"

using namespace msqkd;

// Reference values below come from tests/oracles/closed_form_oracle.py (mpmath, 40 digits).
namespace ref {
constexpr double kSemiHonestThreshold = 0.16013353774904071;
constexpr double kUntrustedThreshold = 0.12098435265432277;
constexpr double kSemiHonestRate008 = 0.48075539468241246;
constexpr double kUntrustedRate005 = 0.46062565252945379;
constexpr double kHAGivenB01 = 0.095017245671076342;
}  // namespace ref

TEST_CASE("conditional_entropy_ab") {
  CHECK(conditional_entropy_ab({{{0.5, 0.0}, {0.0, 0.5}}}) == doctest::Approx(0.0));
  CHECK(conditional_entropy_ab({{{0.25, 0.25}, {0.25, 0.25}}}) == doctest::Approx(1.0));
  const double a = 0.81;
  const double b = 0.01;
  const double n = 2 * (a + b);
  const double h = conditional_entropy_ab({{{a / n, b / n}, {b / n, a / n}}});
  CHECK(std::abs(h - ref::kHAGivenB01) < 1e-14);
  CHECK(std::abs(h - binary_entropy(b / (a + b))) < 1e-14);
  CHECK_THROWS_AS(conditional_entropy_ab({{{0.6, -0.1}, {0.25, 0.25}}}), DomainError);
  CHECK_THROWS_AS(conditional_entropy_ab({{{0.5, 0.5}, {0.5, 0.5}}}), DomainError);
}

TEST_CASE("semi-honest overlap bound") {
  CHECK(semi_honest_overlap_bound(NoiseParameters::uniform(0.0)).value == doctest::Approx(1.0));
  const auto mid = semi_honest_overlap_bound(NoiseParameters::uniform(0.1));
  CHECK(std::abs(mid.value - 0.61) < 1e-12);
  CHECK_FALSE(mid.clamped);
  const auto high = semi_honest_overlap_bound(NoiseParameters::uniform(0.45));
  CHECK(high.raw < 0.0);
  CHECK(high.value == 0.0);
  CHECK(high.clamped);
}

TEST_CASE("semi-honest general overlap reduces to the symmetric closed form") {
  for (double q : {0.0, 0.03, 0.1, 0.2}) {
    for (double qm : {0.0, 0.07, 0.15}) {
      for (double qr : {0.0, 0.1, 0.3}) {
        const double a = (1 - q) * (1 - qm);
        const double b = q * qm;
        const auto v = semi_honest_overlap_bound(Table2{{{a, b}, {b, a}}}, qr);
        CHECK(std::abs(v.raw - (2 - 2 * qr - 4 * std::sqrt(a * b) - 2 * b - a)) < 1e-12);
      }
    }
  }
}

TEST_CASE("semi-honest key rate reference points") {
  const auto zero = semi_honest_key_rate(NoiseParameters::uniform(0.0));
  CHECK(zero.rate == 1.0);
  CHECK(zero.lambda_plus == 1.0);
  CHECK(zero.s_sigma1 == 0.0);
  CHECK(zero.h_a_given_b == 0.0);

  CHECK(std::abs(semi_honest_key_rate(NoiseParameters::uniform(0.08)).rate - ref::kSemiHonestRate008) < 1e-12);
  CHECK(std::abs(semi_honest_key_rate(NoiseParameters::uniform(0.1602)).rate) < 0.002);
  CHECK_THROWS_AS(semi_honest_key_rate(NoiseParameters::uniform(0.5)), DomainError);
}

TEST_CASE("semi-honest intermediates satisfy their invariants") {
  for (double q = 0.0; q < 0.45; q += 0.01) {
    for (double qr : {0.0, q, 0.5}) {
      const auto r = semi_honest_key_rate(NoiseParameters{q, q * 0.7, qr});
      CHECK(std::abs(r.xi1 + r.xi2 - 1.0) < 1e-10);
      CHECK(std::abs(r.lambda_plus + r.lambda_minus - 1.0) < 1e-10);
      CHECK(r.lambda_plus >= 0.5);
      CHECK(r.lambda_plus <= 1.0);
      CHECK(r.s_sigma1 >= 0.0);
      CHECK(r.s_sigma1 <= 1.0);
      CHECK(std::isfinite(r.rate));
    }
  }
}

TEST_CASE("statistics and noise paths agree on the channel's own tables") {
  for (double q : {0.0, 0.05, 0.1, 0.15}) {
    const auto noise = NoiseParameters::uniform(q);
    const auto stats = expected_statistics(StochasticChannel{noise});
    CHECK(std::abs(semi_honest_key_rate(stats).rate - semi_honest_key_rate(noise).rate) < 1e-12);
  }
}

TEST_CASE("theorem1_bound reference cases") {
  const std::array<Theorem1Pair, 1> orthogonal{{{0.5, 0.5, 0.0}}};
  CHECK(std::abs(theorem1_bound(orthogonal, 1.0)) < 1e-15);
  const std::array<Theorem1Pair, 1> identical{{{0.5, 0.5, 0.5}}};
  CHECK(std::abs(theorem1_bound(identical, 1.0) - 1.0) < 1e-15);
  const std::array<Theorem1Pair, 1> bad{{{0.5, 0.5, 0.6}}};
  CHECK_THROWS_AS(theorem1_bound(bad, 1.0), DomainError);
  CHECK_THROWS_AS(theorem1_bound(identical, 2.0), DomainError);
  const std::array<Theorem1Pair, 2> with_empty{{{0.5, 0.5, 0.5}, {0.0, 0.0, 0.0}}};
  CHECK(std::abs(theorem1_bound(with_empty, 1.0) - 1.0) < 1e-15);
}

TEST_CASE("theorem1_bound never exceeds the exact conditional entropy") {
  CounterRng rng(21, StreamTag::kAttack, 0);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int t = 0; t < 300; ++t) {
    const auto dim = static_cast<Eigen::Index>(1 + t % 8);
    const std::size_t pairs = 1 + static_cast<std::size_t>(t % 3);
    std::vector<oracle::Vec> e;
    std::vector<oracle::Vec> f;
    std::vector<Theorem1Pair> in;
    double n = 0.0;
    for (std::size_t k = 0; k < pairs; ++k) {
      oracle::Vec a(dim);
      oracle::Vec b(dim);
      for (Eigen::Index i = 0; i < dim; ++i) {
        a(i) = {g(rng), g(rng)};
        b(i) = {g(rng), g(rng)};
      }
      e.push_back(a);
      f.push_back(b);
      in.push_back({a.squaredNorm(), b.squaredNorm(), a.dot(b).real()});
      n += a.squaredNorm() + b.squaredNorm();
    }
    CHECK(theorem1_bound(in, n) <= oracle::theorem1_exact(e, f) + 1e-9);
  }
}

TEST_CASE("theorem1_bound is exact for parallel or orthogonal pairs") {
  // pair k lives in its own two-dimensional block, so distinct pairs are orthogonal
  CounterRng rng(22, StreamTag::kAttack, 0);
  for (int t = 0; t < 50; ++t) {
    const std::size_t pairs = 1 + static_cast<std::size_t>(t % 4);
    const auto dim = static_cast<Eigen::Index>(2 * pairs);
    std::vector<oracle::Vec> e;
    std::vector<oracle::Vec> f;
    std::vector<Theorem1Pair> in;
    double n = 0.0;
    for (std::size_t k = 0; k < pairs; ++k) {
      const double ea = 0.1 + rng.uniform();
      const double fa = 0.1 + rng.uniform();
      const bool parallel = rng.bit();
      oracle::Vec a = oracle::Vec::Zero(dim);
      oracle::Vec b = oracle::Vec::Zero(dim);
      a(static_cast<Eigen::Index>(2 * k)) = ea;
      b(static_cast<Eigen::Index>(2 * k + (parallel ? 0 : 1))) = fa;
      e.push_back(a);
      f.push_back(b);
      in.push_back({ea * ea, fa * fa, parallel ? ea * fa : 0.0});
      n += ea * ea + fa * fa;
    }
    CHECK(std::abs(theorem1_bound(in, n) - oracle::theorem1_exact(e, f)) < 1e-9);
  }
}

TEST_CASE("untrusted overlap bound") {
  const auto zero = untrusted_overlap_bound(NoiseParameters::uniform(0.0), 1);
  CHECK(zero.match.value == doctest::Approx(0.5));
  CHECK(zero.mismatch == 0.0);
  const auto mid = untrusted_overlap_bound(NoiseParameters::uniform(0.1), 1);
  CHECK(std::abs(mid.match.value - (0.41 - 0.1 / 6 - 0.18 - 0.005)) < 1e-12);
  CHECK(std::abs(mid.mismatch - 0.005) < 1e-12);
  CHECK(untrusted_overlap_bound(NoiseParameters::uniform(0.1), 1, MismatchPolicy::kWorstCase).mismatch == 0.0);
  CHECK_THROWS_AS(untrusted_overlap_bound(NoiseParameters::uniform(0.1), 2), DomainError);
}

TEST_CASE("untrusted key rate reference points") {
  const auto zero = untrusted_key_rate(NoiseParameters::uniform(0.0));
  CHECK(zero.rate == 1.0);
  CHECK(std::abs(untrusted_key_rate(NoiseParameters::uniform(0.05)).rate - ref::kUntrustedRate005) < 1e-12);
  const auto r = untrusted_key_rate(NoiseParameters::uniform(0.1));
  CHECK(std::abs(r.h_a_given_b - ref::kHAGivenB01) < 1e-12);
  CHECK(std::abs(r.q[0][0] + r.q[0][1] + r.q[1][0] + r.q[1][1] - 1.0) < 1e-12);
  for (const auto& row : r.lambda) {
    for (double l : row) {
      CHECK(l >= 0.5);
      CHECK(l <= 1.0);
    }
  }
  CHECK(untrusted_key_rate(NoiseParameters::uniform(0.1), MismatchPolicy::kWorstCase).rate < r.rate);
}

TEST_CASE("rates are finite across the admissible region") {
  for (double q = 0.0; q < 0.5; q += 0.02) {
    for (double qm = 0.0; qm < 0.5; qm += 0.04) {
      for (double qr = 0.0; qr <= 1.0; qr += 0.1) {
        const NoiseParameters n{q, qm, qr};
        CHECK(std::isfinite(semi_honest_key_rate(n).rate));
        CHECK(std::isfinite(untrusted_key_rate(n).rate));
      }
    }
  }
}

TEST_CASE("noise thresholds") {
  const auto semi = noise_threshold(Scenario::kSemiHonest);
  CHECK(std::abs(semi.threshold_q - 0.1602) < 0.001);
  CHECK(std::abs(semi.threshold_q - ref::kSemiHonestThreshold) < 1e-6);
  CHECK(semi.hi - semi.lo < 1e-6);

  const auto untrusted = noise_threshold(Scenario::kUntrusted);
  CHECK(std::abs(untrusted.threshold_q - ref::kUntrustedThreshold) < 1e-6);

  for (const auto& t : {semi, untrusted}) {
    CHECK(scenario_rate(t.scenario, t.threshold_q - 1e-4) > 0.0);
    CHECK(scenario_rate(t.scenario, t.threshold_q + 1e-4) < 0.0);
    CHECK(std::abs(noise_threshold(t.scenario, 1e-8).threshold_q - t.threshold_q) < 1e-5);
  }
}

TEST_CASE("bisect_root contract") {
  const auto r = bisect_root([](double q) { return 0.1 - q; }, 0.0, 0.25, 1e-9);
  CHECK(std::abs(r.root - 0.1) < 1e-9);
  CHECK_THROWS_WITH_AS(bisect_root([](double q) { return 0.5 - q; }, 0.0, 0.25, 1e-6),
                       doctest::Contains("no sign change"), DomainError);
}

TEST_CASE("sweeps") {
  const auto semi = sweep(Scenario::kSemiHonest, 0.0, 0.2, 201);
  REQUIRE(semi.points.size() == 201);
  CHECK(semi.points.front().rate == 1.0);
  CHECK(semi.monotonicity_violations.empty());
  for (std::size_t k = 1; k < semi.points.size(); ++k) {
    if (semi.points[k - 1].rate > 0.0 && semi.points[k].rate <= 0.0) {
      CHECK(semi.points[k - 1].q >= 0.159);
      CHECK(semi.points[k].q <= 0.161);
    }
  }
  const auto untrusted = sweep(Scenario::kUntrusted, 0.0, 0.2, 201);
  CHECK(untrusted.monotonicity_violations.empty());
  CHECK(untrusted.points.front().rate == 1.0);

  CHECK_THROWS_AS(sweep(Scenario::kSemiHonest, 0.0, 0.0, 10), DomainError);
  CHECK_THROWS_AS(sweep(Scenario::kSemiHonest, 0.0, 0.6, 10), DomainError);
  CHECK_THROWS_AS(sweep(Scenario::kSemiHonest, 0.0, 0.2, 1), DomainError);
  CHECK_NOTHROW(sweep(Scenario::kUntrusted, 0.4, 0.5, 3));
}

TEST_CASE("sweep CSV output") {
  const auto curve = sweep(Scenario::kSemiHonest, 0.0, 0.2, 3);
  const auto text = sweep_csv(curve);
  CHECK(std::count(text.begin(), text.end(), '\n') == 4);
  CHECK(text.rfind("q,rate,scenario\n0.000000,1.000000,semi-honest\n", 0) == 0);
  CHECK(text.back() == '\n');

  const auto dir = std::filesystem::temp_directory_path();
  const auto a = dir / "msqkd_sweep_a.csv";
  const auto b = dir / "msqkd_sweep_b.csv";
  write_sweep_csv(sweep(Scenario::kUntrusted, 0.0, 0.2, 51), a);
  write_sweep_csv(sweep(Scenario::kUntrusted, 0.0, 0.2, 51), b);
  auto slurp = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  CHECK(slurp(a) == slurp(b));
  std::filesystem::remove(a);
  std::filesystem::remove(b);
  CHECK_THROWS(write_sweep_csv(curve, dir / "no_such_dir" / "x.csv"));
}

TEST_CASE("semi-honest bound is sound against random collective attacks") {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const auto attack = random_collective_attack(1 + seed % 4, 1000 + seed);
    const double bound = semi_honest_key_rate(exact_statistics_semi_honest(attack)).rate;
    CHECK(bound <= oracle::semi_honest_true_rate(attack).rate() + 1e-9);
  }
}

TEST_CASE("untrusted bound with the worst-case mismatch overlap is sound") {
  int maximal_violations = 0;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const auto attack = random_untrusted_attack(1 + seed % 4, 2000 + seed);
    const auto stats = exact_statistics_untrusted(attack);
    const double truth = oracle::untrusted_true_rate(attack).rate();
    CHECK(untrusted_key_rate(stats, MismatchPolicy::kWorstCase).rate <= truth + 1e-9);
    maximal_violations += untrusted_key_rate(stats, MismatchPolicy::kMaximalOverlap).rate > truth + 1e-9;
  }
  // the maximal mismatch overlap is an assumption, not a bound; it fails on some attacks
  CHECK(maximal_violations > 0);
}

TEST_CASE("key rates from statistics need two parties") {
  auto stats = expected_statistics(StochasticChannel{NoiseParameters::uniform(0.05)});
  stats.parties = 3;
  CHECK_THROWS_AS(semi_honest_key_rate(stats), DomainError);
  CHECK_THROWS_AS(untrusted_key_rate(stats), DomainError);
}

TEST_CASE("thresholds are fast") {
  const auto start = std::chrono::steady_clock::now();
  (void)noise_threshold(Scenario::kSemiHonest);
  (void)noise_threshold(Scenario::kUntrusted);
  CHECK(std::chrono::steady_clock::now() - start < std::chrono::seconds(1));
}
