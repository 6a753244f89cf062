// Asymptotic key-rate lower bounds, noise thresholds and sweep curves.

#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "msqkd/attacks.hpp"
#include "msqkd/protocol.hpp"

namespace msqkd {

enum class Scenario { kSemiHonest, kUntrusted };

/// How the untrusted bound treats Re<g^m_01|g^m_10>, which the observed
/// statistics do not constrain.
enum class MismatchPolicy {
  /// Set it to its Cauchy-Schwarz maximum sqrt(g01 g10). It is not a lower
  /// bound on the overlap, so the resulting rate can exceed the true one for
  /// some attacks.
  kMaximalOverlap,
  /// Set it to 0, the worst case for S(A|T); always a valid lower bound.
  kWorstCase,
};

std::string to_string(Scenario s);
Scenario parse_scenario(const std::string& text);  ///< "semi-honest" or "untrusted"

/// H(A, B) - H(B) for a joint table p[a][b]. Throws DomainError on negative
/// entries or a total off 1 by more than 1e-10.
double conditional_entropy_ab(const Table2& p);

struct OverlapBound {
  double raw = 0.0;    ///< formula value before clamping
  double value = 0.0;  ///< value used downstream
  bool clamped = false;
};

/// Lower bound on Re<E^0_{0,0}|E^1_{1,3}> from conditional tables p_c and Q_R.
OverlapBound semi_honest_overlap_bound(const Table2& p_c, double qr);
OverlapBound semi_honest_overlap_bound(const NoiseParameters& noise);
OverlapBound semi_honest_overlap_bound(const SiftedStatistics& stats);

struct SemiHonestIntermediates {
  Table2 p_c{};
  Table2 p{};
  double normalization = 0.0;  ///< N, the accepted mass of p_c
  double h_a_given_b = 0.0;
  double xi1 = 0.0;
  double xi2 = 0.0;
  OverlapBound overlap;
  double lambda_plus = 0.0;
  double lambda_minus = 0.0;
  double s_sigma1 = 0.0;
  double rate = 0.0;
  int clamp_events = 0;
};

/// Throws DomainError if the noise is inadmissible.
SemiHonestIntermediates semi_honest_key_rate(const NoiseParameters& noise);
/// Uses p_c and reflect_bell. Throws DomainError for more than two parties or zero accepted mass.
SemiHonestIntermediates semi_honest_key_rate(const SiftedStatistics& stats);

struct Theorem1Pair {
  double e_norm2 = 0.0;
  double f_norm2 = 0.0;
  double re_overlap = 0.0;
};

/// Lower bound on S(A|T) for sum_i |i><i| (x) (|E_i><E_i| + |F_i><F_i|) / N.
/// Throws DomainError on a Cauchy-Schwarz violation or if N is not the total mass.
double theorem1_bound(std::span<const Theorem1Pair> pairs, double n, int* clamp_events = nullptr);

struct UntrustedOverlap {
  OverlapBound match;  ///< Re<g^m_00|g^m_11>
  double mismatch = 0.0;  ///< Re<g^m_01|g^m_10>
};

/// Uniform-noise parameterization with p_phi- = Q_R / 3; both announcements are treated alike.
UntrustedOverlap untrusted_overlap_bound(const NoiseParameters& noise, int m,
                                         MismatchPolicy policy = MismatchPolicy::kMaximalOverlap);
/// From joint tables and the reflect-branch frequency of announcement m.
UntrustedOverlap untrusted_overlap_bound(const SiftedStatistics& stats, int m,
                                         MismatchPolicy policy = MismatchPolicy::kMaximalOverlap);

struct UntrustedIntermediates {
  std::array<Table2, 2> g_norms{};  ///< [m][i][j], m in {phi+, phi-}
  Table2 q{};
  double n_prime = 0.0;
  std::array<double, 2> overlap_match{};
  std::array<double, 2> overlap_mismatch{};
  /// [pair][m]; pair 0 is (00, 11), pair 1 is (01, 10).
  std::array<std::array<double, 2>, 2> lambda{};
  double s_a_given_t = 0.0;
  double h_a_given_b = 0.0;
  double rate = 0.0;
  int clamp_events = 0;
};

UntrustedIntermediates untrusted_key_rate(const NoiseParameters& noise,
                                          MismatchPolicy policy = MismatchPolicy::kMaximalOverlap);
UntrustedIntermediates untrusted_key_rate(const SiftedStatistics& stats,
                                          MismatchPolicy policy = MismatchPolicy::kMaximalOverlap);

/// Rate under Q = Q_M = Q_R = q.
double scenario_rate(Scenario scenario, double q, MismatchPolicy policy = MismatchPolicy::kMaximalOverlap);

struct BisectionResult {
  double root = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  int iterations = 0;
};

/// Bisection until hi - lo < tol. Throws DomainError if f(lo) and f(hi) share a sign.
BisectionResult bisect_root(const std::function<double(double)>& f, double lo, double hi, double tol);

struct ThresholdResult {
  Scenario scenario = Scenario::kSemiHonest;
  double threshold_q = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  int iterations = 0;
};

/// Largest uniform noise with a positive rate, searched on [0, 0.25].
ThresholdResult noise_threshold(Scenario scenario, double tol = 1e-6,
                                MismatchPolicy policy = MismatchPolicy::kMaximalOverlap);

struct SweepPoint {
  double q = 0.0;
  double rate = 0.0;
};

struct SweepCurve {
  Scenario scenario = Scenario::kSemiHonest;
  std::vector<SweepPoint> points;
  /// Grid points before the first sign change where the rate rose.
  std::vector<double> monotonicity_violations;
};

/// Uniform grid of `steps` points on [q_lo, q_hi]. Requires 0 <= q_lo < q_hi <= 0.5 and steps >= 2.
SweepCurve sweep(Scenario scenario, double q_lo, double q_hi, int steps,
                 MismatchPolicy policy = MismatchPolicy::kMaximalOverlap);

/// "q,rate,scenario" with six decimals and a trailing newline.
std::string sweep_csv(const SweepCurve& curve);
void write_sweep_csv(const SweepCurve& curve, const std::filesystem::path& path);

}  // namespace msqkd
