#include "msqkd/keyrate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "msqkd/errors.hpp"
#include "msqkd/io.hpp"
#include "msqkd/tolerances.hpp"

namespace msqkd {

namespace {

double sqrt_product(double x, double y) { return std::sqrt(std::max(x, 0.0) * std::max(y, 0.0)); }

/// lambda = 1/2 + sqrt(num) / den, capped at 1 with the cap recorded.
double capped_lambda(double num, double den, int& clamps) {
  const double lam = 0.5 + std::sqrt(std::max(num, 0.0)) / den;
  if (lam > 1.0) {
    if (lam > 1.0 + tol::kSpectrumClamp) ++clamps;
    return 1.0;
  }
  return lam;
}

OverlapBound clamp_overlap(double raw, double upper) {
  OverlapBound out{raw, raw, false};
  if (raw < 0.0) {
    out.value = 0.0;
    out.clamped = true;
  } else if (raw > upper) {
    out.value = upper;
    out.clamped = true;
  }
  return out;
}

Table2 symmetric_table(double diag, double off) { return {{{diag, off}, {off, diag}}}; }

SemiHonestIntermediates semi_honest_core(const Table2& p_c, double qr) {
  SemiHonestIntermediates r;
  r.p_c = p_c;
  r.normalization = p_c[0][0] + p_c[0][1] + p_c[1][0] + p_c[1][1];
  if (!(r.normalization > 0.0)) throw DomainError("no accepted mass: every all-measure round was discarded");
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) r.p[i][j] = p_c[i][j] / r.normalization;
  }
  const auto& p = r.p;
  r.xi1 = p[0][0] + p[1][1];
  r.xi2 = p[0][1] + p[1][0];
  if (!(r.xi1 > 0.0)) throw DomainError("no matched-key mass: the semi-honest bound is undefined");
  r.h_a_given_b = conditional_entropy_ab(p);
  r.overlap = semi_honest_overlap_bound(p_c, qr);
  if (r.overlap.clamped) ++r.clamp_events;

  const double n = r.normalization;
  const double diff = n * (p[0][0] - p[1][1]);
  r.lambda_plus = capped_lambda(diff * diff + 4.0 * r.overlap.value * r.overlap.value, 2.0 * n * r.xi1, r.clamp_events);
  r.lambda_minus = 1.0 - r.lambda_plus;
  r.s_sigma1 = binary_entropy(r.lambda_plus);
  r.rate = shannon_entropy({p[0][0] + p[1][0], p[0][1] + p[1][1]}) - p[1][0] - p[0][1] - r.xi1 * r.s_sigma1 -
           shannon_entropy({r.xi1, r.xi2});
  return r;
}

double semi_honest_rate_unchecked(const NoiseParameters& noise) {
  const double a = (1.0 - noise.q) * (1.0 - noise.qm);
  const double b = noise.q * noise.qm;
  return semi_honest_core(symmetric_table(a, b), noise.qr).rate;
}

UntrustedIntermediates untrusted_core(const std::array<Table2, 2>& g, const Table2& q,
                                      const std::array<UntrustedOverlap, 2>& overlaps) {
  UntrustedIntermediates r;
  r.g_norms = g;
  r.q = q;
  for (const auto& t : g) {
    for (const auto& row : t) r.n_prime += row[0] + row[1];
  }
  if (!(r.n_prime > 0.0)) throw DomainError("no accepted mass: every all-measure round was discarded");

  std::vector<Theorem1Pair> pairs;
  for (std::size_t m = 0; m < 2; ++m) {
    const auto& n = g[m];
    r.overlap_match[m] = overlaps[m].match.value;
    r.overlap_mismatch[m] = overlaps[m].mismatch;
    if (overlaps[m].match.clamped) ++r.clamp_events;
    pairs.push_back({n[0][0], n[1][1], r.overlap_match[m]});
    pairs.push_back({n[0][1], n[1][0], r.overlap_mismatch[m]});
    for (std::size_t k = 0; k < 2; ++k) {
      const auto& pr = pairs[pairs.size() - 2 + k];
      const double tot = pr.e_norm2 + pr.f_norm2;
      int ignored = 0;
      r.lambda[k][m] = tot > 0.0 ? capped_lambda((pr.e_norm2 - pr.f_norm2) * (pr.e_norm2 - pr.f_norm2) +
                                                     4.0 * pr.re_overlap * pr.re_overlap,
                                                 2.0 * tot, ignored)
                                 : 1.0;
    }
  }
  r.s_a_given_t = theorem1_bound(pairs, r.n_prime, &r.clamp_events);
  r.h_a_given_b = conditional_entropy_ab(q);
  r.rate = r.s_a_given_t - r.h_a_given_b;
  return r;
}

std::array<Table2, 2> untrusted_noise_norms(const NoiseParameters& noise) {
  const double a = (1.0 - noise.q) * (1.0 - noise.qm);
  const double b = noise.q * noise.qm;
  const auto t = symmetric_table(0.5 * a, 0.5 * b);
  return {t, t};
}

double untrusted_rate_unchecked(const NoiseParameters& noise, MismatchPolicy policy) {
  const auto g = untrusted_noise_norms(noise);
  const double a = (1.0 - noise.q) * (1.0 - noise.qm);
  const double b = noise.q * noise.qm;
  const auto q = symmetric_table(0.5 * a / (a + b), 0.5 * b / (a + b));
  return untrusted_core(g, q, {untrusted_overlap_bound(noise, 0, policy), untrusted_overlap_bound(noise, 1, policy)}).rate;
}

double rate_unchecked(Scenario scenario, double q, MismatchPolicy policy) {
  const auto noise = NoiseParameters::uniform(q);
  return scenario == Scenario::kSemiHonest ? semi_honest_rate_unchecked(noise) : untrusted_rate_unchecked(noise, policy);
}

void require_two_parties(const SiftedStatistics& stats) {
  if (stats.parties != 2) {
    throw DomainError("no key-rate bound exists for " + std::to_string(stats.parties) + " parties");
  }
}

}  // namespace

std::string to_string(Scenario s) { return s == Scenario::kSemiHonest ? "semi-honest" : "untrusted"; }

Scenario parse_scenario(const std::string& text) {
  if (text == "semi-honest") return Scenario::kSemiHonest;
  if (text == "untrusted") return Scenario::kUntrusted;
  throw DomainError("unknown scenario \"" + text + "\" (expected semi-honest or untrusted)");
}

double conditional_entropy_ab(const Table2& p) {
  double total = 0.0;
  for (const auto& row : p) {
    for (double v : row) {
      if (v < -tol::kConstruction) throw DomainError("conditional_entropy_ab: negative probability");
      total += v;
    }
  }
  if (std::abs(total - 1.0) > tol::kEvolution) throw DomainError("conditional_entropy_ab: table does not sum to 1");
  const double joint = shannon_entropy({p[0][0], p[0][1], p[1][0], p[1][1]});
  return std::max(0.0, joint - shannon_entropy({p[0][0] + p[1][0], p[0][1] + p[1][1]}));
}

OverlapBound semi_honest_overlap_bound(const Table2& pc, double qr) {
  const double raw = 2.0 - 2.0 * qr -
                     (sqrt_product(pc[0][0], pc[1][0]) + sqrt_product(pc[0][1], pc[1][1]) + sqrt_product(pc[0][1], pc[1][0])) -
                     0.5 * (pc[0][0] + 2.0 * sqrt_product(pc[0][0], pc[0][1]) + pc[0][1]) -
                     0.5 * (pc[1][0] + 2.0 * sqrt_product(pc[1][0], pc[1][1]) + pc[1][1]);
  OverlapBound out{raw, raw, false};
  if (raw < 0.0) {
    out.value = 0.0;
    out.clamped = true;
  }
  return out;
}

OverlapBound semi_honest_overlap_bound(const NoiseParameters& noise) {
  noise.validate();
  const double a = (1.0 - noise.q) * (1.0 - noise.qm);
  const double b = noise.q * noise.qm;
  return semi_honest_overlap_bound(symmetric_table(a, b), noise.qr);
}

OverlapBound semi_honest_overlap_bound(const SiftedStatistics& stats) {
  return semi_honest_overlap_bound(stats.p_c, 1.0 - stats.reflect_bell[0]);
}

SemiHonestIntermediates semi_honest_key_rate(const NoiseParameters& noise) {
  noise.require_admissible();
  const double a = (1.0 - noise.q) * (1.0 - noise.qm);
  const double b = noise.q * noise.qm;
  return semi_honest_core(symmetric_table(a, b), noise.qr);
}

SemiHonestIntermediates semi_honest_key_rate(const SiftedStatistics& stats) {
  require_two_parties(stats);
  return semi_honest_core(stats.p_c, 1.0 - stats.reflect_bell[0]);
}

double theorem1_bound(std::span<const Theorem1Pair> pairs, double n, int* clamp_events) {
  double mass = 0.0;
  for (const auto& p : pairs) {
    if (p.e_norm2 < -tol::kConstruction || p.f_norm2 < -tol::kConstruction) {
      throw DomainError("theorem1_bound: negative squared norm");
    }
    if (std::abs(p.re_overlap) > sqrt_product(p.e_norm2, p.f_norm2) + tol::kConstruction) {
      throw DomainError("theorem1_bound: overlap violates Cauchy-Schwarz");
    }
    mass += p.e_norm2 + p.f_norm2;
  }
  if (std::abs(mass - n) > tol::kEvolution) throw DomainError("theorem1_bound: N differs from the total mass");

  int clamps = 0;
  double s = 0.0;
  for (const auto& p : pairs) {
    const double e = std::max(p.e_norm2, 0.0);
    const double f = std::max(p.f_norm2, 0.0);
    const double tot = e + f;
    if (tot <= 0.0) continue;
    const double lam = capped_lambda((e - f) * (e - f) + 4.0 * p.re_overlap * p.re_overlap, 2.0 * tot, clamps);
    s += tot / n * (binary_entropy(e / tot) - binary_entropy(lam));
  }
  if (clamp_events) *clamp_events += clamps;
  return s;
}

UntrustedOverlap untrusted_overlap_bound(const NoiseParameters& noise, int m, MismatchPolicy policy) {
  noise.validate();
  if (m != 0 && m != 1) throw DomainError("untrusted_overlap_bound: m must be 0 or 1");
  const double a = (1.0 - noise.q) * (1.0 - noise.qm);
  const double b = noise.q * noise.qm;
  const double p_wrong = noise.qr / 3.0;
  const double raw = std::abs(0.5 * (a + b) - 0.5 * p_wrong) - 2.0 * std::sqrt(a * b) - 0.5 * b;
  UntrustedOverlap out;
  out.match = clamp_overlap(raw, 0.5 * a);
  out.mismatch = policy == MismatchPolicy::kMaximalOverlap ? 0.5 * b : 0.0;
  return out;
}

UntrustedOverlap untrusted_overlap_bound(const SiftedStatistics& stats, int m, MismatchPolicy policy) {
  if (m != 0 && m != 1) throw DomainError("untrusted_overlap_bound: m must be 0 or 1");
  const auto& n = stats.joint[static_cast<std::size_t>(m)];
  const double total = n[0][0] + n[0][1] + n[1][0] + n[1][1];
  const double raw = std::abs(0.5 * stats.reflect_bell[static_cast<std::size_t>(m)] - 0.5 * total) -
                     sqrt_product(n[0][0], n[0][1]) - sqrt_product(n[0][0], n[1][0]) - sqrt_product(n[1][1], n[1][0]) -
                     sqrt_product(n[0][1], n[1][1]) - sqrt_product(n[0][1], n[1][0]);
  UntrustedOverlap out;
  out.match = clamp_overlap(raw, sqrt_product(n[0][0], n[1][1]));
  out.mismatch = policy == MismatchPolicy::kMaximalOverlap ? sqrt_product(n[0][1], n[1][0]) : 0.0;
  return out;
}

UntrustedIntermediates untrusted_key_rate(const NoiseParameters& noise, MismatchPolicy policy) {
  noise.require_admissible();
  const double a = (1.0 - noise.q) * (1.0 - noise.qm);
  const double b = noise.q * noise.qm;
  const auto q = symmetric_table(0.5 * a / (a + b), 0.5 * b / (a + b));
  return untrusted_core(untrusted_noise_norms(noise), q,
                        {untrusted_overlap_bound(noise, 0, policy), untrusted_overlap_bound(noise, 1, policy)});
}

UntrustedIntermediates untrusted_key_rate(const SiftedStatistics& stats, MismatchPolicy policy) {
  require_two_parties(stats);
  const std::array<Table2, 2> g{stats.joint[0], stats.joint[1]};
  return untrusted_core(g, stats.q,
                        {untrusted_overlap_bound(stats, 0, policy), untrusted_overlap_bound(stats, 1, policy)});
}

double scenario_rate(Scenario scenario, double q, MismatchPolicy policy) {
  const auto noise = NoiseParameters::uniform(q);
  return scenario == Scenario::kSemiHonest ? semi_honest_key_rate(noise).rate : untrusted_key_rate(noise, policy).rate;
}

BisectionResult bisect_root(const std::function<double(double)>& f, double lo, double hi, double tol) {
  if (!(lo < hi) || !(tol > 0.0)) throw DomainError("bisect_root: need lo < hi and tol > 0");
  double flo = f(lo);
  const double fhi = f(hi);
  if (flo == 0.0) return {lo, lo, lo, 0};
  if (fhi == 0.0) return {hi, hi, hi, 0};
  if ((flo > 0.0) == (fhi > 0.0)) {
    throw DomainError("no sign change on [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  BisectionResult r{0.0, lo, hi, 0};
  while (r.hi - r.lo >= tol) {
    const double mid = 0.5 * (r.lo + r.hi);
    const double fm = f(mid);
    ++r.iterations;
    if (fm == 0.0) {
      r.lo = r.hi = mid;
      break;
    }
    if ((fm > 0.0) == (flo > 0.0)) {
      r.lo = mid;
      flo = fm;
    } else {
      r.hi = mid;
    }
  }
  r.root = 0.5 * (r.lo + r.hi);
  return r;
}

ThresholdResult noise_threshold(Scenario scenario, double tol, MismatchPolicy policy) {
  const auto b = bisect_root([&](double q) { return scenario_rate(scenario, q, policy); }, 0.0, 0.25, tol);
  return {scenario, b.root, b.lo, b.hi, b.iterations};
}

SweepCurve sweep(Scenario scenario, double q_lo, double q_hi, int steps, MismatchPolicy policy) {
  if (!(q_lo >= 0.0 && q_lo < q_hi && q_hi <= 0.5)) throw DomainError("sweep: need 0 <= from < to <= 0.5");
  if (steps < 2) throw DomainError("sweep: need at least 2 steps");
  SweepCurve curve;
  curve.scenario = scenario;
  const double step = (q_hi - q_lo) / (steps - 1);
  bool crossed = false;
  for (int k = 0; k < steps; ++k) {
    const double q = k == steps - 1 ? q_hi : q_lo + step * k;
    const double rate = rate_unchecked(scenario, q, policy);
    if (!curve.points.empty() && !crossed && rate > curve.points.back().rate + tol::kConstruction) {
      curve.monotonicity_violations.push_back(q);
    }
    if (rate <= 0.0) crossed = true;
    curve.points.push_back({q, rate});
  }
  return curve;
}

std::string sweep_csv(const SweepCurve& curve) {
  std::string out = "q,rate,scenario\n";
  const auto label = to_string(curve.scenario);
  char buf[96];
  for (const auto& p : curve.points) {
    // avoid printing "-0.000000"
    const double rate = std::abs(p.rate) < 5e-7 ? 0.0 : p.rate;
    std::snprintf(buf, sizeof buf, "%.6f,%.6f,", p.q, rate);
    out += buf;
    out += label;
    out += '\n';
  }
  return out;
}

void write_sweep_csv(const SweepCurve& curve, const std::filesystem::path& path) {
  if (curve.points.empty()) throw DomainError("write_sweep_csv: empty curve");
  write_text_file(path, sweep_csv(curve));
}

}  // namespace msqkd
