#include "msqkd/metrics.hpp"

#include <cstdio>
#include <numeric>

#include "msqkd/errors.hpp"

namespace msqkd {

namespace {

void require_parties(int parties) {
  if (parties < 2 || parties > 30) throw DomainError("parties must be in [2, 30]");
}

std::string percent(const std::optional<double>& v) {
  if (!v) return "/";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", *v * 100.0);
  return buf;
}

}  // namespace

Rational::Rational(std::int64_t num, std::int64_t den) {
  if (den == 0) throw DomainError("Rational: zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num, den);
  num_ = g ? num / g : num;
  den_ = g ? den / g : den;
}

std::string Rational::str() const { return std::to_string(num_) + "/" + std::to_string(den_); }

Rational operator*(const Rational& a, const Rational& b) { return {a.num_ * b.num_, a.den_ * b.den_}; }

Rational qubit_efficiency(int parties) {
  require_parties(parties);
  const std::int64_t tp_qubits = std::int64_t{1} << (parties + 1);
  const std::int64_t user_qubits = parties * (std::int64_t{1} << (parties - 1));
  return {1, tp_qubits + user_qubits};
}

std::uint64_t communication_cost(int parties) {
  require_parties(parties);
  return static_cast<std::uint64_t>(parties + 1) << parties;
}

const std::vector<ComparisonRow>& comparison_table() {
  static const std::vector<ComparisonRow> rows{
      {"prior protocol A", 0.1065, {1, 24}, 32, false},
      {"prior protocol B", 0.1304, {1, 24}, 32, false},
      {"prior protocol C", std::nullopt, {1, 16}, 24, false},
      {"prior protocol D", std::nullopt, {1, 24}, 32, false},
      {"prior protocol E", std::nullopt, {1, 8}, 12, true},
      {"prior protocol F", 0.091, {1, 12}, 16, false},
      {"this protocol", 0.1319, {1, 12}, 12, true},
  };
  return rows;
}

PerformanceReport performance_report(int parties) {
  return {parties, qubit_efficiency(parties), communication_cost(parties), comparison_table()};
}

MeasuredResources measured_resources(const ResourceTally& tally) {
  if (tally.raw_key_bits == 0) throw NoKeyError("no raw-key round to account resources against");
  const double bits = static_cast<double>(tally.raw_key_bits);
  const double consumed = static_cast<double>(2 * tally.bell_pairs + tally.resent_qubits);
  return {bits / consumed, static_cast<double>(tally.qubit_hops) / bits};
}

std::string format_report(const PerformanceReport& r) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "parties %d\nqubit efficiency %s\ncommunication cost %llu qubits\n\n", r.parties,
                r.qubit_efficiency.str().c_str(), static_cast<unsigned long long>(r.communication_cost));
  out += buf;
  std::snprintf(buf, sizeof buf, "%-16s %-16s %-11s %-14s %s\n", "protocol", "noise tolerance", "efficiency", "cost (qubits)",
                "scalable");
  out += buf;
  for (const auto& row : r.reference_rows) {
    std::snprintf(buf, sizeof buf, "%-16s %-16s %-11s %-14llu %s\n", row.label.c_str(), percent(row.noise_tolerance).c_str(),
                  row.efficiency.str().c_str(), static_cast<unsigned long long>(row.cost_qubits), row.scalable ? "yes" : "no");
    out += buf;
  }
  return out;
}

std::string format_report_csv(const PerformanceReport& r) {
  std::string out = "label,noise_tolerance,efficiency,cost_qubits,scalable\n";
  for (const auto& row : r.reference_rows) {
    out += row.label + ',' + (row.noise_tolerance ? std::to_string(*row.noise_tolerance) : std::string()) + ',' +
           row.efficiency.str() + ',' + std::to_string(row.cost_qubits) + ',' + (row.scalable ? "yes" : "no") + '\n';
  }
  return out;
}

}  // namespace msqkd
