// Qubit efficiency, communication cost and the reference comparison table.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "msqkd/protocol.hpp"

namespace msqkd {

/// Reduced fraction with a positive denominator.
class Rational {
 public:
  Rational(std::int64_t num, std::int64_t den);

  std::int64_t num() const noexcept { return num_; }
  std::int64_t den() const noexcept { return den_; }
  double value() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }
  std::string str() const;

  friend bool operator==(const Rational&, const Rational&) = default;
  friend Rational operator*(const Rational& a, const Rational& b);

 private:
  std::int64_t num_;
  std::int64_t den_;
};

/// Raw-key bits per qubit consumed, noiseless counting: 1 / (2^(L+1) + L 2^(L-1)).
/// Throws DomainError for L < 2 or L > 30.
Rational qubit_efficiency(int parties);

/// Qubit transmissions per raw-key bit: (L + 1) 2^L.
std::uint64_t communication_cost(int parties);

struct ComparisonRow {
  std::string label;
  std::optional<double> noise_tolerance;  ///< absent where the reference reports none
  Rational efficiency;
  std::uint64_t cost_qubits = 0;
  bool scalable = false;
};

struct PerformanceReport {
  int parties = 2;
  Rational qubit_efficiency{1, 12};
  std::uint64_t communication_cost = 12;
  std::vector<ComparisonRow> reference_rows;
};

/// Published figures of comparable protocols, then this protocol's row.
const std::vector<ComparisonRow>& comparison_table();

PerformanceReport performance_report(int parties);

/// Efficiency and cost measured from a simulator tally (per case-2 round).
struct MeasuredResources {
  double qubit_efficiency = 0.0;
  double communication_cost = 0.0;
};
MeasuredResources measured_resources(const ResourceTally& tally);

/// Aligned text table.
std::string format_report(const PerformanceReport& report);
/// CSV "label,noise_tolerance,efficiency,cost_qubits,scalable".
std::string format_report_csv(const PerformanceReport& report);

}  // namespace msqkd
