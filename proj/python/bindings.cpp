#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "msqkd/errors.hpp"
#include "msqkd/keyrate.hpp"
#include "msqkd/metrics.hpp"
#include "msqkd/protocol.hpp"

namespace py = pybind11;
using namespace msqkd;

namespace {

MismatchPolicy policy_from(const std::string& name) {
  if (name == "maximal") return MismatchPolicy::kMaximalOverlap;
  if (name == "worst-case") return MismatchPolicy::kWorstCase;
  throw py::value_error("mismatch must be 'maximal' or 'worst-case'");
}

py::dict simulate(int parties, std::uint64_t rounds, double q, double qm, double qr, std::uint64_t seed,
                  const std::string& variant) {
  ProtocolConfig config;
  config.parties = parties;
  config.rounds = rounds;
  config.seed = seed;
  config.keep_trials = false;
  config.variant = variant == "sqkd" ? Variant::kSqkd : Variant::kMediated;
  SimulationResult r;
  {
    py::gil_scoped_release release;
    r = run_simulation(config, StochasticChannel{{q, qm, qr}});
  }
  const auto& s = r.statistics;
  py::dict out;
  out["case_counts"] = s.case_counts;
  out["party_keys"] = r.keys.party_keys;
  out["tp_key"] = r.keys.tp_key;
  out["estimated_noise"] = std::array<double, 3>{s.noise.value.q, s.noise.value.qm, s.noise.value.qr};
  out["standard_error"] =
      std::array<double, 3>{s.noise.standard_error.q, s.noise.standard_error.qm, s.noise.standard_error.qr};
  out["bell_pairs"] = r.resources.bell_pairs;
  out["raw_key_bits"] = r.resources.raw_key_bits;
  out["warnings"] = r.warnings;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Mediated semi-quantum key distribution: key-rate bounds and simulation";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<NoKeyError>(m, "NoKeyError", PyExc_RuntimeError);

  m.def(
      "key_rate",
      [](const std::string& scenario, double q, double qm, double qr, const std::string& mismatch) {
        const NoiseParameters n{q, qm, qr};
        return parse_scenario(scenario) == Scenario::kSemiHonest ? semi_honest_key_rate(n).rate
                                                                 : untrusted_key_rate(n, policy_from(mismatch)).rate;
      },
      py::arg("scenario"), py::arg("q"), py::arg("qm"), py::arg("qr"), py::arg("mismatch") = "maximal");

  m.def(
      "threshold",
      [](const std::string& scenario, double tol, const std::string& mismatch) {
        return noise_threshold(parse_scenario(scenario), tol, policy_from(mismatch)).threshold_q;
      },
      py::arg("scenario"), py::arg("tol") = 1e-6, py::arg("mismatch") = "maximal");

  m.def(
      "sweep",
      [](const std::string& scenario, double lo, double hi, int steps, const std::string& mismatch) {
        std::vector<std::pair<double, double>> points;
        for (const auto& p : sweep(parse_scenario(scenario), lo, hi, steps, policy_from(mismatch)).points) {
          points.emplace_back(p.q, p.rate);
        }
        return points;
      },
      py::arg("scenario"), py::arg("lo"), py::arg("hi"), py::arg("steps"), py::arg("mismatch") = "maximal");

  m.def("simulate", &simulate, py::arg("parties") = 2, py::arg("rounds"), py::arg("q") = 0.0, py::arg("qm") = 0.0,
        py::arg("qr") = 0.0, py::arg("seed") = 0, py::arg("variant") = "mediated");

  m.def("qubit_efficiency", [](int parties) {
    const auto r = qubit_efficiency(parties);
    return std::make_pair(r.num(), r.den());
  });
  m.def("communication_cost", &communication_cost);
}
