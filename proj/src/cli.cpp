#include "msqkd/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "msqkd/errors.hpp"
#include "msqkd/io.hpp"
#include "msqkd/keyrate.hpp"
#include "msqkd/metrics.hpp"
#include "msqkd/protocol.hpp"

namespace msqkd {

namespace {

/// Bad flag values detected after CLI11 has parsed the line.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", std::abs(v) < 5e-7 ? 0.0 : v);
  return buf;
}

NoiseParameters parse_noise_flag(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("--noise: \"" + item + "\" is not a number");
    }
  }
  if (values.size() == 1) return NoiseParameters::uniform(values[0]);
  if (values.size() == 3) return {values[0], values[1], values[2]};
  throw UsageError("--noise expects Q or Q,QM,QR");
}

MismatchPolicy parse_policy(const std::string& text) {
  return text == "worst-case" ? MismatchPolicy::kWorstCase : MismatchPolicy::kMaximalOverlap;
}

void print_semi_honest(const SemiHonestIntermediates& r, std::ostream& out) {
  out << "rate " << fixed6(r.rate) << '\n'
      << "scenario semi-honest\n"
      << "h_a_given_b " << fixed6(r.h_a_given_b) << '\n'
      << "xi1 " << fixed6(r.xi1) << '\n'
      << "xi2 " << fixed6(r.xi2) << '\n'
      << "normalization " << fixed6(r.normalization) << '\n'
      << "overlap_lower " << fixed6(r.overlap.value) << (r.overlap.clamped ? " (clamped)" : "") << '\n'
      << "lambda_plus " << fixed6(r.lambda_plus) << '\n'
      << "lambda_minus " << fixed6(r.lambda_minus) << '\n'
      << "s_sigma1 " << fixed6(r.s_sigma1) << '\n'
      << "clamp_events " << r.clamp_events << '\n';
}

void print_untrusted(const UntrustedIntermediates& r, std::ostream& out) {
  out << "rate " << fixed6(r.rate) << '\n'
      << "scenario untrusted\n"
      << "s_a_given_t " << fixed6(r.s_a_given_t) << '\n'
      << "h_a_given_b " << fixed6(r.h_a_given_b) << '\n'
      << "n_prime " << fixed6(r.n_prime) << '\n';
  for (std::size_t m = 0; m < 2; ++m) {
    out << "overlap_match[" << m << "] " << fixed6(r.overlap_match[m]) << '\n'
        << "overlap_mismatch[" << m << "] " << fixed6(r.overlap_mismatch[m]) << '\n'
        << "lambda[0][" << m << "] " << fixed6(r.lambda[0][m]) << '\n'
        << "lambda[1][" << m << "] " << fixed6(r.lambda[1][m]) << '\n';
  }
  out << "clamp_events " << r.clamp_events << '\n';
}

void print_keyrate(Scenario scenario, const SiftedStatistics& stats, MismatchPolicy policy, std::ostream& out) {
  if (scenario == Scenario::kSemiHonest) {
    print_semi_honest(semi_honest_key_rate(stats), out);
  } else {
    print_untrusted(untrusted_key_rate(stats, policy), out);
  }
}

void print_summary(const SimulationResult& result, std::ostream& out) {
  const auto& s = result.statistics;
  out << "case1 " << s.case_counts[0] << "\ncase2 " << s.case_counts[1] << "\ncase3 " << s.case_counts[2]
      << "\ndiscarded_psi " << s.case_counts[3] << '\n';
  out << "raw_key_bits " << result.keys.party_keys.front().size() << '\n';
  const auto& keys = result.keys.party_keys;
  const bool identical = std::all_of(keys.begin(), keys.end(), [&](const auto& k) { return k == keys.front(); });
  out << "keys_identical " << (identical ? "yes" : "no") << '\n';
  const auto& n = s.noise;
  out << "estimated_q " << fixed6(n.value.q) << " +- " << fixed6(n.standard_error.q) << '\n'
      << "estimated_qm " << fixed6(n.value.qm) << " +- " << fixed6(n.standard_error.qm) << '\n'
      << "estimated_qr " << fixed6(n.value.qr) << " +- " << fixed6(n.standard_error.qr) << '\n';
}

struct Flags {
  // simulate
  int parties = 2;
  long long rounds = 0;
  std::string noise;
  std::string attack;
  std::uint64_t seed = 0;
  std::string variant = "mediated";
  double test_fraction = 0.1;
  std::string out_path;
  std::string stats_out;
  // keyrate / threshold / sweep
  std::string scenario;
  std::string stats_path;
  std::string mismatch = "maximal";
  double tol = 1e-6;
  double from = 0.0;
  double to = 0.0;
  int steps = 0;
  // exact / metrics
  bool keyrate = false;
  bool csv = false;
};

int simulate(const Flags& f, std::ostream& out, std::ostream& err) {
  ProtocolConfig config;
  config.parties = f.parties;
  config.rounds = static_cast<std::uint64_t>(f.rounds);
  config.seed = f.seed;
  config.test_fraction = f.test_fraction;
  config.variant = f.variant == "sqkd" ? Variant::kSqkd : Variant::kMediated;
  config.keep_trials = !f.out_path.empty();

  SimulationResult result;
  if (!f.noise.empty()) {
    StochasticChannel channel{parse_noise_flag(f.noise)};
    result = run_simulation(config, channel);
  } else {
    const auto spec = load_attack(f.attack);
    result = std::visit([&](const auto& a) { return run_simulation(config, a); }, spec);
  }
  for (const auto& w : result.warnings) err << "warning: " << w << '\n';
  if (!f.out_path.empty()) {
    std::ostringstream log;
    write_trial_log(result.trials, log);
    write_text_file(f.out_path, log.str());
  }
  if (!f.stats_out.empty()) write_text_file(f.stats_out, to_json(result.statistics).dump(2) + "\n");
  print_summary(result, out);
  return kExitOk;
}

int keyrate(const Flags& f, std::ostream& out) {
  const auto scenario = parse_scenario(f.scenario);
  const auto policy = parse_policy(f.mismatch);
  if (!f.stats_path.empty()) {
    print_keyrate(scenario, load_statistics(f.stats_path), policy, out);
    return kExitOk;
  }
  const auto noise = parse_noise_flag(f.noise);
  if (scenario == Scenario::kSemiHonest) {
    print_semi_honest(semi_honest_key_rate(noise), out);
  } else {
    print_untrusted(untrusted_key_rate(noise, policy), out);
  }
  return kExitOk;
}

int exact(const Flags& f, std::ostream& out) {
  const auto spec = load_attack(f.attack);
  SiftedStatistics stats;
  std::optional<Scenario> scenario;
  if (const auto* c = std::get_if<CollectiveAttack>(&spec)) {
    stats = exact_statistics_semi_honest(*c);
    scenario = Scenario::kSemiHonest;
  } else if (const auto* u = std::get_if<UntrustedAttack>(&spec)) {
    stats = exact_statistics_untrusted(*u);
    scenario = Scenario::kUntrusted;
  } else {
    stats = expected_statistics(std::get<StochasticChannel>(spec));
  }
  out << to_json(stats).dump(2) << '\n';
  if (f.keyrate) {
    if (scenario) {
      print_keyrate(*scenario, stats, parse_policy(f.mismatch), out);
    } else {
      print_keyrate(Scenario::kSemiHonest, stats, MismatchPolicy::kMaximalOverlap, out);
      print_keyrate(Scenario::kUntrusted, stats, parse_policy(f.mismatch), out);
    }
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Circular mediated semi-quantum key distribution: simulation and key-rate bounds", "msqkd"};
  app.require_subcommand(1, 1);
  Flags f;
  const std::vector<std::string> scenarios{"semi-honest", "untrusted"};
  const std::vector<std::string> policies{"maximal", "worst-case"};

  auto* sim = app.add_subcommand("simulate", "Monte-Carlo run of the protocol");
  sim->add_option("--parties", f.parties, "Number of classical parties L")->check(CLI::Range(2, 62))->capture_default_str();
  sim->add_option("--rounds", f.rounds, "Total rounds (Bell states prepared)")->required()->check(CLI::PositiveNumber);
  auto* sim_noise = sim->add_option("--noise", f.noise, "Q or Q,QM,QR for the stochastic channel");
  auto* sim_attack = sim->add_option("--attack", f.attack, "Attack JSON file (two parties)")->check(CLI::ExistingFile);
  sim_noise->excludes(sim_attack);
  sim->add_option("--seed", f.seed, "Master seed")->capture_default_str();
  sim->add_option("--variant", f.variant, "mediated or sqkd")
      ->check(CLI::IsMember({"mediated", "sqkd"}))
      ->capture_default_str();
  sim->add_option("--test-fraction", f.test_fraction, "Share of all-measure rounds revealed for estimation")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  sim->add_option("--out", f.out_path, "Trial log CSV path");
  sim->add_option("--stats-out", f.stats_out, "Statistics JSON path");

  auto* kr = app.add_subcommand("keyrate", "Key-rate lower bound");
  kr->add_option("--scenario", f.scenario, "semi-honest or untrusted")->required()->check(CLI::IsMember(scenarios));
  auto* kr_noise = kr->add_option("--noise", f.noise, "Q or Q,QM,QR");
  auto* kr_stats = kr->add_option("--stats", f.stats_path, "Statistics JSON file")->check(CLI::ExistingFile);
  kr_noise->excludes(kr_stats);
  kr->add_option("--mismatch", f.mismatch, "Untrusted mismatch-overlap policy: maximal or worst-case")
      ->check(CLI::IsMember(policies))
      ->capture_default_str();

  auto* th = app.add_subcommand("threshold", "Noise threshold under Q = QM = QR");
  th->add_option("--scenario", f.scenario, "semi-honest or untrusted")->required()->check(CLI::IsMember(scenarios));
  th->add_option("--tol", f.tol, "Bisection bracket width")->check(CLI::PositiveNumber)->capture_default_str();
  th->add_option("--mismatch", f.mismatch, "Untrusted mismatch-overlap policy: maximal or worst-case")
      ->check(CLI::IsMember(policies))
      ->capture_default_str();

  auto* sw = app.add_subcommand("sweep", "Rate curve under Q = QM = QR");
  sw->add_option("--scenario", f.scenario, "semi-honest or untrusted")->required()->check(CLI::IsMember(scenarios));
  sw->add_option("--from", f.from, "First grid point")->required();
  sw->add_option("--to", f.to, "Last grid point")->required();
  sw->add_option("--steps", f.steps, "Number of grid points")->required();
  sw->add_option("--out", f.out_path, "CSV path (standard output if omitted)");
  sw->add_option("--mismatch", f.mismatch, "Untrusted mismatch-overlap policy: maximal or worst-case")
      ->check(CLI::IsMember(policies))
      ->capture_default_str();

  auto* ex = app.add_subcommand("exact", "Exact statistics of an attack file");
  ex->add_option("--attack", f.attack, "Attack JSON file")->required()->check(CLI::ExistingFile);
  ex->add_flag("--keyrate", f.keyrate, "Also evaluate the key-rate bound");
  ex->add_option("--mismatch", f.mismatch, "Untrusted mismatch-overlap policy: maximal or worst-case")
      ->check(CLI::IsMember(policies))
      ->capture_default_str();

  auto* me = app.add_subcommand("metrics", "Qubit efficiency, communication cost and comparison table");
  me->add_option("--parties", f.parties, "Number of classical parties L")->check(CLI::Range(2, 30))->capture_default_str();
  me->add_flag("--csv", f.csv, "Comparison table as CSV");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (sim->parsed()) {
      if (f.noise.empty() && f.attack.empty()) throw UsageError("simulate needs --noise or --attack");
      return simulate(f, out, err);
    }
    if (kr->parsed()) {
      if (f.noise.empty() && f.stats_path.empty()) throw UsageError("keyrate needs --noise or --stats");
      return keyrate(f, out);
    }
    if (th->parsed()) {
      const auto t = noise_threshold(parse_scenario(f.scenario), f.tol, parse_policy(f.mismatch));
      out << fixed6(t.threshold_q) << '\n';
      return kExitOk;
    }
    if (sw->parsed()) {
      const auto curve = sweep(parse_scenario(f.scenario), f.from, f.to, f.steps, parse_policy(f.mismatch));
      for (double q : curve.monotonicity_violations) err << "warning: rate increases at q=" << fixed6(q) << '\n';
      if (f.out_path.empty()) {
        out << sweep_csv(curve);
      } else {
        write_sweep_csv(curve, f.out_path);
      }
      return kExitOk;
    }
    if (ex->parsed()) return exact(f, out);
    if (me->parsed()) {
      const auto report = performance_report(f.parties);
      out << (f.csv ? format_report_csv(report) : format_report(report));
      return kExitOk;
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NoKeyError& e) {
    err << "no key: " << e.what() << '\n';
    return kExitNoKey;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomain;
  }
  return kExitUsage;
}

}  // namespace msqkd
