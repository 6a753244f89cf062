#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "msqkd/errors.hpp"
#include "msqkd/io.hpp"

namespace msqkd {

namespace {

using nlohmann::json;

constexpr std::array<const char*, 4> kCaseKeys{"case1", "case2", "case3", "discarded_psi"};

json noise_json(const NoiseParameters& n) { return {{"q", n.q}, {"qm", n.qm}, {"qr", n.qr}}; }

template <typename T>
void read_if_present(const json& doc, const char* key, T& slot) {
  if (doc.contains(key)) doc.at(key).get_to(slot);
}

}  // namespace

json to_json(const SiftedStatistics& s) {
  json counts = json::object();
  for (std::size_t k = 0; k < 4; ++k) counts[kCaseKeys[k]] = s.case_counts[k];
  return {
      {"parties", s.parties},
      {"exact", s.exact},
      {"unproven_multiparty", s.unproven_multiparty},
      {"case_counts", counts},
      {"reflect_rounds", s.reflect_rounds},
      {"tested_measure_rounds", s.tested_measure_rounds},
      {"reflect_counts", s.reflect_counts},
      {"measure_counts", s.measure_counts},
      {"p_c", s.p_c},
      {"p_w", s.p_w},
      {"p", s.p},
      {"q", s.q},
      {"joint", s.joint},
      {"first_marginal", s.first_marginal},
      {"reflect_bell", s.reflect_bell},
      {"noise", noise_json(s.noise.value)},
      {"noise_standard_error", noise_json(s.noise.standard_error)},
  };
}

SiftedStatistics statistics_from_json(const json& doc) {
  SiftedStatistics s;
  try {
    read_if_present(doc, "parties", s.parties);
    read_if_present(doc, "exact", s.exact);
    read_if_present(doc, "unproven_multiparty", s.unproven_multiparty);
    if (doc.contains("case_counts")) {
      for (std::size_t k = 0; k < 4; ++k) read_if_present(doc["case_counts"], kCaseKeys[k], s.case_counts[k]);
    }
    read_if_present(doc, "reflect_rounds", s.reflect_rounds);
    read_if_present(doc, "tested_measure_rounds", s.tested_measure_rounds);
    read_if_present(doc, "reflect_counts", s.reflect_counts);
    read_if_present(doc, "measure_counts", s.measure_counts);

    if (doc.contains("joint") && doc.contains("reflect_bell")) {
      doc.at("joint").get_to(s.joint);
      doc.at("reflect_bell").get_to(s.reflect_bell);
      s.derive_from_joint();
    } else if (s.tested_measure_rounds > 0 && s.reflect_rounds > 0) {
      s.finalize_from_counts();
    } else {
      throw DomainError("statistics file has neither probability tables nor counts");
    }
  } catch (const json::exception& e) {
    throw DomainError(std::string("malformed statistics file: ") + e.what());
  }
  for (const auto& table : s.joint) {
    for (const auto& row : table) {
      for (double v : row) {
        if (v < 0.0) throw DomainError("statistics file: negative probability in \"joint\"");
      }
    }
  }
  return s;
}

SiftedStatistics load_statistics(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open statistics file " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw DomainError("statistics file " + path.string() + " is not valid JSON: " + e.what());
  }
  return statistics_from_json(doc);
}

void write_trial_log(std::span<const TrialRecord> trials, std::ostream& out) {
  out << "round_index,choices,outcomes,announcement,case\n";
  for (const auto& r : trials) {
    std::string choices;
    std::string outcomes;
    for (std::size_t p = 0; p < r.choices.size(); ++p) {
      choices += r.choices[p] == Choice::kMeasure ? 'M' : 'R';
      outcomes += r.outcomes[p] ? static_cast<char>('0' + *r.outcomes[p]) : '-';
    }
    std::string announcement;
    if (r.announcement) {
      announcement = to_string(*r.announcement);
    } else if (r.tp_outcome) {
      announcement = *r.tp_outcome ? "Z1" : "Z0";
    }
    out << r.round_index << ',' << choices << ',' << outcomes << ',' << announcement << ',' << to_string(r.label) << '\n';
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write to " + path.string() + " failed");
}

}  // namespace msqkd
