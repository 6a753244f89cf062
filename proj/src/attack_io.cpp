#include <fstream>
#include <string>

#include "msqkd/errors.hpp"
#include "msqkd/io.hpp"

namespace msqkd {

namespace {

using nlohmann::json;

Complex parse_complex(const json& v, const std::string& where) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw DomainError(where + ": expected a [re, im] pair");
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

json complex_json(Complex c) { return json::array({c.real(), c.imag()}); }

ComplexMatrix parse_matrix(const json& doc, const char* key) {
  if (!doc.contains(key)) throw DomainError(std::string("attack file: missing \"") + key + "\"");
  const auto& rows = doc.at(key);
  if (!rows.is_array() || rows.empty()) throw DomainError(std::string("attack file: \"") + key + "\" must be a nonempty array of rows");
  const std::size_t cols = rows[0].is_array() ? rows[0].size() : 0;
  std::vector<Complex> entries;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (!rows[r].is_array() || rows[r].size() != cols) {
      throw DimensionError(std::string("attack file: \"") + key + "\" row " + std::to_string(r) + " has the wrong length");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      entries.push_back(parse_complex(rows[r][c], std::string(key) + "[" + std::to_string(r) + "][" + std::to_string(c) + "]"));
    }
  }
  return {rows.size(), cols, std::move(entries)};
}

json matrix_json(const ComplexMatrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(complex_json(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::size_t parse_ancilla_dim(const json& doc) {
  if (!doc.contains("ancilla_dim") || !doc["ancilla_dim"].is_number_integer() || doc["ancilla_dim"].get<long long>() < 1) {
    throw DomainError("attack file: \"ancilla_dim\" must be a positive integer");
  }
  return doc["ancilla_dim"].get<std::size_t>();
}

NoiseParameters parse_noise(const json& doc) {
  if (!doc.contains("noise") || !doc["noise"].is_object()) throw DomainError("attack file: missing \"noise\" object");
  const auto& n = doc["noise"];
  NoiseParameters out;
  for (auto [key, slot] : {std::pair{"q", &out.q}, std::pair{"qm", &out.qm}, std::pair{"qr", &out.qr}}) {
    if (!n.contains(key) || !n[key].is_number()) throw DomainError(std::string("attack file: noise.") + key + " must be a number");
    *slot = n[key].get<double>();
  }
  out.validate();
  return out;
}

}  // namespace

AttackSpec parse_attack(const json& doc) {
  if (!doc.is_object() || !doc.contains("type") || !doc["type"].is_string()) {
    throw DomainError("attack file: missing string field \"type\"");
  }
  const auto type = doc["type"].get<std::string>();
  if (type == "collective") {
    return CollectiveAttack(parse_ancilla_dim(doc), parse_matrix(doc, "U1"), parse_matrix(doc, "U2"));
  }
  if (type == "untrusted") {
    if (!doc.contains("source") || !doc["source"].is_array()) throw DomainError("attack file: missing \"source\" array");
    std::vector<Complex> amps;
    for (std::size_t k = 0; k < doc["source"].size(); ++k) {
      amps.push_back(parse_complex(doc["source"][k], "source[" + std::to_string(k) + "]"));
    }
    return UntrustedAttack(parse_ancilla_dim(doc), StateVector(std::move(amps), StateVector::Norm::kSubNormalized),
                           parse_matrix(doc, "V1"), parse_matrix(doc, "V2"));
  }
  if (type == "stochastic") {
    StochasticChannel channel{parse_noise(doc)};
    if (doc.contains("wrong_bell_split")) {
      const auto& w = doc["wrong_bell_split"];
      if (!w.is_array() || w.size() != 3) throw DomainError("attack file: \"wrong_bell_split\" must hold three numbers");
      for (std::size_t k = 0; k < 3; ++k) channel.wrong_bell_split[k] = w[k].get<double>();
    }
    channel.validate();
    return channel;
  }
  throw DomainError("attack file: unknown type \"" + type + "\" (expected collective, untrusted or stochastic)");
}

AttackSpec load_attack(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open attack file " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw DomainError("attack file " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_attack(doc);
}

json to_json(const AttackSpec& attack) {
  return std::visit(
      [](const auto& a) -> json {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, CollectiveAttack>) {
          return {{"type", "collective"}, {"ancilla_dim", a.ancilla_dim()}, {"U1", matrix_json(a.u1())}, {"U2", matrix_json(a.u2())}};
        } else if constexpr (std::is_same_v<T, UntrustedAttack>) {
          json source = json::array();
          for (const auto& c : a.source().amplitudes()) source.push_back(complex_json(c));
          return {{"type", "untrusted"}, {"ancilla_dim", a.ancilla_dim()}, {"source", std::move(source)},
                  {"V1", matrix_json(a.v1())}, {"V2", matrix_json(a.v2())}};
        } else {
          return {{"type", "stochastic"},
                  {"noise", {{"q", a.noise.q}, {"qm", a.noise.qm}, {"qr", a.noise.qr}}},
                  {"wrong_bell_split", a.wrong_bell_split}};
        }
      },
      attack);
}

}  // namespace msqkd
