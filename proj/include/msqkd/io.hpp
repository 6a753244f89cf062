// File formats: attack specifications and statistics (JSON), trial logs (CSV).

#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <variant>

#include <json.hpp>

#include "msqkd/attacks.hpp"
#include "msqkd/protocol.hpp"

namespace msqkd {

using AttackSpec = std::variant<CollectiveAttack, UntrustedAttack, StochasticChannel>;

/// Throws DomainError (or DimensionError) naming the offending field.
AttackSpec parse_attack(const nlohmann::json& doc);
AttackSpec load_attack(const std::filesystem::path& path);
nlohmann::json to_json(const AttackSpec& attack);

nlohmann::json to_json(const SiftedStatistics& stats);
/// Prefers the probability tables when present, otherwise rebuilds them from counts.
SiftedStatistics statistics_from_json(const nlohmann::json& doc);
SiftedStatistics load_statistics(const std::filesystem::path& path);

/// Header "round_index,choices,outcomes,announcement,case".
/// choices like "MRM", outcomes like "0-0"; sqkd readouts appear as "Z0"/"Z1".
void write_trial_log(std::span<const TrialRecord> trials, std::ostream& out);

/// Writes `text` to `path`, throwing std::runtime_error if the file cannot be written.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace msqkd
