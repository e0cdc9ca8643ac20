#pragma once

// Per-iteration history records and the report files derived from them.

#include "agwo/agent_space.hpp"
#include "agwo/provider.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <span>
#include <optional>
#include <vector>

namespace agwo {

inline constexpr int kReportSchemaVersion = 1;

struct IterationRecord {
    int k = 0;                              // 1-based iteration
    std::vector<double> composites;         // per agent, population order
    std::vector<std::size_t> elites;        // population indices, best first
    double alpha_composite = 0.0;
    double best_composite = 0.0;            // best-so-far, nondecreasing
    std::vector<std::string> batch_ids;     // optimization items seen this iteration
    std::size_t accepted_edits = 0;
    std::size_t failed_items = 0;

    friend bool operator==(const IterationRecord&, const IterationRecord&) = default;
};

void to_json(nlohmann::json& j, const IterationRecord& r);
void from_json(const nlohmann::json& j, IterationRecord& r);

std::vector<IterationRecord> read_history_jsonl(const std::filesystem::path& path);

struct ReportFiles {
    std::filesystem::path history_csv;
    std::filesystem::path champion_json;
    std::filesystem::path usage_json;
};

/// Writes history.csv (iteration, best_composite, mean_composite, agent_0..),
/// champion.json and usage.json into `out_dir`. Throws IoError when the
/// directory cannot be written.
ReportFiles emit_report(std::span<const IterationRecord> history, const AgentConfig& champion,
                        const std::map<std::string, UsageTotals>& usage, const std::filesystem::path& out_dir,
                        std::optional<double> usd_per_1k_tokens = std::nullopt);

struct HistoryRow {
    int iteration = 0;
    double best_composite = 0.0;
    double mean_composite = 0.0;
    std::vector<double> agents;
};

std::vector<HistoryRow> read_history_csv(const std::filesystem::path& path);
AgentConfig read_champion(const std::filesystem::path& path);
std::map<std::string, UsageTotals> read_usage(const std::filesystem::path& path);

/// Writes `text` to `path` through a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& text);

} // namespace agwo
