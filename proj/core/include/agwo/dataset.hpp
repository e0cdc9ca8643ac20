#pragma once

#include "agwo/error.hpp"
#include "agwo/fitness.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace agwo {

struct QAItem {
    std::string id;
    std::string question;
    std::optional<std::string> gold;  // absent only for non-verifiable tasks
    TaskKind task_kind = TaskKind::numeric;
    friend bool operator==(const QAItem&, const QAItem&) = default;
};

struct LoadOptions {
    TaskKind default_kind = TaskKind::numeric;
    bool require_gold = true;
};

/// One JSON object per line: {"id"?, "question", "answer", "task_kind"?}.
/// Missing ids become the 1-based line number. Blank lines are skipped.
/// Throws ParseError (with line number) on malformed lines, ConfigError on an
/// empty file or duplicate id.
std::vector<QAItem> load_dataset(const std::filesystem::path& path, const LoadOptions& options = {});
std::vector<QAItem> parse_dataset(std::string_view jsonl, const LoadOptions& options = {},
                                  std::string_view source = "<memory>");

void write_dataset(const std::filesystem::path& path, std::span<const QAItem> items);

/// Deterministic two-step arithmetic word problems with numeric answers, for
/// offline runs against the mock backends.
std::vector<QAItem> synthetic_arithmetic_dataset(std::size_t count, std::uint64_t seed);

enum class SplitMode { official, holdout };

/// Fixed-seed hold-out: optimization pool and test set in a 1:4 ratio.
struct SplitSpec {
    SplitMode mode = SplitMode::holdout;
    std::uint64_t seed = 0;
};

struct Split {
    std::vector<QAItem> pool;
    std::vector<QAItem> test;
};

/// Pool size round(N/5) (at least 1), the rest is test; both keep dataset
/// order. Throws ConfigError for N < 5 or for official mode (use official_split).
Split make_split(std::span<const QAItem> items, const SplitSpec& spec);

/// Passes provided splits through after checking they share no id.
Split official_split(std::vector<QAItem> pool, std::vector<QAItem> test);

/// Throws LeakageError naming the first id present in both sets.
void check_disjoint(std::span<const QAItem> pool, std::span<const QAItem> test);
void check_disjoint_ids(std::span<const std::string> pool_ids, std::span<const QAItem> test);

} // namespace agwo
