#pragma once

// The optimization loop: evaluate every agent on a question batch, rank,
// keep the elites, move the followers toward them, checkpoint, repeat.

#include "agwo/agent_space.hpp"
#include "agwo/dataset.hpp"
#include "agwo/fitness.hpp"
#include "agwo/judge.hpp"
#include "agwo/prompt_adapt.hpp"
#include "agwo/provider.hpp"
#include "agwo/report.hpp"
#include "agwo/run_config.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace spdlog {
class logger;
}

namespace agwo {

/// Everything that talks to a model, built once per process.
struct Runtime {
    std::shared_ptr<Backend> backend;
    std::unique_ptr<LlmClient> client;
    std::unique_ptr<LlmJudge> judge;
    Resource judge_prompt;
    AdaptationInstruction instruction;
    std::string agent_model;
    std::string editor_model;
};

/// Mock mode routes the three model names to the landscape, judge and editor
/// stand-ins, with `items` as the answer key. `backend` replaces the whole
/// routing layer when given.
Runtime make_runtime(const RunConfig& config, std::span<const QAItem> items,
                     std::optional<std::filesystem::path> trace_path = std::nullopt,
                     std::shared_ptr<Backend> backend = nullptr);

struct ItemOutcome {
    std::string id;
    ExtractedAnswer answer;
    bool correct = false;
    bool failed = false;  // generation call did not return
};

struct BatchResult {
    FitnessReport report;
    std::vector<ItemOutcome> items;
    std::vector<std::string> completions;  // empty for failed items
    std::size_t failed_items = 0;
};

/// Generate, extract, exact-match and (optionally) judge one agent on a batch.
class BatchEvaluator {
public:
    BatchEvaluator(LlmClient& client, std::string model, Judge* judge, FitnessMode mode, JudgeWeights weights,
                   std::array<std::uint64_t, 3> judge_seeds);

    /// `item_seeds` pairs with `batch`. Failed generations count as incorrect.
    BatchResult evaluate(const AgentConfig& agent, std::span<const QAItem> batch,
                         std::span<const std::uint64_t> item_seeds, bool with_judge) const;

    /// Adds judge scores to an existing verifiable result (tie-breaking pass).
    void attach_judge(BatchResult& result, const AgentConfig& agent, std::span<const QAItem> batch,
                      std::span<const std::uint64_t> item_seeds) const;

    FitnessMode mode() const noexcept { return mode_; }

private:
    std::string generate(const AgentConfig& agent, const QAItem& item, std::uint64_t seed) const;
    std::optional<JudgeScores> judge_batch(std::span<const QAItem> batch, std::span<const std::string> texts,
                                           std::span<const ItemOutcome> outcomes) const;

    LlmClient& client_;
    std::string model_;
    Judge* judge_;
    FitnessMode mode_;
    JudgeWeights weights_;
    std::array<std::uint64_t, 3> judge_seeds_;
};

struct PendingIteration {
    std::uint64_t iteration_seed = 0;
    std::vector<FitnessReport> reports;
    std::vector<std::size_t> order;
    std::vector<std::string> batch_ids;
    std::size_t failed_items = 0;
};

struct RunState {
    int k = 0;  // completed iterations
    std::vector<AgentConfig> population;
    std::vector<FitnessReport> reports;  // from iteration k
    std::optional<AgentConfig> best;
    double best_composite = 0.0;
    std::string rng_state;
    /// Set between the ranking and update checkpoints of iteration k + 1.
    std::optional<PendingIteration> pending;
    std::string judge_prompt_sha256;
    std::string instruction_sha256;
    std::map<std::string, UsageTotals> usage;
    std::uint64_t batch_epoch = 0;
    std::size_t batch_offset = 0;
};

void to_json(nlohmann::json& j, const RunState& s);
void from_json(const nlohmann::json& j, RunState& s);

/// n agents: decodings from sample_decoding, prompts from the pool.
std::vector<AgentConfig> initialize_population(const RunConfig& config, std::span<const PromptTemplate> pool,
                                               const PromptGenerator* generator, Rng& rng);

/// The batch for the next iteration; advances the epoch cursor in `state`.
/// Shared mode walks a per-epoch permutation of the pool and skips the
/// remainder that does not fill a batch. Per-agent mode draws independently.
std::vector<std::vector<std::size_t>> next_batches(const RunConfig& config, RunState& state, std::size_t pool_size,
                                                   std::uint64_t iteration_seed);

struct RunOptions {
    std::optional<int> halt_after;  // stop after this many completed iterations
    bool trace_llm = false;
    std::shared_ptr<Backend> backend;  // test hook, see make_runtime
    bool echo_log = false;             // mirror run.log to stderr
};

struct RunResult {
    AgentConfig champion;
    std::vector<IterationRecord> history;
    bool completed = false;
    std::filesystem::path run_dir;
};

class Orchestrator {
public:
    /// `run_dir` must already hold config.json, pool.jsonl and test.jsonl.
    Orchestrator(RunConfig config, std::filesystem::path run_dir, RunOptions options);
    ~Orchestrator();

    /// Loads or creates state, then iterates until K or the halt point.
    RunResult run();

    /// One full iteration on `state`, with both checkpoints written.
    IterationRecord run_iteration(RunState& state);

    RunState initial_state();
    const std::vector<QAItem>& pool() const noexcept { return pool_; }

private:
    void checkpoint(const RunState& state) const;
    void log(const std::string& line) const;

    RunConfig config_;
    std::filesystem::path run_dir_;
    RunOptions options_;
    std::vector<QAItem> pool_;
    std::vector<QAItem> test_;
    Runtime runtime_;
    std::unique_ptr<BatchEvaluator> evaluator_;
    std::shared_ptr<spdlog::logger> logger_;
};

/// Prepares a fresh run directory (config echo, split files, pool ids) and
/// runs it. Refuses a directory that already holds a checkpoint.
RunResult run(const RunConfig& config, const RunOptions& options = {});

/// Continues the run in `run_dir` from its checkpoint. A completed run is
/// returned as is.
RunResult resume(const std::filesystem::path& run_dir, const RunOptions& options = {});

struct ChampionEvaluation {
    double accuracy = 0.0;
    std::vector<ItemOutcome> items;
};

/// Exact-match accuracy of `champion` on the test items, which must not
/// share an id with `pool_ids` (LeakageError) and must not be empty.
ChampionEvaluation evaluate_champion(const AgentConfig& champion, std::span<const QAItem> test,
                                     std::span<const std::string> pool_ids, const BatchEvaluator& evaluator,
                                     std::uint64_t seed);

/// Split selected by the config: official files, a dataset hold-out, or the
/// synthetic set for mock runs.
Split prepare_split(const RunConfig& config);

std::vector<std::string> read_pool_ids(const std::filesystem::path& path);

} // namespace agwo
