#pragma once

// Resolved run configuration: TOML file plus dotted `key=value` overrides,
// validated, and echoed as JSON into the run directory.

#include "agwo/agent_space.hpp"
#include "agwo/dataset.hpp"
#include "agwo/fitness.hpp"
#include "agwo/mock_backend.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace agwo {

enum class ProviderKind { mock, http };

struct ProviderConfig {
    ProviderKind kind = ProviderKind::mock;
    std::string base_url;  // empty: PROVIDER_BASE_URL
    std::string agent_model = "mock-agent";
    std::string judge_model = "mock-judge";
    std::string editor_model = "mock-editor";
    int max_attempts = 5;
    int base_delay_ms = 1000;
    std::size_t max_concurrency = 8;
    bool trace = false;
    std::optional<double> usd_per_1k_tokens;
    MockBackendSpec landscape;
};

/// When the judge runs in verifiable mode. Non-verifiable fitness always uses it.
enum class JudgeUse { off, ties, always };
std::string_view to_string(JudgeUse u) noexcept;

struct DataConfig {
    std::optional<std::filesystem::path> dataset;
    SplitMode split = SplitMode::holdout;
    std::uint64_t split_seed = 0;
    std::optional<std::filesystem::path> pool;
    std::optional<std::filesystem::path> test;
    TaskKind task_kind = TaskKind::numeric;
    /// Size of the generated arithmetic set used by mock runs without a dataset.
    std::size_t synthetic_items = 100;
};

struct PromptConfig {
    std::optional<std::filesystem::path> pool;
    bool generate = false;
    std::optional<std::filesystem::path> judge_prompt;
    std::optional<std::filesystem::path> instruction;
};

struct RunConfig {
    std::size_t n = 5;
    int iterations = 10;
    std::size_t m = 3;
    std::uint64_t seed = 0;
    UpdateStrategy strategy = UpdateStrategy::weighted_average;
    double sigma = 0.1;
    std::optional<std::vector<double>> leader_weights;  // empty: standard or linear(m)

    std::size_t batch_size = 16;
    bool per_agent_batches = false;

    SamplingPolicy sampling = SamplingPolicy::defaults();

    FitnessMode fitness_mode = FitnessMode::verifiable;
    JudgeUse judge = JudgeUse::ties;
    std::array<double, 3> judge_weights{0.5, 0.2, 0.3};
    std::array<std::uint64_t, 3> judge_seeds{1, 2, 3};

    ProviderConfig provider;
    DataConfig data;
    PromptConfig prompts;
    std::filesystem::path out_dir = "runs/latest";

    /// Throws ConfigError naming the first violated constraint.
    void validate() const;
    LeaderWeights weights() const;
    JudgeWeights judge_weight_set() const;
};

/// Strict: unknown keys and mistyped values raise ConfigError.
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& config);

/// TOML text to the equivalent JSON tree. ParseError carries line:column.
nlohmann::json toml_to_json(std::string_view text, std::string_view source = "<config>");

/// Applies `section.key=value`. The value is read as a TOML value when it
/// parses as one and as a bare string otherwise.
void apply_override(nlohmann::json& tree, std::string_view assignment);

/// File (optional) then overrides in order, then validation.
RunConfig load_config(const std::optional<std::filesystem::path>& path, std::span<const std::string> overrides);

} // namespace agwo
