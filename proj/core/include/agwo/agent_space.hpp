#pragma once

// Agent search space: decoding hyperparameters plus a prompt template, and
// the sampling / leader-guided update rules that move agents through it.

#include "agwo/error.hpp"
#include "agwo/rng.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace agwo {

struct Interval {
    double lo = 0.0;
    double hi = 1.0;
    bool contains(double x) const noexcept { return x >= lo && x <= hi; }
    friend bool operator==(const Interval&, const Interval&) = default;
};

/// max(lo, min(x, hi)). Throws ConfigError when lo > hi.
double clip(double x, Interval interval);

enum class DecodingField { temperature, top_p, frequency_penalty, presence_penalty };

inline constexpr std::array<DecodingField, 4> kContinuousFields{
    DecodingField::temperature, DecodingField::top_p, DecodingField::frequency_penalty,
    DecodingField::presence_penalty};

std::string_view field_name(DecodingField f) noexcept;
std::optional<DecodingField> parse_field(std::string_view name) noexcept;

struct DecodingConfig {
    double temperature = 0.6;
    double top_p = 0.6;
    double frequency_penalty = 0.6;
    double presence_penalty = 0.6;
    int max_tokens = 1274;

    double& at(DecodingField f) noexcept;
    double at(DecodingField f) const noexcept;

    friend bool operator==(const DecodingConfig&, const DecodingConfig&) = default;
};

struct FieldPolicy {
    double mean = 0.6;
    double stddev = 0.1;
    Interval bounds;
    friend bool operator==(const FieldPolicy&, const FieldPolicy&) = default;
};

/// Either a fixed length c_m or a uniform draw from a discrete set M.
struct MaxTokensPolicy {
    enum class Mode { fixed, discrete };
    Mode mode = Mode::discrete;
    int fixed_value = 1024;
    std::vector<int> choices;  // sorted ascending, unique

    static MaxTokensPolicy fixed(int value);
    static MaxTokensPolicy range(int lo, int hi);
    static MaxTokensPolicy set(std::vector<int> values);

    bool admits(int value) const;
    /// Nearest admissible value; ties go to the larger one.
    int snap(double value) const;
    friend bool operator==(const MaxTokensPolicy&, const MaxTokensPolicy&) = default;
};

struct SamplingPolicy {
    std::array<FieldPolicy, 4> fields;
    MaxTokensPolicy max_tokens;

    /// Means 0.6, stddev 0.1 on every continuous field; temperature in [0,1],
    /// top_p in [0.05,1], penalties in [-2,2]; max_tokens uniform on 1274..1524.
    static SamplingPolicy defaults();

    FieldPolicy& field(DecodingField f) noexcept { return fields[static_cast<std::size_t>(f)]; }
    const FieldPolicy& field(DecodingField f) const noexcept {
        return fields[static_cast<std::size_t>(f)];
    }

    /// Throws ConfigError describing the first violated constraint.
    void validate() const;
    /// True when every field of `config` lies in its interval / discrete set.
    bool admits(const DecodingConfig& config) const;
    friend bool operator==(const SamplingPolicy&, const SamplingPolicy&) = default;
};

/// Marker substituted with the question text when a prompt is rendered.
inline constexpr std::string_view kQuestionSlot = "{question}";

struct LineageEntry {
    int iteration = 0;
    std::string edit;  // e.g. "adapt", "init"
    friend bool operator==(const LineageEntry&, const LineageEntry&) = default;
};

struct PromptTemplate {
    std::string text;
    std::vector<std::string> placeholders{std::string(kQuestionSlot)};
    std::vector<LineageEntry> lineage;

    /// First invariant violation, if any: empty text, or a placeholder that
    /// does not occur exactly once.
    std::optional<std::string> violation() const;
    bool valid() const { return !violation().has_value(); }

    /// Substitutes the question slot; without a slot the question is appended.
    std::string render(std::string_view question) const;

    friend bool operator==(const PromptTemplate&, const PromptTemplate&) = default;
};

/// Occurrences of `needle` in `haystack`, non-overlapping.
std::size_t count_occurrences(std::string_view haystack, std::string_view needle);

struct AgentConfig {
    int id = 0;
    DecodingConfig decoding;
    PromptTemplate prompt;
    std::string provider_ref;  // opaque handle of the shared model
    friend bool operator==(const AgentConfig&, const AgentConfig&) = default;
};

/// Elite influence weights, strictly decreasing, positive, summing to one.
/// Three entries is the alpha/beta/delta case.
class LeaderWeights {
public:
    explicit LeaderWeights(std::vector<double> values);

    /// (0.5, 0.3, 0.2)
    static LeaderWeights standard();
    /// (m, m-1, ..., 1) / sum
    static LeaderWeights linear(std::size_t m);

    std::span<const double> values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const { return values_.at(i); }

    /// Categorical draw of a leader index.
    std::size_t choose(Rng& rng) const;

private:
    std::vector<double> values_;
};

enum class UpdateStrategy { weighted_average, single_leader };
std::string_view to_string(UpdateStrategy s) noexcept;
UpdateStrategy parse_update_strategy(std::string_view s);

DecodingConfig sample_decoding(const SamplingPolicy& policy, Rng& rng);

/// Per continuous field: draw X_r ~ N(leader_r, sigma^2) for every leader and
/// return clip(sum_r w_r X_r). max_tokens is the noiseless weighted sum snapped
/// into the policy's discrete set (or the fixed constant).
DecodingConfig weighted_leader_update(const DecodingConfig& follower,
                                      std::span<const DecodingConfig> leaders,
                                      const LeaderWeights& weights, double sigma,
                                      const SamplingPolicy& policy, Rng& rng);

/// Picks one leader r with probability w_r and returns clip(N(leader_r, sigma^2))
/// fieldwise; max_tokens copies the chosen leader.
DecodingConfig single_leader_update(const DecodingConfig& follower,
                                    std::span<const DecodingConfig> leaders,
                                    const LeaderWeights& weights, double sigma,
                                    const SamplingPolicy& policy, Rng& rng);

DecodingConfig update_decoding(UpdateStrategy strategy, const DecodingConfig& follower,
                               std::span<const DecodingConfig> leaders,
                               const LeaderWeights& weights, double sigma,
                               const SamplingPolicy& policy, Rng& rng);

void to_json(nlohmann::json& j, const DecodingConfig& c);
void from_json(const nlohmann::json& j, DecodingConfig& c);
void to_json(nlohmann::json& j, const LineageEntry& e);
void from_json(const nlohmann::json& j, LineageEntry& e);
void to_json(nlohmann::json& j, const PromptTemplate& p);
void from_json(const nlohmann::json& j, PromptTemplate& p);
void to_json(nlohmann::json& j, const AgentConfig& a);
void from_json(const nlohmann::json& j, AgentConfig& a);
void to_json(nlohmann::json& j, const SamplingPolicy& p);
void from_json(const nlohmann::json& j, SamplingPolicy& p);

} // namespace agwo
