#include "agwo/agent_space.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace agwo {

double clip(double x, Interval interval) {
    if (interval.lo > interval.hi) {
        std::ostringstream os;
        os << "invalid interval [" << interval.lo << ", " << interval.hi << "]";
        throw ConfigError(os.str());
    }
    return std::max(interval.lo, std::min(x, interval.hi));
}

std::string_view field_name(DecodingField f) noexcept {
    switch (f) {
    case DecodingField::temperature: return "temperature";
    case DecodingField::top_p: return "top_p";
    case DecodingField::frequency_penalty: return "frequency_penalty";
    case DecodingField::presence_penalty: return "presence_penalty";
    }
    return "?";
}

std::optional<DecodingField> parse_field(std::string_view name) noexcept {
    for (auto f : kContinuousFields)
        if (field_name(f) == name) return f;
    return std::nullopt;
}

double& DecodingConfig::at(DecodingField f) noexcept {
    switch (f) {
    case DecodingField::temperature: return temperature;
    case DecodingField::top_p: return top_p;
    case DecodingField::frequency_penalty: return frequency_penalty;
    case DecodingField::presence_penalty: break;
    }
    return presence_penalty;
}

double DecodingConfig::at(DecodingField f) const noexcept {
    return const_cast<DecodingConfig*>(this)->at(f);
}

// ---------------------------------------------------------------------------

MaxTokensPolicy MaxTokensPolicy::fixed(int value) {
    MaxTokensPolicy p;
    p.mode = Mode::fixed;
    p.fixed_value = value;
    return p;
}

MaxTokensPolicy MaxTokensPolicy::range(int lo, int hi) {
    if (lo > hi) throw ConfigError("max_tokens range is empty");
    std::vector<int> v(static_cast<std::size_t>(hi - lo + 1));
    std::iota(v.begin(), v.end(), lo);
    return set(std::move(v));
}

MaxTokensPolicy MaxTokensPolicy::set(std::vector<int> values) {
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    MaxTokensPolicy p;
    p.mode = Mode::discrete;
    p.choices = std::move(values);
    return p;
}

bool MaxTokensPolicy::admits(int value) const {
    if (mode == Mode::fixed) return value == fixed_value;
    return std::binary_search(choices.begin(), choices.end(), value);
}

int MaxTokensPolicy::snap(double value) const {
    if (mode == Mode::fixed) return fixed_value;
    if (choices.empty()) throw ConfigError("max_tokens set M is empty");
    auto it = std::lower_bound(choices.begin(), choices.end(), value,
                               [](int c, double v) { return static_cast<double>(c) < v; });
    if (it == choices.end()) return choices.back();
    if (it == choices.begin()) return *it;
    const int above = *it;
    const int below = *std::prev(it);
    // Equidistant goes up.
    return (value - below < above - value) ? below : above;
}

SamplingPolicy SamplingPolicy::defaults() {
    SamplingPolicy p;
    p.field(DecodingField::temperature) = {0.6, 0.1, {0.0, 1.0}};
    p.field(DecodingField::top_p) = {0.6, 0.1, {0.05, 1.0}};
    p.field(DecodingField::frequency_penalty) = {0.6, 0.1, {-2.0, 2.0}};
    p.field(DecodingField::presence_penalty) = {0.6, 0.1, {-2.0, 2.0}};
    p.max_tokens = MaxTokensPolicy::range(1274, 1524);
    return p;
}

void SamplingPolicy::validate() const {
    for (auto f : kContinuousFields) {
        const auto& fp = field(f);
        const std::string name(field_name(f));
        if (!(fp.bounds.lo <= fp.bounds.hi)) throw ConfigError(name + ": clip interval is empty");
        if (!(fp.stddev >= 0.0) || !std::isfinite(fp.stddev))
            throw ConfigError(name + ": stddev must be a nonnegative finite number");
        if (!fp.bounds.contains(fp.mean)) throw ConfigError(name + ": mean lies outside its clip interval");
    }
    const auto& top_p = field(DecodingField::top_p).bounds;
    if (!(top_p.lo > 0.0) || top_p.hi > 1.0) throw ConfigError("top_p: clip interval must lie in (0, 1]");
    if (max_tokens.mode == MaxTokensPolicy::Mode::discrete) {
        if (max_tokens.choices.empty()) throw ConfigError("max_tokens: discrete set M is empty");
        if (max_tokens.choices.front() <= 0) throw ConfigError("max_tokens: values must be positive");
    } else if (max_tokens.fixed_value <= 0) {
        throw ConfigError("max_tokens: fixed value must be positive");
    }
}

bool SamplingPolicy::admits(const DecodingConfig& c) const {
    for (auto f : kContinuousFields)
        if (!field(f).bounds.contains(c.at(f))) return false;
    return max_tokens.admits(c.max_tokens);
}

// ---------------------------------------------------------------------------

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
    if (needle.empty()) return 0;
    std::size_t n = 0;
    for (auto pos = haystack.find(needle); pos != std::string_view::npos;
         pos = haystack.find(needle, pos + needle.size()))
        ++n;
    return n;
}

std::optional<std::string> PromptTemplate::violation() const {
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) return "prompt text is empty";
    for (const auto& p : placeholders) {
        const auto n = count_occurrences(text, p);
        if (n != 1)
            return "placeholder " + p + " occurs " + std::to_string(n) + " times (expected once)";
    }
    return std::nullopt;
}

std::string PromptTemplate::render(std::string_view question) const {
    const auto pos = text.find(kQuestionSlot);
    if (pos == std::string::npos) return text + "\n\n" + std::string(question);
    std::string out = text;
    out.replace(pos, kQuestionSlot.size(), question);
    return out;
}

// ---------------------------------------------------------------------------

LeaderWeights::LeaderWeights(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw ConfigError("leader weights: need at least one weight");
    double sum = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!(values_[i] > 0.0)) throw ConfigError("leader weights must be positive");
        if (i > 0 && !(values_[i - 1] > values_[i]))
            throw ConfigError("leader weights must be strictly decreasing");
        sum += values_[i];
    }
    if (std::abs(sum - 1.0) > 1e-12) throw ConfigError("leader weights must sum to 1");
}

LeaderWeights LeaderWeights::standard() { return LeaderWeights({0.5, 0.3, 0.2}); }

LeaderWeights LeaderWeights::linear(std::size_t m) {
    if (m == 0) throw ConfigError("elite count must be >= 1");
    if (m == 3) return standard();
    const double total = static_cast<double>(m * (m + 1) / 2);
    std::vector<double> w(m);
    for (std::size_t i = 0; i < m; ++i) w[i] = static_cast<double>(m - i) / total;
    // Push rounding residue onto the largest weight so the sum is exact-ish.
    double sum = 0.0;
    for (double x : w) sum += x;
    w[0] += 1.0 - sum;
    return LeaderWeights(std::move(w));
}

std::size_t LeaderWeights::choose(Rng& rng) const {
    const double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < values_.size(); ++i) {
        acc += values_[i];
        if (u < acc) return i;
    }
    return values_.size() - 1;
}

std::string_view to_string(UpdateStrategy s) noexcept {
    return s == UpdateStrategy::weighted_average ? "weighted-average" : "single-leader";
}

UpdateStrategy parse_update_strategy(std::string_view s) {
    if (s == "weighted-average") return UpdateStrategy::weighted_average;
    if (s == "single-leader") return UpdateStrategy::single_leader;
    throw ConfigError("unknown update strategy '" + std::string(s) +
                      "' (expected weighted-average or single-leader)");
}

// ---------------------------------------------------------------------------

DecodingConfig sample_decoding(const SamplingPolicy& policy, Rng& rng) {
    DecodingConfig c;
    for (auto f : kContinuousFields) {
        const auto& fp = policy.field(f);
        c.at(f) = clip(rng.normal(fp.mean, fp.stddev), fp.bounds);
    }
    if (policy.max_tokens.mode == MaxTokensPolicy::Mode::fixed) {
        c.max_tokens = policy.max_tokens.fixed_value;
    } else {
        const auto& m = policy.max_tokens.choices;
        if (m.empty()) throw ConfigError("max_tokens: discrete set M is empty");
        c.max_tokens = m[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(m.size()) - 1))];
    }
    return c;
}

namespace {

void check_leaders(std::span<const DecodingConfig> leaders, const LeaderWeights& weights, double sigma) {
    if (leaders.size() != weights.size())
        throw ShapeError("leader count (" + std::to_string(leaders.size()) +
                         ") does not match weight count (" + std::to_string(weights.size()) + ")");
    if (!(sigma >= 0.0)) throw ConfigError("sigma must be >= 0");
}

} // namespace

DecodingConfig weighted_leader_update(const DecodingConfig& follower,
                                      std::span<const DecodingConfig> leaders,
                                      const LeaderWeights& weights, double sigma,
                                      const SamplingPolicy& policy, Rng& rng) {
    check_leaders(leaders, weights, sigma);
    DecodingConfig out = follower;
    for (auto f : kContinuousFields) {
        double mixed = 0.0;
        for (std::size_t r = 0; r < leaders.size(); ++r)
            mixed += weights[r] * rng.normal(leaders[r].at(f), sigma);
        out.at(f) = clip(mixed, policy.field(f).bounds);
    }
    double tokens = 0.0;
    for (std::size_t r = 0; r < leaders.size(); ++r)
        tokens += weights[r] * static_cast<double>(leaders[r].max_tokens);
    out.max_tokens = policy.max_tokens.snap(tokens);
    return out;
}

DecodingConfig single_leader_update(const DecodingConfig& follower,
                                    std::span<const DecodingConfig> leaders,
                                    const LeaderWeights& weights, double sigma,
                                    const SamplingPolicy& policy, Rng& rng) {
    check_leaders(leaders, weights, sigma);
    const auto& leader = leaders[weights.choose(rng)];
    DecodingConfig out = follower;
    for (auto f : kContinuousFields)
        out.at(f) = clip(rng.normal(leader.at(f), sigma), policy.field(f).bounds);
    out.max_tokens = policy.max_tokens.admits(leader.max_tokens)
                         ? leader.max_tokens
                         : policy.max_tokens.snap(leader.max_tokens);
    return out;
}

DecodingConfig update_decoding(UpdateStrategy strategy, const DecodingConfig& follower,
                               std::span<const DecodingConfig> leaders,
                               const LeaderWeights& weights, double sigma,
                               const SamplingPolicy& policy, Rng& rng) {
    return strategy == UpdateStrategy::weighted_average
               ? weighted_leader_update(follower, leaders, weights, sigma, policy, rng)
               : single_leader_update(follower, leaders, weights, sigma, policy, rng);
}

// ---------------------------------------------------------------------------

void to_json(nlohmann::json& j, const DecodingConfig& c) {
    j = nlohmann::json{{"temperature", c.temperature},
                       {"top_p", c.top_p},
                       {"frequency_penalty", c.frequency_penalty},
                       {"presence_penalty", c.presence_penalty},
                       {"max_tokens", c.max_tokens}};
}

void from_json(const nlohmann::json& j, DecodingConfig& c) {
    for (auto f : kContinuousFields) c.at(f) = j.at(std::string(field_name(f))).get<double>();
    const auto& mt = j.at("max_tokens");
    if (!mt.is_number_integer()) throw ParseError("max_tokens must be an integer");
    c.max_tokens = mt.get<int>();
}

void to_json(nlohmann::json& j, const LineageEntry& e) {
    j = nlohmann::json{{"iteration", e.iteration}, {"edit", e.edit}};
}

void from_json(const nlohmann::json& j, LineageEntry& e) {
    e.iteration = j.at("iteration").get<int>();
    e.edit = j.at("edit").get<std::string>();
}

void to_json(nlohmann::json& j, const PromptTemplate& p) {
    j = nlohmann::json{{"text", p.text}, {"placeholders", p.placeholders}, {"lineage", p.lineage}};
}

void from_json(const nlohmann::json& j, PromptTemplate& p) {
    p.text = j.at("text").get<std::string>();
    p.placeholders = j.value("placeholders", std::vector<std::string>{std::string(kQuestionSlot)});
    p.lineage = j.value("lineage", std::vector<LineageEntry>{});
}

void to_json(nlohmann::json& j, const AgentConfig& a) {
    j = nlohmann::json{{"id", a.id}, {"decoding", a.decoding}, {"prompt", a.prompt},
                       {"provider_ref", a.provider_ref}};
}

void from_json(const nlohmann::json& j, AgentConfig& a) {
    a.id = j.at("id").get<int>();
    a.decoding = j.at("decoding").get<DecodingConfig>();
    a.prompt = j.at("prompt").get<PromptTemplate>();
    a.provider_ref = j.value("provider_ref", std::string{});
}

void to_json(nlohmann::json& j, const SamplingPolicy& p) {
    j = nlohmann::json::object();
    for (auto f : kContinuousFields) {
        const auto& fp = p.field(f);
        j[std::string(field_name(f))] = {{"mean", fp.mean}, {"stddev", fp.stddev},
                                         {"clip", {fp.bounds.lo, fp.bounds.hi}}};
    }
    if (p.max_tokens.mode == MaxTokensPolicy::Mode::fixed)
        j["max_tokens"] = {{"mode", "fixed"}, {"value", p.max_tokens.fixed_value}};
    else
        j["max_tokens"] = {{"mode", "discrete"}, {"choices", p.max_tokens.choices}};
}

void from_json(const nlohmann::json& j, SamplingPolicy& p) {
    for (auto f : kContinuousFields) {
        const auto& fj = j.at(std::string(field_name(f)));
        auto& fp = p.field(f);
        fp.mean = fj.at("mean").get<double>();
        fp.stddev = fj.at("stddev").get<double>();
        fp.bounds = {fj.at("clip").at(0).get<double>(), fj.at("clip").at(1).get<double>()};
    }
    const auto& mt = j.at("max_tokens");
    if (mt.at("mode").get<std::string>() == "fixed")
        p.max_tokens = MaxTokensPolicy::fixed(mt.at("value").get<int>());
    else
        p.max_tokens = MaxTokensPolicy::set(mt.at("choices").get<std::vector<int>>());
}

} // namespace agwo
