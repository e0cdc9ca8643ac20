#include "agwo/run_config.hpp"

#include "agwo/error.hpp"

#include <toml.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace agwo {

std::string_view to_string(JudgeUse u) noexcept {
    switch (u) {
    case JudgeUse::off: return "off";
    case JudgeUse::ties: return "ties";
    case JudgeUse::always: return "always";
    }
    return "?";
}

namespace {

using nlohmann::json;

JudgeUse parse_judge_use(std::string_view s) {
    if (s == "off") return JudgeUse::off;
    if (s == "ties") return JudgeUse::ties;
    if (s == "always") return JudgeUse::always;
    throw ConfigError("fitness.judge must be off, ties or always, got '" + std::string(s) + "'");
}

// Reads one table and remembers which keys were consumed so leftovers can be
// reported as unknown.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(where() + "expected a table");
    }

    const json* find(const char* key) {
        auto it = j_.find(key);
        if (it == j_.end()) return nullptr;
        used_.insert(key);
        return &*it;
    }

    void integer(const char* key, std::int64_t lo, auto& out) {
        if (auto v = find(key)) {
            if (!v->is_number_integer()) fail(key, "an integer");
            const auto x = v->get<std::int64_t>();
            if (x < lo) fail(key, "an integer >= " + std::to_string(lo));
            out = static_cast<std::remove_reference_t<decltype(out)>>(x);
        }
    }
    void seed(const char* key, std::uint64_t& out) {
        if (auto v = find(key)) {
            if (!v->is_number_integer() || (v->is_number_integer() && !v->is_number_unsigned() && v->get<std::int64_t>() < 0))
                fail(key, "a non-negative integer");
            out = v->get<std::uint64_t>();
        }
    }
    void number(const char* key, double& out) {
        if (auto v = find(key)) out = as_number(*v, key);
    }
    void number(const char* key, std::optional<double>& out) {
        if (auto v = find(key)) out = as_number(*v, key);
    }
    void boolean(const char* key, bool& out) {
        if (auto v = find(key)) {
            if (!v->is_boolean()) fail(key, "true or false");
            out = v->get<bool>();
        }
    }
    std::optional<std::string> text(const char* key) {
        auto v = find(key);
        if (!v) return std::nullopt;
        if (!v->is_string()) fail(key, "a string");
        return v->get<std::string>();
    }
    void text(const char* key, std::string& out) {
        if (auto s = text(key)) out = *s;
    }
    void path(const char* key, std::optional<std::filesystem::path>& out) {
        if (auto s = text(key)) out = s->empty() ? std::nullopt : std::optional<std::filesystem::path>(*s);
    }
    std::optional<std::vector<double>> numbers(const char* key) {
        auto v = find(key);
        if (!v) return std::nullopt;
        if (!v->is_array()) fail(key, "an array of numbers");
        std::vector<double> out;
        for (const auto& x : *v) out.push_back(as_number(x, key));
        return out;
    }
    std::optional<std::vector<std::int64_t>> integers(const char* key) {
        auto v = find(key);
        if (!v) return std::nullopt;
        if (!v->is_array()) fail(key, "an array of integers");
        std::vector<std::int64_t> out;
        for (const auto& x : *v) {
            if (!x.is_number_integer()) fail(key, "an array of integers");
            out.push_back(x.get<std::int64_t>());
        }
        return out;
    }
    std::optional<Section> table(const char* key) {
        auto v = find(key);
        if (!v) return std::nullopt;
        return Section(*v, path_.empty() ? key : path_ + "." + key);
    }

    void finish() const {
        for (const auto& [k, _] : j_.items())
            if (!used_.contains(k)) throw ConfigError("unknown configuration key '" + qualified(k) + "'");
    }

    [[noreturn]] void fail(const char* key, const std::string& expected) const {
        throw ConfigError(qualified(key) + ": expected " + expected);
    }

private:
    double as_number(const json& v, const char* key) const {
        if (!v.is_number()) fail(key, "a number");
        const double x = v.get<double>();
        if (!std::isfinite(x)) fail(key, "a finite number");
        return x;
    }
    std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    std::string where() const { return path_.empty() ? std::string() : path_ + ": "; }

    const json& j_;
    std::string path_;
    std::set<std::string, std::less<>> used_;
};

std::array<double, 2> pair_of(Section& s, const char* key, const std::vector<double>& v) {
    if (v.size() != 2) s.fail(key, "a two-element array");
    return {v[0], v[1]};
}

void read_sampling(Section s, SamplingPolicy& policy) {
    for (auto f : kContinuousFields) {
        const auto name = std::string(field_name(f));
        auto t = s.table(name.c_str());
        if (!t) continue;
        auto& fp = policy.field(f);
        t->number("mean", fp.mean);
        t->number("stddev", fp.stddev);
        if (auto clip = t->numbers("clip")) {
            auto [lo, hi] = pair_of(*t, "clip", *clip);
            fp.bounds = {lo, hi};
        }
        t->finish();
    }
    if (auto t = s.table("max_tokens")) {
        const auto mode = t->text("mode").value_or(policy.max_tokens.mode == MaxTokensPolicy::Mode::fixed ? "fixed"
                                                                                                         : "discrete");
        if (mode == "fixed") {
            int value = policy.max_tokens.fixed_value;
            t->integer("value", 1, value);
            policy.max_tokens = MaxTokensPolicy::fixed(value);
        } else if (mode == "discrete") {
            auto range = t->integers("range");
            auto choices = t->integers("choices");
            if (range && choices) t->fail("range", "either range or choices, not both");
            if (range) {
                if (range->size() != 2) t->fail("range", "[lo, hi]");
                policy.max_tokens = MaxTokensPolicy::range(static_cast<int>((*range)[0]), static_cast<int>((*range)[1]));
            } else if (choices) {
                policy.max_tokens = MaxTokensPolicy::set(std::vector<int>(choices->begin(), choices->end()));
            } else if (policy.max_tokens.mode != MaxTokensPolicy::Mode::discrete) {
                t->fail("choices", "a range or choices for discrete mode");
            }
        } else {
            t->fail("mode", "\"fixed\" or \"discrete\"");
        }
        t->finish();
    }
    s.finish();
}

json sampling_to_json(const SamplingPolicy& p) {
    json j = json::object();
    for (auto f : kContinuousFields) {
        const auto& fp = p.field(f);
        j[std::string(field_name(f))] = {{"mean", fp.mean}, {"stddev", fp.stddev}, {"clip", {fp.bounds.lo, fp.bounds.hi}}};
    }
    const auto& mt = p.max_tokens;
    if (mt.mode == MaxTokensPolicy::Mode::fixed) {
        j["max_tokens"] = {{"mode", "fixed"}, {"value", mt.fixed_value}};
    } else {
        const bool contiguous = !mt.choices.empty() &&
                                mt.choices.back() - mt.choices.front() + 1 == static_cast<int>(mt.choices.size());
        if (contiguous)
            j["max_tokens"] = {{"mode", "discrete"}, {"range", {mt.choices.front(), mt.choices.back()}}};
        else
            j["max_tokens"] = {{"mode", "discrete"}, {"choices", mt.choices}};
    }
    return j;
}

void read_landscape(Section s, MockBackendSpec& spec) {
    s.seed("seed", spec.seed);
    for (std::size_t i = 0; i < kContinuousFields.size(); ++i) {
        const auto name = std::string(field_name(kContinuousFields[i]));
        if (auto v = s.numbers(name.c_str())) {
            auto [target, width] = pair_of(s, name.c_str(), *v);
            spec.axes[i] = {target, width};
        }
    }
    s.finish();
}

} // namespace

RunConfig config_from_json(const json& j) {
    RunConfig c;
    Section root(j, "");
    if (auto s = root.table("gwo")) {
        s->integer("n", 0, c.n);
        s->integer("iterations", std::numeric_limits<int>::min(), c.iterations);
        s->integer("elites", 0, c.m);
        s->seed("seed", c.seed);
        if (auto v = s->text("strategy")) c.strategy = parse_update_strategy(*v);
        s->number("sigma", c.sigma);
        if (auto w = s->numbers("leader_weights")) c.leader_weights = *w;
        s->finish();
    }
    if (auto s = root.table("batch")) {
        s->integer("size", 0, c.batch_size);
        s->boolean("per_agent", c.per_agent_batches);
        s->finish();
    }
    if (auto s = root.table("sampling")) read_sampling(*s, c.sampling);
    if (auto s = root.table("fitness")) {
        if (auto v = s->text("mode")) c.fitness_mode = parse_fitness_mode(*v);
        if (auto v = s->text("judge")) c.judge = parse_judge_use(*v);
        if (auto w = s->numbers("judge_weights")) {
            if (w->size() != 3) s->fail("judge_weights", "[logic, creativity, completeness]");
            c.judge_weights = {(*w)[0], (*w)[1], (*w)[2]};
        }
        if (auto seeds = s->integers("judge_seeds")) {
            if (seeds->size() != 3) s->fail("judge_seeds", "three seeds");
            for (std::size_t i = 0; i < 3; ++i) {
                if ((*seeds)[i] < 0) s->fail("judge_seeds", "non-negative seeds");
                c.judge_seeds[i] = static_cast<std::uint64_t>((*seeds)[i]);
            }
        }
        s->finish();
    }
    if (auto s = root.table("provider")) {
        auto& p = c.provider;
        if (auto v = s->text("kind")) {
            if (*v == "mock")
                p.kind = ProviderKind::mock;
            else if (*v == "http")
                p.kind = ProviderKind::http;
            else
                s->fail("kind", "\"mock\" or \"http\"");
        }
        s->text("base_url", p.base_url);
        s->text("agent_model", p.agent_model);
        s->text("judge_model", p.judge_model);
        s->text("editor_model", p.editor_model);
        s->integer("max_attempts", 1, p.max_attempts);
        s->integer("base_delay_ms", 0, p.base_delay_ms);
        s->integer("max_concurrency", 1, p.max_concurrency);
        s->boolean("trace", p.trace);
        s->number("usd_per_1k_tokens", p.usd_per_1k_tokens);
        if (auto l = s->table("landscape")) read_landscape(*l, p.landscape);
        s->finish();
    }
    if (auto s = root.table("data")) {
        auto& d = c.data;
        s->path("dataset", d.dataset);
        if (auto v = s->text("split")) {
            if (*v == "holdout")
                d.split = SplitMode::holdout;
            else if (*v == "official")
                d.split = SplitMode::official;
            else
                s->fail("split", "\"holdout\" or \"official\"");
        }
        s->seed("split_seed", d.split_seed);
        s->path("pool", d.pool);
        s->path("test", d.test);
        if (auto v = s->text("task_kind")) d.task_kind = parse_task_kind(*v);
        s->integer("synthetic_items", 0, d.synthetic_items);
        s->finish();
    }
    if (auto s = root.table("prompts")) {
        auto& p = c.prompts;
        s->path("pool", p.pool);
        s->boolean("generate", p.generate);
        s->path("judge_prompt", p.judge_prompt);
        s->path("instruction", p.instruction);
        s->finish();
    }
    if (auto s = root.table("run")) {
        std::optional<std::filesystem::path> out;
        s->path("out_dir", out);
        if (out) c.out_dir = *out;
        s->finish();
    }
    root.finish();
    return c;
}

json config_to_json(const RunConfig& c) {
    json gwo = {{"n", c.n},
                {"iterations", c.iterations},
                {"elites", c.m},
                {"seed", c.seed},
                {"strategy", to_string(c.strategy)},
                {"sigma", c.sigma}};
    if (c.leader_weights) gwo["leader_weights"] = *c.leader_weights;

    const auto& p = c.provider;
    json landscape = {{"seed", p.landscape.seed}};
    for (std::size_t i = 0; i < kContinuousFields.size(); ++i)
        landscape[std::string(field_name(kContinuousFields[i]))] = {p.landscape.axes[i].target,
                                                                    p.landscape.axes[i].width};
    json provider = {{"kind", p.kind == ProviderKind::mock ? "mock" : "http"},
                     {"base_url", p.base_url},
                     {"agent_model", p.agent_model},
                     {"judge_model", p.judge_model},
                     {"editor_model", p.editor_model},
                     {"max_attempts", p.max_attempts},
                     {"base_delay_ms", p.base_delay_ms},
                     {"max_concurrency", p.max_concurrency},
                     {"trace", p.trace},
                     {"landscape", landscape}};
    if (p.usd_per_1k_tokens) provider["usd_per_1k_tokens"] = *p.usd_per_1k_tokens;

    auto opt_path = [](json& obj, const char* key, const std::optional<std::filesystem::path>& v) {
        if (v) obj[key] = v->generic_string();
    };
    json data = {{"split", c.data.split == SplitMode::holdout ? "holdout" : "official"},
                 {"split_seed", c.data.split_seed},
                 {"task_kind", to_string(c.data.task_kind)},
                 {"synthetic_items", c.data.synthetic_items}};
    opt_path(data, "dataset", c.data.dataset);
    opt_path(data, "pool", c.data.pool);
    opt_path(data, "test", c.data.test);
    json prompts = {{"generate", c.prompts.generate}};
    opt_path(prompts, "pool", c.prompts.pool);
    opt_path(prompts, "judge_prompt", c.prompts.judge_prompt);
    opt_path(prompts, "instruction", c.prompts.instruction);

    return {{"gwo", gwo},
            {"batch", {{"size", c.batch_size}, {"per_agent", c.per_agent_batches}}},
            {"sampling", sampling_to_json(c.sampling)},
            {"fitness",
             {{"mode", to_string(c.fitness_mode)},
              {"judge", to_string(c.judge)},
              {"judge_weights", c.judge_weights},
              {"judge_seeds", c.judge_seeds}}},
            {"provider", provider},
            {"data", data},
            {"prompts", prompts},
            {"run", {{"out_dir", c.out_dir.generic_string()}}}};
}

void RunConfig::validate() const {
    if (iterations < 1) throw ConfigError("K ≥ 1 required (gwo.iterations = " + std::to_string(iterations) + ")");
    if (m < 1) throw ConfigError("m ≥ 1 required (gwo.elites = " + std::to_string(m) + ")");
    if (n < m)
        throw ConfigError("n ≥ m required (gwo.n = " + std::to_string(n) + ", gwo.elites = " + std::to_string(m) + ")");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ConfigError("gwo.sigma must be a finite value ≥ 0");
    if (batch_size < 1) throw ConfigError("batch.size must be at least 1");
    sampling.validate();
    (void)weights();
    (void)judge_weight_set();
    if (fitness_mode == FitnessMode::non_verifiable && judge == JudgeUse::off)
        throw ConfigError("non-verifiable fitness needs the judge (fitness.judge cannot be off)");

    if (provider.max_attempts < 1) throw ConfigError("provider.max_attempts must be at least 1");
    if (provider.max_concurrency < 1) throw ConfigError("provider.max_concurrency must be at least 1");
    if (provider.usd_per_1k_tokens && *provider.usd_per_1k_tokens < 0.0)
        throw ConfigError("provider.usd_per_1k_tokens must be non-negative");
    for (const auto& m : {provider.agent_model, provider.judge_model, provider.editor_model})
        if (m.empty()) throw ConfigError("provider model names must not be empty");
    if (provider.kind == ProviderKind::mock &&
        (provider.agent_model == provider.judge_model || provider.agent_model == provider.editor_model ||
         provider.judge_model == provider.editor_model))
        throw ConfigError("the mock provider routes on model name; agent, judge and editor models must differ");

    if (data.split == SplitMode::official) {
        if (!data.pool || !data.test) throw ConfigError("official split needs data.pool and data.test");
    } else if (!data.dataset) {
        if (provider.kind != ProviderKind::mock) throw ConfigError("data.dataset is required with a real provider");
        if (data.synthetic_items < 5) throw ConfigError("data.synthetic_items must be at least 5");
    }
}

LeaderWeights RunConfig::weights() const {
    if (leader_weights) {
        if (leader_weights->size() != m)
            throw ConfigError("gwo.leader_weights has " + std::to_string(leader_weights->size()) +
                              " entries but gwo.elites is " + std::to_string(m));
        return LeaderWeights(*leader_weights);
    }
    return m == 3 ? LeaderWeights::standard() : LeaderWeights::linear(m);
}

JudgeWeights RunConfig::judge_weight_set() const {
    return JudgeWeights(judge_weights[0], judge_weights[1], judge_weights[2]);
}

json toml_to_json(std::string_view text, std::string_view source) {
    toml::table table;
    try {
        table = toml::parse(text, source);
    } catch (const toml::parse_error& e) {
        const auto& b = e.source().begin;
        std::ostringstream msg;
        msg << source << ':' << b.line << ':' << b.column << ": " << e.description();
        throw ParseError(msg.str());
    }
    std::ostringstream out;
    out << toml::json_formatter{table};
    return json::parse(out.str());
}

void apply_override(json& tree, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos) throw ConfigError("override '" + std::string(assignment) + "' is not key=value");
    auto trim = [](std::string_view s) {
        const auto b = s.find_first_not_of(" \t");
        if (b == std::string_view::npos) return std::string_view{};
        return s.substr(b, s.find_last_not_of(" \t") - b + 1);
    };
    const auto key = trim(assignment.substr(0, eq));
    const auto raw = trim(assignment.substr(eq + 1));
    if (key.empty()) throw ConfigError("override '" + std::string(assignment) + "' has an empty key");

    json value;
    try {
        value = toml_to_json("v = " + std::string(raw)).at("v");
    } catch (const ParseError&) {
        value = std::string(raw);
    }

    json* node = &tree;
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const auto part = std::string(key.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start));
        if (part.empty()) throw ConfigError("override key '" + std::string(key) + "' has an empty segment");
        if (!node->is_object()) throw ConfigError("override key '" + std::string(key) + "' descends into a value");
        if (dot == std::string_view::npos) {
            (*node)[part] = std::move(value);
            return;
        }
        node = &(*node)[part];
        if (node->is_null()) *node = json::object();
        start = dot + 1;
    }
}

RunConfig load_config(const std::optional<std::filesystem::path>& path, std::span<const std::string> overrides) {
    json tree = json::object();
    if (path) {
        std::ifstream in(*path, std::ios::binary);
        if (!in) throw ConfigError("cannot read config file " + path->string());
        std::ostringstream ss;
        ss << in.rdbuf();
        try {
            tree = toml_to_json(ss.str(), path->string());
        } catch (const ParseError& e) {
            throw ConfigError(e.what());
        }
    }
    for (const auto& o : overrides) apply_override(tree, o);
    auto config = config_from_json(tree);
    config.validate();
    return config;
}

} // namespace agwo
