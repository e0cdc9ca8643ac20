#include "agwo/orchestrator.hpp"

#include "agwo/mock_backend.hpp"

#include <spdlog/sinks/basic_file_sink.h>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <future>
#include <numeric>
#include <sstream>

namespace agwo {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::uint64_t tag(std::string_view purpose) { return hash_string(purpose); }

std::uint64_t item_seed(std::uint64_t iteration_seed, const std::string& id) {
    return derive_seed(iteration_seed, {tag("item"), hash_string(id)});
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json read_json(const fs::path& path) {
    try {
        return json::parse(read_text(path));
    } catch (const json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

// Keeps the first `lines` records; a torn trailing write is dropped too.
void truncate_history(const fs::path& path, int lines) {
    if (!fs::exists(path)) {
        write_file_atomic(path, "");
        return;
    }
    std::istringstream in(read_text(path));
    std::string out, line;
    for (int i = 0; i < lines && std::getline(in, line); ++i) out += line + '\n';
    write_file_atomic(path, out);
}

void append_line(const fs::path& path, const std::string& line) {
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw IoError("cannot append to " + path.string());
    out << line << '\n';
    if (!out.flush()) throw IoError("write failed for " + path.string());
}

} // namespace

// ---------------------------------------------------------------------------

Runtime make_runtime(const RunConfig& config, std::span<const QAItem> items, std::optional<fs::path> trace_path,
                     std::shared_ptr<Backend> backend) {
    Runtime rt;
    rt.judge_prompt = config.prompts.judge_prompt ? load_resource(*config.prompts.judge_prompt) : builtin_judge_prompt();
    rt.instruction = config.prompts.instruction ? AdaptationInstruction{load_resource(*config.prompts.instruction)}
                                                : AdaptationInstruction::builtin();
    rt.agent_model = config.provider.agent_model;
    rt.editor_model = config.provider.editor_model;

    if (!backend) {
        if (config.provider.kind == ProviderKind::mock) {
            AnswerKey key;
            for (const auto& it : items)
                if (it.gold) key.emplace(it.question, *it.gold);
            auto router = std::make_shared<RoutingBackend>("mock");
            router->route(config.provider.agent_model, std::make_shared<LandscapeBackend>(config.provider.landscape, key));
            router->route(config.provider.judge_model, std::make_shared<MockJudgeBackend>(key));
            router->route(config.provider.editor_model, std::make_shared<MockEditorBackend>());
            backend = router;
        } else {
            HttpBackendOptions http;
            http.base_url = config.provider.base_url;
            backend = std::make_shared<HttpChatBackend>(http);
        }
    }
    rt.backend = backend;

    ClientOptions options;
    options.retry.max_attempts = config.provider.max_attempts;
    options.retry.base_delay = std::chrono::milliseconds(config.provider.base_delay_ms);
    options.max_concurrency = config.provider.max_concurrency;
    options.trace_path = std::move(trace_path);
    rt.client = std::make_unique<LlmClient>(rt.backend, options);
    rt.judge = std::make_unique<LlmJudge>(*rt.client, config.provider.judge_model, rt.judge_prompt,
                                          LlmJudge::default_decoding());
    return rt;
}

// ---------------------------------------------------------------------------

BatchEvaluator::BatchEvaluator(LlmClient& client, std::string model, Judge* judge, FitnessMode mode,
                               JudgeWeights weights, std::array<std::uint64_t, 3> judge_seeds)
    : client_(client), model_(std::move(model)), judge_(judge), mode_(mode), weights_(weights),
      judge_seeds_(judge_seeds) {
    if (mode_ == FitnessMode::non_verifiable && !judge_)
        throw ConfigError("non-verifiable fitness needs a judge");
}

std::string BatchEvaluator::generate(const AgentConfig& agent, const QAItem& item, std::uint64_t seed) const {
    GenerationRequest req;
    req.model = model_;
    req.user_text = agent.prompt.render(item.question);
    req.decoding = agent.decoding;
    req.seed = seed;
    return client_.generate(req).text;
}

std::optional<JudgeScores> BatchEvaluator::judge_batch(std::span<const QAItem> batch,
                                                       std::span<const std::string> texts,
                                                       std::span<const ItemOutcome> outcomes) const {
    if (!judge_) return std::nullopt;
    std::vector<JudgeScores> per_item;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        if (outcomes[i].failed) continue;
        try {
            per_item.push_back(judge_averaged(batch[i].question, texts[i], *judge_, judge_seeds_));
        } catch (const JudgeFailure&) {
            // the item simply contributes no judge score
        }
    }
    if (per_item.empty()) return std::nullopt;
    auto mean = mean_scores(per_item);
    mean.seeds_used.assign(judge_seeds_.begin(), judge_seeds_.end());
    return mean;
}

BatchResult BatchEvaluator::evaluate(const AgentConfig& agent, std::span<const QAItem> batch,
                                     std::span<const std::uint64_t> item_seeds, bool with_judge) const {
    if (batch.size() != item_seeds.size()) throw ShapeError("batch and seed counts differ");
    if (batch.empty()) throw EvaluationError("empty validation batch");

    BatchResult r;
    r.completions.resize(batch.size());
    std::vector<ExtractedAnswer> answers;
    std::vector<std::string> golds;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto& item = batch[i];
        ItemOutcome o;
        o.id = item.id;
        try {
            r.completions[i] = generate(agent, item, item_seeds[i]);
            o.answer = extract_answer(r.completions[i], item.task_kind);
        } catch (const Error&) {
            o.failed = true;
            ++r.failed_items;
        }
        if (item.gold && o.answer) o.correct = normalize_answer(*o.answer) == normalize_answer(*item.gold);
        answers.push_back(o.answer);
        golds.push_back(item.gold.value_or(std::string{}));
        r.items.push_back(std::move(o));
    }

    if (mode_ == FitnessMode::non_verifiable) {
        auto scores = judge_batch(batch, r.completions, r.items).value_or(JudgeScores{});
        r.report = FitnessReport::non_verifiable(scores, batch.size(), weights_);
        return r;
    }
    for (const auto& item : batch)
        if (!item.gold) throw EvaluationError("item '" + item.id + "' has no gold answer for verifiable fitness");
    const double accuracy = exact_match_fitness(answers, golds);
    std::optional<JudgeScores> scores;
    if (with_judge) scores = judge_batch(batch, r.completions, r.items);
    r.report = FitnessReport::verifiable(accuracy, batch.size(), scores, weights_);
    return r;
}

void BatchEvaluator::attach_judge(BatchResult& result, const AgentConfig&, std::span<const QAItem> batch,
                                  std::span<const std::uint64_t>) const {
    if (mode_ != FitnessMode::verifiable || result.report.judge) return;
    auto scores = judge_batch(batch, result.completions, result.items);
    result.report = FitnessReport::verifiable(*result.report.accuracy, batch.size(), scores, weights_);
}

// ---------------------------------------------------------------------------

namespace {

json pending_to_json(const PendingIteration& p) {
    return {{"iteration_seed", p.iteration_seed},
            {"reports", p.reports},
            {"order", p.order},
            {"batch_ids", p.batch_ids},
            {"failed_items", p.failed_items}};
}

PendingIteration pending_from_json(const json& j) {
    PendingIteration p;
    p.iteration_seed = j.at("iteration_seed").get<std::uint64_t>();
    p.reports = j.at("reports").get<std::vector<FitnessReport>>();
    p.order = j.at("order").get<std::vector<std::size_t>>();
    p.batch_ids = j.at("batch_ids").get<std::vector<std::string>>();
    p.failed_items = j.at("failed_items").get<std::size_t>();
    return p;
}

} // namespace

void to_json(json& j, const RunState& s) {
    j = json{{"schema_version", kReportSchemaVersion},
             {"k", s.k},
             {"population", s.population},
             {"reports", s.reports},
             {"best", s.best ? json(*s.best) : json(nullptr)},
             {"best_composite", s.best_composite},
             {"rng_state", s.rng_state},
             {"pending", s.pending ? pending_to_json(*s.pending) : json(nullptr)},
             {"judge_prompt_sha256", s.judge_prompt_sha256},
             {"instruction_sha256", s.instruction_sha256},
             {"usage", usage_to_json(s.usage)},
             {"batch", {{"epoch", s.batch_epoch}, {"offset", s.batch_offset}}}};
}

void from_json(const json& j, RunState& s) {
    if (j.value("schema_version", 0) != kReportSchemaVersion)
        throw ParseError("checkpoint schema version mismatch");
    s.k = j.at("k").get<int>();
    s.population = j.at("population").get<std::vector<AgentConfig>>();
    s.reports = j.at("reports").get<std::vector<FitnessReport>>();
    s.best = j.at("best").is_null() ? std::nullopt : std::optional<AgentConfig>(j.at("best").get<AgentConfig>());
    s.best_composite = j.at("best_composite").get<double>();
    s.rng_state = j.at("rng_state").get<std::string>();
    s.pending = j.at("pending").is_null() ? std::nullopt : std::optional(pending_from_json(j.at("pending")));
    s.judge_prompt_sha256 = j.at("judge_prompt_sha256").get<std::string>();
    s.instruction_sha256 = j.at("instruction_sha256").get<std::string>();
    s.usage = usage_from_json(j.at("usage"));
    s.batch_epoch = j.at("batch").at("epoch").get<std::uint64_t>();
    s.batch_offset = j.at("batch").at("offset").get<std::size_t>();
}

// ---------------------------------------------------------------------------

std::vector<AgentConfig> initialize_population(const RunConfig& config, std::span<const PromptTemplate> pool,
                                               const PromptGenerator* generator, Rng& rng) {
    config.sampling.validate();
    auto prompts = init_prompt_pool(pool, generator, config.n, rng);
    std::vector<AgentConfig> population;
    population.reserve(config.n);
    for (std::size_t i = 0; i < config.n; ++i) {
        AgentConfig a;
        a.id = static_cast<int>(i);
        a.decoding = sample_decoding(config.sampling, rng);
        a.prompt = std::move(prompts[i]);
        a.prompt.lineage.push_back({0, "init"});
        a.provider_ref = config.provider.agent_model;
        population.push_back(std::move(a));
    }
    return population;
}

std::vector<std::vector<std::size_t>> next_batches(const RunConfig& config, RunState& state, std::size_t pool_size,
                                                   std::uint64_t iteration_seed) {
    if (pool_size == 0) throw ConfigError("optimization pool is empty");
    const auto b = std::min(config.batch_size, pool_size);
    auto draw = [&](Rng& rng, std::size_t count) {
        std::vector<std::size_t> idx(pool_size);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        for (std::size_t i = 0; i < count; ++i)
            std::swap(idx[i], idx[static_cast<std::size_t>(
                                  rng.uniform_int(static_cast<std::int64_t>(i), static_cast<std::int64_t>(pool_size) - 1))]);
        idx.resize(count);
        return idx;
    };

    if (config.per_agent_batches) {
        std::vector<std::vector<std::size_t>> out;
        for (std::size_t a = 0; a < config.n; ++a) {
            Rng rng(derive_seed(iteration_seed, {tag("agent-batch"), a}));
            out.push_back(draw(rng, b));
        }
        return out;
    }
    if (state.batch_offset + b > pool_size) {
        ++state.batch_epoch;
        state.batch_offset = 0;
    }
    Rng rng(derive_seed(config.seed, {tag("epoch"), state.batch_epoch}));
    auto perm = draw(rng, pool_size);
    std::vector<std::size_t> batch(perm.begin() + static_cast<std::ptrdiff_t>(state.batch_offset),
                                   perm.begin() + static_cast<std::ptrdiff_t>(state.batch_offset + b));
    state.batch_offset += b;
    return {std::move(batch)};
}

// ---------------------------------------------------------------------------

Orchestrator::Orchestrator(RunConfig config, fs::path run_dir, RunOptions options)
    : config_(std::move(config)), run_dir_(std::move(run_dir)), options_(std::move(options)) {
    config_.validate();
    const LoadOptions load{config_.data.task_kind, config_.fitness_mode == FitnessMode::verifiable};
    pool_ = load_dataset(run_dir_ / "pool.jsonl", load);
    test_ = load_dataset(run_dir_ / "test.jsonl", load);
    check_disjoint(pool_, test_);

    std::vector<QAItem> all = pool_;
    all.insert(all.end(), test_.begin(), test_.end());
    std::optional<fs::path> trace;
    if (options_.trace_llm || config_.provider.trace) trace = run_dir_ / "llm_trace.jsonl";
    runtime_ = make_runtime(config_, all, trace, options_.backend);
    evaluator_ = std::make_unique<BatchEvaluator>(*runtime_.client, runtime_.agent_model, runtime_.judge.get(),
                                                  config_.fitness_mode, config_.judge_weight_set(),
                                                  config_.judge_seeds);

    std::vector<spdlog::sink_ptr> sinks{
        std::make_shared<spdlog::sinks::basic_file_sink_mt>((run_dir_ / "run.log").string(), false)};
    if (options_.echo_log) sinks.push_back(std::make_shared<spdlog::sinks::stderr_sink_mt>());
    logger_ = std::make_shared<spdlog::logger>("agwo", sinks.begin(), sinks.end());
}

Orchestrator::~Orchestrator() = default;

void Orchestrator::log(const std::string& line) const {
    logger_->info(line);
    logger_->flush();
}

void Orchestrator::checkpoint(const RunState& state) const {
    write_file_atomic(run_dir_ / "state.ckpt.json", json(state).dump(1) + "\n");
}

RunState Orchestrator::initial_state() {
    RunState s;
    Rng init(derive_seed(config_.seed, {tag("init")}));
    const auto pool = config_.prompts.pool ? load_prompt_pool(*config_.prompts.pool)
                      : config_.prompts.generate ? std::vector<PromptTemplate>{}
                                                 : default_prompt_pool();
    PromptGenerator generator{PromptEditor{*runtime_.client, runtime_.editor_model}};
    s.population = initialize_population(config_, pool, &generator, init);
    s.rng_state = Rng(derive_seed(config_.seed, {tag("master")})).save_state();
    s.judge_prompt_sha256 = runtime_.judge_prompt.sha256;
    s.instruction_sha256 = runtime_.instruction.resource.sha256;
    s.usage = runtime_.client->ledger().snapshot();
    return s;
}

IterationRecord Orchestrator::run_iteration(RunState& state) {
    const int k = state.k + 1;
    const auto n = state.population.size();

    if (!state.pending) {
        RunState next = state;
        Rng master;
        master.load_state(next.rng_state);
        const auto iteration_seed = master.next_u64();
        next.rng_state = master.save_state();

        const auto batches = next_batches(config_, next, pool_.size(), iteration_seed);
        std::vector<std::vector<QAItem>> items(batches.size());
        std::vector<std::vector<std::uint64_t>> seeds(batches.size());
        std::vector<std::string> batch_ids;
        for (std::size_t b = 0; b < batches.size(); ++b)
            for (auto idx : batches[b]) {
                const auto& item = pool_[idx];
                items[b].push_back(item);
                seeds[b].push_back(item_seed(iteration_seed, item.id));
                if (std::find(batch_ids.begin(), batch_ids.end(), item.id) == batch_ids.end())
                    batch_ids.push_back(item.id);
            }
        auto batch_of = [&](std::size_t agent) { return batches.size() == 1 ? 0 : agent; };

        const bool judge_all = config_.judge == JudgeUse::always;
        std::vector<BatchResult> results(n);
        {
            std::vector<std::future<void>> jobs;
            for (std::size_t a = 0; a < n; ++a)
                jobs.push_back(std::async(std::launch::async, [&, a] {
                    const auto b = batch_of(a);
                    results[a] = evaluator_->evaluate(state.population[a], items[b], seeds[b], judge_all);
                }));
            for (auto& j : jobs) j.get();
        }

        std::size_t attempted = 0, failed = 0;
        for (std::size_t a = 0; a < n; ++a) {
            attempted += items[batch_of(a)].size();
            failed += results[a].failed_items;
        }
        if (failed == attempted) {
            checkpoint(state);
            log("iteration " + std::to_string(k) + ": all " + std::to_string(attempted) +
                " generation calls failed; aborting");
            throw RunAborted("provider outage: every generation in iteration " + std::to_string(k) + " failed",
                             (run_dir_ / "state.ckpt.json").string());
        }

        if (config_.fitness_mode == FitnessMode::verifiable && config_.judge == JudgeUse::ties) {
            std::vector<std::future<void>> jobs;
            for (std::size_t a = 0; a < n; ++a) {
                const double acc = *results[a].report.accuracy;
                bool tied = false;
                for (std::size_t o = 0; o < n && !tied; ++o) tied = o != a && *results[o].report.accuracy == acc;
                if (!tied) continue;
                jobs.push_back(std::async(std::launch::async, [&, a] {
                    const auto b = batch_of(a);
                    evaluator_->attach_judge(results[a], state.population[a], items[b], seeds[b]);
                }));
            }
            for (auto& j : jobs) j.get();
        }

        PendingIteration p;
        p.iteration_seed = iteration_seed;
        for (const auto& r : results) p.reports.push_back(r.report);
        p.order = rank_population(p.reports, 1).order;
        p.batch_ids = std::move(batch_ids);
        p.failed_items = failed;
        next.pending = std::move(p);
        next.usage = runtime_.client->ledger().snapshot();
        checkpoint(next);
        state = std::move(next);
        if (failed > 0) log("iteration " + std::to_string(k) + ": " + std::to_string(failed) + " item(s) failed");
    }

    const auto& p = *state.pending;
    const auto m = std::min(config_.m, n);
    const Ranking ranking{p.order};
    const auto elites = ranking.elites(m);
    std::vector<DecodingConfig> leader_decodings;
    std::vector<PromptTemplate> leader_prompts;
    for (auto e : elites) {
        leader_decodings.push_back(state.population[e].decoding);
        leader_prompts.push_back(state.population[e].prompt);
    }
    const auto weights = config_.weights();
    std::vector<std::size_t> followers;
    for (std::size_t a = 0; a < n; ++a)
        if (std::find(elites.begin(), elites.end(), a) == elites.end()) followers.push_back(a);

    auto population = state.population;
    std::vector<AdaptationOutcome> outcomes(followers.size());
    const PromptEditor editor{*runtime_.client, runtime_.editor_model};
    {
        std::vector<std::future<void>> jobs;
        for (std::size_t f = 0; f < followers.size(); ++f)
            jobs.push_back(std::async(std::launch::async, [&, f] {
                const auto a = followers[f];
                Rng decode_rng(derive_seed(p.iteration_seed, {tag("decode"), a}));
                population[a].decoding = update_decoding(config_.strategy, state.population[a].decoding,
                                                         leader_decodings, weights, config_.sigma, config_.sampling,
                                                         decode_rng);
                Rng adapt_rng(derive_seed(p.iteration_seed, {tag("adapt"), a}));
                outcomes[f] = adapt_prompt(state.population[a].prompt, leader_prompts, runtime_.instruction, editor,
                                           adapt_rng, k);
                population[a].prompt = outcomes[f].new_prompt;
            }));
        for (auto& j : jobs) j.get();
    }

    IterationRecord record;
    record.k = k;
    for (const auto& r : p.reports) record.composites.push_back(r.composite);
    record.elites.assign(elites.begin(), elites.end());
    record.alpha_composite = p.reports[ranking.alpha()].composite;
    record.batch_ids = p.batch_ids;
    record.failed_items = p.failed_items;
    for (std::size_t f = 0; f < followers.size(); ++f) {
        if (outcomes[f].accepted)
            ++record.accepted_edits;
        else
            log("iteration " + std::to_string(k) + ": agent " + std::to_string(followers[f]) + " prompt edit rejected (" +
                std::string(to_string(*outcomes[f].rejection)) + ")");
    }

    if (!state.best || record.alpha_composite > state.best_composite) {
        state.best = state.population[ranking.alpha()];
        state.best_composite = record.alpha_composite;
    }
    record.best_composite = state.best_composite;

    state.reports = p.reports;
    state.population = std::move(population);
    state.pending.reset();
    state.k = k;
    state.usage = runtime_.client->ledger().snapshot();

    append_line(run_dir_ / "history.jsonl", json(record).dump());
    checkpoint(state);

    std::ostringstream msg;
    msg << "iteration " << k << ": alpha=agent " << ranking.alpha() << " composite=" << record.alpha_composite
        << " best=" << record.best_composite << " accepted_edits=" << record.accepted_edits;
    log(msg.str());
    return record;
}

RunResult Orchestrator::run() {
    const auto ckpt = run_dir_ / "state.ckpt.json";
    RunState state;
    if (fs::exists(ckpt)) {
        try {
            state = read_json(ckpt).get<RunState>();
        } catch (const json::exception& e) {
            throw ParseError(ckpt.string() + ": " + e.what());
        }
        if (state.judge_prompt_sha256 != runtime_.judge_prompt.sha256)
            throw ConfigError("judge prompt differs from the one this run started with");
        if (state.instruction_sha256 != runtime_.instruction.resource.sha256)
            throw ConfigError("adaptation instruction differs from the one this run started with");
        if (state.population.size() != config_.n) throw ConfigError("checkpoint population does not match gwo.n");
        runtime_.client->ledger().restore(state.usage);
        log("resuming after iteration " + std::to_string(state.k));
    } else {
        state = initial_state();
        checkpoint(state);
        log("initialized " + std::to_string(state.population.size()) + " agents, seed " + std::to_string(config_.seed));
    }
    truncate_history(run_dir_ / "history.jsonl", state.k);

    while (state.k < config_.iterations) {
        if (options_.halt_after && state.k >= *options_.halt_after) break;
        run_iteration(state);
    }

    RunResult result;
    result.run_dir = run_dir_;
    result.history = read_history_jsonl(run_dir_ / "history.jsonl");
    result.completed = state.k >= config_.iterations;
    result.champion = state.reports.empty() ? state.population.front()
                                            : state.population[rank_population(state.reports, 1).alpha()];
    if (result.completed) {
        emit_report(result.history, result.champion, runtime_.client->ledger().snapshot(), run_dir_,
                    config_.provider.usd_per_1k_tokens);
        log("finished " + std::to_string(state.k) + " iterations; champion agent " +
            std::to_string(result.champion.id));
    }
    return result;
}

// ---------------------------------------------------------------------------

Split prepare_split(const RunConfig& config) {
    const LoadOptions load{config.data.task_kind, config.fitness_mode == FitnessMode::verifiable};
    if (config.data.split == SplitMode::official) {
        if (!config.data.pool || !config.data.test) throw ConfigError("official split needs data.pool and data.test");
        return official_split(load_dataset(*config.data.pool, load), load_dataset(*config.data.test, load));
    }
    auto items = config.data.dataset ? load_dataset(*config.data.dataset, load)
                                     : synthetic_arithmetic_dataset(config.data.synthetic_items, config.data.split_seed);
    return make_split(items, {SplitMode::holdout, config.data.split_seed});
}

std::vector<std::string> read_pool_ids(const fs::path& path) {
    try {
        return read_json(path).get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

RunResult run(const RunConfig& config, const RunOptions& options) {
    config.validate();
    const auto& dir = config.out_dir;
    if (fs::exists(dir / "state.ckpt.json") || fs::exists(dir / "config.json"))
        throw ConfigError("run directory " + dir.string() + " already holds a run; use resume");
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

    const auto split = prepare_split(config);
    write_dataset(dir / "pool.jsonl", split.pool);
    write_dataset(dir / "test.jsonl", split.test);
    std::vector<std::string> ids;
    for (const auto& it : split.pool) ids.push_back(it.id);
    write_file_atomic(dir / "pool_ids.json", json(ids).dump(1) + "\n");
    write_file_atomic(dir / "config.json", config_to_json(config).dump(2) + "\n");

    Orchestrator orchestrator(config, dir, options);
    return orchestrator.run();
}

RunResult resume(const fs::path& run_dir, const RunOptions& options) {
    const auto path = run_dir / "config.json";
    if (!fs::exists(path)) throw ConfigError("no run found in " + run_dir.string() + " (missing config.json)");
    auto config = config_from_json(read_json(path));
    config.out_dir = run_dir;
    Orchestrator orchestrator(config, run_dir, options);
    return orchestrator.run();
}

ChampionEvaluation evaluate_champion(const AgentConfig& champion, std::span<const QAItem> test,
                                     std::span<const std::string> pool_ids, const BatchEvaluator& evaluator,
                                     std::uint64_t seed) {
    if (test.empty()) throw ConfigError("test split is empty");
    check_disjoint_ids(pool_ids, test);
    for (const auto& it : test)
        if (!it.gold) throw ConfigError("test item '" + it.id + "' has no gold answer");

    std::vector<std::uint64_t> seeds;
    for (const auto& it : test) seeds.push_back(derive_seed(seed, {tag("eval"), hash_string(it.id)}));
    auto r = evaluator.evaluate(champion, test, seeds, false);
    ChampionEvaluation out;
    const auto correct = std::count_if(r.items.begin(), r.items.end(), [](const ItemOutcome& o) { return o.correct; });
    out.accuracy = static_cast<double>(correct) / static_cast<double>(test.size());
    out.items = std::move(r.items);
    return out;
}

} // namespace agwo
