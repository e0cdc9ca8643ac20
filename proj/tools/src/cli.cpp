#include "agwo_cli/cli.hpp"

#include "agwo/error.hpp"
#include "agwo/gwo.hpp"
#include "agwo/orchestrator.hpp"
#include "agwo/report.hpp"
#include "agwo/test_functions.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

namespace agwo::cli {

namespace fs = std::filesystem;

namespace {

struct CommonRunFlags {
    std::string config;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
};

struct ResumeFlags {
    std::string out_dir;
};

struct RunFlags {
    std::optional<int> halt_after;
    bool trace_llm = false;
    bool verbose = false;
};

struct EvalFlags {
    std::string champion;
    std::string test;
    std::string pool_ids;
};

struct BenchFlags {
    std::string function = "sphere";
    std::size_t dims = 5;
    std::size_t population = 30;
    std::uint32_t iterations = 500;
    std::uint64_t seed = 1;
    std::string out;
};

RunConfig resolve_config(const CommonRunFlags& f) {
    std::optional<fs::path> path;
    if (!f.config.empty()) path = f.config;
    auto overrides = f.overrides;
    if (f.seed) overrides.push_back("gwo.seed=" + std::to_string(*f.seed));
    auto config = load_config(path, overrides);
    if (!f.out_dir.empty()) config.out_dir = f.out_dir;
    return config;
}

std::string fixed4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

int cmd_run(const CommonRunFlags& common, const RunFlags& flags, std::ostream& out) {
    const auto config = resolve_config(common);
    RunOptions options;
    options.halt_after = flags.halt_after;
    options.trace_llm = flags.trace_llm;
    options.echo_log = flags.verbose;
    const auto result = run(config, options);
    if (!result.completed) {
        out << "halted after iteration " << result.history.size() << "; resume with: agwo resume --out-dir "
            << result.run_dir.string() << '\n';
        return kOk;
    }
    out << "champion: " << (result.run_dir / "champion.json").string() << '\n';
    return kOk;
}

int cmd_resume(const ResumeFlags& f, const RunFlags& flags, std::ostream& out) {
    RunOptions options;
    options.halt_after = flags.halt_after;
    options.trace_llm = flags.trace_llm;
    options.echo_log = flags.verbose;
    const auto result = resume(f.out_dir, options);
    if (!result.completed) {
        out << "halted after iteration " << result.history.size() << '\n';
        return kOk;
    }
    out << "champion: " << (result.run_dir / "champion.json").string() << '\n';
    return kOk;
}

int cmd_eval(const CommonRunFlags& common, const EvalFlags& f, std::ostream& out) {
    const fs::path champion_path = f.champion;
    const auto run_dir = champion_path.parent_path();

    RunConfig config;
    if (common.config.empty() && fs::exists(run_dir / "config.json")) {
        std::ifstream in(run_dir / "config.json");
        nlohmann::json tree = nlohmann::json::parse(in);
        for (const auto& o : common.overrides) apply_override(tree, o);
        config = config_from_json(tree);
        if (common.seed) config.seed = *common.seed;
        config.validate();
    } else {
        config = resolve_config(common);
    }

    const auto champion = read_champion(champion_path);
    const LoadOptions load{config.data.task_kind, true};
    const auto test = load_dataset(f.test, load);

    std::vector<std::string> pool_ids;
    fs::path ids_path = f.pool_ids.empty() ? run_dir / "pool_ids.json" : fs::path(f.pool_ids);
    if (fs::exists(ids_path)) pool_ids = read_pool_ids(ids_path);
    else if (!f.pool_ids.empty()) throw ConfigError("cannot read pool ids " + ids_path.string());

    const auto runtime = make_runtime(config, test);
    BatchEvaluator evaluator(*runtime.client, runtime.agent_model, runtime.judge.get(), FitnessMode::verifiable,
                             config.judge_weight_set(), config.judge_seeds);
    const auto eval = evaluate_champion(champion, test, pool_ids, evaluator, config.seed);

    nlohmann::json items = nlohmann::json::array();
    std::size_t correct = 0;
    for (const auto& it : eval.items) {
        correct += it.correct ? 1 : 0;
        items.push_back({{"id", it.id},
                         {"answer", it.answer ? nlohmann::json(*it.answer) : nlohmann::json(nullptr)},
                         {"correct", it.correct},
                         {"failed", it.failed}});
    }
    const fs::path out_dir = common.out_dir.empty() ? run_dir : fs::path(common.out_dir);
    if (!out_dir.empty()) fs::create_directories(out_dir);
    nlohmann::json report = {{"schema_version", kReportSchemaVersion},
                             {"accuracy", eval.accuracy},
                             {"correct", correct},
                             {"total", eval.items.size()},
                             {"champion_id", champion.id},
                             {"test_split", f.test},
                             {"items", items}};
    write_file_atomic(out_dir / "eval.json", report.dump(2) + "\n");
    out << "accuracy=" << fixed4(eval.accuracy) << '\n';
    return kOk;
}

int cmd_bench(const BenchFlags& f, std::ostream& out) {
    const auto problem = gwo::find_test_problem(f.function);
    if (!problem) throw ConfigError("unknown function '" + f.function + "'");
    if (f.dims < 1) throw ConfigError("--dims must be at least 1");
    const auto space = gwo::SearchSpace::cube(f.dims, problem->lower, problem->upper);
    gwo::GwoOptions options;
    options.population_size = f.population;
    options.max_iterations = f.iterations;
    options.seed = f.seed;
    const auto result = gwo::minimize(problem->fn, space, options);

    std::ostringstream csv;
    csv << "iteration,best_value\n";
    for (std::size_t t = 0; t < result.trace.size(); ++t) {
        char buf[64];
        auto [end, ec] = std::to_chars(buf, buf + sizeof buf, result.trace[t]);
        csv << t << ',' << std::string_view(buf, static_cast<std::size_t>(end - buf)) << '\n';
    }
    const fs::path path = f.out.empty() ? fs::path(f.function + "_convergence.csv") : fs::path(f.out);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    write_file_atomic(path, csv.str());

    char line[128];
    std::snprintf(line, sizeof line, "%s D=%zu N=%zu T=%u seed=%llu final_best=%.6e", f.function.c_str(), f.dims,
                  f.population, f.iterations, static_cast<unsigned long long>(f.seed), result.value);
    out << line << '\n' << "convergence: " << path.string() << '\n';
    return kOk;
}

int cmd_report(const ResumeFlags& f, std::ostream& out) {
    const fs::path dir = f.out_dir;
    const auto history = read_history_jsonl(dir / "history.jsonl");
    if (history.empty()) throw ConfigError("no completed iterations in " + dir.string());
    const auto champion = read_champion(dir / "champion.json");
    std::map<std::string, UsageTotals> usage;
    if (fs::exists(dir / "usage.json")) usage = read_usage(dir / "usage.json");
    std::optional<double> rate;
    if (fs::exists(dir / "config.json")) {
        std::ifstream in(dir / "config.json");
        rate = config_from_json(nlohmann::json::parse(in)).provider.usd_per_1k_tokens;
    }
    const auto files = emit_report(history, champion, usage, dir, rate);

    out << "iterations: " << history.size() << '\n';
    out << "best composite: " << fixed4(history.back().best_composite) << '\n';
    out << "champion temperature=" << fixed4(champion.decoding.temperature)
        << " top_p=" << fixed4(champion.decoding.top_p) << " max_tokens=" << champion.decoding.max_tokens << '\n';
    out << "wrote " << files.history_csv.string() << '\n';
    return kOk;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Grey-wolf search over LLM decoding settings and prompts", "agwo"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "agwo 0.1.0");

    CommonRunFlags common;
    RunFlags run_flags;
    ResumeFlags resume_flags;
    EvalFlags eval_flags;
    BenchFlags bench;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("-c,--config", common.config, "TOML configuration file")->check(CLI::ExistingFile);
        sub->add_option("--set", common.overrides, "Override a dotted key, e.g. gwo.seed=7")->take_all();
        sub->add_option("--seed", common.seed, "Shortcut for --set gwo.seed=N");
        sub->add_option("--out-dir", common.out_dir, "Output directory");
    };
    auto add_run_flags = [&](CLI::App* sub) {
        sub->add_option("--halt-after", run_flags.halt_after, "Stop after this many completed iterations")
            ->check(CLI::NonNegativeNumber);
        sub->add_flag("--trace-llm", run_flags.trace_llm, "Append every model exchange to llm_trace.jsonl");
        sub->add_flag("-v,--verbose", run_flags.verbose, "Mirror run.log to stderr");
    };

    auto* run_cmd = app.add_subcommand("run", "Run a fresh optimization into --out-dir");
    add_common(run_cmd);
    add_run_flags(run_cmd);

    auto* resume_cmd = app.add_subcommand("resume", "Continue a run from its checkpoint");
    resume_cmd->add_option("--out-dir", resume_flags.out_dir, "Run directory")->required();
    add_run_flags(resume_cmd);

    auto* eval_cmd = app.add_subcommand("eval", "Score a champion on the held-out test split");
    add_common(eval_cmd);
    eval_cmd->add_option("--champion", eval_flags.champion, "champion.json")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--test", eval_flags.test, "Test split (JSONL)")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--pool-ids", eval_flags.pool_ids, "Optimization pool ids (default: next to champion)");

    auto* bench_cmd = app.add_subcommand("bench", "Run the standard grey wolf optimizer on a test function");
    bench_cmd->add_option("function,--function", bench.function, "sphere | rastrigin | rosenbrock")
        ->check(CLI::IsMember({"sphere", "rastrigin", "rosenbrock"}));
    bench_cmd->add_option("--dims", bench.dims, "Dimensions");
    bench_cmd->add_option("--population", bench.population, "Wolves (N)");
    bench_cmd->add_option("--iterations", bench.iterations, "Iterations (T_max)");
    bench_cmd->add_option("--seed", bench.seed, "Seed");
    bench_cmd->add_option("--out", bench.out, "Convergence CSV path");

    auto* report_cmd = app.add_subcommand("report", "Rebuild history.csv, champion.json and usage.json");
    report_cmd->add_option("--out-dir", resume_flags.out_dir, "Run directory")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kConfig;
    }

    try {
        if (run_cmd->parsed()) return cmd_run(common, run_flags, out);
        if (resume_cmd->parsed()) return cmd_resume(resume_flags, run_flags, out);
        if (eval_cmd->parsed()) return cmd_eval(common, eval_flags, out);
        if (bench_cmd->parsed()) return cmd_bench(bench, out);
        if (report_cmd->parsed()) return cmd_report(resume_flags, out);
    } catch (const LeakageError& e) {
        err << "error: leakage refused: " << e.what() << '\n';
        return kLeakage;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kConfig;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kConfig;
    } catch (const RunAborted& e) {
        err << "error: " << e.what() << "\ncheckpoint: " << e.checkpoint_path << '\n';
        return kRuntime;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kRuntime;
    }
    return kConfig;
}

} // namespace agwo::cli
