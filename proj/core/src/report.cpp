#include "agwo/report.hpp"

#include "agwo/error.hpp"

#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>

namespace agwo {

void to_json(nlohmann::json& j, const IterationRecord& r) {
    j = nlohmann::json{{"k", r.k},
                       {"composites", r.composites},
                       {"elites", r.elites},
                       {"alpha_composite", r.alpha_composite},
                       {"best_composite", r.best_composite},
                       {"batch_ids", r.batch_ids},
                       {"accepted_edits", r.accepted_edits},
                       {"failed_items", r.failed_items}};
}

void from_json(const nlohmann::json& j, IterationRecord& r) {
    r.k = j.at("k").get<int>();
    r.composites = j.at("composites").get<std::vector<double>>();
    r.elites = j.at("elites").get<std::vector<std::size_t>>();
    r.alpha_composite = j.at("alpha_composite").get<double>();
    r.best_composite = j.at("best_composite").get<double>();
    r.batch_ids = j.value("batch_ids", std::vector<std::string>{});
    r.accepted_edits = j.value("accepted_edits", std::size_t{0});
    r.failed_items = j.value("failed_items", std::size_t{0});
}

std::vector<IterationRecord> read_history_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    std::vector<IterationRecord> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        try {
            out.push_back(nlohmann::json::parse(line).get<IterationRecord>());
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path.string() + ":" + std::to_string(n) + ": " + e.what());
        }
    }
    return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out << text;
        if (!out.flush()) throw IoError("write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

namespace {

std::string fmt_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

double parse_double(const std::string& s, const std::string& where) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw ParseError(where + ": bad number '" + s + "'");
    return v;
}

} // namespace

ReportFiles emit_report(std::span<const IterationRecord> history, const AgentConfig& champion,
                        const std::map<std::string, UsageTotals>& usage, const std::filesystem::path& out_dir,
                        std::optional<double> usd_per_1k_tokens) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

    ReportFiles files{out_dir / "history.csv", out_dir / "champion.json", out_dir / "usage.json"};

    std::size_t agents = 0;
    for (const auto& r : history) agents = std::max(agents, r.composites.size());
    std::ostringstream csv;
    csv << "iteration,best_composite,mean_composite";
    for (std::size_t a = 0; a < agents; ++a) csv << ",agent_" << a;
    csv << '\n';
    for (const auto& r : history) {
        const double mean = r.composites.empty()
                                ? 0.0
                                : std::accumulate(r.composites.begin(), r.composites.end(), 0.0) /
                                      static_cast<double>(r.composites.size());
        csv << r.k << ',' << fmt_double(r.best_composite) << ',' << fmt_double(mean);
        for (std::size_t a = 0; a < agents; ++a)
            csv << ',' << (a < r.composites.size() ? fmt_double(r.composites[a]) : std::string{});
        csv << '\n';
    }
    write_file_atomic(files.history_csv, csv.str());

    nlohmann::json champ = champion;
    champ["schema_version"] = kReportSchemaVersion;
    write_file_atomic(files.champion_json, champ.dump(2) + "\n");

    UsageTotals total;
    for (const auto& [_, t] : usage) {
        total.calls += t.calls;
        total.prompt_tokens += t.prompt_tokens;
        total.completion_tokens += t.completion_tokens;
    }
    nlohmann::json u = {{"schema_version", kReportSchemaVersion},
                        {"providers", usage_to_json(usage)},
                        {"total", {{"calls", total.calls},
                                   {"prompt_tokens", total.prompt_tokens},
                                   {"completion_tokens", total.completion_tokens},
                                   {"total_tokens", total.total_tokens()}}}};
    if (usd_per_1k_tokens)
        u["total"]["estimated_usd"] = static_cast<double>(total.total_tokens()) / 1000.0 * *usd_per_1k_tokens;
    write_file_atomic(files.usage_json, u.dump(2) + "\n");
    return files;
}

std::vector<HistoryRow> read_history_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    std::string line;
    if (!std::getline(in, line) || line.rfind("iteration,best_composite,mean_composite", 0) != 0)
        throw ParseError(path.string() + ": unexpected header");
    std::vector<HistoryRow> rows;
    std::size_t n = 1;
    while (std::getline(in, line)) {
        ++n;
        const auto where = path.string() + ":" + std::to_string(n);
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        if (cells.size() < 3) throw ParseError(where + ": too few columns");
        HistoryRow row;
        row.iteration = static_cast<int>(parse_double(cells[0], where));
        row.best_composite = parse_double(cells[1], where);
        row.mean_composite = parse_double(cells[2], where);
        for (std::size_t c = 3; c < cells.size(); ++c)
            if (!cells[c].empty()) row.agents.push_back(parse_double(cells[c], where));
        rows.push_back(std::move(row));
    }
    return rows;
}

AgentConfig read_champion(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    try {
        return nlohmann::json::parse(in).get<AgentConfig>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

std::map<std::string, UsageTotals> read_usage(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    try {
        return usage_from_json(nlohmann::json::parse(in).at("providers"));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

} // namespace agwo
