#include "agwo/fitness.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

namespace agwo {

std::string_view to_string(TaskKind k) noexcept {
    switch (k) {
    case TaskKind::numeric: return "numeric";
    case TaskKind::multiple_choice: return "multiple-choice";
    case TaskKind::free_form: return "free-form";
    }
    return "?";
}

TaskKind parse_task_kind(std::string_view s) {
    if (s == "numeric") return TaskKind::numeric;
    if (s == "multiple-choice" || s == "multiple_choice") return TaskKind::multiple_choice;
    if (s == "free-form" || s == "free_form") return TaskKind::free_form;
    throw ConfigError("unknown task kind '" + std::string(s) + "'");
}

std::string_view to_string(FitnessMode m) noexcept {
    return m == FitnessMode::verifiable ? "verifiable" : "non-verifiable";
}

FitnessMode parse_fitness_mode(std::string_view s) {
    if (s == "verifiable") return FitnessMode::verifiable;
    if (s == "non-verifiable" || s == "non_verifiable") return FitnessMode::non_verifiable;
    throw ConfigError("unknown fitness mode '" + std::string(s) + "'");
}

namespace {

bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

/// Length of a digit run with optional 3-digit comma groups starting at i.
std::size_t scan_integer_part(std::string_view s, std::size_t i) {
    std::size_t j = i;
    while (j < s.size() && is_digit(s[j])) ++j;
    // Only accept comma groups when the leading run has 1-3 digits.
    if (j - i <= 3) {
        while (j + 3 < s.size() && s[j] == ',' && is_digit(s[j + 1]) && is_digit(s[j + 2]) &&
               is_digit(s[j + 3]) && (j + 4 >= s.size() || !is_digit(s[j + 4])))
            j += 4;
    }
    return j - i;
}

ExtractedAnswer last_number(std::string_view text) {
    std::optional<std::string> found;
    std::size_t i = 0;
    while (i < text.size()) {
        const bool starts_fraction = text[i] == '.' && i + 1 < text.size() && is_digit(text[i + 1]) &&
                                     (i == 0 || !is_digit(text[i - 1]));
        if (!is_digit(text[i]) && !starts_fraction) {
            ++i;
            continue;
        }
        const std::size_t start = i;
        std::size_t j = i + (starts_fraction ? 0 : scan_integer_part(text, i));
        if (j < text.size() && text[j] == '.' && j + 1 < text.size() && is_digit(text[j + 1])) {
            ++j;
            while (j < text.size() && is_digit(text[j])) ++j;
        }
        std::string token(text.substr(start, j - start));
        if (start > 0 && text[start - 1] == '-' && (start < 2 || !is_alnum(text[start - 2])))
            token.insert(token.begin(), '-');
        if (auto c = canonical_number(token)) found = std::move(c);
        i = j;
    }
    return found;
}

ExtractedAnswer last_option_letter(std::string_view text) {
    const std::string low = lower(text);
    auto standalone = [&](std::size_t p) {
        const char c = text[p];
        if (c < 'A' || c > 'J') return false;
        if (p > 0 && is_alnum(text[p - 1])) return false;
        if (p + 1 < text.size() && is_alnum(text[p + 1])) return false;
        return true;
    };
    for (std::string_view cue : {"answer is", "answer:"}) {
        const auto at = low.rfind(cue);
        if (at == std::string::npos) continue;
        for (std::size_t p = at + cue.size(); p < text.size(); ++p)
            if (standalone(p)) return std::string(1, text[p]);
    }
    for (std::size_t p = text.size(); p-- > 0;)
        if (text[p] == ')' && p >= 2 && text[p - 2] == '(' && standalone(p - 1))
            return std::string(1, text[p - 1]);
    for (std::size_t p = text.size(); p-- > 0;) {
        if (!standalone(p) || text[p] > 'E') continue;
        if (text[p] == 'A' || text[p] == 'I') {
            // "A car", "I think": article or pronoun, not an option.
            auto q = p + 1;
            while (q < text.size() && text[q] == ' ') ++q;
            if (q > p + 1 && q < text.size() && std::islower(static_cast<unsigned char>(text[q]))) continue;
        }
        return std::string(1, text[p]);
    }
    return std::nullopt;
}

ExtractedAnswer last_line(std::string_view text) {
    std::size_t end = text.size();
    while (end > 0) {
        const auto nl = text.rfind('\n', end - 1);
        const auto begin = nl == std::string_view::npos ? 0 : nl + 1;
        const auto line = trim(text.substr(begin, end - begin));
        if (!line.empty()) return std::string(line);
        if (nl == std::string_view::npos) break;
        end = nl;
    }
    return std::nullopt;
}

} // namespace

std::optional<std::string> canonical_number(std::string_view s) {
    s = trim(s);
    bool negative = false;
    if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
        negative = s.front() == '-';
        s.remove_prefix(1);
    }
    if (!s.empty() && s.front() == '$') s.remove_prefix(1);
    if (!s.empty() && s.back() == '%') s.remove_suffix(1);
    if (s.empty()) return std::nullopt;

    std::string int_part, frac_part;
    std::size_t i = 0;
    for (; i < s.size() && (is_digit(s[i]) || s[i] == ','); ++i)
        if (s[i] != ',') int_part += s[i];
    if (i < s.size() && s[i] == '.') {
        for (++i; i < s.size() && is_digit(s[i]); ++i) frac_part += s[i];
    }
    if (i != s.size() || (int_part.empty() && frac_part.empty())) return std::nullopt;

    const auto nz = int_part.find_first_not_of('0');
    int_part = nz == std::string::npos ? "0" : int_part.substr(nz);
    while (!frac_part.empty() && frac_part.back() == '0') frac_part.pop_back();

    std::string out = int_part;
    if (!frac_part.empty()) out += "." + frac_part;
    if (negative && out != "0") out.insert(out.begin(), '-');
    return out;
}

ExtractedAnswer extract_answer(std::string_view completion, TaskKind kind) {
    switch (kind) {
    case TaskKind::numeric: return last_number(completion);
    case TaskKind::multiple_choice: return last_option_letter(completion);
    case TaskKind::free_form: return last_line(completion);
    }
    return std::nullopt;
}

std::string normalize_answer(std::string_view s) {
    std::string out = lower(trim(s));
    while (!out.empty() && std::string_view(".,;:!?").find(out.back()) != std::string_view::npos) {
        out.pop_back();
        out = std::string(trim(out));
    }
    if (auto n = canonical_number(out)) return *n;
    return out;
}

double exact_match_fitness(std::span<const ExtractedAnswer> answers, std::span<const std::string> golds) {
    if (answers.size() != golds.size())
        throw ShapeError("answers (" + std::to_string(answers.size()) + ") and golds (" +
                         std::to_string(golds.size()) + ") differ in length");
    if (answers.empty()) throw EvaluationError("empty validation batch");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < answers.size(); ++i)
        if (answers[i] && normalize_answer(*answers[i]) == normalize_answer(golds[i])) ++hits;
    return static_cast<double>(hits) / static_cast<double>(answers.size());
}

// ---------------------------------------------------------------------------

bool JudgeScores::valid() const noexcept {
    auto in01 = [](double x) { return x >= 0.0 && x <= 1.0; };
    return in01(logic) && in01(creativity) && in01(completeness);
}

JudgeWeights::JudgeWeights(double logic, double creativity, double completeness)
    : w_{logic, creativity, completeness} {
    if (!(logic > 0.0 && creativity > 0.0 && completeness > 0.0))
        throw ConfigError("judge weights must be positive");
    if (std::abs(logic + creativity + completeness - 1.0) > 1e-12)
        throw ConfigError("judge weights must sum to 1");
}

double judge_composite(const JudgeScores& s, const JudgeWeights& w) {
    return w.logic() * s.logic + w.creativity() * s.creativity + w.completeness() * s.completeness;
}

FitnessReport FitnessReport::verifiable(double accuracy, std::size_t batch_size,
                                        std::optional<JudgeScores> judge, const JudgeWeights& weights) {
    FitnessReport r;
    r.mode = FitnessMode::verifiable;
    r.accuracy = accuracy;
    r.composite = accuracy;
    r.batch_size = batch_size;
    if (judge) {
        r.judge_composite = agwo::judge_composite(*judge, weights);
        r.judge = std::move(judge);
    }
    return r;
}

FitnessReport FitnessReport::non_verifiable(JudgeScores judge, std::size_t batch_size,
                                            const JudgeWeights& weights) {
    FitnessReport r;
    r.mode = FitnessMode::non_verifiable;
    r.judge_composite = agwo::judge_composite(judge, weights);
    r.composite = *r.judge_composite;
    r.judge = std::move(judge);
    r.batch_size = batch_size;
    return r;
}

Ranking rank_population(std::span<const FitnessReport> reports, std::size_t min_size) {
    if (reports.size() < min_size)
        throw ConfigError("ranking needs at least " + std::to_string(min_size) + " reports, got " +
                          std::to_string(reports.size()));
    Ranking r;
    r.order.resize(reports.size());
    std::iota(r.order.begin(), r.order.end(), std::size_t{0});
    std::stable_sort(r.order.begin(), r.order.end(), [&](std::size_t i, std::size_t j) {
        const auto& a = reports[i];
        const auto& b = reports[j];
        if (a.composite != b.composite) return a.composite > b.composite;
        if (a.mode == FitnessMode::verifiable && b.mode == FitnessMode::verifiable) {
            if (a.judge_composite.has_value() != b.judge_composite.has_value())
                return a.judge_composite.has_value();
            if (a.judge_composite && *a.judge_composite != *b.judge_composite)
                return *a.judge_composite > *b.judge_composite;
        }
        return false;  // stable sort keeps index order
    });
    return r;
}

// ---------------------------------------------------------------------------

void to_json(nlohmann::json& j, const JudgeScores& s) {
    j = nlohmann::json{{"logic", s.logic}, {"creativity", s.creativity},
                       {"completeness", s.completeness}, {"seeds_used", s.seeds_used}};
}

void from_json(const nlohmann::json& j, JudgeScores& s) {
    s.logic = j.at("logic").get<double>();
    s.creativity = j.at("creativity").get<double>();
    s.completeness = j.at("completeness").get<double>();
    s.seeds_used = j.value("seeds_used", std::vector<std::uint64_t>{});
}

void to_json(nlohmann::json& j, const FitnessReport& r) {
    j = nlohmann::json{{"mode", to_string(r.mode)}, {"composite", r.composite}, {"batch_size", r.batch_size}};
    j["accuracy"] = r.accuracy ? nlohmann::json(*r.accuracy) : nlohmann::json(nullptr);
    j["judge"] = r.judge ? nlohmann::json(*r.judge) : nlohmann::json(nullptr);
    j["judge_composite"] = r.judge_composite ? nlohmann::json(*r.judge_composite) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, FitnessReport& r) {
    r.mode = parse_fitness_mode(j.at("mode").get<std::string>());
    r.composite = j.at("composite").get<double>();
    r.batch_size = j.at("batch_size").get<std::size_t>();
    r.accuracy = j.at("accuracy").is_null() ? std::nullopt : std::optional<double>(j.at("accuracy").get<double>());
    r.judge = j.at("judge").is_null() ? std::nullopt : std::optional<JudgeScores>(j.at("judge").get<JudgeScores>());
    r.judge_composite = j.at("judge_composite").is_null()
                            ? std::nullopt
                            : std::optional<double>(j.at("judge_composite").get<double>());
}

} // namespace agwo
