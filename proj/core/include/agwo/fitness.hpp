#pragma once

// Fitness of an agent: exact-match accuracy for tasks with gold labels, a
// weighted judge composite otherwise, and the ranking rule over both.

#include "agwo/error.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace agwo {

enum class TaskKind { numeric, multiple_choice, free_form };
std::string_view to_string(TaskKind k) noexcept;
TaskKind parse_task_kind(std::string_view s);

/// nullopt marks an extraction failure; it never matches a gold label.
using ExtractedAnswer = std::optional<std::string>;

/// numeric: last number, canonicalized. multiple_choice: last option letter.
/// free_form: last non-empty line, trimmed.
ExtractedAnswer extract_answer(std::string_view completion, TaskKind kind);

/// Case-folds, trims, drops terminal punctuation, and rewrites numerals to
/// canonical decimal form ("1,000.50" -> "1000.5", "10.0" -> "10").
std::string normalize_answer(std::string_view s);

/// Canonical decimal spelling of a numeric token, or nullopt if `s` is not one.
std::optional<std::string> canonical_number(std::string_view s);

/// Fraction of positions whose normalized answer equals the normalized gold.
/// Throws EvaluationError on an empty batch, ShapeError on length mismatch.
double exact_match_fitness(std::span<const ExtractedAnswer> answers, std::span<const std::string> golds);

struct JudgeScores {
    double logic = 0.0;
    double creativity = 0.0;
    double completeness = 0.0;
    std::vector<std::uint64_t> seeds_used;

    bool valid() const noexcept;
    friend bool operator==(const JudgeScores&, const JudgeScores&) = default;
};

class JudgeWeights {
public:
    /// Throws ConfigError unless all weights are positive and sum to 1.
    JudgeWeights(double logic, double creativity, double completeness);
    /// (0.5, 0.2, 0.3)
    static JudgeWeights standard() { return {0.5, 0.2, 0.3}; }

    double logic() const noexcept { return w_[0]; }
    double creativity() const noexcept { return w_[1]; }
    double completeness() const noexcept { return w_[2]; }

private:
    double w_[3];
};

double judge_composite(const JudgeScores& scores, const JudgeWeights& weights);

enum class FitnessMode { verifiable, non_verifiable };
std::string_view to_string(FitnessMode m) noexcept;
FitnessMode parse_fitness_mode(std::string_view s);

struct FitnessReport {
    FitnessMode mode = FitnessMode::verifiable;
    std::optional<double> accuracy;
    std::optional<JudgeScores> judge;
    /// Judge composite, kept alongside `judge` for tie-breaking.
    std::optional<double> judge_composite;
    double composite = 0.0;
    std::size_t batch_size = 0;

    static FitnessReport verifiable(double accuracy, std::size_t batch_size,
                                    std::optional<JudgeScores> judge, const JudgeWeights& weights);
    static FitnessReport non_verifiable(JudgeScores judge, std::size_t batch_size, const JudgeWeights& weights);

    friend bool operator==(const FitnessReport&, const FitnessReport&) = default;
};

/// Population order, best first. The first three entries are alpha, beta, delta.
struct Ranking {
    std::vector<std::size_t> order;

    std::span<const std::size_t> elites(std::size_t m) const {
        return std::span<const std::size_t>(order).first(std::min(m, order.size()));
    }
    std::size_t alpha() const { return order.at(0); }
    std::size_t beta() const { return order.at(1); }
    std::size_t delta() const { return order.at(2); }
};

/// Descending composite; exact accuracy ties in verifiable mode fall back to
/// the judge composite (reports without one sort after those with one); then
/// ascending index. Throws ConfigError for fewer than `min_size` reports.
Ranking rank_population(std::span<const FitnessReport> reports, std::size_t min_size = 3);

void to_json(nlohmann::json& j, const JudgeScores& s);
void from_json(const nlohmann::json& j, JudgeScores& s);
void to_json(nlohmann::json& j, const FitnessReport& r);
void from_json(const nlohmann::json& j, FitnessReport& r);

} // namespace agwo
