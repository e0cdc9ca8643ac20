#pragma once

// Standard continuous Grey Wolf Optimizer over a bounded box.

#include "agwo/error.hpp"
#include "agwo/rng.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace agwo::gwo {

using Position = std::vector<double>;

class SearchSpace {
public:
    /// Throws ConfigError unless both bounds have the same nonzero length and
    /// lower[k] < upper[k] everywhere.
    SearchSpace(std::vector<double> lower, std::vector<double> upper);

    /// The box [lo, hi]^dimension.
    static SearchSpace cube(std::size_t dimension, double lo, double hi);

    std::size_t dimension() const noexcept { return lower_.size(); }
    const std::vector<double>& lower() const noexcept { return lower_; }
    const std::vector<double>& upper() const noexcept { return upper_; }

    /// Hard clamp into the box.
    void project(std::span<double> x) const;
    bool contains(std::span<const double> x) const;

private:
    std::vector<double> lower_;
    std::vector<double> upper_;
};

struct GwoSchedule {
    std::uint32_t max_iterations = 1;
    std::uint32_t current = 0;
};

/// a(t) = 2 - 2 t / T_max. Throws ConfigError on T_max = 0 or t > T_max.
double schedule_coefficient(const GwoSchedule& schedule);

/// One leader-guided proposal: X_p - A*|C*X_p - X| with C = 2 r1, A = 2a r2 - a.
/// Not projected.
Position encircle(std::span<const double> leader, std::span<const double> wolf, double a,
                  std::span<const double> r1, std::span<const double> r2);

struct Leader {
    Position position;
    double fitness = 0.0;
};

/// alpha, beta, delta in that order. For minimization fitness is ascending.
struct LeaderSet {
    Leader alpha;
    Leader beta;
    Leader delta;

    bool ordered() const noexcept {
        return alpha.fitness <= beta.fitness && beta.fitness <= delta.fitness;
    }
};

/// Mean of three proposals, projected into the box.
Position combine_candidates(const std::array<Position, 3>& candidates, const SearchSpace& space);

/// Encircles each leader with independently drawn r1, r2 and averages.
Position leader_average_update(std::span<const double> wolf, const LeaderSet& leaders, double a,
                               Rng& rng, const SearchSpace& space);

/// Population indices sorted by ascending fitness; ties keep index order.
std::vector<std::size_t> rank_ascending(std::span<const double> fitness);

using Objective = std::function<double(std::span<const double>)>;

/// Raised when the objective returns NaN or infinity.
class NonFiniteObjective : public EvaluationError {
public:
    NonFiniteObjective(Position where, double value);
    Position position;
    double value;
};

struct IterationView {
    std::uint32_t iteration;                 // 0 is the initial population
    std::span<const Position> positions;
    std::span<const double> fitness;
    std::array<std::size_t, 3> leaders;       // indices of alpha, beta, delta
};

struct GwoOptions {
    std::size_t population_size = 30;
    std::uint32_t max_iterations = 500;
    std::uint64_t seed = 0;
    /// Leaders keep their positions between iterations. Disable for the
    /// literal "update every wolf" variant.
    bool elitism = true;
    /// Worker threads for objective evaluation; 1 evaluates inline.
    unsigned threads = 1;
    /// Observer called after every evaluation sweep.
    std::function<void(const IterationView&)> on_iteration;
};

struct GwoResult {
    Position best;
    double value = 0.0;
    /// trace[0] is the initial population best; trace[t] the best-so-far after
    /// iteration t. Length is max_iterations + 1.
    std::vector<double> trace;
};

GwoResult minimize(const Objective& objective, const SearchSpace& space, const GwoOptions& options);

} // namespace agwo::gwo
