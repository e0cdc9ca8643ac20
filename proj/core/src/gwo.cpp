#include "agwo/gwo.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <sstream>

namespace agwo::gwo {

SearchSpace::SearchSpace(std::vector<double> lower, std::vector<double> upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
    if (lower_.empty()) throw ConfigError("search space must have dimension >= 1");
    if (lower_.size() != upper_.size())
        throw ConfigError("search space bounds have different lengths");
    for (std::size_t k = 0; k < lower_.size(); ++k) {
        if (!(lower_[k] < upper_[k])) {
            std::ostringstream os;
            os << "search space bound " << k << " is empty: [" << lower_[k] << ", " << upper_[k] << "]";
            throw ConfigError(os.str());
        }
    }
}

SearchSpace SearchSpace::cube(std::size_t dimension, double lo, double hi) {
    return SearchSpace(std::vector<double>(dimension, lo), std::vector<double>(dimension, hi));
}

void SearchSpace::project(std::span<double> x) const {
    if (x.size() != dimension()) throw ShapeError("position has wrong dimension");
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = std::clamp(x[k], lower_[k], upper_[k]);
}

bool SearchSpace::contains(std::span<const double> x) const {
    if (x.size() != dimension()) return false;
    for (std::size_t k = 0; k < x.size(); ++k)
        if (!(x[k] >= lower_[k] && x[k] <= upper_[k])) return false;
    return true;
}

double schedule_coefficient(const GwoSchedule& schedule) {
    if (schedule.max_iterations == 0) throw ConfigError("invalid schedule: max_iterations must be >= 1");
    if (schedule.current > schedule.max_iterations)
        throw ConfigError("invalid schedule: iteration exceeds max_iterations");
    return 2.0 - 2.0 * static_cast<double>(schedule.current) / static_cast<double>(schedule.max_iterations);
}

Position encircle(std::span<const double> leader, std::span<const double> wolf, double a,
                  std::span<const double> r1, std::span<const double> r2) {
    const auto d = leader.size();
    if (wolf.size() != d || r1.size() != d || r2.size() != d)
        throw ShapeError("encircle: dimension mismatch");
    Position out(d);
    for (std::size_t k = 0; k < d; ++k) {
        const double c = 2.0 * r1[k];
        const double A = 2.0 * a * r2[k] - a;
        const double dist = std::abs(c * leader[k] - wolf[k]);
        out[k] = leader[k] - A * dist;
    }
    return out;
}

Position combine_candidates(const std::array<Position, 3>& candidates, const SearchSpace& space) {
    const auto d = space.dimension();
    for (const auto& c : candidates)
        if (c.size() != d) throw ShapeError("candidate has wrong dimension");
    Position out(d);
    for (std::size_t k = 0; k < d; ++k)
        out[k] = (candidates[0][k] + candidates[1][k] + candidates[2][k]) / 3.0;
    space.project(out);
    return out;
}

Position leader_average_update(std::span<const double> wolf, const LeaderSet& leaders, double a,
                               Rng& rng, const SearchSpace& space) {
    const auto d = space.dimension();
    if (wolf.size() != d) throw ShapeError("wolf has wrong dimension");
    std::vector<double> r1(d), r2(d);
    std::array<Position, 3> candidates;
    const std::array<const Leader*, 3> ls{&leaders.alpha, &leaders.beta, &leaders.delta};
    for (std::size_t l = 0; l < 3; ++l) {
        for (std::size_t k = 0; k < d; ++k) {
            r1[k] = rng.uniform();
            r2[k] = rng.uniform();
        }
        candidates[l] = encircle(ls[l]->position, wolf, a, r1, r2);
    }
    return combine_candidates(candidates, space);
}

std::vector<std::size_t> rank_ascending(std::span<const double> fitness) {
    std::vector<std::size_t> order(fitness.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return fitness[i] < fitness[j]; });
    return order;
}

namespace {

std::string describe(const Position& p, double v) {
    std::ostringstream os;
    os << "objective returned " << v << " at (";
    for (std::size_t k = 0; k < p.size(); ++k) os << (k ? ", " : "") << p[k];
    os << ")";
    return os.str();
}

void evaluate(const Objective& objective, const std::vector<Position>& positions,
              std::vector<double>& fitness, const std::vector<std::size_t>& which, unsigned threads) {
    auto one = [&](std::size_t i) {
        const double v = objective(positions[i]);
        if (!std::isfinite(v)) throw NonFiniteObjective(positions[i], v);
        fitness[i] = v;
    };
    if (threads <= 1 || which.size() < 2) {
        for (auto i : which) one(i);
        return;
    }
    const std::size_t workers = std::min<std::size_t>(threads, which.size());
    std::vector<std::future<void>> jobs;
    jobs.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        jobs.push_back(std::async(std::launch::async, [&, w] {
            for (std::size_t j = w; j < which.size(); j += workers) one(which[j]);
        }));
    }
    // get() rethrows; wait for all before propagating so no worker outlives us.
    for (auto& j : jobs) j.wait();
    for (auto& j : jobs) j.get();
}

} // namespace

NonFiniteObjective::NonFiniteObjective(Position where, double v)
    : EvaluationError(describe(where, v)), position(std::move(where)), value(v) {}

GwoResult minimize(const Objective& objective, const SearchSpace& space, const GwoOptions& options) {
    const auto n = options.population_size;
    if (n < 3) throw ConfigError("population size must be >= 3 (alpha, beta, delta)");
    // Validates max_iterations up front.
    (void)schedule_coefficient({options.max_iterations, 0});

    const auto d = space.dimension();
    std::vector<Position> positions(n, Position(d));
    for (std::size_t i = 0; i < n; ++i) {
        Rng rng(derive_seed(options.seed, {0, i}));
        for (std::size_t k = 0; k < d; ++k)
            positions[i][k] = space.lower()[k] + rng.uniform() * (space.upper()[k] - space.lower()[k]);
    }

    std::vector<double> fitness(n);
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    evaluate(objective, positions, fitness, all, options.threads);

    auto order = rank_ascending(fitness);
    GwoResult result;
    result.best = positions[order[0]];
    result.value = fitness[order[0]];
    result.trace.reserve(options.max_iterations + 1);
    result.trace.push_back(result.value);

    auto notify = [&](std::uint32_t t) {
        if (options.on_iteration)
            options.on_iteration({t, positions, fitness, {order[0], order[1], order[2]}});
    };
    notify(0);

    std::vector<std::size_t> movers;
    movers.reserve(n);
    for (std::uint32_t t = 1; t <= options.max_iterations; ++t) {
        const double a = schedule_coefficient({options.max_iterations, t});
        const LeaderSet leaders{{positions[order[0]], fitness[order[0]]},
                                {positions[order[1]], fitness[order[1]]},
                                {positions[order[2]], fitness[order[2]]}};
        movers.clear();
        for (std::size_t i = 0; i < n; ++i) {
            if (options.elitism && (i == order[0] || i == order[1] || i == order[2])) continue;
            movers.push_back(i);
        }
        for (auto i : movers) {
            Rng rng(derive_seed(options.seed, {t, i}));
            positions[i] = leader_average_update(positions[i], leaders, a, rng, space);
        }
        evaluate(objective, positions, fitness, movers, options.threads);

        order = rank_ascending(fitness);
        if (fitness[order[0]] < result.value) {
            result.value = fitness[order[0]];
            result.best = positions[order[0]];
        }
        result.trace.push_back(result.value);
        notify(t);
    }
    return result;
}

} // namespace agwo::gwo
