#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string>
#include <string_view>

namespace agwo {

/// splitmix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Folds a list of stream coordinates (iteration, agent, purpose, ...) into a
/// seed. Order matters; derive_seed(s, {1, 2}) != derive_seed(s, {2, 1}).
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path) noexcept;

/// Stable 64-bit FNV-1a hash of a string, for seeding from content.
std::uint64_t hash_string(std::string_view s) noexcept;

/// Seeded random source. Distributions are constructed per call so the only
/// state is the engine itself, which keeps save/restore exact.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
    double normal(double mean, double stddev);
    /// Uniform integer in [lo, hi].
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        return std::uniform_int_distribution<std::int64_t>(lo, hi)(engine_);
    }
    std::uint64_t next_u64() { return engine_(); }

    /// Child stream that does not overlap with this one in practice.
    Rng split(std::uint64_t stream) { return Rng(mix64(engine_() ^ mix64(stream))); }

    std::mt19937_64& engine() { return engine_; }

    std::string save_state() const;
    void load_state(const std::string& state);

    friend bool operator==(const Rng& a, const Rng& b) { return a.engine_ == b.engine_; }

private:
    std::mt19937_64 engine_;
};

} // namespace agwo
