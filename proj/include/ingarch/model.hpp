#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "ingarch/dist.hpp"
#include "ingarch/errors.hpp"

namespace ingarch {

/// Lipschitz data of a volatility map: per-lag constants for the squared
/// counts (c) and the volatilities (d), and their sum.
struct LipschitzConstants {
    std::vector<double> c;
    std::vector<double> d;
    double total = 0.0;
};

/// Volatility map applied to p squared-count lags and q volatility lags,
/// most recent first.
using CustomVolatilityFn =
    std::function<double(std::span<const double> xsq_lags, std::span<const double> v_lags)>;

/**
 * The recursion v_t = f(X^2_{t-1..t-p}, v_{t-1..t-q}) together with its
 * Lipschitz constants. The linear form is
 *     f = omega + sum_i alpha_i x_i + sum_j beta_j v_j,
 * whose constants are (alpha, beta); it is contractive iff their sum is
 * below 1. Custom maps carry user-declared constants which are recorded,
 * not verified.
 */
class VolatilitySpec {
public:
    static VolatilitySpec linear(double omega, std::vector<double> alpha,
                                 std::vector<double> beta = {});
    static VolatilitySpec custom(CustomVolatilityFn f, std::vector<double> c,
                                 std::vector<double> d);

    int p() const noexcept { return static_cast<int>(lips_.c.size()); }
    int q() const noexcept { return static_cast<int>(lips_.d.size()); }
    bool is_linear() const noexcept { return !f_; }
    double omega() const noexcept { return omega_; }
    const std::vector<double>& alpha() const noexcept { return lips_.c; }
    const std::vector<double>& beta() const noexcept { return lips_.d; }

    const LipschitzConstants& lipschitz_constants() const noexcept { return lips_; }
    bool contractive() const noexcept { return lips_.total < 1.0; }

    /// Evaluate the recursion; lag vectors are most recent first and must
    /// have lengths exactly p and q.
    double eval(std::span<const double> xsq_lags, std::span<const double> v_lags) const;

private:
    VolatilitySpec() = default;
    double omega_ = 0.0;
    LipschitzConstants lips_;
    CustomVolatilityFn f_; // empty for the linear form
};

/// Markov state of the count chain: p count lags and q volatility lags,
/// most recent first.
struct ChainState {
    std::vector<std::int64_t> x_lags;
    std::vector<double> v_lags;
};

struct SeriesRecord {
    std::int64_t t;
    std::int64_t x;
    double v;
};

struct SimulateOptions {
    std::int64_t n = 0;
    std::int64_t burn_in = 500;
    std::optional<ChainState> init; // default: see default_initial_state
    std::uint64_t seed = 0;
    double explosion_threshold = 1e12;
};

/// x lags 0; v lags at the stationary mean omega/(1 - L) for a contractive
/// linear spec, omega otherwise. Custom specs seed the volatility lags with
/// f evaluated at all-zero lags.
ChainState default_initial_state(const VolatilitySpec& spec);

/**
 * Simulate the process: v_t from the recursion, then X_t ~ Q_{v_t}. The
 * first burn_in records are discarded; the returned records are indexed
 * t = 1..n. Fully reproducible from the seed.
 *
 * Non-contractive specs are simulated (they are the Remark-style
 * counterexample regime) but the explosion detector aborts with
 * ExplosionError once v_t crosses the threshold. Domain violations raise
 * FamilyDomainError carrying the family name and time index.
 */
std::vector<SeriesRecord> simulate(const VolatilitySpec& spec, const ConditionalFamily& family,
                                   const SimulateOptions& options);

} // namespace ingarch
