#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ingarch/dist.hpp"
#include "ingarch/model.hpp"

namespace ingarch {

/**
 * Weights of the state metric
 *     Delta(z, z') = sum_i gamma_i |xsq_i - xsq'_i| + sum_j delta_j |v_j - v'_j|
 * together with the contraction factor kappa < 1 under which one coupled
 * transition shrinks the expected metric. Built from the Lipschitz constants
 * by compute_weights; gamma_1 + delta_1 = 1 (gamma_1 = 1 when q = 0).
 */
struct CouplingWeights {
    std::vector<double> gamma;
    std::vector<double> delta;
    double kappa = 0.0;
    double epsilon = 0.0; // construction slack (1 - L) / (p + q)
};

/// Weight construction: epsilon = (1-L)/(p+q), then the backward recursion
/// gamma_p = c_p + eps, gamma_i = c_i + gamma_{i+1} + eps (delta likewise)
/// and kappa as the largest row ratio of the weight inequalities. Throws
/// NotContractiveError when sum(c) + sum(d) >= 1.
CouplingWeights compute_weights(std::span<const double> c, std::span<const double> d);

/// True iff every row of the weight inequality system
///   (gamma_1 + delta_1) c_i + gamma_{i+1} <= kappa gamma_i   (delta rows alike)
/// holds for the given weights, compared exactly in double precision.
bool verify_weight_inequalities(std::span<const double> c, std::span<const double> d,
                                const CouplingWeights& w);

/// State of the squared chain Z_t: p squared-count lags and q volatility
/// lags, most recent first. Integer squares are kept exact so that state
/// coincidence is well defined.
struct SquaredState {
    std::vector<std::int64_t> xsq_lags;
    std::vector<double> v_lags;

    bool operator==(const SquaredState&) const = default;
};

SquaredState squared_state(const ChainState& y);

/// Weighted L1 distance between two squared states.
double delta_metric(const SquaredState& z, const SquaredState& z_prime,
                    const CouplingWeights& w);

/// A pair of squared chains advanced jointly by the coupling kernel. The
/// diagonal is absorbing: once coupled is true it stays true.
struct CoupledState {
    SquaredState z;
    SquaredState z_prime;
    bool coupled = false;

    static CoupledState from(SquaredState a, SquaredState b) {
        const bool eq = a == b;
        return {std::move(a), std::move(b), eq};
    }
};

struct CoupledDraw {
    std::int64_t x = 0;
    std::int64_t x_prime = 0;
    bool truncated = false; // a quantile ran off the truncated support
};

/**
 * One transition of the bivariate coupling kernel.
 *
 * Both volatilities are advanced by the recursion; one shared uniform drives
 * the quantile transform of both square laws (comonotone coupling of the
 * squares, so E|X^2 - X'^2| = |v - v'| under the stochastic ordering of the
 * family). When the squares land on the same point k^2, the signs are drawn
 * from a joint law that realizes the overlap-mass sign coupling: agreement
 * mass min(p_k, p'_k) per sign when the overlap can hold it, proportional
 * otherwise (then P(|X| = |X'|, X != X') = 0); in either branch the joint
 * masses are reconciled with the exact one-chain marginals. On distinct
 * squares the signs are drawn independently from each conditional sign law.
 */
CoupledDraw coupled_step(CoupledState& state, const VolatilitySpec& spec,
                         const ConditionalFamily& family, std::mt19937_64& rng,
                         double tail_eps = kDefaultTailEps);

enum class BetaBoundMode {
    NonnegativeSupport, // Q_v(N_0) = 1
    Symmetric,          // pmfs symmetric about zero
    Lipschitz,          // total variation K-Lipschitz in v
};

/// Geometric mixing bound: (1/gamma_1) kappa^n / (1-kappa) * E Delta_0 for
/// the nonnegative/symmetric cases, with the extra K/delta_1 term in the
/// Lipschitz case. The Lipschitz mode needs q >= 1.
double analytic_beta_bound(const CouplingWeights& w, std::int64_t n, double e_delta0,
                           BetaBoundMode mode, double tv_lipschitz = 0.0);

/// Largest observed total-variation slope max_v TV(Q_v, Q_{v+h}) / h over a
/// volatility grid; an empirical Lipschitz constant for the bound's K.
double estimate_tv_lipschitz(const ConditionalFamily& family, std::span<const double> v_grid,
                             double h);

struct MixingReport {
    std::vector<std::int64_t> n_grid;       // lags 1..n_max
    std::vector<double> analytic_bound;     // geometric bound per lag
    std::vector<double> emp_disagree;       // P(X_n != X'_n)
    std::vector<double> emp_disagree_se;
    std::vector<double> emp_uncoupled;      // P(coupling time > n)
    std::vector<double> emp_uncoupled_se;
    std::vector<double> disagree_tail_sum;  // sum_{k >= n} emp_disagree(k), the
                                            // beta-proxy partial sums
    double e_delta0 = 0.0;                  // estimated E Delta(Z_0, Z'_0)
    CouplingWeights weights;
    BetaBoundMode mode = BetaBoundMode::Symmetric;
    std::optional<double> tv_lipschitz;     // K used in Lipschitz mode
    std::int64_t truncation_events = 0;
    bool bound_dominates_disagree = false;  // bound >= emp - 3 se at every lag
};

struct MixingOptions {
    int n_max = 30;
    int reps = 10000;
    std::int64_t burn_in = 1000; // warm start approximating stationarity
    std::uint64_t seed = 0;
    int n_workers = 0;           // 0: hardware concurrency
    std::optional<BetaBoundMode> mode; // default: inferred from the family
    double tv_lipschitz = 0.0;   // <= 0: estimated when the mode needs it
    double tail_eps = kDefaultTailEps;
};

/// Coupling experiment behind the mixing bounds: pairs of chains are warm
/// started independently, then advanced by the coupling kernel; per-lag
/// disagreement and uncoupled probabilities are averaged over replications.
/// Replications run concurrently on per-replication seed streams, so the
/// report is bit-identical for any worker count.
MixingReport empirical_beta_estimate(const VolatilitySpec& spec, const ConditionalFamily& family,
                                     const MixingOptions& options);

/// Bound mode matching the family's structure.
BetaBoundMode default_beta_mode(const ConditionalFamily& family);

} // namespace ingarch
