#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ingarch/dist.hpp"
#include "ingarch/estimate.hpp"

namespace ingarch {

/// Replication study over a (p, T) grid. The alpha list is the full
/// parameter set; the cell of order p uses its first p entries.
struct StudyConfig {
    std::vector<int> orders;
    std::vector<std::int64_t> sample_sizes;
    int replications = 200;
    double omega = 1.5;
    std::vector<double> alphas = {0.26, 0.16, 0.11, 0.02};
    ConditionalFamily family = ConditionalFamily::skellam();
    std::uint64_t seed = 0;
    bool constrained = true;
    double omega_min = 1e-8;
    std::int64_t burn_in = 500;
    int n_workers = 0; // 0: hardware concurrency
    bool require_fourth_moment = false; // enforce sum(alpha) < 1/sqrt(3)
};

/// Per-replication event labels. Singular systems and explosions abort the
/// fit; constraint binding and pseudo-inverse fallbacks are amendments that
/// still produce estimates.
inline constexpr const char* kFailSingular = "singular";
inline constexpr const char* kFailIllConditioned = "ill_conditioned";
inline constexpr const char* kFailConstraintBinding = "constraint_binding";
inline constexpr const char* kFailExplosion = "explosion";

struct CellResult {
    int p = 0;
    std::int64_t T = 0;
    int replications = 0;
    int n_success = 0;
    double success_rate = 0.0;
    std::vector<double> mean_theta; // over successful replications
    std::vector<double> mean_se;
    double mean_xsq = 0.0; // averaged sample moments of the simulated series
    double mean_x4 = 0.0;
    std::map<std::string, int> events;
};

struct StudyResult {
    std::vector<CellResult> cells; // full (p, T) grid, orders outer
    int max_p = 0;
};

/// Simulate-fit-aggregate over the grid. Per-replication seeds derive from
/// (master seed, p, T, rep), so the aggregate is reproducible and invariant
/// to the worker count. Failures are recorded, never fatal.
StudyResult run_study(const StudyConfig& config);

struct SeDecayCheck {
    struct Violation {
        int p = 0;
        std::int64_t T_prev = 0;
        std::int64_t T = 0;
        int param = 0; // 0 = omega, i >= 1 = alpha_i
        double se_prev = 0.0;
        double se = 0.0;
    };
    bool pass = false;
    std::vector<Violation> violations; // every inversion found, allowed or not
};

/// Checks that mean standard errors shrink as T grows, per order and
/// parameter. One inversion per column is tolerated while the larger sample
/// size of the pair is still <= 100. Throws ConfigError when some order has
/// fewer than two sample sizes.
SeDecayCheck se_decay_check(const StudyResult& result);

} // namespace ingarch
