#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ingarch/errors.hpp"

namespace ingarch {

/// Squared-count regression layout: responses X_t^2 for t = p+1..n against
/// rows (1, X^2_{t-1}, ..., X^2_{t-p}).
struct RegressionData {
    int p = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;              // p + 1
    std::vector<double> y;             // length rows
    std::vector<double> design;        // row-major rows x cols

    double at(std::size_t r, std::size_t c) const { return design[r * cols + c]; }
};

RegressionData build_regression(std::span<const std::int64_t> series, int p);

enum class SolveStatus {
    Ok,             // regular normal equations
    IllConditioned, // relative pivot below 1e-10; pseudo-inverse solve used
    Singular,       // effectively rank deficient; estimate not unique
};

/// Relative pivot threshold below which the normal equations are treated as
/// near-singular and solved by pseudo-inverse.
inline constexpr double kPivotRelTol = 1e-10;
/// Below this the system is reported singular outright.
inline constexpr double kSingularRelTol = 1e-13;

struct OlseResult {
    std::vector<double> theta; // pseudo-inverse minimal-norm fallback when degenerate
    SolveStatus status = SolveStatus::Ok;
    double pivot_ratio = 0.0;  // smallest/largest pivot of X'X
};

/// Unconstrained least squares via the normal equations (pivoted LDLT);
/// degeneracy is reported rather than thrown, with the ginv-style fallback
/// estimate attached.
OlseResult olse(const RegressionData& data);

struct FitResult {
    std::vector<double> theta;        // (omega_hat, alpha_1..alpha_p)
    std::vector<double> se;           // homoskedastic standard errors
    std::vector<double> sigma_hat;    // (p+1)x(p+1) row-major, X'X / rows
    double eta_sq = 0.0;              // residual variance, df-corrected
    double eta_sq_plain = 0.0;        // plain 1/m sum of squared residuals
    bool constrained = false;         // any constraint active at the optimum
    std::vector<int> active_constraints; // indices into theta at their bounds
    SolveStatus status = SolveStatus::Ok;
    double pivot_ratio = 0.0;

    // Heteroskedasticity-consistent variants (extension; see
    // asymptotic_inference): se_hc0 is the agnostic sandwich, se_skellam
    // weights by the Skellam conditional variance 2 v^2 + v.
    std::vector<double> se_hc0;
    std::vector<double> se_skellam;
};

/**
 * Nonnegativity-constrained least squares: minimize ||y - X theta||^2
 * subject to omega >= omega_min and alpha_i >= 0. Solved by enumerating
 * active sets (at most 2^(p+1) patterns; p <= 6 in scope) with KKT
 * verification, so no external QP dependency. Equals the unconstrained
 * estimate whenever that is feasible. Standard errors are attached from
 * asymptotic_inference at the solution.
 */
FitResult constrained_olse(const RegressionData& data, double omega_min = 1e-8);

/// Unconstrained fit packaged with inference, same shape as constrained_olse.
FitResult unconstrained_fit(const RegressionData& data);

struct Inference {
    std::vector<double> sigma_hat; // X'X / m
    double eta_sq = 0.0;           // sum resid^2 / (m - (p+1))
    double eta_sq_plain = 0.0;     // sum resid^2 / m
    std::vector<double> se;        // sqrt(eta_sq (Sigma^-1)_ii / m)
    std::vector<double> se_hc0;
    std::vector<double> se_skellam;
    double sigma_min_eigenvalue = 0.0;
};

/**
 * Asymptotic inference at a parameter value. The homoskedastic form treats
 * eta^2 = E eps_t^2 as constant, following the limit law
 * N(0, eta^2 Sigma^{-1}); because eps_t = X_t^2 - v_t is conditionally
 * heteroskedastic this understates the variability of the slope estimates,
 * so two sandwich variants are attached: HC0 with observed squared
 * residuals, and the Skellam-ARCH form weighting by Var(X^2 | v) = 2v^2 + v
 * evaluated at the fitted volatilities. Throws SingularMatrixError when the
 * moment matrix is degenerate.
 */
Inference asymptotic_inference(const RegressionData& data, std::span<const double> theta);

struct MomentBounds {
    double second = 0.0;
    double fourth = 0.0;
    bool second_finite = false;
    bool fourth_finite = false;
};

/// Stationary moment bounds for the Skellam-ARCH recursion:
/// E X^2 <= omega / (1 - a) for a = sum(alpha) < 1, and with
/// wbar = omega + 3 omega^2 + (1 + 6 omega) a omega / (1 - a),
/// E X^4 <= wbar / (1 - 3 a^2) for a < 1/sqrt(3).
MomentBounds moment_bounds(double omega, std::span<const double> alphas);

} // namespace ingarch
