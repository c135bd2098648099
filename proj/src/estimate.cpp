#include "ingarch/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

namespace ingarch {

namespace {

Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
design_map(const RegressionData& data) {
    return {data.design.data(), static_cast<Eigen::Index>(data.rows),
            static_cast<Eigen::Index>(data.cols)};
}

double pivot_ratio_of(const Eigen::LDLT<Eigen::MatrixXd>& ldlt) {
    const Eigen::VectorXd d = ldlt.vectorD().cwiseAbs();
    const double dmax = d.maxCoeff();
    if (!(dmax > 0.0)) return 0.0;
    return d.minCoeff() / dmax;
}

/// Solve S x = b; pseudo-inverse when the pivot ratio is below tolerance.
Eigen::VectorXd solve_spd(const Eigen::MatrixXd& S, const Eigen::VectorXd& b,
                          SolveStatus& status, double& ratio) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(S);
    ratio = pivot_ratio_of(ldlt);
    if (ratio >= kPivotRelTol && ldlt.info() == Eigen::Success) {
        status = SolveStatus::Ok;
        return ldlt.solve(b);
    }
    status = ratio < kSingularRelTol ? SolveStatus::Singular : SolveStatus::IllConditioned;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(S, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(kPivotRelTol);
    return svd.solve(b);
}

} // namespace

RegressionData build_regression(std::span<const std::int64_t> series, int p) {
    if (p < 1) throw ConfigError("build_regression: p must be >= 1");
    const std::int64_t n = static_cast<std::int64_t>(series.size());
    if (n <= p)
        throw ConfigError("build_regression: need n > p, got n = " + std::to_string(n) +
                          ", p = " + std::to_string(p));
    RegressionData data;
    data.p = p;
    data.rows = static_cast<std::size_t>(n - p);
    data.cols = static_cast<std::size_t>(p) + 1;
    data.y.resize(data.rows);
    data.design.assign(data.rows * data.cols, 1.0);
    for (std::size_t r = 0; r < data.rows; ++r) {
        const std::int64_t t = static_cast<std::int64_t>(r) + p; // 0-based index of X_t
        const double xt = static_cast<double>(series[static_cast<std::size_t>(t)]);
        data.y[r] = xt * xt;
        for (int i = 1; i <= p; ++i) {
            const double xl = static_cast<double>(series[static_cast<std::size_t>(t - i)]);
            data.design[r * data.cols + static_cast<std::size_t>(i)] = xl * xl;
        }
    }
    return data;
}

OlseResult olse(const RegressionData& data) {
    const auto X = design_map(data);
    const Eigen::Map<const Eigen::VectorXd> y(data.y.data(),
                                              static_cast<Eigen::Index>(data.rows));
    const Eigen::MatrixXd S = X.transpose() * X;
    const Eigen::VectorXd b = X.transpose() * y;
    OlseResult res;
    const Eigen::VectorXd theta = solve_spd(S, b, res.status, res.pivot_ratio);
    res.theta.assign(theta.data(), theta.data() + theta.size());
    return res;
}

Inference asymptotic_inference(const RegressionData& data, std::span<const double> theta) {
    if (theta.size() != data.cols) throw ConfigError("asymptotic_inference: theta size mismatch");
    const auto X = design_map(data);
    const Eigen::Map<const Eigen::VectorXd> y(data.y.data(),
                                              static_cast<Eigen::Index>(data.rows));
    const Eigen::Map<const Eigen::VectorXd> th(theta.data(),
                                               static_cast<Eigen::Index>(theta.size()));
    const double m = static_cast<double>(data.rows);
    const Eigen::MatrixXd sigma = (X.transpose() * X) / m;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma);
    const double ev_min = eig.eigenvalues().minCoeff();
    const double ev_max = eig.eigenvalues().maxCoeff();
    if (!(ev_max > 0.0) || ev_min <= kSingularRelTol * ev_max)
        throw SingularMatrixError("asymptotic_inference: moment matrix X'X/m is singular");
    const Eigen::MatrixXd sigma_inv = eig.eigenvectors() *
                                      eig.eigenvalues().cwiseInverse().asDiagonal() *
                                      eig.eigenvectors().transpose();

    const Eigen::VectorXd resid = y - X * th;
    const double rss = resid.squaredNorm();
    const double df = m - static_cast<double>(data.cols);

    Inference inf;
    inf.sigma_min_eigenvalue = ev_min;
    inf.sigma_hat.assign(sigma.data(), sigma.data() + sigma.size());
    // row-major copy (sigma is symmetric, so the layout swap is harmless)
    inf.eta_sq = df > 0.0 ? rss / df : 0.0;
    inf.eta_sq_plain = rss / m;

    const Eigen::VectorXd hom_var = (inf.eta_sq / m) * sigma_inv.diagonal();
    inf.se.resize(static_cast<std::size_t>(hom_var.size()));
    for (Eigen::Index i = 0; i < hom_var.size(); ++i)
        inf.se[static_cast<std::size_t>(i)] = std::sqrt(std::max(0.0, hom_var[i]));

    // sandwich forms: (X'X)^-1 (sum w_t z_t z_t') (X'X)^-1
    const Eigen::MatrixXd xtx_inv = sigma_inv / m;
    auto sandwich_se = [&](const Eigen::VectorXd& w, std::vector<double>& out) {
        const Eigen::MatrixXd mid = X.transpose() * w.asDiagonal() * X;
        const Eigen::MatrixXd cov = xtx_inv * mid * xtx_inv;
        out.resize(static_cast<std::size_t>(cov.rows()));
        for (Eigen::Index i = 0; i < cov.rows(); ++i)
            out[static_cast<std::size_t>(i)] = std::sqrt(std::max(0.0, cov(i, i)));
    };
    sandwich_se(resid.array().square().matrix(), inf.se_hc0);
    const Eigen::VectorXd vhat = (X * th).cwiseMax(0.0);
    sandwich_se((2.0 * vhat.array().square() + vhat.array()).matrix(), inf.se_skellam);
    return inf;
}

namespace {

double objective(const RegressionData& data, const Eigen::VectorXd& theta) {
    const auto X = design_map(data);
    const Eigen::Map<const Eigen::VectorXd> y(data.y.data(),
                                              static_cast<Eigen::Index>(data.rows));
    return (y - X * theta).squaredNorm();
}

FitResult package_fit(const RegressionData& data, const Eigen::VectorXd& theta,
                      SolveStatus status, double pivot_ratio, std::vector<int> active) {
    FitResult fit;
    fit.theta.assign(theta.data(), theta.data() + theta.size());
    fit.status = status;
    fit.pivot_ratio = pivot_ratio;
    fit.active_constraints = std::move(active);
    fit.constrained = !fit.active_constraints.empty();
    const Inference inf = asymptotic_inference(data, fit.theta);
    fit.se = inf.se;
    fit.sigma_hat = inf.sigma_hat;
    fit.eta_sq = inf.eta_sq;
    fit.eta_sq_plain = inf.eta_sq_plain;
    fit.se_hc0 = inf.se_hc0;
    fit.se_skellam = inf.se_skellam;
    return fit;
}

} // namespace

FitResult unconstrained_fit(const RegressionData& data) {
    const OlseResult r = olse(data);
    const Eigen::Map<const Eigen::VectorXd> th(r.theta.data(),
                                               static_cast<Eigen::Index>(r.theta.size()));
    return package_fit(data, th, r.status, r.pivot_ratio, {});
}

FitResult constrained_olse(const RegressionData& data, double omega_min) {
    if (!(omega_min > 0.0)) throw ConfigError("constrained_olse: omega_min must be > 0");
    const std::size_t k = data.cols;
    if (data.p > 6)
        throw ConfigError("constrained_olse: active-set enumeration supports p <= 6");

    const auto X = design_map(data);
    const Eigen::Map<const Eigen::VectorXd> y(data.y.data(),
                                              static_cast<Eigen::Index>(data.rows));
    const Eigen::MatrixXd S = X.transpose() * X;
    const Eigen::VectorXd b = X.transpose() * y;
    Eigen::VectorXd bounds = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k));
    bounds[0] = omega_min;

    // Full-system conditioning drives the reported status, matching the
    // near-ill-conditioned-Hessian failure taxonomy.
    SolveStatus full_status;
    double full_ratio;
    {
        Eigen::LDLT<Eigen::MatrixXd> probe(S);
        full_ratio = pivot_ratio_of(probe);
        full_status = full_ratio >= kPivotRelTol
                          ? SolveStatus::Ok
                          : (full_ratio < kSingularRelTol ? SolveStatus::Singular
                                                          : SolveStatus::IllConditioned);
    }

    const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
    const double kkt_tol = 1e-8 * scale;

    struct Candidate {
        Eigen::VectorXd theta;
        double obj = std::numeric_limits<double>::infinity();
        bool kkt = false;
        std::vector<int> active;
    };
    Candidate best_kkt, best_feasible;

    const unsigned patterns = 1u << k;
    for (unsigned mask = 0; mask < patterns; ++mask) {
        std::vector<int> active;
        std::vector<int> free;
        for (unsigned i = 0; i < k; ++i)
            (mask & (1u << i)) ? active.push_back(static_cast<int>(i))
                               : free.push_back(static_cast<int>(i));
        Eigen::VectorXd theta = bounds;
        if (!free.empty()) {
            // reduced normal equations over the free coordinates
            Eigen::MatrixXd Sf(free.size(), free.size());
            Eigen::VectorXd bf(free.size());
            for (std::size_t r = 0; r < free.size(); ++r) {
                bf[static_cast<Eigen::Index>(r)] = b[free[r]];
                for (int a : active)
                    bf[static_cast<Eigen::Index>(r)] -= S(free[r], a) * bounds[a];
                for (std::size_t c = 0; c < free.size(); ++c)
                    Sf(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                        S(free[r], free[c]);
            }
            SolveStatus st;
            double ratio;
            const Eigen::VectorXd tf = solve_spd(Sf, bf, st, ratio);
            if (st == SolveStatus::Singular) continue; // pattern not solvable
            for (std::size_t r = 0; r < free.size(); ++r) theta[free[r]] = tf[static_cast<Eigen::Index>(r)];
        }
        // primal feasibility
        bool feasible = true;
        for (int f : free)
            if (theta[f] < bounds[f] - 1e-12 * std::max(1.0, std::abs(bounds[f]))) feasible = false;
        if (!feasible) continue;
        // dual feasibility: gradient of the objective at active coordinates
        const Eigen::VectorXd grad = 2.0 * (S * theta - b);
        bool kkt = true;
        for (int a : active)
            if (grad[a] < -kkt_tol) kkt = false;
        for (int f : free)
            if (std::abs(grad[f]) > kkt_tol) kkt = false;

        Candidate cand{theta, objective(data, theta), kkt, active};
        if (cand.obj < best_feasible.obj) best_feasible = cand;
        if (kkt && cand.obj < best_kkt.obj) best_kkt = cand;
        if (mask == 0 && kkt) break; // unconstrained optimum feasible: done
    }

    const Candidate& chosen = best_kkt.kkt ? best_kkt : best_feasible;
    if (!std::isfinite(chosen.obj))
        throw SingularMatrixError("constrained_olse: no solvable active-set pattern");
    // keep only constraints genuinely at their bounds
    std::vector<int> active;
    for (int a : chosen.active)
        if (std::abs(chosen.theta[a] - bounds[a]) <= 1e-12 * std::max(1.0, bounds[a]))
            active.push_back(a);
    return package_fit(data, chosen.theta, full_status, full_ratio, std::move(active));
}

MomentBounds moment_bounds(double omega, std::span<const double> alphas) {
    if (!(omega > 0.0)) throw ConfigError("moment_bounds: omega must be > 0");
    double a = 0.0;
    for (double x : alphas) {
        if (x < 0.0) throw ConfigError("moment_bounds: alphas must be nonnegative");
        a += x;
    }
    MomentBounds mb;
    const double inf = std::numeric_limits<double>::infinity();
    mb.second_finite = a < 1.0;
    mb.second = mb.second_finite ? omega / (1.0 - a) : inf;
    mb.fourth_finite = a < 1.0 / std::sqrt(3.0);
    if (mb.fourth_finite) {
        const double wbar = omega + 3.0 * omega * omega + (1.0 + 6.0 * omega) * a * mb.second;
        mb.fourth = wbar / (1.0 - 3.0 * a * a);
    } else {
        mb.fourth = inf;
    }
    return mb;
}

} // namespace ingarch
