#include "ingarch/mc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "ingarch/model.hpp"
#include "ingarch/rng.hpp"

namespace ingarch {

namespace {

struct RepOutcome {
    bool success = false;
    std::vector<double> theta;
    std::vector<double> se;
    double mean_xsq = 0.0;
    double mean_x4 = 0.0;
    std::vector<std::string> events;
};

RepOutcome run_rep(const StudyConfig& cfg, int p, std::int64_t T, int rep) {
    RepOutcome out;
    std::vector<double> alpha(cfg.alphas.begin(), cfg.alphas.begin() + p);
    const VolatilitySpec spec = VolatilitySpec::linear(cfg.omega, std::move(alpha));
    SimulateOptions opt;
    opt.n = T;
    opt.burn_in = cfg.burn_in;
    opt.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(p),
                           static_cast<std::uint64_t>(T), static_cast<std::uint64_t>(rep));
    try {
        const std::vector<SeriesRecord> series = simulate(spec, cfg.family, opt);
        std::vector<std::int64_t> xs(series.size());
        double sxx = 0.0, sx4 = 0.0;
        for (std::size_t i = 0; i < series.size(); ++i) {
            xs[i] = series[i].x;
            const double x2 = static_cast<double>(xs[i]) * static_cast<double>(xs[i]);
            sxx += x2;
            sx4 += x2 * x2;
        }
        out.mean_xsq = sxx / static_cast<double>(series.size());
        out.mean_x4 = sx4 / static_cast<double>(series.size());

        const RegressionData data = build_regression(xs, p);
        const FitResult fit =
            cfg.constrained ? constrained_olse(data, cfg.omega_min) : unconstrained_fit(data);
        if (fit.status == SolveStatus::Singular) {
            out.events.push_back(kFailSingular);
            return out;
        }
        if (fit.status == SolveStatus::IllConditioned) out.events.push_back(kFailIllConditioned);
        if (!fit.active_constraints.empty()) out.events.push_back(kFailConstraintBinding);
        out.theta = fit.theta;
        out.se = fit.se;
        out.success = true;
    } catch (const ExplosionError&) {
        out.events.push_back(kFailExplosion);
    } catch (const SingularMatrixError&) {
        out.events.push_back(kFailSingular);
    }
    return out;
}

} // namespace

StudyResult run_study(const StudyConfig& cfg) {
    if (cfg.orders.empty() || cfg.sample_sizes.empty())
        throw ConfigError("study: orders and sample_sizes must be nonempty");
    if (cfg.replications < 1) throw ConfigError("study: replications must be >= 1");
    const int max_p = *std::max_element(cfg.orders.begin(), cfg.orders.end());
    if (max_p < 1 || static_cast<std::size_t>(max_p) > cfg.alphas.size())
        throw ConfigError("study: alphas must cover the largest order");
    if (cfg.require_fourth_moment) {
        for (int p : cfg.orders) {
            double a = 0.0;
            for (int i = 0; i < p; ++i) a += cfg.alphas[static_cast<std::size_t>(i)];
            if (!(a < 1.0 / std::sqrt(3.0)))
                throw ConfigError("study: sum(alpha) must stay below 1/sqrt(3) for order " +
                                  std::to_string(p) + " when fourth-moment checks are requested");
        }
    }

    StudyResult result;
    result.max_p = max_p;
    for (int p : cfg.orders) {
        for (std::int64_t T : cfg.sample_sizes) {
            std::vector<RepOutcome> slots(static_cast<std::size_t>(cfg.replications));
            int workers = cfg.n_workers > 0
                              ? cfg.n_workers
                              : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
            workers = std::min(workers, cfg.replications);
            std::atomic<int> next{0};
            auto work = [&] {
                for (;;) {
                    const int rep = next.fetch_add(1);
                    if (rep >= cfg.replications) return;
                    slots[static_cast<std::size_t>(rep)] = run_rep(cfg, p, T, rep);
                }
            };
            if (workers <= 1) {
                work();
            } else {
                std::vector<std::thread> pool;
                for (int i = 0; i < workers; ++i) pool.emplace_back(work);
                for (auto& th : pool) th.join();
            }

            CellResult cell;
            cell.p = p;
            cell.T = T;
            cell.replications = cfg.replications;
            cell.mean_theta.assign(static_cast<std::size_t>(p) + 1, 0.0);
            cell.mean_se.assign(static_cast<std::size_t>(p) + 1, 0.0);
            double sxx = 0.0, sx4 = 0.0;
            for (const auto& s : slots) {
                for (const auto& e : s.events) ++cell.events[e];
                sxx += s.mean_xsq;
                sx4 += s.mean_x4;
                if (!s.success) continue;
                ++cell.n_success;
                for (std::size_t i = 0; i < cell.mean_theta.size(); ++i) {
                    cell.mean_theta[i] += s.theta[i];
                    cell.mean_se[i] += s.se[i];
                }
            }
            cell.mean_xsq = sxx / static_cast<double>(cfg.replications);
            cell.mean_x4 = sx4 / static_cast<double>(cfg.replications);
            if (cell.n_success > 0) {
                for (auto& v : cell.mean_theta) v /= cell.n_success;
                for (auto& v : cell.mean_se) v /= cell.n_success;
            }
            cell.success_rate =
                static_cast<double>(cell.n_success) / static_cast<double>(cfg.replications);
            result.cells.push_back(std::move(cell));
        }
    }
    return result;
}

SeDecayCheck se_decay_check(const StudyResult& result) {
    SeDecayCheck check;
    check.pass = true;
    std::map<int, std::vector<const CellResult*>> by_p;
    for (const auto& c : result.cells) by_p[c.p].push_back(&c);
    for (auto& [p, cells] : by_p) {
        if (cells.size() < 2)
            throw ConfigError("se_decay_check: order " + std::to_string(p) +
                              " has fewer than two sample sizes");
        std::sort(cells.begin(), cells.end(),
                  [](const CellResult* a, const CellResult* b) { return a->T < b->T; });
        const std::size_t n_params = static_cast<std::size_t>(p) + 1;
        for (std::size_t param = 0; param < n_params; ++param) {
            int allowed = 1; // one small-sample inversion tolerated per column
            for (std::size_t i = 1; i < cells.size(); ++i) {
                const double prev = cells[i - 1]->mean_se[param];
                const double cur = cells[i]->mean_se[param];
                if (cur < prev) continue;
                check.violations.push_back({p, cells[i - 1]->T, cells[i]->T,
                                            static_cast<int>(param), prev, cur});
                if (cells[i]->T <= 100 && allowed > 0) {
                    --allowed;
                    continue;
                }
                check.pass = false;
            }
        }
    }
    return check;
}

} // namespace ingarch
