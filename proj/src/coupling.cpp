#include "ingarch/coupling.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "ingarch/rng.hpp"

namespace ingarch {

bool verify_weight_inequalities(std::span<const double> c, std::span<const double> d,
                                const CouplingWeights& w) {
    const double s1 = w.gamma[0] + (w.delta.empty() ? 0.0 : w.delta[0]);
    const std::size_t p = c.size(), q = d.size();
    for (std::size_t i = 0; i < p; ++i) {
        const double next = i + 1 < p ? w.gamma[i + 1] : 0.0;
        if (s1 * c[i] + next > w.kappa * w.gamma[i]) return false;
    }
    for (std::size_t j = 0; j < q; ++j) {
        const double next = j + 1 < q ? w.delta[j + 1] : 0.0;
        if (s1 * d[j] + next > w.kappa * w.delta[j]) return false;
    }
    return true;
}

CouplingWeights compute_weights(std::span<const double> c, std::span<const double> d) {
    const std::size_t p = c.size(), q = d.size();
    if (p + q == 0) throw ConfigError("compute_weights: p + q must be >= 1");
    double total = 0.0;
    for (double x : c) {
        if (x < 0.0) throw ConfigError("compute_weights: constants must be nonnegative");
        total += x;
    }
    for (double x : d) {
        if (x < 0.0) throw ConfigError("compute_weights: constants must be nonnegative");
        total += x;
    }
    if (total >= 1.0) throw NotContractiveError(total);

    CouplingWeights w;
    w.epsilon = (1.0 - total) / static_cast<double>(p + q);
    w.gamma.resize(p);
    w.delta.resize(q);
    for (std::size_t i = p; i-- > 0;)
        w.gamma[i] = c[i] + (i + 1 < p ? w.gamma[i + 1] : 0.0) + w.epsilon;
    for (std::size_t j = q; j-- > 0;)
        w.delta[j] = d[j] + (j + 1 < q ? w.delta[j + 1] : 0.0) + w.epsilon;

    const double s1 = (p > 0 ? w.gamma[0] : 0.0) + (q > 0 ? w.delta[0] : 0.0);
    w.kappa = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
        const double next = i + 1 < p ? w.gamma[i + 1] : 0.0;
        w.kappa = std::max(w.kappa, (s1 * c[i] + next) / w.gamma[i]);
    }
    for (std::size_t j = 0; j < q; ++j) {
        const double next = j + 1 < q ? w.delta[j + 1] : 0.0;
        w.kappa = std::max(w.kappa, (s1 * d[j] + next) / w.delta[j]);
    }
    // kappa is a max of row ratios; a rounded-down quotient can leave a row
    // open in floating point, so nudge until every inequality closes.
    for (int guard = 0; guard < 8 && !verify_weight_inequalities(c, d, w); ++guard)
        w.kappa = std::nextafter(w.kappa, 1.0);
    if (!(w.kappa < 1.0)) throw NotContractiveError(total);
    return w;
}

SquaredState squared_state(const ChainState& y) {
    SquaredState z;
    z.xsq_lags.reserve(y.x_lags.size());
    for (std::int64_t x : y.x_lags) z.xsq_lags.push_back(x * x);
    z.v_lags = y.v_lags;
    return z;
}

double delta_metric(const SquaredState& z, const SquaredState& z_prime,
                    const CouplingWeights& w) {
    if (z.xsq_lags.size() != z_prime.xsq_lags.size() || z.v_lags.size() != z_prime.v_lags.size() ||
        z.xsq_lags.size() != w.gamma.size() || z.v_lags.size() != w.delta.size())
        throw ConfigError("delta_metric: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < w.gamma.size(); ++i)
        s += w.gamma[i] * std::abs(static_cast<double>(z.xsq_lags[i] - z_prime.xsq_lags[i]));
    for (std::size_t j = 0; j < w.delta.size(); ++j)
        s += w.delta[j] * std::abs(z.v_lags[j] - z_prime.v_lags[j]);
    return s;
}

namespace {

void push_lags(SquaredState& z, std::int64_t xsq, double v) {
    std::rotate(z.xsq_lags.rbegin(), z.xsq_lags.rbegin() + 1, z.xsq_lags.rend());
    z.xsq_lags[0] = xsq;
    if (!z.v_lags.empty()) {
        std::rotate(z.v_lags.rbegin(), z.v_lags.rbegin() + 1, z.v_lags.rend());
        z.v_lags[0] = v;
    }
}

std::vector<double> as_doubles(const std::vector<std::int64_t>& xs) {
    std::vector<double> out(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) out[i] = static_cast<double>(xs[i]);
    return out;
}

/// Sign for a lone draw of |X| = k under Q_v: P(+) = p_k / (p_k + p_{-k}).
std::int64_t draw_signed(const ConditionalFamily& family, double v, std::int64_t k,
                         std::mt19937_64& rng) {
    if (k == 0) return 0;
    const double pk = family.pmf(v, k);
    const double pmk = family.pmf(v, -k);
    const double denom = pk + pmk;
    if (denom <= 0.0) return k; // truncation artefact; mass is vanishing
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    return unif(rng) * denom < pk ? k : -k;
}

} // namespace

CoupledDraw coupled_step(CoupledState& state, const VolatilitySpec& spec,
                         const ConditionalFamily& family, std::mt19937_64& rng,
                         double tail_eps) {
    const std::vector<double> xsq = as_doubles(state.z.xsq_lags);
    const double v = spec.eval(xsq, state.z.v_lags);
    family.require_in_domain(v);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    if (state.coupled) {
        // Diagonal is absorbing: one single-chain transition drives both.
        const SquareLaw law = family.square_law(v, tail_eps);
        const auto qt = law.quantile(unif(rng));
        const std::int64_t x = draw_signed(family, v, qt.root, rng);
        push_lags(state.z, qt.square, v);
        push_lags(state.z_prime, qt.square, v);
        return {x, x, qt.truncated};
    }

    const std::vector<double> xsq_p = as_doubles(state.z_prime.xsq_lags);
    const double v_p = spec.eval(xsq_p, state.z_prime.v_lags);
    family.require_in_domain(v_p);

    const SquareLaw law = family.square_law(v, tail_eps);
    const SquareLaw law_p = family.square_law(v_p, tail_eps);

    const double u = unif(rng);
    const auto qt = law.quantile(u);
    const auto qt_p = law_p.quantile(u);
    const std::int64_t k = qt.root, k_p = qt_p.root;

    std::int64_t x, x_p;
    if (k != k_p) {
        x = draw_signed(family, v, k, rng);
        x_p = draw_signed(family, v_p, k_p, rng);
    } else if (k == 0) {
        x = x_p = 0;
    } else {
        // Shared square point: joint sign masses over the overlap interval.
        const double lo = std::max(law.cdf_through(k - 1), law_p.cdf_through(k - 1));
        const double hi = std::min(law.cdf_through(k), law_p.cdf_through(k));
        const double m = std::max(hi - lo, 1e-300); // u lies in the overlap, so m > 0
        const double pk = family.pmf(v, k), pmk = family.pmf(v, -k);
        const double pk_p = family.pmf(v_p, k), pmk_p = family.pmf(v_p, -k);
        const double len = pk + pmk, len_p = pk_p + pmk_p;
        // Overlap-conditional plus-sign masses required by the one-chain
        // marginals (signs off the overlap use the plain conditional law).
        const double a_plus = pk * m / len;
        const double b_plus = pk_p * m / len_p;
        const double min_sum = std::min(pk, pk_p) + std::min(pmk, pmk_p);
        // Agreement target: full min masses when the overlap can carry them,
        // proportional scaling otherwise (zero sign mismatch in that branch).
        const double u_target =
            min_sum <= m ? std::min(pk, pk_p) : std::min(pk, pk_p) * m / min_sum;
        const double u_mass =
            std::clamp(u_target, std::max(0.0, a_plus + b_plus - m), std::min(a_plus, b_plus));
        const double both_minus = m - a_plus - b_plus + u_mass;
        const double plus_minus = a_plus - u_mass;
        // remaining (-,+) mass: m - u_mass - both_minus - plus_minus
        const double pick = unif(rng) * m;
        if (pick < u_mass) {
            x = k; x_p = k;
        } else if (pick < u_mass + both_minus) {
            x = -k; x_p = -k;
        } else if (pick < u_mass + both_minus + plus_minus) {
            x = k; x_p = -k;
        } else {
            x = -k; x_p = k;
        }
    }

    push_lags(state.z, qt.square, v);
    push_lags(state.z_prime, qt_p.square, v_p);
    state.coupled = state.z == state.z_prime;
    return {x, x_p, qt.truncated || qt_p.truncated};
}

double analytic_beta_bound(const CouplingWeights& w, std::int64_t n, double e_delta0,
                           BetaBoundMode mode, double tv_lipschitz) {
    if (n < 0) throw ConfigError("analytic_beta_bound: lag must be >= 0");
    if (e_delta0 < 0.0) throw ConfigError("analytic_beta_bound: E Delta_0 must be >= 0");
    double front = 1.0 / w.gamma[0];
    if (mode == BetaBoundMode::Lipschitz) {
        if (w.delta.empty())
            throw ConfigError("Lipschitz bound mode needs q >= 1 (delta_1 undefined)");
        front += tv_lipschitz / w.delta[0];
    }
    return front * std::pow(w.kappa, static_cast<double>(n)) / (1.0 - w.kappa) * e_delta0;
}

double estimate_tv_lipschitz(const ConditionalFamily& family, std::span<const double> v_grid,
                             double h) {
    if (v_grid.empty()) throw ConfigError("estimate_tv_lipschitz: empty grid");
    if (!(h > 0.0)) throw ConfigError("estimate_tv_lipschitz: step must be positive");
    double best = 0.0;
    for (double v : v_grid) {
        family.require_in_domain(v);
        family.require_in_domain(v + h);
        const SquareLaw a = family.square_law(v);
        const SquareLaw b = family.square_law(v + h);
        const std::int64_t kmax = std::max(a.max_root(), b.max_root());
        double tv = 0.0;
        for (std::int64_t k = -kmax; k <= kmax; ++k)
            tv += std::abs(family.pmf(v, k) - family.pmf(v + h, k));
        best = std::max(best, 0.5 * tv / h);
    }
    return best;
}

BetaBoundMode default_beta_mode(const ConditionalFamily& family) {
    switch (family.kind()) {
    case FamilyKind::SkellamSym:
    case FamilyKind::ZeroInflatedSkellam:
        return BetaBoundMode::Symmetric;
    case FamilyKind::PoissonMapped:
    case FamilyKind::Binomial:
        return BetaBoundMode::NonnegativeSupport;
    case FamilyKind::SignFlipped:
        return BetaBoundMode::Lipschitz;
    }
    return BetaBoundMode::Symmetric;
}

namespace {

struct RepOutcome {
    std::vector<std::uint8_t> disagree;  // per lag 1..n_max
    std::vector<std::uint8_t> uncoupled;
    double delta0 = 0.0;
    double v_min = 0.0, v_max = 0.0;
    std::int64_t truncations = 0;
};

SquaredState warm_state(const VolatilitySpec& spec, const ConditionalFamily& family,
                        std::int64_t burn_in, std::mt19937_64& rng, double& vlo, double& vhi) {
    ChainState st = default_initial_state(spec);
    std::vector<double> xsq(st.x_lags.size(), 0.0);
    std::vector<double> vlags = st.v_lags;
    std::vector<std::int64_t> xint = st.x_lags;
    for (std::int64_t t = 0; t < burn_in; ++t) {
        const double v = spec.eval(xsq, vlags);
        family.require_in_domain(v);
        const std::int64_t x = family.sample(v, rng);
        std::rotate(xint.rbegin(), xint.rbegin() + 1, xint.rend());
        xint[0] = x;
        std::rotate(xsq.rbegin(), xsq.rbegin() + 1, xsq.rend());
        xsq[0] = static_cast<double>(x) * static_cast<double>(x);
        if (!vlags.empty()) {
            std::rotate(vlags.rbegin(), vlags.rbegin() + 1, vlags.rend());
            vlags[0] = v;
        }
        vlo = std::min(vlo, v);
        vhi = std::max(vhi, v);
    }
    SquaredState z;
    z.xsq_lags.reserve(xint.size());
    for (std::int64_t x : xint) z.xsq_lags.push_back(x * x);
    z.v_lags = vlags;
    return z;
}

RepOutcome run_replication(const VolatilitySpec& spec, const ConditionalFamily& family,
                           const MixingOptions& opt, const CouplingWeights& w, int rep) {
    RepOutcome out;
    out.v_min = std::numeric_limits<double>::infinity();
    out.v_max = 0.0;
    auto rng_a = make_rng(derive_seed(opt.seed, 0x5741524dULL, static_cast<std::uint64_t>(rep), 0));
    auto rng_b = make_rng(derive_seed(opt.seed, 0x5741524dULL, static_cast<std::uint64_t>(rep), 1));
    auto rng_c = make_rng(derive_seed(opt.seed, 0x434f5550ULL, static_cast<std::uint64_t>(rep), 2));

    SquaredState z0 = warm_state(spec, family, opt.burn_in, rng_a, out.v_min, out.v_max);
    SquaredState z1 = warm_state(spec, family, opt.burn_in, rng_b, out.v_min, out.v_max);
    out.delta0 = delta_metric(z0, z1, w);

    CoupledState cs = CoupledState::from(std::move(z0), std::move(z1));
    out.disagree.assign(static_cast<std::size_t>(opt.n_max), 0);
    out.uncoupled.assign(static_cast<std::size_t>(opt.n_max), 0);
    for (int n = 1; n <= opt.n_max; ++n) {
        if (cs.coupled) break; // absorbed: all later indicators stay zero
        const CoupledDraw d = coupled_step(cs, spec, family, rng_c, opt.tail_eps);
        out.truncations += d.truncated ? 1 : 0;
        out.disagree[static_cast<std::size_t>(n - 1)] = d.x != d.x_prime ? 1 : 0;
        out.uncoupled[static_cast<std::size_t>(n - 1)] = cs.coupled ? 0 : 1;
    }
    return out;
}

} // namespace

MixingReport empirical_beta_estimate(const VolatilitySpec& spec, const ConditionalFamily& family,
                                     const MixingOptions& options) {
    if (options.n_max < 1) throw ConfigError("mixing: n_max must be >= 1");
    if (options.reps < 1) throw ConfigError("mixing: reps must be >= 1");
    if (!spec.contractive())
        throw NotContractiveError(spec.lipschitz_constants().total);

    const auto& lips = spec.lipschitz_constants();
    const CouplingWeights w = compute_weights(lips.c, lips.d);

    std::vector<RepOutcome> slots(static_cast<std::size_t>(options.reps));
    int workers = options.n_workers > 0
                      ? options.n_workers
                      : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    workers = std::min<int>(workers, options.reps);
    std::atomic<int> next{0};
    auto worker = [&] {
        for (;;) {
            const int rep = next.fetch_add(1);
            if (rep >= options.reps) return;
            slots[static_cast<std::size_t>(rep)] =
                run_replication(spec, family, options, w, rep);
        }
    };
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    MixingReport rep;
    rep.weights = w;
    rep.mode = options.mode.value_or(default_beta_mode(family));

    const auto n_max = static_cast<std::size_t>(options.n_max);
    const double R = static_cast<double>(options.reps);
    std::vector<double> dis(n_max, 0.0), unc(n_max, 0.0);
    double delta0_sum = 0.0;
    double vlo = std::numeric_limits<double>::infinity(), vhi = 0.0;
    for (const auto& s : slots) { // deterministic order-independent sums
        for (std::size_t i = 0; i < n_max; ++i) {
            dis[i] += s.disagree[i];
            unc[i] += s.uncoupled[i];
        }
        delta0_sum += s.delta0;
        rep.truncation_events += s.truncations;
        vlo = std::min(vlo, s.v_min);
        vhi = std::max(vhi, s.v_max);
    }
    rep.e_delta0 = delta0_sum / R;

    if (rep.mode == BetaBoundMode::Lipschitz) {
        if (options.tv_lipschitz > 0.0) {
            rep.tv_lipschitz = options.tv_lipschitz;
        } else {
            // grid across the volatility range seen during warm-up
            std::vector<double> grid;
            const double lo = std::max(vlo, 1e-6), hi = std::max(vhi, lo * (1.0 + 1e-6));
            for (int i = 0; i < 20; ++i)
                grid.push_back(lo + (hi - lo) * static_cast<double>(i) / 19.0);
            rep.tv_lipschitz = estimate_tv_lipschitz(family, grid, 1e-3);
        }
    }

    rep.n_grid.resize(n_max);
    rep.analytic_bound.resize(n_max);
    rep.emp_disagree.resize(n_max);
    rep.emp_disagree_se.resize(n_max);
    rep.emp_uncoupled.resize(n_max);
    rep.emp_uncoupled_se.resize(n_max);
    auto binom_se = [R](double phat) { return std::sqrt(phat * (1.0 - phat) / R); };
    for (std::size_t i = 0; i < n_max; ++i) {
        rep.n_grid[i] = static_cast<std::int64_t>(i) + 1;
        rep.emp_disagree[i] = dis[i] / R;
        rep.emp_disagree_se[i] = binom_se(rep.emp_disagree[i]);
        rep.emp_uncoupled[i] = unc[i] / R;
        rep.emp_uncoupled_se[i] = binom_se(rep.emp_uncoupled[i]);
        rep.analytic_bound[i] = analytic_beta_bound(w, rep.n_grid[i], rep.e_delta0, rep.mode,
                                                    rep.tv_lipschitz.value_or(0.0));
    }
    rep.disagree_tail_sum.assign(n_max, 0.0);
    double tail = 0.0;
    for (std::size_t i = n_max; i-- > 0;) {
        tail += rep.emp_disagree[i];
        rep.disagree_tail_sum[i] = tail;
    }
    rep.bound_dominates_disagree = true;
    for (std::size_t i = 0; i < n_max; ++i)
        if (rep.analytic_bound[i] < rep.emp_disagree[i] - 3.0 * rep.emp_disagree_se[i])
            rep.bound_dominates_disagree = false;
    return rep;
}

} // namespace ingarch
