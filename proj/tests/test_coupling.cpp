#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "ingarch/coupling.hpp"
#include "ingarch/rng.hpp"
#include "test_utils.hpp"

using namespace ingarch;
namespace tu = ingarch::testutil;

namespace {

SquaredState make_state(std::vector<std::int64_t> xsq, std::vector<double> v) {
    SquaredState z;
    z.xsq_lags = std::move(xsq);
    z.v_lags = std::move(v);
    return z;
}

// Direct check of the defining inequality of the metric contraction on a
// random nonnegative grid; this is the oracle behind the weight examples.
bool contraction_inequality_on_grid(std::span<const double> c, std::span<const double> d,
                                    const CouplingWeights& w, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.0, 20.0);
    const std::size_t p = c.size(), q = d.size();
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> y(p), z(q);
        for (auto& x : y) x = unif(rng);
        for (auto& x : z) x = unif(rng);
        double lhs = 0.0, rhs = 0.0;
        const double s1 = w.gamma[0] + (q ? w.delta[0] : 0.0);
        double inner = 0.0;
        for (std::size_t i = 0; i < p; ++i) inner += c[i] * y[i];
        for (std::size_t j = 0; j < q; ++j) inner += d[j] * z[j];
        lhs = s1 * inner;
        for (std::size_t i = 1; i < p; ++i) lhs += w.gamma[i] * y[i - 1];
        for (std::size_t j = 1; j < q; ++j) lhs += w.delta[j] * z[j - 1];
        for (std::size_t i = 0; i < p; ++i) rhs += w.gamma[i] * y[i];
        for (std::size_t j = 0; j < q; ++j) rhs += w.delta[j] * z[j];
        if (lhs > w.kappa * rhs + 1e-9) return false;
    }
    return true;
}

} // namespace

TEST_SUITE_BEGIN("coupling");

TEST_CASE("weight construction reproduces the hand-solved cases") {
    {
        const double c[] = {0.3}, d[] = {0.3};
        const auto w = compute_weights(c, d);
        CHECK(w.epsilon == doctest::Approx(0.2).epsilon(1e-15));
        CHECK(w.gamma[0] == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(w.delta[0] == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(w.kappa == doctest::Approx(0.6).epsilon(1e-12));
    }
    {
        const double c[] = {0.26, 0.16};
        const auto w = compute_weights(c, {});
        CHECK(w.epsilon == doctest::Approx(0.29).epsilon(1e-15));
        CHECK(w.gamma[0] == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(w.gamma[1] == doctest::Approx(0.45).epsilon(1e-15));
        CHECK(w.kappa == doctest::Approx(0.71).epsilon(1e-12));
    }
    {
        // all-zero constants still contract strictly
        const double c[] = {0.0, 0.0};
        const auto w = compute_weights(c, {});
        CHECK(w.epsilon == doctest::Approx(0.5));
        CHECK(w.kappa == doctest::Approx(0.5));
        CHECK(w.kappa < 1.0);
    }
    // q = 0 forces gamma_1 = 1
    const double c1[] = {0.26};
    CHECK(compute_weights(c1, {}).gamma[0] == doctest::Approx(1.0).epsilon(1e-14));

    const double hot_c[] = {0.7}, hot_d[] = {0.4};
    CHECK_THROWS_AS(compute_weights(hot_c, hot_d), NotContractiveError);
}

TEST_CASE("weight inequalities hold for random contractive constants") {
    auto rng = make_rng(314);
    std::uniform_int_distribution<int> psize(1, 4), qsize(0, 4);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 300; ++trial) {
        const int p = psize(rng), q = qsize(rng);
        std::vector<double> c(static_cast<std::size_t>(p)), d(static_cast<std::size_t>(q));
        double raw = 0.0;
        for (auto& x : c) { x = unif(rng); raw += x; }
        for (auto& x : d) { x = unif(rng); raw += x; }
        const double target = 0.98 * unif(rng);
        for (auto& x : c) x *= target / std::max(raw, 1e-12);
        for (auto& x : d) x *= target / std::max(raw, 1e-12);
        const auto w = compute_weights(c, d);
        CHECK(verify_weight_inequalities(c, d, w));
        CHECK(w.kappa < 1.0);
        const double s1 = w.gamma[0] + (q ? w.delta[0] : 0.0);
        CHECK(std::abs(s1 - 1.0) < 1e-12);
        for (double g : w.gamma) CHECK(g > 0.0);
        for (double g : w.delta) CHECK(g > 0.0);
        CHECK(contraction_inequality_on_grid(c, d, w, rng));
    }
}

TEST_CASE("delta metric") {
    const double c[] = {0.3}, d[] = {0.3};
    const auto w = compute_weights(c, d); // gamma = delta = 0.5
    const auto z = make_state({4}, {2.0});
    const auto zp = make_state({1}, {3.0});
    CHECK(delta_metric(z, zp, w) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(delta_metric(z, z, w) == 0.0);
    CHECK(delta_metric(z, zp, w) == delta_metric(zp, z, w));
    const auto bad = make_state({4, 1}, {2.0});
    CHECK_THROWS_AS(delta_metric(z, bad, w), ConfigError);
}

TEST_CASE("the diagonal is absorbing and emits identical draws") {
    const auto spec = VolatilitySpec::linear(1.5, {0.26}, {0.3});
    const auto fam = ConditionalFamily::skellam();
    auto rng = make_rng(88);
    auto state = CoupledState::from(make_state({4}, {2.0}), make_state({4}, {2.0}));
    REQUIRE(state.coupled);
    for (int t = 0; t < 200; ++t) {
        const auto draw = coupled_step(state, spec, fam, rng);
        CHECK(draw.x == draw.x_prime);
        CHECK(state.coupled);
        CHECK(state.z == state.z_prime);
    }
}

TEST_CASE("one-step marginals match the exact conditional law (chi-square 1%)") {
    const auto spec = VolatilitySpec::linear(1.5, {0.26}, {0.3});
    const auto fam = ConditionalFamily::skellam();
    const auto z0 = make_state({4}, {2.0});
    const auto z1 = make_state({0}, {3.5});
    const double v = 1.5 + 0.26 * 4.0 + 0.3 * 2.0;
    const double v_p = 1.5 + 0.3 * 3.5;

    auto rng = make_rng(4405);
    const std::int64_t n = 100'000;
    const std::int64_t K = 30;
    std::vector<std::int64_t> counts(static_cast<std::size_t>(2 * K + 1), 0),
        counts_p(static_cast<std::size_t>(2 * K + 1), 0);
    for (std::int64_t i = 0; i < n; ++i) {
        auto state = CoupledState::from(z0, z1);
        const auto draw = coupled_step(state, spec, fam, rng);
        if (std::llabs(draw.x) <= K) ++counts[static_cast<std::size_t>(draw.x + K)];
        if (std::llabs(draw.x_prime) <= K) ++counts_p[static_cast<std::size_t>(draw.x_prime + K)];
    }
    std::vector<double> probs(counts.size()), probs_p(counts.size());
    for (std::int64_t k = -K; k <= K; ++k) {
        probs[static_cast<std::size_t>(k + K)] = fam.pmf(v, k);
        probs_p[static_cast<std::size_t>(k + K)] = fam.pmf(v_p, k);
    }
    CHECK(tu::chi_square_gof(counts, probs, n).p_value >= 0.01);
    CHECK(tu::chi_square_gof(counts_p, probs_p, n).p_value >= 0.01);
}

TEST_CASE("one coupled step contracts the metric in expectation") {
    const auto spec = VolatilitySpec::linear(1.5, {0.26}, {0.3});
    const auto fam = ConditionalFamily::skellam();
    const auto& lips = spec.lipschitz_constants();
    const auto w = compute_weights(lips.c, lips.d);
    auto rng = make_rng(909);
    std::uniform_int_distribution<int> xdraw(0, 4);
    std::uniform_real_distribution<double> vdraw(1.5, 6.0);
    for (int pair = 0; pair < 20; ++pair) {
        const std::int64_t xa = xdraw(rng), xb = xdraw(rng);
        const auto z0 = make_state({xa * xa}, {vdraw(rng)});
        const auto z1 = make_state({xb * xb}, {vdraw(rng)});
        const double d0 = delta_metric(z0, z1, w);
        if (d0 == 0.0) continue;
        const int steps = 2000;
        std::vector<double> deltas;
        deltas.reserve(steps);
        for (int s = 0; s < steps; ++s) {
            auto state = CoupledState::from(z0, z1);
            (void)coupled_step(state, spec, fam, rng);
            deltas.push_back(delta_metric(state.z, state.z_prime, w));
        }
        const double mean = tu::mean_of(deltas);
        double var = 0.0;
        for (double x : deltas) var += (x - mean) * (x - mean);
        const double se = std::sqrt(var / (steps - 1.0) / steps);
        CHECK(mean <= w.kappa * d0 + 3.0 * se);
    }
}

TEST_CASE("shared-uniform square draws are monotone in the volatility") {
    const auto fam = ConditionalFamily::skellam();
    const auto lo = fam.square_law(2.0);
    const auto hi = fam.square_law(3.7);
    auto rng = make_rng(6);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int i = 0; i < 5000; ++i) {
        const double u = unif(rng);
        CHECK(lo.quantile(u).square <= hi.quantile(u).square);
    }
}

TEST_CASE("sign coupling never mismatches signs on equal squares") {
    // families whose conditional sign law does not vary with v: the
    // proportional branch assigns the whole overlap to agreement
    const auto spec = VolatilitySpec::linear(1.5, {0.26}, {0.3});
    for (const auto& fam :
         {ConditionalFamily::skellam(),
          ConditionalFamily::sign_flipped(ConditionalFamily::skellam(), 0.7)}) {
        CAPTURE(fam.name());
        auto rng = make_rng(777);
        const auto z0 = make_state({4}, {2.0});
        const auto z1 = make_state({1}, {3.0});
        int mismatches = 0;
        for (int i = 0; i < 20'000; ++i) {
            auto state = CoupledState::from(z0, z1);
            const auto draw = coupled_step(state, spec, fam, rng);
            if (std::llabs(draw.x) == std::llabs(draw.x_prime) && draw.x != draw.x_prime)
                ++mismatches;
        }
        CHECK(mismatches == 0);
    }
}

TEST_CASE("analytic beta bound") {
    CouplingWeights w;
    w.gamma = {1.0};
    w.kappa = 0.5;
    CHECK(analytic_beta_bound(w, 3, 1.0, BetaBoundMode::NonnegativeSupport) ==
          doctest::Approx(0.25).epsilon(1e-15));
    CHECK(analytic_beta_bound(w, 0, 2.0, BetaBoundMode::Symmetric) ==
          doctest::Approx(2.0 / (1.0 * 0.5)).epsilon(1e-15));
    // geometric ratio
    for (int n = 0; n < 20; ++n) {
        const double a = analytic_beta_bound(w, n, 1.0, BetaBoundMode::Symmetric);
        const double b = analytic_beta_bound(w, n + 1, 1.0, BetaBoundMode::Symmetric);
        CHECK(b / a == doctest::Approx(w.kappa).epsilon(1e-12));
    }
    // Lipschitz mode needs q >= 1
    CHECK_THROWS_AS(analytic_beta_bound(w, 1, 1.0, BetaBoundMode::Lipschitz, 2.0), ConfigError);
    w.delta = {0.5};
    CHECK(analytic_beta_bound(w, 3, 1.0, BetaBoundMode::Lipschitz, 2.0) ==
          doctest::Approx((1.0 + 4.0) * 0.25).epsilon(1e-12));
}

TEST_CASE("default bound mode per family") {
    CHECK(default_beta_mode(ConditionalFamily::skellam()) == BetaBoundMode::Symmetric);
    CHECK(default_beta_mode(ConditionalFamily::zero_inflated_skellam(0.4)) ==
          BetaBoundMode::Symmetric);
    CHECK(default_beta_mode(ConditionalFamily::poisson_mapped()) ==
          BetaBoundMode::NonnegativeSupport);
    CHECK(default_beta_mode(ConditionalFamily::binomial(3)) == BetaBoundMode::NonnegativeSupport);
    CHECK(default_beta_mode(ConditionalFamily::sign_flipped(ConditionalFamily::skellam(), 0.7)) ==
          BetaBoundMode::Lipschitz);
}

TEST_CASE("total-variation Lipschitz estimate stabilizes in the step size") {
    const auto fam = ConditionalFamily::sign_flipped(ConditionalFamily::skellam(), 0.7);
    std::vector<double> grid;
    for (int i = 0; i < 9; ++i) grid.push_back(1.0 + 0.5 * i);
    const double k_coarse = estimate_tv_lipschitz(fam, grid, 1e-2);
    const double k_fine = estimate_tv_lipschitz(fam, grid, 1e-3);
    CHECK(k_coarse > 0.0);
    CHECK(std::abs(k_coarse - k_fine) / k_fine < 0.05);

    // symmetric family still yields a finite constant
    const double k_sym = estimate_tv_lipschitz(ConditionalFamily::skellam(), grid, 1e-3);
    CHECK(std::isfinite(k_sym));
    CHECK(k_sym > 0.0);
    CHECK_THROWS_AS(estimate_tv_lipschitz(fam, {}, 1e-3), ConfigError);
}

TEST_CASE("degenerate recursion couples at the first lag") {
    const auto spec = VolatilitySpec::linear(2.0, {0.0}, {0.0});
    MixingOptions opt;
    opt.n_max = 5;
    opt.reps = 400;
    opt.burn_in = 50;
    opt.seed = 21;
    opt.n_workers = 2;
    const auto rep = empirical_beta_estimate(spec, ConditionalFamily::skellam(), opt);
    CHECK(rep.emp_uncoupled[0] == 0.0);
    CHECK(rep.emp_disagree[0] == 0.0);
    CHECK(rep.emp_uncoupled[4] == 0.0);
}

TEST_CASE("mixing experiment: bound dominates and the report is worker-invariant") {
    const auto spec = VolatilitySpec::linear(1.5, {0.26});
    MixingOptions opt;
    opt.n_max = 10;
    opt.reps = 2000;
    opt.burn_in = 300;
    opt.seed = 17;
    opt.n_workers = 1;
    const auto a = empirical_beta_estimate(spec, ConditionalFamily::skellam(), opt);
    opt.n_workers = 4;
    const auto b = empirical_beta_estimate(spec, ConditionalFamily::skellam(), opt);
    CHECK(a.bound_dominates_disagree);
    CHECK(a.e_delta0 == b.e_delta0);
    CHECK(a.emp_disagree == b.emp_disagree);
    CHECK(a.emp_uncoupled == b.emp_uncoupled);
    CHECK(a.analytic_bound == b.analytic_bound);
    CHECK(a.disagree_tail_sum == b.disagree_tail_sum);

    // tail sums are nonincreasing partial sums of the disagreement curve
    for (std::size_t i = 1; i < a.disagree_tail_sum.size(); ++i)
        CHECK(a.disagree_tail_sum[i - 1] >= a.disagree_tail_sum[i]);
    CHECK(a.disagree_tail_sum[0] ==
          doctest::Approx(a.disagree_tail_sum[1] + a.emp_disagree[0]).epsilon(1e-12));

    // non-contractive specs are rejected
    const auto hot = VolatilitySpec::linear(1.5, {1.1});
    CHECK_THROWS_AS(empirical_beta_estimate(hot, ConditionalFamily::skellam(), opt),
                    NotContractiveError);
}

TEST_CASE("uncoupled-probability curve decays geometrically at rate kappa") {
    // mass-weighted decay ratio of P(T > n): compare against kappa e^{0.1},
    // the slack used by the mixing acceptance check
    const auto spec = VolatilitySpec::linear(1.5, {0.26});
    MixingOptions opt;
    opt.n_max = 8;
    opt.reps = 100'000;
    opt.burn_in = 400;
    opt.seed = 100;
    const auto rep = empirical_beta_estimate(spec, ConditionalFamily::skellam(), opt);
    double head = 0.0, shifted = 0.0;
    for (int n = 1; n <= 5; ++n) {
        head += rep.emp_uncoupled[static_cast<std::size_t>(n - 1)];
        shifted += rep.emp_uncoupled[static_cast<std::size_t>(n)];
    }
    REQUIRE(head > 0.0);
    const double kappa = rep.weights.kappa;
    CHECK(kappa == doctest::Approx(0.26).epsilon(1e-12));
    CHECK(shifted / head <= kappa * std::exp(0.1));
}

TEST_SUITE_END();
