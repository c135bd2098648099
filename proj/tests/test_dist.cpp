#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "ingarch/dist.hpp"
#include "ingarch/rng.hpp"
#include "test_utils.hpp"

using namespace ingarch;
namespace tu = ingarch::testutil;

namespace {

// Summation range wide enough that truncation error is far below the
// tolerances under test.
std::int64_t k_span(double v) { return 60 + static_cast<std::int64_t>(14.0 * std::sqrt(v)); }

std::vector<double> test_grid(const ConditionalFamily& f) {
    std::vector<double> grid = {0.3, 0.7, 1.0, 1.5, 2.0, 3.0, 5.0, 8.0, 12.0, 20.0};
    if (f.kind() == FamilyKind::Binomial) {
        const double hi = f.v_max();
        for (auto& v : grid) v = std::min(v, 0.9 * hi);
    }
    return grid;
}

std::vector<ConditionalFamily> all_families() {
    return {ConditionalFamily::skellam(), ConditionalFamily::zero_inflated_skellam(0.5),
            ConditionalFamily::poisson_mapped(), ConditionalFamily::binomial(6),
            ConditionalFamily::sign_flipped(ConditionalFamily::skellam(), 0.7)};
}

} // namespace

TEST_SUITE_BEGIN("dist");

TEST_CASE("skellam pmf matches the Bessel-form reference values") {
    // e^{-v} I_k(v) for Skellam(v/2, v/2), evaluated with 30-digit arithmetic
    CHECK(skellam_pmf(1.0, 0) == doctest::Approx(0.30850832255367104).epsilon(1e-13));
    CHECK(skellam_pmf(1.0, 1) == doctest::Approx(0.21526928924893766).epsilon(1e-13));
    CHECK(skellam_pmf(1.0, 2) == doctest::Approx(0.09323903330473338).epsilon(1e-13));
    CHECK(skellam_pmf(1.0, 3) == doctest::Approx(0.028791222639470898).epsilon(1e-13));
    CHECK(skellam_pmf(1.0, 5) == doctest::Approx(0.0013297610941881578).epsilon(1e-13));
    CHECK(skellam_pmf(0.25, 0) == doctest::Approx(0.64503527044915007).epsilon(1e-13));
    CHECK(skellam_pmf(2.5, 0) == doctest::Approx(0.18354081260932835).epsilon(1e-13));
    CHECK(skellam_pmf(2.5, 2) == doctest::Approx(0.11795190583151141).epsilon(1e-13));

    const auto fam = ConditionalFamily::skellam();
    CHECK(fam.pmf(2.0, 0) == doctest::Approx(0.30850832255367104).epsilon(1e-13));
}

TEST_CASE("skellam pmf is symmetric, exactly") {
    const auto fam = ConditionalFamily::skellam();
    for (double v : {0.5, 2.0, 7.3})
        for (std::int64_t k : {1, 2, 5, 11})
            CHECK(fam.pmf(v, k) == fam.pmf(v, -k));
}

TEST_CASE("poisson_mapped at v = 2 is Poisson(1)") {
    const auto fam = ConditionalFamily::poisson_mapped();
    // lambda = sqrt(2.25) - 0.5 = 1, and lambda^2 + lambda = 2 checks the
    // second-moment parametrization directly.
    const double e1 = std::exp(-1.0);
    CHECK(fam.pmf(2.0, 0) == doctest::Approx(e1).epsilon(1e-14));
    CHECK(fam.pmf(2.0, 1) == doctest::Approx(e1).epsilon(1e-14));
    CHECK(fam.pmf(2.0, 2) == doctest::Approx(e1 / 2.0).epsilon(1e-14));
    CHECK(fam.pmf(2.0, -1) == 0.0);
    CHECK(fam.pmf(2.0, -7) == 0.0);
}

TEST_CASE("zero-inflated skellam mixes a point mass with a rescaled base") {
    const auto fam = ConditionalFamily::zero_inflated_skellam(0.5);
    CHECK(fam.pmf(2.0, 0) == doctest::Approx(0.60350096061199335).epsilon(1e-13));
    for (std::int64_t k : {1, 2, 3})
        CHECK(fam.pmf(2.0, k) == doctest::Approx(0.5 * skellam_pmf(2.0, k)).epsilon(1e-13));
    CHECK_THROWS_AS(ConditionalFamily::zero_inflated_skellam(0.0), ConfigError);
    CHECK_THROWS_AS(ConditionalFamily::zero_inflated_skellam(1.0), ConfigError);
}

TEST_CASE("sign_flipped reweights the absolute law") {
    const auto base = ConditionalFamily::skellam();
    const auto fam = ConditionalFamily::sign_flipped(base, 0.7);
    for (std::int64_t k : {1, 2, 4}) {
        const double abs_mass = 2.0 * skellam_pmf(1.0, k);
        CHECK(fam.pmf(2.0, k) == doctest::Approx(0.7 * abs_mass).epsilon(1e-13));
        CHECK(fam.pmf(2.0, -k) == doctest::Approx(0.3 * abs_mass).epsilon(1e-13));
    }
    CHECK(fam.pmf(2.0, 0) == doctest::Approx(skellam_pmf(1.0, 0)).epsilon(1e-13));

    const auto degenerate = ConditionalFamily::sign_flipped(base, 1.0);
    CHECK(degenerate.pmf(2.0, -1) == 0.0);
    CHECK_THROWS_AS(ConditionalFamily::sign_flipped(base, 1.5), ConfigError);
}

TEST_CASE("solve_binomial_g") {
    CHECK(solve_binomial_g(2, 1.0) == doctest::Approx(0.36602540378443865).epsilon(1e-14));
    CHECK(solve_binomial_g(1, 0.5) == 0.5);
    // residual of the defining equation stays below 1e-12
    for (int n : {2, 3, 6, 10}) {
        for (double v : {0.1, 0.5, 1.0, 0.3 * n * n, 0.9 * n * n}) {
            const double g = solve_binomial_g(n, v);
            CHECK(g > 0.0);
            CHECK(g < 1.0);
            CHECK(std::abs(n * g + n * (n - 1.0) * g * g - v) < 1e-12 * std::max(1.0, v));
        }
    }
    CHECK(solve_binomial_g(2, 0.5) < solve_binomial_g(2, 1.0));
    CHECK_THROWS_AS(solve_binomial_g(2, 4.0), FamilyDomainError);
    CHECK_THROWS_AS(solve_binomial_g(2, -0.5), FamilyDomainError);
}

TEST_CASE("binomial pmf uses the solved success probability") {
    const auto fam = ConditionalFamily::binomial(2);
    CHECK(fam.pmf(1.0, 0) == doctest::Approx(0.40192378864668406).epsilon(1e-13));
    CHECK(fam.pmf(1.0, 1) == doctest::Approx(0.46410161513775459).epsilon(1e-13));
    CHECK(fam.pmf(1.0, 2) == doctest::Approx(0.13397459621556135).epsilon(1e-13));
    CHECK(fam.pmf(1.0, 3) == 0.0);
    CHECK(fam.pmf(1.0, -1) == 0.0);
}

TEST_CASE("normalization and second-moment identity on the v grid") {
    for (const auto& fam : all_families()) {
        CAPTURE(fam.name());
        for (double v : test_grid(fam)) {
            const std::int64_t K = k_span(v);
            double total = 0.0, second = 0.0;
            for (std::int64_t k = -K; k <= K; ++k) {
                const double p = fam.pmf(v, k);
                total += p;
                second += static_cast<double>(k) * static_cast<double>(k) * p;
            }
            CHECK(std::abs(total - 1.0) < 1e-10);
            CHECK(std::abs(second - v) < 1e-8);
        }
    }
}

TEST_CASE("skellam fourth moment is v + 3 v^2") {
    const auto fam = ConditionalFamily::skellam();
    for (double v : test_grid(fam)) {
        const std::int64_t K = k_span(v) + 40;
        double fourth = 0.0;
        for (std::int64_t k = -K; k <= K; ++k) {
            const double k2 = static_cast<double>(k) * static_cast<double>(k);
            fourth += k2 * k2 * fam.pmf(v, k);
        }
        CHECK(std::abs(fourth - (v + 3.0 * v * v)) < 1e-6);
    }
}

TEST_CASE("stochastic ordering of |X| across the grid") {
    for (const auto& fam : all_families()) {
        CAPTURE(fam.name());
        const auto grid = test_grid(fam);
        for (std::size_t a = 0; a < grid.size(); ++a) {
            for (std::size_t b = a + 1; b < grid.size(); ++b) {
                if (!(grid[a] < grid[b])) continue;
                double cum_lo = 0.0, cum_hi = 0.0;
                for (std::int64_t m = 0; m <= 50; ++m) {
                    cum_lo += fam.abs_pmf(grid[a], m);
                    cum_hi += fam.abs_pmf(grid[b], m);
                    CHECK(cum_lo >= cum_hi - 1e-12);
                }
            }
        }
    }
}

TEST_CASE("square law of skellam at v = 2") {
    const auto law = ConditionalFamily::skellam().square_law(2.0);
    CHECK(law.mass[0] == doctest::Approx(0.30850832255367104).epsilon(1e-13));
    CHECK(law.mass[1] == doctest::Approx(0.43053857849787532).epsilon(1e-13));
    CHECK(law.cdf.back() >= 1.0 - law.tail_eps);
    for (std::size_t i = 1; i < law.cdf.size(); ++i) CHECK(law.cdf[i] >= law.cdf[i - 1]);
}

TEST_CASE("square law of binomial(2) at v = 1 has support {0, 1, 4}") {
    const auto law = ConditionalFamily::binomial(2).square_law(1.0);
    REQUIRE(law.mass.size() == 3);
    CHECK(law.mass[0] == doctest::Approx(0.40192378864668406).epsilon(1e-13));
    CHECK(law.mass[1] == doctest::Approx(0.46410161513775459).epsilon(1e-13));
    CHECK(law.mass[2] == doctest::Approx(0.13397459621556135).epsilon(1e-13));
    CHECK(law.cdf.back() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("square-law quantile is the generalized inverse") {
    const auto law = ConditionalFamily::skellam().square_law(2.0);
    CHECK(law.quantile(0.30).square == 0); // cdf(0) ~ 0.3085 >= 0.30
    CHECK(law.quantile(0.0).square == 0);
    CHECK(law.quantile(0.31).square == 1);

    // monotone in u
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int i = 0; i < 2000; ++i) {
        double u1 = unif(rng), u2 = unif(rng);
        if (u1 > u2) std::swap(u1, u2);
        CHECK(law.quantile(u1).square <= law.quantile(u2).square);
    }

    // truncation is flagged, largest support point returned
    const double beyond = (law.cdf.back() + 1.0) / 2.0;
    if (beyond < 1.0) {
        const auto q = law.quantile(beyond);
        CHECK(q.truncated);
        CHECK(q.root == law.max_root());
    }
    CHECK_THROWS_AS(law.quantile(1.0), ConfigError);
    CHECK_THROWS_AS((void)ConditionalFamily::skellam().square_law(2.0, 1e-3), ConfigError);
}

TEST_CASE("sampler second moment tracks v (skellam, 1e6 draws)") {
    const auto fam = ConditionalFamily::skellam();
    auto rng = make_rng(101);
    const int n = 1'000'000;
    double sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = static_cast<double>(fam.sample(2.0, rng));
        sum_sq += x * x;
    }
    const double mean = sum_sq / n;
    // Var(X^2) = E X^4 - v^2 = 2 v^2 + v = 10 at v = 2
    const double se = std::sqrt(10.0 / n);
    CHECK(std::abs(mean - 2.0) <= 3.0 * se);
}

TEST_CASE("samplers agree with pmfs (chi-square at 1%)") {
    const std::int64_t n = 100'000;
    for (const auto& fam : all_families()) {
        CAPTURE(fam.name());
        const double v = fam.kind() == FamilyKind::Binomial ? 1.0 : 2.0;
        auto rng = make_rng(2024);
        const std::int64_t K = 40;
        std::vector<std::int64_t> counts(static_cast<std::size_t>(2 * K + 1), 0);
        for (std::int64_t i = 0; i < n; ++i) {
            const std::int64_t x = fam.sample(v, rng);
            if (x >= -K && x <= K) ++counts[static_cast<std::size_t>(x + K)];
        }
        std::vector<double> probs(counts.size());
        for (std::int64_t k = -K; k <= K; ++k)
            probs[static_cast<std::size_t>(k + K)] = fam.pmf(v, k);
        const auto res = tu::chi_square_gof(counts, probs, n);
        CAPTURE(res.stat);
        CAPTURE(res.df);
        CHECK(res.p_value >= 0.01);
    }
}

TEST_CASE("sign_flipped with r = 1 never goes negative") {
    const auto fam = ConditionalFamily::sign_flipped(ConditionalFamily::skellam(), 1.0);
    auto rng = make_rng(5);
    for (int i = 0; i < 20'000; ++i) CHECK(fam.sample(2.0, rng) >= 0);
}

TEST_CASE("v = 0 is the point-mass boundary") {
    for (const auto& fam : all_families()) {
        CHECK(fam.pmf(0.0, 0) == 1.0);
        CHECK(fam.pmf(0.0, 1) == 0.0);
        auto rng = make_rng(1);
        CHECK(fam.sample(0.0, rng) == 0);
        const auto law = fam.square_law(0.0);
        CHECK(law.v_boundary);
        REQUIRE(law.mass.size() == 1);
        CHECK(law.mass[0] == 1.0);
    }
}

TEST_CASE("domain errors carry the family name") {
    const auto bin = ConditionalFamily::binomial(2);
    CHECK_THROWS_AS((void)bin.pmf(4.0, 0), FamilyDomainError);
    CHECK_THROWS_AS((void)bin.pmf(-1.0, 0), FamilyDomainError);
    try {
        (void)bin.pmf(4.5, 0);
        FAIL("expected FamilyDomainError");
    } catch (const FamilyDomainError& e) {
        CHECK(std::string(e.what()).find("binomial(2)") != std::string::npos);
    }
    CHECK(bin.contains(3.9));
    CHECK(!bin.contains(4.0));
}

TEST_CASE("chi-square helper sanity against reference quantiles") {
    CHECK(tu::chi_square_sf(6.6348966010212145, 1) == doctest::Approx(0.01).epsilon(1e-9));
    CHECK(tu::chi_square_sf(15.08627246938899, 5) == doctest::Approx(0.01).epsilon(1e-9));
    CHECK(tu::chi_square_sf(23.209251158954356, 10) == doctest::Approx(0.01).epsilon(1e-9));
    CHECK(tu::chi_square_sf(37.56623478662507, 20) == doctest::Approx(0.01).epsilon(1e-9));
}

TEST_SUITE_END();
