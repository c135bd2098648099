#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "ingarch/errors.hpp"

namespace ingarch {

/// Default truncation tolerance for the law of X^2. Coupling accuracy depends
/// on it, so it is exposed wherever a square law is built.
inline constexpr double kDefaultTailEps = 1e-12;

enum class FamilyKind {
    SkellamSym,          // Skellam(v/2, v/2): difference of two Poisson(v/2)
    ZeroInflatedSkellam, // with prob pi a Skellam(v/(2 pi), v/(2 pi)) draw, else 0
    PoissonMapped,       // Poisson(sqrt(v + 1/4) - 1/2)
    Binomial,            // Bin(n, g(v)) with n g + n(n-1) g^2 = v
    SignFlipped,         // |Y| from a base family, then an independent sign
};

/// Distribution of X^2 at a fixed volatility: masses on the perfect squares
/// 0, 1, 4, ..., truncated once the remaining tail is below tail_eps.
/// Index k holds the mass and cumulative mass of the point k^2.
struct SquareLaw {
    std::vector<double> mass;
    std::vector<double> cdf;
    double v = 0.0;
    double tail_eps = kDefaultTailEps;
    bool v_boundary = false; // v == 0 limit case: point mass at 0

    struct Quantile {
        std::int64_t root;   // k, the nonnegative root of the support point
        std::int64_t square; // k^2
        bool truncated;      // u exceeded the achievable cdf maximum
    };

    /// Generalized inverse: smallest support point w with cdf(w) >= u.
    Quantile quantile(double u) const;

    /// Cumulative mass through k^2; k < 0 gives 0.
    double cdf_through(std::int64_t k) const {
        if (k < 0) return 0.0;
        if (static_cast<std::size_t>(k) >= cdf.size()) return cdf.back();
        return cdf[static_cast<std::size_t>(k)];
    }

    std::int64_t max_root() const { return static_cast<std::int64_t>(mass.size()) - 1; }
};

/**
 * A parametrized family (Q_v) of integer laws with second moment v:
 * sum_k k^2 Q_v({k}) = v for every admissible v.
 *
 * All probability arithmetic is exact up to stated truncation tolerances;
 * no Monte Carlo is involved in pmf/square_law/quantile. Operations are pure
 * given an explicit random stream, so concurrent use with independent
 * streams is safe.
 */
class ConditionalFamily {
public:
    static ConditionalFamily skellam();
    static ConditionalFamily zero_inflated_skellam(double pi);
    static ConditionalFamily poisson_mapped();
    static ConditionalFamily binomial(int n);
    static ConditionalFamily sign_flipped(ConditionalFamily base, double prob_plus);

    FamilyKind kind() const noexcept { return kind_; }
    const std::string& name() const noexcept { return name_; }
    int binomial_n() const noexcept { return n_; }
    double mixture_pi() const noexcept { return pi_; }
    double sign_prob_plus() const noexcept { return r_; }
    const ConditionalFamily& base() const { return *base_; }

    /// Admissible volatilities form [0, v_max()); v == 0 is the point-mass
    /// limit, accepted and representable but never produced by a recursion
    /// with omega > 0.
    double v_max() const noexcept {
        return n_ > 0 ? static_cast<double>(n_) * n_ : std::numeric_limits<double>::infinity();
    }
    bool contains(double v) const noexcept { return v >= 0.0 && v < v_max(); }
    void require_in_domain(double v, std::int64_t t = -1) const {
        if (!contains(v)) throw FamilyDomainError(name_, v, t);
    }

    /// Exact probability Q_v({k}). Values outside the support return 0.
    double pmf(double v, std::int64_t k) const;

    /// P(|X| = k): pmf(k) + pmf(-k) for k >= 1, pmf(0) at 0.
    double abs_pmf(double v, std::int64_t k) const;

    /// One draw from Q_v; deterministic given the stream state.
    std::int64_t sample(double v, std::mt19937_64& rng) const;

    /// Law of X^2 with the tail truncated below tail_eps.
    SquareLaw square_law(double v, double tail_eps = kDefaultTailEps) const;

private:
    ConditionalFamily() = default;

    FamilyKind kind_ = FamilyKind::SkellamSym;
    std::string name_;
    int n_ = 0;       // Binomial
    double pi_ = 0.0; // ZeroInflatedSkellam
    double r_ = 0.0;  // SignFlipped
    std::shared_ptr<const ConditionalFamily> base_;
};

/// The unique root g in (0,1) of n g + n(n-1) g^2 = v, for 0 < v < n^2.
/// g = v for n = 1. Residual below 1e-12.
double solve_binomial_g(int n, double v);

/// pmf of Skellam(mu, mu) at k, computed by direct Poisson convolution with
/// relative tail truncation 1e-16. Exposed for tests.
double skellam_pmf(double mu, std::int64_t k);

} // namespace ingarch
