#include "ingarch/dist.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ingarch {

std::string FamilyDomainError::format(const std::string& family, double v, std::int64_t t) {
    std::ostringstream os;
    os << "volatility " << v << " outside the domain of family '" << family << "'";
    if (t >= 0) os << " at time index " << t;
    return os.str();
}

ExplosionError::ExplosionError(std::int64_t t, double v)
    : Error("volatility exploded: v_" + std::to_string(t) + " = " + std::to_string(v)),
      t_(t), v_(v) {}

NotContractiveError::NotContractiveError(double total)
    : Error("Lipschitz coefficient sum " + std::to_string(total) + " >= 1: not contractive"),
      total_(total) {}

namespace {

constexpr double kConvolutionRelTail = 1e-16;

double poisson_log_pmf(double lambda, std::int64_t k) {
    return static_cast<double>(k) * std::log(lambda) - lambda - std::lgamma(static_cast<double>(k) + 1.0);
}

double poisson_pmf(double lambda, std::int64_t k) {
    if (k < 0) return 0.0;
    if (lambda == 0.0) return k == 0 ? 1.0 : 0.0;
    return std::exp(poisson_log_pmf(lambda, k));
}

double binomial_pmf(int n, double g, std::int64_t k) {
    if (k < 0 || k > n) return 0.0;
    const double kk = static_cast<double>(k);
    const double log_choose = std::lgamma(n + 1.0) - std::lgamma(kk + 1.0) - std::lgamma(n - kk + 1.0);
    return std::exp(log_choose + kk * std::log(g) + (n - kk) * std::log1p(-g));
}

double poisson_mapped_lambda(double v) { return std::sqrt(v + 0.25) - 0.5; }

} // namespace

double skellam_pmf(double mu, std::int64_t k) {
    const std::int64_t a = std::llabs(k);
    if (mu == 0.0) return a == 0 ? 1.0 : 0.0;
    // Terms t_j = pois(mu, j+a) * pois(mu, j). Start at the modal j to stay in
    // range for large mu, then sweep outward until the relative tail cut.
    const std::int64_t j0 = std::max<std::int64_t>(0, std::llround(mu - static_cast<double>(a) / 2.0));
    const double log_t0 = poisson_log_pmf(mu, j0 + a) + poisson_log_pmf(mu, j0);
    // The modal term bounds the sum up to a small factor; below the normal
    // double range the mass is vanishing and subnormal arithmetic would stall
    // the relative-tail cut.
    if (log_t0 < -700.0) return 0.0;
    const double t0 = std::exp(log_t0);
    double sum = t0;
    double t = t0;
    for (std::int64_t j = j0 + 1;; ++j) {
        t *= mu * mu / (static_cast<double>(j + a) * static_cast<double>(j));
        sum += t;
        if (t < sum * kConvolutionRelTail || t == 0.0) break;
    }
    t = t0;
    for (std::int64_t j = j0; j > 0; --j) {
        t *= static_cast<double>(j + a) * static_cast<double>(j) / (mu * mu);
        sum += t;
        if (t < sum * kConvolutionRelTail || t == 0.0) break;
    }
    return sum;
}

ConditionalFamily ConditionalFamily::skellam() {
    ConditionalFamily f;
    f.kind_ = FamilyKind::SkellamSym;
    f.name_ = "skellam";
    return f;
}

ConditionalFamily ConditionalFamily::zero_inflated_skellam(double pi) {
    if (!(pi > 0.0 && pi < 1.0))
        throw ConfigError("zero-inflation parameter pi must lie in (0,1), got " + std::to_string(pi));
    ConditionalFamily f;
    f.kind_ = FamilyKind::ZeroInflatedSkellam;
    f.name_ = "zero_inflated_skellam";
    f.pi_ = pi;
    return f;
}

ConditionalFamily ConditionalFamily::poisson_mapped() {
    ConditionalFamily f;
    f.kind_ = FamilyKind::PoissonMapped;
    f.name_ = "poisson_mapped";
    return f;
}

ConditionalFamily ConditionalFamily::binomial(int n) {
    if (n < 1) throw ConfigError("binomial family needs n >= 1, got " + std::to_string(n));
    ConditionalFamily f;
    f.kind_ = FamilyKind::Binomial;
    f.name_ = "binomial(" + std::to_string(n) + ")";
    f.n_ = n;
    return f;
}

ConditionalFamily ConditionalFamily::sign_flipped(ConditionalFamily base, double prob_plus) {
    if (!(prob_plus >= 0.0 && prob_plus <= 1.0))
        throw ConfigError("sign probability must lie in [0,1], got " + std::to_string(prob_plus));
    if (base.kind_ == FamilyKind::SignFlipped)
        throw ConfigError("sign_flipped base must not itself be sign_flipped");
    ConditionalFamily f;
    f.kind_ = FamilyKind::SignFlipped;
    f.name_ = "sign_flipped(" + base.name_ + ")";
    f.r_ = prob_plus;
    f.base_ = std::make_shared<ConditionalFamily>(std::move(base));
    return f;
}

double solve_binomial_g(int n, double v) {
    if (n < 1) throw ConfigError("solve_binomial_g: n must be >= 1");
    if (!(v > 0.0 && v < static_cast<double>(n) * n))
        throw FamilyDomainError("binomial(" + std::to_string(n) + ")", v);
    if (n == 1) return v;
    // n g + n(n-1) g^2 = v  =>  g = (-1 + sqrt(1 + 4(n-1)v/n)) / (2(n-1))
    const double m = static_cast<double>(n - 1);
    return (-1.0 + std::sqrt(1.0 + 4.0 * m * v / n)) / (2.0 * m);
}

double ConditionalFamily::pmf(double v, std::int64_t k) const {
    require_in_domain(v);
    if (v == 0.0) return k == 0 ? 1.0 : 0.0;
    switch (kind_) {
    case FamilyKind::SkellamSym:
        return skellam_pmf(v / 2.0, k);
    case FamilyKind::ZeroInflatedSkellam: {
        const double p = pi_ * skellam_pmf(v / (2.0 * pi_), k);
        return k == 0 ? p + (1.0 - pi_) : p;
    }
    case FamilyKind::PoissonMapped:
        return poisson_pmf(poisson_mapped_lambda(v), k);
    case FamilyKind::Binomial:
        return binomial_pmf(n_, solve_binomial_g(n_, v), k);
    case FamilyKind::SignFlipped: {
        if (k > 0) return r_ * base_->abs_pmf(v, k);
        if (k < 0) return (1.0 - r_) * base_->abs_pmf(v, -k);
        return base_->abs_pmf(v, 0);
    }
    }
    return 0.0;
}

double ConditionalFamily::abs_pmf(double v, std::int64_t k) const {
    if (k < 0) return 0.0;
    if (k == 0) return pmf(v, 0);
    return pmf(v, k) + pmf(v, -k);
}

std::int64_t ConditionalFamily::sample(double v, std::mt19937_64& rng) const {
    require_in_domain(v);
    if (v == 0.0) return 0;
    switch (kind_) {
    case FamilyKind::SkellamSym: {
        std::poisson_distribution<std::int64_t> pois(v / 2.0);
        return pois(rng) - pois(rng);
    }
    case FamilyKind::ZeroInflatedSkellam: {
        std::bernoulli_distribution keep(pi_);
        if (!keep(rng)) return 0;
        std::poisson_distribution<std::int64_t> pois(v / (2.0 * pi_));
        return pois(rng) - pois(rng);
    }
    case FamilyKind::PoissonMapped: {
        std::poisson_distribution<std::int64_t> pois(poisson_mapped_lambda(v));
        return pois(rng);
    }
    case FamilyKind::Binomial: {
        std::binomial_distribution<std::int64_t> bin(n_, solve_binomial_g(n_, v));
        return bin(rng);
    }
    case FamilyKind::SignFlipped: {
        const std::int64_t y = std::llabs(base_->sample(v, rng));
        if (y == 0) return 0;
        std::bernoulli_distribution plus(r_);
        return plus(rng) ? y : -y;
    }
    }
    return 0;
}

SquareLaw ConditionalFamily::square_law(double v, double tail_eps) const {
    require_in_domain(v);
    if (!(tail_eps > 0.0 && tail_eps <= 1e-6))
        throw ConfigError("tail_eps must lie in (0, 1e-6], got " + std::to_string(tail_eps));
    SquareLaw law;
    law.v = v;
    law.tail_eps = tail_eps;
    if (v == 0.0) {
        law.v_boundary = true;
        law.mass = {1.0};
        law.cdf = {1.0};
        return law;
    }
    const std::int64_t hard_cap =
        kind_ == FamilyKind::Binomial ? n_
                                      : static_cast<std::int64_t>(16.0 * std::sqrt(v) + 256.0);
    double cum = 0.0;
    for (std::int64_t k = 0;; ++k) {
        const double m = abs_pmf(v, k);
        law.mass.push_back(m);
        cum += m;
        law.cdf.push_back(cum);
        if (cum >= 1.0 - tail_eps) break;
        if (k >= hard_cap)
            throw Error("square_law: support truncation failed to reach 1 - tail_eps at v = " +
                        std::to_string(v));
    }
    return law;
}

SquareLaw::Quantile SquareLaw::quantile(double u) const {
    if (!(u >= 0.0 && u < 1.0))
        throw ConfigError("quantile argument must lie in [0,1), got " + std::to_string(u));
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) {
        const std::int64_t k = max_root();
        return {k, k * k, true};
    }
    const std::int64_t k = static_cast<std::int64_t>(it - cdf.begin());
    return {k, k * k, false};
}

} // namespace ingarch
