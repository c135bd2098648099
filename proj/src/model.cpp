#include "ingarch/model.hpp"

#include <algorithm>
#include <cmath>

#include "ingarch/rng.hpp"

namespace ingarch {

VolatilitySpec VolatilitySpec::linear(double omega, std::vector<double> alpha,
                                      std::vector<double> beta) {
    if (!(omega > 0.0)) throw ConfigError("linear spec needs omega > 0, got " + std::to_string(omega));
    for (double a : alpha)
        if (a < 0.0) throw ConfigError("alpha coefficients must be nonnegative");
    for (double b : beta)
        if (b < 0.0) throw ConfigError("beta coefficients must be nonnegative");
    if (alpha.empty()) throw ConfigError("linear spec needs at least one alpha lag (p >= 1)");
    VolatilitySpec s;
    s.omega_ = omega;
    s.lips_.c = std::move(alpha);
    s.lips_.d = std::move(beta);
    s.lips_.total = 0.0;
    for (double a : s.lips_.c) s.lips_.total += a;
    for (double b : s.lips_.d) s.lips_.total += b;
    return s;
}

VolatilitySpec VolatilitySpec::custom(CustomVolatilityFn f, std::vector<double> c,
                                      std::vector<double> d) {
    if (!f) throw ConfigError("custom spec needs a volatility function");
    for (double x : c)
        if (x < 0.0) throw ConfigError("Lipschitz constants must be nonnegative");
    for (double x : d)
        if (x < 0.0) throw ConfigError("Lipschitz constants must be nonnegative");
    if (c.empty()) throw ConfigError("custom spec needs p >= 1");
    VolatilitySpec s;
    s.f_ = std::move(f);
    s.lips_.c = std::move(c);
    s.lips_.d = std::move(d);
    s.lips_.total = 0.0;
    for (double x : s.lips_.c) s.lips_.total += x;
    for (double x : s.lips_.d) s.lips_.total += x;
    return s;
}

double VolatilitySpec::eval(std::span<const double> xsq_lags,
                            std::span<const double> v_lags) const {
    if (static_cast<int>(xsq_lags.size()) != p() || static_cast<int>(v_lags.size()) != q())
        throw ConfigError("eval_volatility: lag vectors must have lengths p = " +
                          std::to_string(p()) + ", q = " + std::to_string(q()));
    if (f_) return f_(xsq_lags, v_lags);
    double v = omega_;
    for (int i = 0; i < p(); ++i) v += lips_.c[static_cast<std::size_t>(i)] * xsq_lags[static_cast<std::size_t>(i)];
    for (int j = 0; j < q(); ++j) v += lips_.d[static_cast<std::size_t>(j)] * v_lags[static_cast<std::size_t>(j)];
    return v;
}

ChainState default_initial_state(const VolatilitySpec& spec) {
    ChainState st;
    st.x_lags.assign(static_cast<std::size_t>(spec.p()), 0);
    double v0;
    if (spec.is_linear()) {
        v0 = spec.contractive() ? spec.omega() / (1.0 - spec.lipschitz_constants().total)
                                : spec.omega();
    } else {
        const std::vector<double> zx(static_cast<std::size_t>(spec.p()), 0.0);
        const std::vector<double> zv(static_cast<std::size_t>(spec.q()), 0.0);
        v0 = spec.eval(zx, zv);
        if (!(v0 >= 0.0) || !std::isfinite(v0))
            throw ConfigError("custom spec has no usable default initial state; pass init explicitly");
    }
    st.v_lags.assign(static_cast<std::size_t>(spec.q()), v0);
    return st;
}

std::vector<SeriesRecord> simulate(const VolatilitySpec& spec, const ConditionalFamily& family,
                                   const SimulateOptions& options) {
    if (options.n < 1) throw ConfigError("simulate: n must be >= 1");
    if (options.burn_in < 0) throw ConfigError("simulate: burn_in must be >= 0");

    ChainState st = options.init ? *options.init : default_initial_state(spec);
    if (static_cast<int>(st.x_lags.size()) != spec.p() ||
        static_cast<int>(st.v_lags.size()) != spec.q())
        throw ConfigError("simulate: init state has wrong lag lengths");
    for (double v : st.v_lags) family.require_in_domain(v);

    std::vector<double> xsq(st.x_lags.size());
    for (std::size_t i = 0; i < xsq.size(); ++i)
        xsq[i] = static_cast<double>(st.x_lags[i]) * static_cast<double>(st.x_lags[i]);
    std::vector<double> vlags = st.v_lags;

    auto rng = make_rng(options.seed);
    std::vector<SeriesRecord> out;
    out.reserve(static_cast<std::size_t>(options.n));

    const std::int64_t total = options.burn_in + options.n;
    for (std::int64_t t = 1; t <= total; ++t) {
        const double v = spec.eval(xsq, vlags);
        family.require_in_domain(v, t);
        if (v > options.explosion_threshold) throw ExplosionError(t, v);
        const std::int64_t x = family.sample(v, rng);

        std::rotate(xsq.rbegin(), xsq.rbegin() + 1, xsq.rend());
        xsq[0] = static_cast<double>(x) * static_cast<double>(x);
        if (!vlags.empty()) {
            std::rotate(vlags.rbegin(), vlags.rbegin() + 1, vlags.rend());
            vlags[0] = v;
        }
        if (t > options.burn_in)
            out.push_back({t - options.burn_in, x, v});
    }
    return out;
}

} // namespace ingarch
