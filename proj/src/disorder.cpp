#include "anderson/disorder.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "anderson/error.hpp"
#include "anderson/random.hpp"

namespace anderson::disorder {

namespace {

void require(bool ok, const std::string& message) {
    if (!ok) throw DomainError(message);
}

double uniform_from_bits(std::uint64_t x) { return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53; }

// log((1 - e^{-t})/t) = -t/2 + log(sinh(t/2)/(t/2)).
double uniform_cumulant(double t) {
    if (t < 1e-2) {
        const double t2 = t * t;
        return -0.5 * t + t2 / 24.0 - t2 * t2 / 2880.0 + t2 * t2 * t2 / 181440.0;
    }
    return std::log(-std::expm1(-t)) - std::log(t);
}

double bernoulli_cumulant(double p0, double a, double t) {
    if (p0 == 1.0 || a == 0.0) return 0.0;
    if (p0 == 0.0) return -t * a;
    const double x = t * a;
    if (x < 1.0) return std::log1p((1.0 - p0) * std::expm1(-x));
    return std::log(p0) + std::log1p((1.0 - p0) / p0 * std::exp(-x));
}

// log Gamma(1 + x) with full relative accuracy as x -> 0.
double lgamma1p(double x) {
    if (x < 0.5) return std::log1p(boost::math::tgamma1pm1(x));
    return std::lgamma(1.0 + x);
}

// (1+u)^alpha - 1 - alpha u, summed as the binomial series near u = 0 where
// the closed form cancels.
double power_excess(double alpha, double u) {
    if (std::abs(u) < 0.5) {
        double term = alpha * (alpha - 1.0) / 2.0 * u * u;
        double sum = term;
        for (int k = 3; k < 200 && std::abs(term) > 1e-18 * std::abs(sum); ++k) {
            term *= (alpha - k + 1.0) / k * u;
            sum += term;
        }
        return sum;
    }
    return std::expm1(alpha * std::log1p(u)) - alpha * u;
}

// For V = -X with P[X > x] = exp(-C x^alpha):
//   <e^{-tV}> = 1 + t int_0^inf exp(t x - C x^alpha) dx.
// The exponent is concave with peak psi* at x*; writing x = x*(1+u) gives
//   psi - psi* = -C x*^alpha power_excess(alpha, u),
// which stays accurate when psi* is large. The integrand is integrated over
// the window where it exceeds e^{-50}.
double weibull_cumulant(double alpha, double c, double t) {
    if (t == 0.0) return 0.0;
    const double x_star = std::pow(t / (c * alpha), 1.0 / (alpha - 1.0));
    const double scale = c * std::pow(x_star, alpha);
    const double psi_star = t * x_star - scale;
    auto drop = [&](double u) { return -scale * power_excess(alpha, u); };
    constexpr double depth = 50.0;
    auto below = [&](double u) { return drop(u) < -depth; };

    double lo = -1.0;
    if (below(-1.0)) {
        double a = -1.0, b = 0.0;
        for (int i = 0; i < 200; ++i) {
            const double m = 0.5 * (a + b);
            (below(m) ? a : b) = m;
        }
        lo = a;
    }
    double hi = 1.0;
    for (int i = 0; i < 2000 && !below(hi); ++i) hi *= 2.0;
    {
        double a = 0.0, b = hi;
        for (int i = 0; i < 200; ++i) {
            const double m = 0.5 * (a + b);
            (below(m) ? b : a) = m;
        }
        hi = b;
    }

    // Integrate over z in [-1, 1]: the error estimate reported by the
    // adaptive rule is not rescaled by the interval length.
    const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
    double error = 0.0;
    const double unit = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [&](double z) { return std::exp(drop(mid + half * z)); }, -1.0, 1.0, 15, 1e-12, &error);
    const double integral = x_star * half * unit;
    error *= x_star * half;
    if (!(integral > 0.0) || error > 1e-10 * integral)
        throw ConvergenceError("weibull_tail cumulant: quadrature missed tolerance at t = " + std::to_string(t),
                               error / integral);
    // log(1 + t e^{psi*} I)
    const double log_term = psi_star + std::log(t * integral);
    if (log_term < 0.0) return std::log1p(std::exp(log_term));
    return log_term + std::log1p(std::exp(-log_term));
}

struct FitResult {
    double rho;
    double log_c;
    double residual;
};

const std::vector<double>& fit_times() {
    static const std::vector<double> times = [] {
        std::vector<double> ts;
        for (int i = 0; i <= 24; ++i) ts.push_back(std::pow(10.0, 2.0 + 4.0 * i / 24.0));
        return ts;
    }();
    return times;
}

constexpr double kFitLambdas[] = {0.25, 0.5, 0.75};

// Least squares of log S(lambda, t) against log c + log h_rho(lambda) + rho log t.
FitResult fit_at(const std::vector<std::tuple<double, double, double>>& data, double rho) {
    double sum = 0.0;
    for (const auto& [lam, t, s] : data) sum += std::log(s) - std::log(h_rho(rho, lam)) - rho * std::log(t);
    const double log_c = sum / static_cast<double>(data.size());
    double ss = 0.0;
    for (const auto& [lam, t, s] : data) {
        const double r = std::log(s) - log_c - std::log(h_rho(rho, lam)) - rho * std::log(t);
        ss += r * r;
    }
    return {rho, log_c, std::sqrt(ss / static_cast<double>(data.size()))};
}

std::vector<std::tuple<double, double, double>> fit_data(const DistributionSpec& spec) {
    std::vector<std::tuple<double, double, double>> data;
    for (double lam : kFitLambdas)
        for (double t : fit_times()) {
            const double s = s_deviation(spec, lam, t);
            if (s > 0.0) data.emplace_back(lam, t, s);
        }
    require(data.size() >= 3, "rv_metadata: deviation vanishes on the fit grid for " + spec.id());
    return data;
}

RVMetadata power_metadata(const FitResult& fit) {
    RVMetadata m;
    m.rho = fit.rho;
    m.c_g = std::exp(fit.log_c);
    const double rho = fit.rho;
    m.g = [rho](double t) { return std::pow(t, rho); };
    m.g0 = [](double) { return 1.0; };
    m.estimated = true;
    m.fit_residual = fit.residual;
    return m;
}

}  // namespace

std::string family_name(Family f) {
    switch (f) {
        case Family::uniform01: return "uniform01";
        case Family::bernoulli: return "bernoulli";
        case Family::exponential: return "exponential";
        case Family::weibull_tail: return "weibull_tail";
        case Family::double_exponential: return "double_exponential";
        case Family::point_mass: return "point_mass";
    }
    return "unknown";
}

std::string DistributionSpec::id() const {
    std::ostringstream os;
    os << std::setprecision(15) << family_name(family);
    switch (family) {
        case Family::uniform01: break;
        case Family::bernoulli: os << "(p0=" << p1 << ",a=" << p2 << ")"; break;
        case Family::exponential: os << "(theta=" << p1 << ")"; break;
        case Family::weibull_tail: os << "(alpha=" << p1 << ",C=" << p2 << ")"; break;
        case Family::double_exponential: os << "(c=" << p1 << ")"; break;
        case Family::point_mass: os << "(v=" << p1 << ")"; break;
    }
    return os.str();
}

DistributionSpec uniform01() { return {Family::uniform01, 0.0, 0.0}; }

DistributionSpec bernoulli(double p0, double a) {
    require(p0 >= 0.0 && p0 <= 1.0, "bernoulli: p0 must lie in [0, 1]");
    require(std::isfinite(a) && a >= 0.0, "bernoulli: a must be finite and >= 0");
    return {Family::bernoulli, p0, a};
}

DistributionSpec exponential(double theta) {
    require(std::isfinite(theta) && theta > 0.0, "exponential: θ must be > 0");
    return {Family::exponential, theta, 0.0};
}

DistributionSpec weibull_tail(double alpha, double c) {
    require(std::isfinite(alpha) && alpha > 1.0, "weibull_tail: α must exceed 1 (got " + std::to_string(alpha) + ")");
    require(std::isfinite(c) && c > 0.0, "weibull_tail: C must be > 0");
    return {Family::weibull_tail, alpha, c};
}

DistributionSpec double_exponential(double c) {
    require(std::isfinite(c) && c > 0.0, "double_exponential: c must be > 0");
    return {Family::double_exponential, c, 0.0};
}

DistributionSpec point_mass(double v) {
    require(std::isfinite(v), "point_mass: v must be finite");
    return {Family::point_mass, v, 0.0};
}

DistributionSpec make_spec(const std::string& family, const std::vector<std::pair<std::string, double>>& params) {
    auto get = [&](const std::string& key) {
        for (const auto& [k, v] : params)
            if (k == key) return v;
        throw DomainError(family + ": missing parameter '" + key + "'");
    };
    if (family == "uniform01") return uniform01();
    if (family == "bernoulli") return bernoulli(get("p0"), get("a"));
    if (family == "exponential") return exponential(get("theta"));
    if (family == "weibull_tail") return weibull_tail(get("alpha"), get("C"));
    if (family == "double_exponential") return double_exponential(get("c"));
    if (family == "point_mass") return point_mass(get("v"));
    throw DomainError("unsupported distribution family '" + family + "'");
}

double cdf(const DistributionSpec& s, double x) {
    switch (s.family) {
        case Family::uniform01: return std::clamp(x, 0.0, 1.0);
        case Family::bernoulli: return x < 0.0 ? 0.0 : (x < s.p2 ? s.p1 : 1.0);
        case Family::exponential: return x <= 0.0 ? 0.0 : -std::expm1(-s.p1 * x);
        case Family::weibull_tail: return x < 0.0 ? std::exp(-s.p2 * std::pow(-x, s.p1)) : 1.0;
        case Family::double_exponential: return std::exp(-std::exp(-x / s.p1));
        case Family::point_mass: return x < s.p1 ? 0.0 : 1.0;
    }
    throw DomainError("cdf: unsupported family");
}

double quantile(const DistributionSpec& s, double u) {
    switch (s.family) {
        case Family::uniform01: return u;
        case Family::bernoulli: return u < s.p1 ? 0.0 : s.p2;
        case Family::exponential: return -std::log1p(-u) / s.p1;
        case Family::weibull_tail: return -std::pow(-std::log(u) / s.p2, 1.0 / s.p1);
        case Family::double_exponential: return -s.p1 * std::log(-std::log(u));
        case Family::point_mass: return s.p1;
    }
    throw DomainError("quantile: unsupported family");
}

double mean(const DistributionSpec& s) {
    switch (s.family) {
        case Family::uniform01: return 0.5;
        case Family::bernoulli: return (1.0 - s.p1) * s.p2;
        case Family::exponential: return 1.0 / s.p1;
        case Family::weibull_tail: return -std::pow(s.p2, -1.0 / s.p1) * std::tgamma(1.0 + 1.0 / s.p1);
        case Family::double_exponential: return s.p1 * std::numbers::egamma;
        case Family::point_mass: return s.p1;
    }
    throw DomainError("mean: unsupported family");
}

std::optional<std::vector<std::pair<double, double>>> finite_support(const DistributionSpec& s) {
    if (s.family == Family::point_mass) return std::vector<std::pair<double, double>>{{s.p1, 1.0}};
    if (s.family == Family::bernoulli) return std::vector<std::pair<double, double>>{{0.0, s.p1}, {s.p2, 1.0 - s.p1}};
    return std::nullopt;
}

std::vector<double> sample(const DistributionSpec& spec, std::uint64_t seed, std::size_t count) {
    require(count >= 1, "sample: count must be >= 1");
    Rng rng(seed);
    std::vector<double> out(count);
    for (double& v : out) v = quantile(spec, rng.uniform());
    return out;
}

double site_value(const DistributionSpec& spec, std::uint64_t seed, std::uint64_t key) {
    return quantile(spec, uniform_from_bits(stream_seed(seed, key)));
}

lattice::PotentialSample sample_potential(const DistributionSpec& spec, const lattice::BoxGeometry& geometry,
                                          std::uint64_t seed) {
    lattice::PotentialSample out;
    out.seed = seed;
    out.spec_id = spec.id();
    out.values.resize(geometry.size());
    for (std::size_t x = 0; x < out.values.size(); ++x) out.values[x] = site_value(spec, seed, x);
    return out;
}

double cumulant(const DistributionSpec& s, double t) {
    require(t >= 0.0 && std::isfinite(t), "cumulant: t must be finite and >= 0");
    if (t == 0.0) return 0.0;
    switch (s.family) {
        case Family::uniform01: return uniform_cumulant(t);
        case Family::bernoulli: return bernoulli_cumulant(s.p1, s.p2, t);
        case Family::exponential: return -std::log1p(t / s.p1);
        case Family::weibull_tail: return weibull_cumulant(s.p1, s.p2, t);
        case Family::double_exponential: return lgamma1p(s.p1 * t);
        case Family::point_mass: return -t * s.p1;
    }
    throw DomainError("cumulant: unsupported family");
}

double cumulant_rate(const DistributionSpec& spec, double t) {
    if (t == 0.0) return -mean(spec);
    return cumulant(spec, t) / t;
}

double s_deviation(const DistributionSpec& spec, double lambda, double t) {
    require(lambda > 0.0 && lambda <= 1.0, "s_deviation: λ must lie in (0, 1]");
    require(t > 0.0, "s_deviation: t must be > 0");
    if (lambda == 1.0) return 0.0;
    return cumulant_rate(spec, t) - cumulant_rate(spec, lambda * t);
}

double h_rho(double rho, double lambda) {
    require(lambda > 0.0 && lambda <= 1.0, "h_rho: λ must lie in (0, 1]");
    const double log_lambda = std::log(lambda);
    if (rho == 0.0) return -log_lambda;
    return -std::expm1(rho * log_lambda) / rho;
}

RVMetadata rv_metadata(const DistributionSpec& spec) {
    RVMetadata m;
    switch (spec.family) {
        case Family::uniform01:
            m.rho = -1.0;
            m.c_g = 1.0;
            m.g = [](double t) { return std::log(t) / t; };
            m.g0 = [](double t) { return std::log(t); };
            return m;
        case Family::double_exponential:
            m.rho = 0.0;
            m.c_g = spec.p1;
            m.g = [](double) { return 1.0; };
            m.g0 = [](double) { return 1.0; };
            return m;
        case Family::point_mass:
            m.degenerate = true;
            m.g = [](double) { return 0.0; };
            m.g0 = [](double) { return 0.0; };
            return m;
        case Family::weibull_tail: {
            // rho is exact; c_g is fitted against g(t) = t^rho.
            const double rho = 1.0 / (spec.p1 - 1.0);
            return power_metadata(fit_at(fit_data(spec), rho));
        }
        case Family::bernoulli:
            if (spec.p1 == 0.0 || spec.p1 == 1.0 || spec.p2 == 0.0) {
                m.degenerate = true;
                m.g = [](double) { return 0.0; };
                m.g0 = [](double) { return 0.0; };
                return m;
            }
            [[fallthrough]];
        case Family::exponential: {
            const auto data = fit_data(spec);
            double a = -1.0, b = 3.0;
            const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
            for (int i = 0; i < 100; ++i) {
                const double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
                if (fit_at(data, x1).residual < fit_at(data, x2).residual)
                    b = x2;
                else
                    a = x1;
            }
            return power_metadata(fit_at(data, 0.5 * (a + b)));
        }
    }
    throw DomainError("rv_metadata: unsupported family");
}

EmpiricalCumulant empirical_cumulant(std::span<const double> samples, double t) {
    require(!samples.empty(), "empirical_cumulant: samples must be nonempty");
    require(t >= 0.0, "empirical_cumulant: t must be >= 0");
    const std::size_t n = samples.size();
    double shift = -std::numeric_limits<double>::infinity();
    for (double v : samples) {
        require(std::isfinite(v), "empirical_cumulant: non-finite sample");
        shift = std::max(shift, -t * v);
    }
    std::vector<double> terms(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += (terms[i] = std::exp(-t * samples[i] - shift));
    if (!(total > 0.0)) throw DomainError("empirical_cumulant: empirical mean vanished");

    EmpiricalCumulant out;
    out.value = shift + std::log(total / static_cast<double>(n));
    if (n < 2) {
        out.se = std::numeric_limits<double>::infinity();
        return out;
    }
    std::vector<double> loo(n);
    double loo_mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        loo[i] = shift + std::log(std::max(total - terms[i], 0.0) / static_cast<double>(n - 1));
        loo_mean += loo[i];
    }
    loo_mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : loo) ss += (v - loo_mean) * (v - loo_mean);
    out.se = std::sqrt(static_cast<double>(n - 1) / static_cast<double>(n) * ss);
    return out;
}

}  // namespace anderson::disorder
