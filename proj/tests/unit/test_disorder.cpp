#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "anderson/disorder.hpp"
#include "anderson/error.hpp"

using namespace anderson;
using namespace anderson::disorder;

namespace {

double ks_statistic(std::vector<double> xs, const DistributionSpec& spec) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf(spec, xs[i]);
        d = std::max({d, std::abs(f - static_cast<double>(i) / n), std::abs(static_cast<double>(i + 1) / n - f)});
    }
    return d;
}

std::vector<DistributionSpec> continuous_specs() {
    return {uniform01(), exponential(1.5), weibull_tail(2.0, 1.0), weibull_tail(3.5, 0.7), double_exponential(1.0),
            double_exponential(0.4)};
}

std::vector<DistributionSpec> all_specs() {
    auto specs = continuous_specs();
    specs.push_back(bernoulli(0.5, 1.0));
    specs.push_back(bernoulli(0.2, 3.0));
    specs.push_back(point_mass(0.7));
    return specs;
}

}  // namespace

TEST_CASE("sampling") {
    for (double v : sample(point_mass(0.0), 9, 1000)) CHECK(v == 0.0);

    const auto u = sample(uniform01(), 1, 1000000);
    double m = 0.0;
    for (double v : u) m += v;
    m /= 1e6;
    CHECK(std::abs(m - 0.5) <= 3.0 / std::sqrt(12.0) / 1e3);

    const auto b = sample(bernoulli(0.5, 1.0), 2, 1000000);
    const double zeros = static_cast<double>(std::count(b.begin(), b.end(), 0.0)) / 1e6;
    CHECK(std::abs(zeros - 0.5) <= 0.0016);

    for (const auto& spec : continuous_specs()) {
        CAPTURE(spec.id());
        const auto xs = sample(spec, 77, 20000);
        // 0.1% critical value of the one-sample Kolmogorov-Smirnov statistic.
        CHECK(ks_statistic(xs, spec) <= 1.95 / std::sqrt(20000.0));
    }

    CHECK(sample(uniform01(), 5, 10) == sample(uniform01(), 5, 10));
    CHECK(sample(uniform01(), 5, 10) != sample(uniform01(), 6, 10));

    const lattice::BoxGeometry box(2, 6);
    const auto p = sample_potential(exponential(1.0), box, 31);
    CHECK(p.values.size() == 36);
    CHECK(p.spec_id == exponential(1.0).id());
    CHECK(p.values[7] == site_value(exponential(1.0), 31, 7));
}

TEST_CASE("spec validation") {
    CHECK_THROWS_AS(bernoulli(1.5, 1.0), DomainError);
    CHECK_THROWS_AS(exponential(0.0), DomainError);
    CHECK_THROWS_AS(double_exponential(-1.0), DomainError);
    try {
        (void)weibull_tail(1.0, 1.0);
        FAIL("expected DomainError");
    } catch (const DomainError& e) {
        CHECK(std::string(e.what()).find("α must exceed 1") != std::string::npos);
    }
    CHECK(make_spec("bernoulli", {{"p0", 0.3}, {"a", 2.0}}) == bernoulli(0.3, 2.0));
    CHECK_THROWS_AS(make_spec("cauchy", {}), DomainError);
    CHECK_THROWS_AS(make_spec("exponential", {}), DomainError);
    CHECK(bernoulli(0.5, 1.0).id() == "bernoulli(p0=0.5,a=1)");
}

TEST_CASE("cumulant closed forms and quadrature oracles") {
    for (const auto& spec : all_specs()) CHECK(cumulant(spec, 0.0) == 0.0);

    boost::math::quadrature::tanh_sinh<double> ts;
    boost::math::quadrature::exp_sinh<double> es;

    for (double t : {1e-6, 1e-3, 0.1, 1.0, 7.0, 50.0}) {
        CAPTURE(t);
        const double uni = std::log(ts.integrate([&](double v) { return std::exp(-t * v); }, 0.0, 1.0));
        CHECK(cumulant(uniform01(), t) == doctest::Approx(uni).epsilon(1e-10));
        const double expo = std::log(es.integrate([&](double v) { return 2.0 * std::exp(-2.0 * v - t * v); }));
        CHECK(cumulant(exponential(2.0), t) == doctest::Approx(expo).epsilon(1e-10));
        CHECK(cumulant(bernoulli(0.3, 2.0), t) ==
              doctest::Approx(std::log(0.3 + 0.7 * std::exp(-2.0 * t))).epsilon(1e-12));
    }
    CHECK(cumulant(uniform01(), 1.0) == doctest::Approx(-0.45867514538708193).epsilon(1e-14));
    CHECK(cumulant(exponential(1.0), 1.0) == doctest::Approx(-std::log(2.0)).epsilon(1e-14));
    CHECK(cumulant(point_mass(2.0), 3.0) == -6.0);

    SUBCASE("weibull alpha = 2 closed form") {
        // log(1 + t e^{t^2/4} (sqrt(pi)/2)(1 + erf(t/2))), split to avoid overflow.
        auto oracle = [](double t) {
            const double log_term = t * t / 4.0 + std::log(t * std::sqrt(std::numbers::pi) / 2.0 * (1.0 + std::erf(t / 2.0)));
            return log_term + std::log1p(std::exp(-log_term));
        };
        for (double t : {1e-4, 0.01, 0.5, 3.0, 20.0, 60.0}) {
            CAPTURE(t);
            CHECK(cumulant(weibull_tail(2.0, 1.0), t) == doctest::Approx(oracle(t)).epsilon(1e-9));
        }
        // Beyond double range of the closed form: leading term t^2/4 + log(t sqrt(pi)).
        const double t = 1e4;
        CHECK(cumulant(weibull_tail(2.0, 1.0), t) ==
              doctest::Approx(t * t / 4.0 + std::log(t * std::sqrt(std::numbers::pi))).epsilon(1e-12));
    }

    SUBCASE("double exponential against the Gumbel density") {
        for (double c : {0.5, 1.0, 2.0}) {
            for (double t : {1e-3, 0.3, 2.0, 10.0}) {
                CAPTURE(c);
                CAPTURE(t);
                // Substituting y = e^{-E/c}: <e^{-tV}> = int_0^inf y^{ct} e^{-y} dy.
                const double oracle =
                    std::log(es.integrate([&](double y) { return std::exp(c * t * std::log(y) - y); }));
                CHECK(cumulant(double_exponential(c), t) == doctest::Approx(oracle).epsilon(1e-9));
            }
        }
        const double t = 1e5;
        CHECK(cumulant(double_exponential(1.0), t) == doctest::Approx(t * std::log(t) - t).epsilon(1e-5));
    }

    SUBCASE("small-t rate") {
        for (const auto& spec : all_specs()) {
            CAPTURE(spec.id());
            CHECK(cumulant_rate(spec, 1e-9) == doctest::Approx(-mean(spec)).epsilon(1e-6));
            CHECK(cumulant_rate(spec, 0.0) == doctest::Approx(-mean(spec)).epsilon(1e-12));
        }
    }

    SUBCASE("convexity") {
        for (const auto& spec : all_specs()) {
            CAPTURE(spec.id());
            for (double t1 : {0.01, 0.5, 3.0, 40.0})
                for (double t2 : {0.2, 2.0, 30.0, 400.0}) {
                    if (t2 <= t1) continue;
                    CHECK(cumulant(spec, 0.5 * (t1 + t2)) <= 0.5 * (cumulant(spec, t1) + cumulant(spec, t2)) + 1e-10);
                }
        }
    }
}

TEST_CASE("deviation S") {
    for (const auto& spec : all_specs()) {
        CAPTURE(spec.id());
        CHECK(s_deviation(spec, 1.0, 5.0) == 0.0);
        for (double lam : {0.01, 0.25, 0.5, 0.9})
            for (double t : {0.01, 1.0, 100.0, 1e4}) CHECK(s_deviation(spec, lam, t) >= -1e-12);
    }
    for (double t : {1.0, 1e3, 1e6}) CHECK(s_deviation(point_mass(3.0), 0.3, t) == doctest::Approx(0.0));

    // t S(1/2, t) = log t + 2 log(1/2) + o(1), so the ratio climbs to 1.
    double previous = 0.0;
    for (double t : {1e4, 1e6, 1e8}) {
        const double r = t * s_deviation(uniform01(), 0.5, t) / std::log(t);
        CHECK(r > previous);
        CHECK(r < 1.0);
        CHECK(std::abs(r - (1.0 - 2.0 * std::log(2.0) / std::log(t))) <= 1e-6);
        previous = r;
    }
    CHECK_THROWS_AS(s_deviation(uniform01(), 0.0, 1.0), DomainError);
}

TEST_CASE("h_rho") {
    CHECK(h_rho(0.0, 0.5) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(h_rho(1.0, 0.5) == doctest::Approx(0.5).epsilon(1e-15));
    for (double rho : {-1.0, 0.0, 0.7, 3.0}) CHECK(h_rho(rho, 1.0) == 0.0);
    for (int i = 1; i <= 9; ++i) {
        const double lam = 0.1 * i;
        CHECK(std::abs(h_rho(1e-6, lam) + std::log(lam)) <= 1e-4);
        CHECK(std::abs(h_rho(-1e-12, lam) + std::log(lam)) <= 1e-10);
    }
    CHECK(h_rho(-1.0, 0.25) == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("regular-variation metadata") {
    const auto uni = rv_metadata(uniform01());
    CHECK(uni.rho == -1.0);
    CHECK(uni.c_g == 1.0);
    CHECK(uni.g(1e6) == doctest::Approx(std::log(1e6) / 1e6));
    CHECK_FALSE(uni.estimated);

    const auto de = rv_metadata(double_exponential(1.0));
    CHECK(de.rho == 0.0);
    CHECK(de.c_g == 1.0);
    CHECK(de.g(123.0) == 1.0);

    const auto pm = rv_metadata(point_mass(1.0));
    CHECK(pm.degenerate);
    CHECK(pm.g(10.0) == 0.0);

    // G(t) = K t^{1+rho} + o(t^{1+rho}), K = (alpha-1) alpha^{-alpha/(alpha-1)} C^{-1/(alpha-1)}, c_g = K rho.
    for (auto [alpha, c] : {std::pair{2.0, 1.0}, std::pair{3.0, 0.5}, std::pair{1.5, 2.0}}) {
        CAPTURE(alpha);
        const auto w = rv_metadata(weibull_tail(alpha, c));
        const double rho = 1.0 / (alpha - 1.0);
        const double k = (alpha - 1.0) * std::pow(alpha, -alpha / (alpha - 1.0)) * std::pow(c, -1.0 / (alpha - 1.0));
        CHECK(w.rho == doctest::Approx(rho).epsilon(1e-15));
        CHECK(w.c_g == doctest::Approx(k * rho).epsilon(0.02));
        CHECK(w.estimated);
    }

    for (const auto& spec : {bernoulli(0.5, 1.0), exponential(1.0)}) {
        CAPTURE(spec.id());
        const auto m = rv_metadata(spec);
        CHECK(m.estimated);
        CHECK(m.rho == doctest::Approx(-1.0).epsilon(0.1));
        CHECK(m.c_g > 0.0);
    }
    CHECK(rv_metadata(bernoulli(1.0, 1.0)).degenerate);

    SUBCASE("de Haan consistency") {
        for (const auto& spec : {uniform01(), double_exponential(1.0), double_exponential(2.5)}) {
            const auto m = rv_metadata(spec);
            for (double t : {1e6, 1e7, 1e8})
                for (double lam : {0.25, 0.5, 0.75}) {
                    CAPTURE(spec.id());
                    CAPTURE(t);
                    const double ratio = s_deviation(spec, lam, t) / (m.c_g * h_rho(m.rho, lam) * m.g(t));
                    CHECK(ratio >= 0.8);
                    CHECK(ratio <= 1.2);
                }
        }
    }
}

TEST_CASE("empirical cumulant") {
    const std::vector<double> zeros(100, 0.0);
    CHECK(empirical_cumulant(zeros, 4.0).value == 0.0);
    const std::vector<double> twos(50, 2.0);
    CHECK(empirical_cumulant(twos, 3.0).value == -6.0);
    CHECK_THROWS_AS(empirical_cumulant(std::vector<double>{}, 1.0), DomainError);

    const auto u = sample(uniform01(), 4, 1000000);
    const auto e = empirical_cumulant(u, 1.0);
    CHECK(std::abs(e.value - (-0.4587)) <= 3.0 * e.se + 1e-4);
    CHECK(std::abs(e.value - cumulant(uniform01(), 1.0)) <= 3.0 * e.se);

    for (const auto& spec : all_specs()) {
        const auto xs = sample(spec, 1234, 200000);
        for (double t : {0.25, 1.0, 2.0}) {
            CAPTURE(spec.id());
            CAPTURE(t);
            const auto est = empirical_cumulant(xs, t);
            CHECK(std::abs(est.value - cumulant(spec, t)) <= 3.0 * est.se + 1e-12);
        }
    }
}
