#include <doctest.h>

#include <cmath>
#include <sstream>

#include "anderson/disorder.hpp"
#include "anderson/error.hpp"
#include "anderson/ids.hpp"
#include "anderson/pam.hpp"

using namespace anderson;
using namespace anderson::ids;
namespace dis = anderson::disorder;
using lattice::BoxGeometry;

namespace {

std::vector<double> grid(double lo, double hi, std::size_t n) {
    std::vector<double> g;
    for (std::size_t i = 0; i < n; ++i) g.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
    return g;
}

}  // namespace

TEST_CASE("energy grid") {
    const auto g = make_energy_grid(0.5, 1e-3, 0.2, 3.0, 5, 4);
    REQUIRE(g.size() == 9);
    CHECK(g.front() == doctest::Approx(0.501));
    CHECK(g[4] == doctest::Approx(0.7));
    CHECK(g.back() == doctest::Approx(3.0));
    CHECK(std::is_sorted(g.begin(), g.end()));
    CHECK(g[2] - 0.5 == doctest::Approx(std::sqrt(1e-3 * 0.2)));
    CHECK_THROWS_AS(make_energy_grid(0.0, 0.2, 0.1, 1.0, 5, 5), DomainError);
}

TEST_CASE("counting function") {
    const BoxGeometry three(1, 3);
    const std::vector<double> e{-0.5, 0.6, 1.9, 2.0, 3.0, 3.5};
    const auto c = empirical_ids(dis::point_mass(0.0), three, e, 2, 0);
    CHECK(c.N[0] == 0.0);
    CHECK(c.N[1] == doctest::Approx(1.0 / 3.0));
    CHECK(c.N[3] == doctest::Approx(2.0 / 3.0));
    CHECK(c.N[5] == 1.0);
    CHECK(c.se[3] == 0.0);

    for (const auto& spec : {dis::uniform01(), dis::exponential(1.0), dis::bernoulli(0.5, 2.0)}) {
        const BoxGeometry g(2, 6);
        const auto es = grid(-1.0, 8.0 + 12.0, 60);
        const auto curve = empirical_ids(spec, g, es, 15, 9);
        CAPTURE(spec.id());
        for (std::size_t i = 0; i < es.size(); ++i) {
            CHECK(curve.N[i] >= 0.0);
            CHECK(curve.N[i] <= 1.0);
            if (es[i] < 0.0) CHECK(curve.N[i] == 0.0);
            if (i > 0) CHECK(curve.N[i] >= curve.N[i - 1]);
        }
        // Grid top above 4d + max V.
        CHECK(curve.N.back() == 1.0);
    }
    CHECK_THROWS_AS(empirical_ids(dis::uniform01(), BoxGeometry(1, 10), grid(0, 1, 3), 2, 0, 1, 5), CapExceeded);
}

TEST_CASE("Laplace transform of the IDS") {
    const BoxGeometry three(1, 3);
    const std::vector<double> e{1.0};
    const auto c = empirical_ids(dis::point_mass(0.0), three, e, 2, 0);
    CHECK(laplace_of_ids(c, 0.0) == 1.0);
    CHECK(laplace_of_ids(c, 1.0) == pam::annealed_heat_trace(dis::point_mass(0.0), three, 1.0, 2, 0).mean);

    const BoxGeometry g(1, 40);
    const auto curve = empirical_ids(dis::uniform01(), g, grid(0, 5, 10), 12, 17);
    for (double t : {0.3, 1.0, 6.0}) CHECK(laplace_of_ids(curve, t) == pam::annealed_heat_trace(dis::uniform01(), g, t, 12, 17).mean);
    double previous = 2.0;
    std::vector<double> logs;
    for (double t = 0.0; t <= 20.0; t += 0.5) {
        const double v = laplace_of_ids(curve, t);
        CHECK(v <= previous);
        previous = v;
        logs.push_back(std::log(v));
    }
    for (std::size_t i = 1; i + 1 < logs.size(); ++i) CHECK(logs[i - 1] + logs[i + 1] - 2.0 * logs[i] >= -1e-12);

    IdsCurve bare = curve;
    bare.spectra.clear();
    CHECK_THROWS_AS(laplace_of_ids(bare, 1.0), DomainError);
}

TEST_CASE("finite-size nesting") {
    // At fixed E the counting function settles as the box grows in d = 1.
    const std::vector<double> es{0.5, 1.0, 2.0, 3.0};
    std::vector<std::vector<double>> curves;
    for (std::int64_t n : {50, 200, 800}) curves.push_back(empirical_ids(dis::uniform01(), BoxGeometry(1, n), es, 40, 3).N);
    const auto reference = empirical_ids(dis::uniform01(), BoxGeometry(1, 1600), es, 40, 3).N;
    double previous = 1e300;
    for (const auto& c : curves) {
        double gap = 0.0;
        for (std::size_t i = 0; i < es.size(); ++i) gap = std::max(gap, std::abs(c[i] - reference[i]));
        CHECK(gap < previous);
        previous = gap;
    }
}

TEST_CASE("Lifshitz slope fit") {
    const auto es = make_energy_grid(0.0, 1e-3, 0.2, 0.5, 60, 10);
    std::vector<double> n;
    for (double e : es) n.push_back(std::exp(-std::pow(e, -0.5)));
    const auto f = lifshitz_fit(es, n, {0.0, 1.0});
    CHECK(f.slope == doctest::Approx(-0.5).epsilon(1e-6));
    CHECK(f.stderr_slope < 1e-8);

    // log N = E^{-1/2} log E: the local slope is -1/2 - 1/log(1/E), below -1/2 and approaching it as E -> 0.
    std::vector<double> nb;
    for (double e : es) nb.push_back(std::exp(std::pow(e, -0.5) * std::log(e)));
    double previous = -1e300;
    for (double hi : {0.3, 0.03, 3e-3}) {
        const auto g = lifshitz_fit(es, nb, {hi / 10.0, hi});
        CAPTURE(hi);
        CHECK(g.slope < -0.5);
        CHECK(g.slope > previous);
        previous = g.slope;
    }
    CHECK_THROWS_AS(lifshitz_fit(es, n, {2.0, 3.0}), DomainError);
}

TEST_CASE("logarithmic correction diagnostic") {
    const auto es = make_energy_grid(0.0, 1e-3, 0.3, 0.9, 40, 5);
    std::vector<double> na, nb;
    for (double e : es) {
        na.push_back(std::exp(-2.0 * std::pow(e, -0.5)));
        nb.push_back(std::exp(1.5 * std::pow(e, -0.5) * std::log(e)));
    }
    const auto b = log_correction_diagnostic(es, nb, 1, {0.0, 0.9});
    CHECK(b.preferred == 'B');
    CHECK(b.residual_b < 0.5 * b.residual_a);
    CHECK(b.c_b == doctest::Approx(1.5));
    const auto a = log_correction_diagnostic(es, na, 1, {0.0, 0.9});
    CHECK(a.preferred == 'A');
    CHECK(a.c_a == doctest::Approx(-2.0));

    // d = 2 exponent.
    std::vector<double> n2;
    for (double e : es) n2.push_back(std::exp(-0.7 / e));
    CHECK(log_correction_diagnostic(es, n2, 2, {0.0, 0.9}).c_a == doctest::Approx(-0.7));
}

TEST_CASE("pipeline window and bootstrap") {
    const BoxGeometry g(1, 400);
    const auto es = make_energy_grid(0.0, 1e-3, 0.5, 5.0, 120, 20);
    const auto curve = empirical_ids(dis::uniform01(), g, es, 40, 11);
    const auto w = resolution_window(curve);
    CHECK(w.lo > 0.0);
    CHECK(w.hi > w.lo);
    const auto f = lifshitz_fit(curve, w);
    CHECK(f.points >= 3);
    CHECK(f.slope < 0.0);
    const double frac = bootstrap_log_correction(curve, w, 20, 5);
    CHECK(frac >= 0.0);
    CHECK(frac <= 1.0);
    CHECK(frac == bootstrap_log_correction(curve, w, 20, 5));

    std::ostringstream out;
    write_csv(curve, out, {"version=test"});
    const auto text = out.str();
    CHECK(text.rfind("# version=test\n", 0) == 0);
    CHECK(text.find("\nE,N,se\n") != std::string::npos);
}
