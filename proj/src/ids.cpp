#include "anderson/ids.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "anderson/error.hpp"
#include "anderson/pam.hpp"
#include "anderson/parallel.hpp"
#include "anderson/random.hpp"

namespace anderson::ids {

namespace {

struct Points {
    std::vector<double> e, n;
};

Points filtered(std::span<const double> energy, std::span<const double> n, Window window, double floor) {
    if (energy.size() != n.size()) throw DomainError("ids fit: energy and N sizes differ");
    Points p;
    for (std::size_t i = 0; i < energy.size(); ++i) {
        if (energy[i] < window.lo || energy[i] > window.hi) continue;
        if (!(energy[i] > 0.0) || !(n[i] > 0.0) || !(n[i] < 1.0) || n[i] < 0.1 * floor) continue;
        p.e.push_back(energy[i]);
        p.n.push_back(n[i]);
    }
    if (p.e.size() < 3) throw DomainError("ids fit: fewer than three usable points in the window");
    return p;
}

std::vector<double> counting_curve(std::span<const double> grid, const std::vector<std::vector<double>>& spectra,
                                   std::span<const std::size_t> pick, std::vector<double>* se) {
    const double volume = static_cast<double>(spectra.front().size());
    const double m = static_cast<double>(pick.size());
    std::vector<double> mean(grid.size(), 0.0), sq(grid.size(), 0.0);
    for (auto r : pick) {
        const auto& s = spectra[r];
        for (std::size_t j = 0; j < grid.size(); ++j) {
            const double f = static_cast<double>(std::upper_bound(s.begin(), s.end(), grid[j]) - s.begin()) / volume;
            mean[j] += f;
            sq[j] += f * f;
        }
    }
    for (std::size_t j = 0; j < grid.size(); ++j) {
        mean[j] /= m;
        if (se) {
            const double var = pick.size() > 1 ? std::max(0.0, (sq[j] - m * mean[j] * mean[j]) / (m - 1.0)) : 0.0;
            (*se)[j] = std::sqrt(var / m);
        }
    }
    return mean;
}

std::vector<std::size_t> all_indices(std::size_t n) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    return idx;
}

}  // namespace

std::vector<double> make_energy_grid(double edge, double min_offset, double split, double top, std::size_t n_log,
                                     std::size_t n_lin) {
    if (!(min_offset > 0.0) || !(split > min_offset) || !(top > edge + split))
        throw DomainError("make_energy_grid: need 0 < min_offset < split and top > edge + split");
    if (n_log < 2) throw DomainError("make_energy_grid: n_log must be >= 2");
    std::vector<double> grid;
    const double a = std::log(min_offset), b = std::log(split);
    for (std::size_t i = 0; i < n_log; ++i)
        grid.push_back(edge + std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n_log - 1)));
    for (std::size_t i = 1; i <= n_lin; ++i)
        grid.push_back(edge + split + (top - edge - split) * static_cast<double>(i) / static_cast<double>(n_lin));
    return grid;
}

IdsCurve ids_from_spectra(std::span<const double> energy_grid, std::vector<std::vector<double>> spectra,
                          const lattice::BoxGeometry& geometry, std::string spec_id, std::uint64_t seed) {
    if (energy_grid.empty()) throw DomainError("empirical_ids: empty energy grid");
    if (!std::is_sorted(energy_grid.begin(), energy_grid.end()))
        throw DomainError("empirical_ids: energy grid must be ascending");
    if (spectra.empty()) throw DomainError("empirical_ids: no realizations");
    for (auto& s : spectra) {
        if (s.size() != geometry.size()) throw DomainError("empirical_ids: spectrum size does not match the box");
        std::sort(s.begin(), s.end());
    }
    IdsCurve c;
    c.energy.assign(energy_grid.begin(), energy_grid.end());
    c.se.assign(energy_grid.size(), 0.0);
    const auto idx = all_indices(spectra.size());
    c.N = counting_curve(energy_grid, spectra, idx, &c.se);
    c.n_disorder = spectra.size();
    c.geometry = geometry;
    c.spec_id = std::move(spec_id);
    c.seed = seed;
    c.spectra = std::move(spectra);
    return c;
}

IdsCurve empirical_ids(const disorder::DistributionSpec& spec, const lattice::BoxGeometry& geometry,
                       std::span<const double> energy_grid, std::size_t n_disorder, std::uint64_t seed,
                       unsigned workers, std::size_t cap) {
    if (n_disorder < 1) throw DomainError("empirical_ids: n_disorder must be >= 1");
    if (geometry.size() > cap) throw CapExceeded("empirical_ids: box exceeds the dense spectrum cap");
    std::vector<std::vector<double>> spectra(n_disorder);
    parallel_for(n_disorder, workers, [&](std::size_t i) {
        const auto h = lattice::build_hamiltonian(geometry, disorder::sample_potential(spec, geometry, stream_seed(seed, i)));
        spectra[i] = lattice::full_spectrum(h, false, cap).eigenvalues;
    });
    return ids_from_spectra(energy_grid, std::move(spectra), geometry, spec.id(), seed);
}

double laplace_of_ids(const IdsCurve& curve, double t) {
    if (!(t >= 0.0)) throw DomainError("laplace_of_ids: t must be >= 0");
    if (curve.spectra.empty()) throw DomainError("laplace_of_ids: curve does not retain eigenvalues");
    std::vector<double> traces;
    traces.reserve(curve.spectra.size());
    for (const auto& s : curve.spectra) traces.push_back(pam::heat_trace(s, t));
    return pam::mean_and_se(traces).first;
}

double resolution_floor(const IdsCurve& curve) {
    return 1.0 / (static_cast<double>(curve.geometry.size()) * static_cast<double>(curve.n_disorder));
}

Window resolution_window(const IdsCurve& curve, double min_counts, double n_max) {
    const double need = min_counts * resolution_floor(curve);
    Window w{std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
    for (std::size_t i = 0; i < curve.energy.size(); ++i) {
        if (curve.N[i] >= need && std::isnan(w.lo)) w.lo = curve.energy[i];
        if (curve.N[i] <= n_max) w.hi = curve.energy[i];
    }
    if (std::isnan(w.lo) || std::isnan(w.hi) || !(w.hi > w.lo))
        throw DomainError("resolution_window: no grid energies between the counting floor and N = " +
                          std::to_string(n_max));
    return w;
}

SlopeFit lifshitz_fit(std::span<const double> energy, std::span<const double> n, Window window, double floor) {
    const auto p = filtered(energy, n, window, floor);
    const double m = static_cast<double>(p.e.size());
    double sx = 0.0, sy = 0.0;
    std::vector<double> x(p.e.size()), y(p.e.size());
    for (std::size_t i = 0; i < p.e.size(); ++i) {
        x[i] = std::log(p.e[i]);
        y[i] = std::log(-std::log(p.n[i]));
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / m, my = sy / m;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    SlopeFit f;
    f.points = x.size();
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - f.intercept - f.slope * x[i];
        rss += r * r;
    }
    f.stderr_slope = std::sqrt(rss / (m - 2.0) / sxx);
    return f;
}

SlopeFit lifshitz_fit(const IdsCurve& curve, Window window) {
    return lifshitz_fit(curve.energy, curve.N, window, resolution_floor(curve));
}

LogCorrection log_correction_diagnostic(std::span<const double> energy, std::span<const double> n, int dim,
                                        Window window, double floor) {
    if (dim < 1) throw DomainError("log_correction_diagnostic: dimension must be >= 1");
    const auto p = filtered(energy, n, window, floor);
    auto fit = [&](auto basis, double& c, double& rss) {
        double sxy = 0.0, sxx = 0.0;
        for (std::size_t i = 0; i < p.e.size(); ++i) {
            const double x = basis(p.e[i]);
            sxy += x * std::log(p.n[i]);
            sxx += x * x;
        }
        c = sxy / sxx;
        rss = 0.0;
        for (std::size_t i = 0; i < p.e.size(); ++i) {
            const double r = std::log(p.n[i]) - c * basis(p.e[i]);
            rss += r * r;
        }
    };
    const double half_d = 0.5 * dim;
    LogCorrection r;
    fit([&](double e) { return std::pow(e, -half_d); }, r.c_a, r.residual_a);
    fit([&](double e) { return std::pow(e, -half_d) * std::log(e); }, r.c_b, r.residual_b);
    r.preferred = r.residual_b <= r.residual_a ? 'B' : 'A';
    r.points = p.e.size();
    return r;
}

LogCorrection log_correction_diagnostic(const IdsCurve& curve, Window window) {
    return log_correction_diagnostic(curve.energy, curve.N, curve.geometry.dim(), window, resolution_floor(curve));
}

double bootstrap_log_correction(const IdsCurve& curve, Window window, std::size_t resamples, std::uint64_t seed) {
    if (curve.spectra.empty()) throw DomainError("bootstrap_log_correction: curve does not retain eigenvalues");
    if (resamples < 1) throw DomainError("bootstrap_log_correction: resamples must be >= 1");
    Rng rng(seed);
    std::size_t wins = 0;
    std::vector<std::size_t> pick(curve.spectra.size());
    for (std::size_t b = 0; b < resamples; ++b) {
        for (auto& i : pick) i = rng.below(curve.spectra.size());
        const auto n = counting_curve(curve.energy, curve.spectra, pick, nullptr);
        const auto r = log_correction_diagnostic(curve.energy, n, curve.geometry.dim(), window, resolution_floor(curve));
        if (r.residual_b <= r.residual_a) ++wins;
    }
    return static_cast<double>(wins) / static_cast<double>(resamples);
}

void write_csv(const IdsCurve& curve, std::ostream& out, const std::vector<std::string>& extra_metadata) {
    for (const auto& line : extra_metadata) out << "# " << line << '\n';
    out << "# spec=" << curve.spec_id << '\n';
    out << "# geometry=d" << curve.geometry.dim() << "_n" << curve.geometry.side() << '\n';
    out << "# seed=" << curve.seed << '\n';
    out << "# n_disorder=" << curve.n_disorder << '\n';
    out << "E,N,se\n";
    const auto old = out.precision(17);
    for (std::size_t i = 0; i < curve.energy.size(); ++i)
        out << curve.energy[i] << ',' << curve.N[i] << ',' << curve.se[i] << '\n';
    out.precision(old);
}

}  // namespace anderson::ids
