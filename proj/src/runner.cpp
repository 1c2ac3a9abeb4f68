#include "anderson/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <sstream>

#include <json.hpp>
#include <openssl/evp.h>

#include "anderson/disorder.hpp"
#include "anderson/error.hpp"
#include "anderson/ids.hpp"
#include "anderson/lattice.hpp"
#include "anderson/pam.hpp"
#include "anderson/random.hpp"
#include "anderson/tauber.hpp"
#include "anderson/variational.hpp"

namespace anderson::cli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::uint64_t kBootstrapSalt = 0xb0075742a9d1e3c5ULL;

std::string num(double x) {
    std::ostringstream s;
    s << std::setprecision(17) << x;
    return s.str();
}

std::string boundary_name(tauber::Boundary b) {
    switch (b) {
        case tauber::Boundary::interior: return "interior";
        case tauber::Boundary::at_zero: return "at_zero";
        case tauber::Boundary::at_infinity: return "at_infinity";
    }
    return "unknown";
}

// A bracket that never closed towards t -> infinity means the infimum is -inf.
double legendre_value(const tauber::LegendreResult& r) {
    return r.boundary == tauber::Boundary::at_infinity ? -std::numeric_limits<double>::infinity() : r.value;
}

std::vector<double> sorted_unique(std::vector<double> g) {
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());
    return g;
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

Table read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("report: cannot open '" + path.string() + "'");
    Table t;
    std::string line;
    auto split = [](const std::string& l) {
        std::vector<std::string> cells;
        std::stringstream ss(l);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        return cells;
    };
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (t.header.empty()) t.header = split(line);
        else t.rows.push_back(split(line));
    }
    return t;
}

std::size_t column(const Table& t, const std::string& name, const std::filesystem::path& path) {
    const auto it = std::find(t.header.begin(), t.header.end(), name);
    if (it == t.header.end()) throw DomainError("report: '" + path.string() + "' has no column '" + name + "'");
    return static_cast<std::size_t>(it - t.header.begin());
}

class Run {
public:
    Run(const ExperimentConfig& c, std::filesystem::path out) : c_(c), out_(std::move(out)) {
        m_.command = c.command;
        m_.version = std::string(kVersion);
        m_.config_echo = canonical_text(c);
        m_.config_hash = sha256_hex(m_.config_echo);
        m_.seed = c.seed.value_or(0);
        m_.workers = c.workers;
    }

    RunManifest execute() {
        std::filesystem::create_directories(out_);
        if (c_.command == "spectrum") spectrum();
        else if (c_.command == "pam") pam();
        else if (c_.command == "ids") ids();
        else if (c_.command == "bounds") bounds();
        else if (c_.command == "tauber") tauber();
        else report();
        write_file("manifest.json", manifest_json(m_), false);
        return m_;
    }

private:
    disorder::DistributionSpec spec() const { return disorder::make_spec(c_.family, c_.params); }

    variational::VariationalParams params() const {
        auto p = variational::VariationalParams::defaults(c_.dim);
        if (c_.c_fk) p.c_fk = *c_.c_fk;
        if (c_.ell_max) p.ell_max = *c_.ell_max;
        p.mode = c_.variational_mode == "asymptotic" ? variational::Mode::asymptotic : variational::Mode::exact;
        return p;
    }

    lattice::BoxGeometry geometry(const std::vector<double>& ts) const {
        if (!c_.auto_n) return lattice::BoxGeometry(c_.dim, *c_.n);
        const variational::VariationalProblem problem(spec(), params());
        return lattice::BoxGeometry(c_.dim, problem.box_schedule(ts.back()).l);
    }

    std::string header(const std::vector<std::string>& extra = {}) const {
        std::string h = "# toolkit_version=" + m_.version + "\n# config_hash=" + m_.config_hash +
                        "\n# command=" + c_.command + "\n# seed=" + std::to_string(m_.seed) + "\n";
        for (const auto& e : extra) h += "# " + e + "\n";
        return h;
    }

    template <class F>
    void stage(const std::string& name, F&& f) {
        const auto start = std::chrono::steady_clock::now();
        f();
        const std::chrono::duration<double> d = std::chrono::steady_clock::now() - start;
        m_.stages.push_back({name, d.count()});
    }

    void write_file(const std::string& name, const std::string& content, bool record = true) {
        std::ofstream f(out_ / name, std::ios::binary);
        if (!f) throw Error("cannot write '" + (out_ / name).string() + "'");
        f << content;
        if (record) m_.outputs.push_back({name, sha256_hex(content)});
    }

    void spectrum() {
        const auto s = spec();
        const lattice::BoxGeometry g(c_.dim, *c_.n);
        std::vector<std::vector<double>> spectra(c_.n_disorder);
        stage("spectrum", [&] {
            for (std::size_t i = 0; i < c_.n_disorder; ++i) {
                const auto h = lattice::build_hamiltonian(g, disorder::sample_potential(s, g, stream_seed(*c_.seed, i)));
                if (c_.eigenvalues == 0 || c_.eigenvalues >= g.size())
                    spectra[i] = lattice::full_spectrum(h, false, c_.dense_cap).eigenvalues;
                else
                    spectra[i] = lattice::smallest_eigenvalues(h, c_.eigenvalues, std::max(c_.tol, 1e-12)).eigenvalues;
            }
        });
        std::string out = header({"spec=" + s.id(), "geometry=d" + std::to_string(c_.dim) + "_n" + std::to_string(*c_.n)});
        out += "realization,index,eigenvalue\n";
        for (std::size_t i = 0; i < spectra.size(); ++i)
            for (std::size_t k = 0; k < spectra[i].size(); ++k)
                out += std::to_string(i) + "," + std::to_string(k) + "," + num(spectra[i][k]) + "\n";
        write_file("spectrum.csv", out);
    }

    void pam() {
        const auto s = spec();
        const auto ts = sorted_unique(c_.t_grid);
        const auto g = geometry(ts);
        std::vector<double> quenched(ts.size());
        std::vector<pam::AnnealedEstimate> annealed;
        stage("quenched", [&] {
            const auto h = lattice::build_hamiltonian(g, disorder::sample_potential(s, g, stream_seed(*c_.seed, 0)));
            std::vector<double> u(g.size(), 1.0);
            double prev = 0.0;
            for (std::size_t k = 0; k < ts.size(); ++k) {
                u = pam::solve_pam(h, ts[k] - prev, c_.tol, u, pam::PamOptions{.max_steps = c_.max_steps}).u;
                prev = ts[k];
                quenched[k] = u[g.center()];
            }
        });
        stage("annealed", [&] {
            if (c_.method == "integrator") {
                annealed = pam::annealed_moment(s, g, ts, c_.n_disorder, *c_.seed, c_.tol, c_.workers);
            } else {
                pam::AnnealedOptions o;
                o.method = pam::Method::mc;
                o.n_paths = c_.n_paths;
                o.tol = c_.tol;
                o.workers = c_.workers;
                for (double t : ts) annealed.push_back(pam::annealed_moment(s, g, t, c_.n_disorder, *c_.seed, o));
            }
        });
        std::string out = header({"spec=" + s.id(), "geometry=d" + std::to_string(c_.dim) + "_n" + std::to_string(g.side()),
                                  "method=" + c_.method, "n_disorder=" + std::to_string(c_.n_disorder)});
        out += "t,u_quenched,annealed_mean,annealed_se,log_annealed\n";
        for (std::size_t k = 0; k < ts.size(); ++k)
            out += num(ts[k]) + "," + num(quenched[k]) + "," + num(annealed[k].mean) + "," + num(annealed[k].se) + "," +
                   num(std::log(annealed[k].mean)) + "\n";
        write_file("pam.csv", out);
    }

    void ids() {
        const auto s = spec();
        const lattice::BoxGeometry g(c_.dim, *c_.n);
        std::vector<double> grid = c_.E_grid;
        if (grid.empty()) {
            const double top = c_.ids_top.value_or(std::max(4.0 * c_.dim + disorder::quantile(s, 1.0 - 1e-12),
                                                            c_.ids_edge + 2.0 * c_.ids_split));
            grid = ids::make_energy_grid(c_.ids_edge, c_.ids_min_offset, c_.ids_split, top, c_.ids_n_log, c_.ids_n_lin);
        }
        ids::IdsCurve curve;
        stage("spectra", [&] { curve = ids::empirical_ids(s, g, grid, c_.n_disorder, *c_.seed, c_.workers, c_.dense_cap); });
        std::ostringstream csv;
        csv << header();
        ids::write_csv(curve, csv);
        write_file("ids.csv", csv.str());

        std::string fit = header({"spec=" + s.id()});
        stage("fit", [&] {
            try {
                const auto w = ids::resolution_window(curve, c_.ids_min_counts, c_.ids_n_max);
                const auto f = ids::lifshitz_fit(curve, w);
                const auto lc = ids::log_correction_diagnostic(curve, w);
                const double frac =
                    ids::bootstrap_log_correction(curve, w, c_.ids_bootstrap, stream_seed(*c_.seed, kBootstrapSalt));
                fit += "window_lo,window_hi,points,slope,stderr_slope,c_a,c_b,residual_a,residual_b,preferred,bootstrap_b_fraction\n";
                fit += num(w.lo) + "," + num(w.hi) + "," + std::to_string(f.points) + "," + num(f.slope) + "," +
                       num(f.stderr_slope) + "," + num(lc.c_a) + "," + num(lc.c_b) + "," + num(lc.residual_a) + "," +
                       num(lc.residual_b) + "," + std::string(1, lc.preferred) + "," + num(frac) + "\n";
            } catch (const DomainError& e) {
                fit += std::string("# fit unavailable: ") + e.what() + "\n";
            }
        });
        write_file("ids_fit.csv", fit);
    }

    void bounds() {
        const auto s = spec();
        const auto ts = sorted_unique(c_.t_grid);
        const variational::VariationalProblem problem(s, params());
        std::vector<variational::BoundsReport> reports;
        stage("variational", [&] {
            for (double t : ts) reports.push_back(problem.sandwich_bounds(t));
        });
        std::vector<pam::AnnealedEstimate> trace, moment;
        std::vector<std::string> meta{"spec=" + s.id(), "d=" + std::to_string(c_.dim), "c_fk=" + num(problem.params().c_fk),
                                      "mode=" + c_.variational_mode};
        if (c_.n_disorder > 0) {
            const auto g = geometry(ts);
            meta.push_back("geometry=d" + std::to_string(c_.dim) + "_n" + std::to_string(g.side()));
            meta.push_back("n_disorder=" + std::to_string(c_.n_disorder));
            stage("heat_trace", [&] { trace = pam::annealed_heat_trace(s, g, ts, c_.n_disorder, *c_.seed, c_.workers); });
            stage("moment", [&] { moment = pam::annealed_moment(s, g, ts, c_.n_disorder, *c_.seed, c_.tol, c_.workers); });
        }
        std::string out = header(meta);
        out += "t,G,inf_chi_minus,argmin_minus,inf_chi_plus,argmin_plus,lower,upper,log_Nhat_emp,log_u_emp,se,regime\n";
        for (std::size_t k = 0; k < ts.size(); ++k) {
            const auto& r = reports[k];
            const double ln = trace.empty() ? kNaN : std::log(trace[k].mean);
            const double lu = moment.empty() ? kNaN : std::log(moment[k].mean);
            const double se = moment.empty() ? kNaN : moment[k].se / moment[k].mean;
            out += num(r.t) + "," + num(r.G) + "," + num(r.chi_minus.value) + "," + std::to_string(r.chi_minus.argmin) + "," +
                   num(r.chi_plus.value) + "," + std::to_string(r.chi_plus.argmin) + "," + num(r.lower) + "," +
                   num(r.upper) + "," + num(ln) + "," + num(lu) + "," + num(se) + "," + r.regime + "\n";
        }
        write_file("bounds.csv", out);
    }

    void tauber() {
        const auto s = spec();
        const auto m = disorder::rv_metadata(s);
        const bool quantum = !m.degenerate && m.rho >= -1.0 && m.rho < 0.0;
        std::string out = header({"spec=" + s.id(), "d=" + std::to_string(c_.dim), "C=" + num(c_.tauber_C),
                                  "chi_minus=" + num(c_.chi_minus), "chi_plus=" + num(c_.chi_plus)});
        out += "E,I,t_star,boundary,shifted_lower,shifted_upper,envelope_t_star,envelope\n";
        stage("legendre", [&] {
            for (double E : c_.E_grid) {
                const auto r = tauber::rate_function(s, E);
                const auto b = tauber::shifted_rate_bounds(s, E, c_.chi_minus, c_.chi_plus, c_.dim, c_.tauber_C);
                double et = kNaN, env = kNaN;
                if (quantum && E > 0.0) {
                    try {
                        const auto l = tauber::lifshitz_envelope(m, E, c_.dim, c_.tauber_C);
                        et = l.t_star;
                        env = l.envelope;
                    } catch (const DomainError&) {
                    }
                }
                const double lower = b.C * legendre_value(b.at_minus), upper = legendre_value(b.at_plus);
                out += num(E) + "," + num(legendre_value(r)) + "," + num(r.t_star) + "," + boundary_name(r.boundary) + "," +
                       num(lower) + "," + num(upper) + "," + num(et) + "," + num(env) + "\n";
            }
        });
        write_file("tauber.csv", out);
    }

    void report() {
        const std::filesystem::path bp = c_.report_bounds, ip = c_.report_ids;
        const auto b = read_csv(bp);
        const auto i = read_csv(ip);
        const auto ce = column(i, "E", ip), cn = column(i, "N", ip);
        std::vector<double> E, N;
        for (const auto& row : i.rows) {
            E.push_back(std::stod(row.at(ce)));
            N.push_back(std::stod(row.at(cn)));
        }
        auto slurp = [](const std::filesystem::path& p) {
            std::ifstream f(p, std::ios::binary);
            std::stringstream ss;
            ss << f.rdbuf();
            return ss.str();
        };
        std::string out = header({"bounds_sha256=" + sha256_hex(slurp(bp)), "ids_sha256=" + sha256_hex(slurp(ip)),
                                  "log_Nhat_ids=log sum_j exp(-t E_j) (N_j - N_{j-1}) over the ids grid"});
        out += "t,lower,upper,log_Nhat_emp,log_u_emp,log_Nhat_ids,regime\n";
        stage("merge", [&] {
            const std::size_t ct = column(b, "t", bp), cl = column(b, "lower", bp), cu = column(b, "upper", bp),
                              cN = column(b, "log_Nhat_emp", bp), cU = column(b, "log_u_emp", bp),
                              cr = column(b, "regime", bp);
            for (const auto& row : b.rows) {
                const double t = std::stod(row.at(ct));
                double sum = 0.0, prev = 0.0;
                for (std::size_t j = 0; j < E.size(); ++j) {
                    sum += std::exp(-t * E[j]) * (N[j] - prev);
                    prev = N[j];
                }
                out += row.at(ct) + "," + row.at(cl) + "," + row.at(cu) + "," + row.at(cN) + "," + row.at(cU) + "," +
                       num(std::log(sum)) + "," + row.at(cr) + "\n";
            }
        });
        write_file("report.csv", out);
    }

    const ExperimentConfig& c_;
    std::filesystem::path out_;
    RunManifest m_;
};

}  // namespace

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw Error("sha256: digest failed");
    std::ostringstream s;
    for (unsigned int i = 0; i < len; ++i) s << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    return s.str();
}

RunManifest run(const ExperimentConfig& config, const std::filesystem::path& out_dir) {
    const auto violations = validate(config);
    if (!violations.empty()) {
        std::string msg = "invalid configuration:";
        for (const auto& v : violations) msg += "\n  " + v;
        throw DomainError(msg);
    }
    return Run(config, out_dir).execute();
}

std::string manifest_json(const RunManifest& m) {
    nlohmann::ordered_json j;
    j["command"] = m.command;
    j["toolkit_version"] = m.version;
    j["config_hash"] = m.config_hash;
    j["config"] = m.config_echo;
    j["seed"] = m.seed;
    j["workers"] = m.workers;
    j["stages"] = nlohmann::ordered_json::array();
    for (const auto& s : m.stages) j["stages"].push_back({{"name", s.name}, {"wall_seconds", s.seconds}});
    j["outputs"] = nlohmann::ordered_json::array();
    for (const auto& o : m.outputs) j["outputs"].push_back({{"file", o.name}, {"sha256", o.sha256}});
    return j.dump(2) + "\n";
}

}  // namespace anderson::cli
