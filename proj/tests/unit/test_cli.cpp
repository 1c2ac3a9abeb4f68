#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "anderson/config.hpp"
#include "anderson/error.hpp"
#include "anderson/runner.hpp"
#include "anderson/variational.hpp"

using namespace anderson;
using namespace anderson::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("toolkit_cli_" + std::to_string(::getpid())) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
}

bool mentions(const std::vector<std::string>& v, const std::string& what) {
    for (const auto& s : v)
        if (s.find(what) != std::string::npos) return true;
    return false;
}

std::vector<std::vector<double>> rows(const fs::path& csv) {
    std::ifstream in(csv);
    std::string line;
    std::vector<std::vector<double>> out;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            header = true;
            continue;
        }
        std::vector<double> r;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                r.push_back(std::stod(cell));
            } catch (...) {
                r.push_back(std::nan(""));
            }
        }
        out.push_back(r);
    }
    return out;
}

const char* kBounds = R"(seed = 7
[lattice]
d = 1
n = 21
[spec]
family = point_mass
v = 0
[grid]
t = 4, 1, 2
[run]
n_disorder = 2
)";

const char* kIds = R"(seed = 3
[lattice]
d = 1
n = 120
[spec]
family = uniform01
[run]
n_disorder = 6
[ids]
n_log = 40
n_lin = 10
bootstrap = 10
)";

int run_binary(const std::string& args) {
    const char* bin = std::getenv("TOOLKIT_BIN");
    REQUIRE(bin != nullptr);
    const int status = std::system((std::string(bin) + " " + args + " > /dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config parsing") {
    const auto c = parse_config("seed = 5\nworkers = 2\n[lattice]\nd = 2\nn = auto\n[spec]\nfamily = bernoulli\np0 = 0.5\na = 1\n"
                                "[grid]\nt_log = 1, 100, 3\nE = -1, 0 0.5\n");
    CHECK(c.parse_errors.empty());
    CHECK(c.seed == 5u);
    CHECK(c.workers == 2u);
    CHECK(c.dim == 2);
    CHECK(c.auto_n);
    REQUIRE(c.t_grid.size() == 3);
    CHECK(c.t_grid[1] == doctest::Approx(10.0));
    CHECK(c.E_grid == std::vector<double>{-1.0, 0.0, 0.5});
    CHECK(c.params.size() == 2);

    const auto lin = parse_config("[grid]\nt_lin = 1, 3, 3\n");
    CHECK(lin.t_grid == std::vector<double>{1.0, 2.0, 3.0});
    CHECK(mentions(parse_config("[grid]\nt = 1\nt_log = 1, 2, 2\n").parse_errors, "grid.t"));
    CHECK(mentions(parse_config("[grid]\nt_log = 0, 2, 2\n").parse_errors, "grid.t_log"));
    CHECK(mentions(parse_config("seed = abc\n").parse_errors, "seed"));
    CHECK(mentions(parse_config("[lattice\nd = 1\n").parse_errors, "config"));

    // The output directory does not enter the config hash.
    const auto a = parse_config(kBounds);
    CHECK(canonical_text(a) == canonical_text(with_override(a, "output", "elsewhere")));
    CHECK(canonical_text(a) != canonical_text(with_override(a, "seed", "8")));
    CHECK(with_override(a, "seed", "8").seed == 8u);
}

TEST_CASE("validation") {
    auto base = with_override(parse_config(kBounds), "command", "bounds");
    CHECK(validate(base).empty());

    std::string no_seed = kBounds;
    no_seed.replace(no_seed.find("seed = 7\n"), 9, "");
    const auto v = validate(with_override(parse_config(no_seed), "command", "bounds"));
    REQUIRE(v.size() == 1);
    CHECK(v[0].rfind("seed", 0) == 0);

    CHECK(mentions(validate(with_override(base, "variational.ell_max", "0")), "variational.ell_max"));
    auto w = with_override(base, "spec.family", "weibull_tail");
    w = with_override(with_override(w, "spec.alpha", "1"), "spec.C", "1");
    CHECK(mentions(validate(w), "α must exceed 1"));
    CHECK(validate(with_override(w, "spec.alpha", "2")).size() == 1);  // spec.v is not a weibull parameter

    CHECK(mentions(validate(with_override(base, "command", "plot")), "command"));
    CHECK(mentions(validate(with_override(base, "grid.t", "1, -2")), "grid.t"));
    CHECK(mentions(validate(with_override(base, "run.method", "euler")), "run.method"));
    CHECK(mentions(validate(with_override(base, "lattice.d", "4")), "lattice.d"));
    CHECK(mentions(validate(with_override(base, "run.n_disorder", "1")), "run.n_disorder"));
    CHECK(mentions(validate(with_override(base, "variational.c_fk", "3")), "variational.c_fk"));
    CHECK(mentions(validate(with_override(base, "command", "tauber")), "grid.E"));
    const auto r = validate(parse_config("seed = 1\ncommand = report\n[report]\nbounds = /nonexistent/b.csv\n"));
    CHECK(mentions(r, "report.bounds"));
    CHECK(mentions(r, "report.ids"));
    CHECK_THROWS_AS(run(with_override(base, "seed", "x"), scratch("invalid")), DomainError);
}

TEST_CASE("sha256") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("bounds run on the free case") {
    const auto dir = scratch("bounds");
    const auto c = with_override(parse_config(kBounds), "command", "bounds");
    const auto m = run(c, dir);
    REQUIRE(m.outputs.size() == 1);
    CHECK(m.outputs[0].sha256 == sha256_hex(slurp(dir / "bounds.csv")));
    CHECK(m.config_hash == sha256_hex(canonical_text(c)));
    CHECK(fs::exists(dir / "manifest.json"));

    const auto text = slurp(dir / "bounds.csv");
    CHECK(text.rfind("# toolkit_version=" + std::string(kVersion) + "\n# config_hash=" + m.config_hash, 0) == 0);
    CHECK(text.find("\nt,G,inf_chi_minus,argmin_minus,inf_chi_plus,argmin_plus,lower,upper,log_Nhat_emp,log_u_emp,se,regime\n") !=
          std::string::npos);

    const variational::VariationalProblem p(disorder::point_mass(0.0), variational::VariationalParams::defaults(1));
    const double gamma = p.params().gamma();
    const auto table = rows(dir / "bounds.csv");
    REQUIRE(table.size() == 3);
    const double ts[] = {1.0, 2.0, 4.0};
    for (std::size_t k = 0; k < 3; ++k) {
        const double t = ts[k];
        const auto l = static_cast<double>(p.resolved_ell_max(t));
        CHECK(table[k][0] == t);
        CHECK(table[k][1] == 0.0);
        CHECK(table[k][6] == doctest::Approx(-t * 4.0 * std::pow(std::sin(M_PI / (2.0 * (l + 1.0))), 2)).epsilon(1e-12));
        CHECK(table[k][7] == doctest::Approx(-t * gamma * std::pow(std::sin(M_PI / (2.0 * (l + 1.0))), 2)).epsilon(1e-12));
        // Free walk killed on leaving the box: log u <= 0, and log N^ <= 0.
        CHECK(table[k][8] < 0.0);
        CHECK(table[k][9] <= 0.0);
    }
}

TEST_CASE("ids run, tauber run, report") {
    const auto dir = scratch("ids");
    run(with_override(parse_config(kIds), "command", "ids"), dir);
    const auto curve = rows(dir / "ids.csv");
    REQUIRE(curve.size() == 50);
    for (std::size_t i = 1; i < curve.size(); ++i) CHECK(curve[i][1] >= curve[i - 1][1]);
    CHECK(curve.back()[1] == 1.0);
    CHECK(slurp(dir / "ids_fit.csv").rfind("# toolkit_version=", 0) == 0);

    const auto tdir = scratch("tauber");
    const auto tm = run(parse_config("seed = 1\ncommand = tauber\n[spec]\nfamily = uniform01\n[grid]\nE = -1, 0.01, 0.1\n"), tdir);
    const auto tau = rows(tdir / "tauber.csv");
    REQUIRE(tau.size() == 3);
    CHECK(std::isinf(tau[0][1]));
    CHECK(tau[1][1] < tau[2][1]);
    CHECK(tau[2][7] > 0.0);

    const auto bdir = scratch("bounds_for_report");
    run(with_override(parse_config(kBounds), "command", "bounds"), bdir);
    auto rc = parse_config("seed = 1\ncommand = report\n");
    rc = with_override(with_override(rc, "report.bounds", (bdir / "bounds.csv").string()), "report.ids", (dir / "ids.csv").string());
    const auto rdir = scratch("report");
    run(rc, rdir);
    const auto rep = rows(rdir / "report.csv");
    REQUIRE(rep.size() == 3);
    for (const auto& r : rep) CHECK(r[5] < 0.0);
}

TEST_CASE("determinism") {
    auto c = with_override(parse_config(kIds), "command", "ids");
    const auto da = scratch("det_a"), db = scratch("det_b"), dw = scratch("det_w");
    const auto a = run(c, da);
    const auto b = run(c, db);
    REQUIRE(a.outputs.size() == b.outputs.size());
    for (std::size_t i = 0; i < a.outputs.size(); ++i) CHECK(a.outputs[i].sha256 == b.outputs[i].sha256);
    // Results do not depend on the worker count either; only the echoed config differs.
    const auto w = run(with_override(c, "workers", "3"), dw);
    CHECK(rows(da / "ids.csv") == rows(dw / "ids.csv"));
    CHECK(w.config_hash != a.config_hash);
}

TEST_CASE("toolkit binary") {
    const auto dir = scratch("binary");
    {
        std::ofstream(dir / "bounds.ini") << kBounds;
        std::ofstream(dir / "slow.ini") << "seed = 1\n[lattice]\nd = 1\nn = 31\n[spec]\nfamily = uniform01\n[grid]\nt = 50\n"
                                           "[run]\nn_disorder = 2\nmax_steps = 1\n";
        std::string no_seed = kBounds;
        no_seed.replace(no_seed.find("seed = 7\n"), 9, "");
        std::ofstream(dir / "noseed.ini") << no_seed;
    }
    const auto cfg = [&](const char* f) { return (dir / f).string(); };
    CHECK(run_binary("bounds --config " + cfg("bounds.ini") + " --out " + (dir / "o1").string()) == 0);
    CHECK(fs::exists(dir / "o1" / "bounds.csv"));
    CHECK(fs::exists(dir / "o1" / "manifest.json"));
    CHECK(run_binary("bounds --config " + cfg("noseed.ini") + " --out " + (dir / "o2").string()) == 2);
    CHECK(run_binary("bounds --config " + cfg("noseed.ini") + " --seed 7 --out " + (dir / "o3").string()) == 0);
    CHECK(slurp(dir / "o1" / "bounds.csv") == slurp(dir / "o3" / "bounds.csv"));
    CHECK(run_binary("pam --config " + cfg("slow.ini") + " --out " + (dir / "o4").string()) == 3);
    CHECK(run_binary("plot --config " + cfg("bounds.ini")) == 2);
    CHECK(run_binary("bounds --config " + cfg("missing.ini")) == 2);
    CHECK(run_binary("bounds") == 2);
}
