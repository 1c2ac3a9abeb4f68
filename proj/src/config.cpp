#include "anderson/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "anderson/disorder.hpp"
#include "anderson/error.hpp"

namespace anderson::cli {

namespace {

namespace pt = boost::property_tree;

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <class T>
std::optional<T> parse_number(const std::string& raw) {
    const auto s = trim(raw);
    T value{};
    const auto* end = s.data() + s.size();
    const auto [p, ec] = std::from_chars(s.data(), end, value);
    if (ec != std::errc() || p != end || s.empty()) return std::nullopt;
    return value;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',' || c == ' ' || c == '\t') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

class Reader {
public:
    explicit Reader(const std::map<std::string, std::string>& e, std::vector<std::string>& errors)
        : entries_(e), errors_(errors) {}

    const std::string* raw(const std::string& key) const {
        const auto it = entries_.find(key);
        return it == entries_.end() ? nullptr : &it->second;
    }

    template <class T>
    void number(const std::string& key, T& out) {
        if (const auto* r = raw(key)) {
            if (auto v = parse_number<T>(*r)) out = *v;
            else errors_.push_back(key + ": cannot parse '" + *r + "' as a number");
        }
    }

    template <class T>
    void number(const std::string& key, std::optional<T>& out) {
        T v{};
        if (raw(key)) {
            number(key, v);
            if (parse_number<T>(*raw(key))) out = v;
        }
    }

    void text(const std::string& key, std::string& out) {
        if (const auto* r = raw(key)) out = trim(*r);
    }

    std::vector<double> list(const std::string& key) {
        std::vector<double> out;
        if (const auto* r = raw(key)) {
            for (const auto& item : split_list(*r)) {
                if (auto v = parse_number<double>(item)) out.push_back(*v);
                else errors_.push_back(key + ": cannot parse '" + item + "' as a number");
            }
        }
        return out;
    }

    /// lo, hi, count; log-spaced when `log` is set.
    std::vector<double> range(const std::string& key, bool log) {
        std::vector<double> out;
        if (!raw(key)) return out;
        const auto v = list(key);
        if (v.size() != 3 || v[2] < 1 || v[2] != std::floor(v[2])) {
            errors_.push_back(key + ": expected 'lo, hi, count' with an integer count >= 1");
            return out;
        }
        if (log && !(v[0] > 0.0 && v[1] > 0.0)) {
            errors_.push_back(key + ": log range needs positive endpoints");
            return out;
        }
        const auto count = static_cast<std::size_t>(v[2]);
        for (std::size_t i = 0; i < count; ++i) {
            const double f = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
            out.push_back(log ? std::exp(std::log(v[0]) + f * (std::log(v[1]) - std::log(v[0]))) : v[0] + f * (v[1] - v[0]));
        }
        return out;
    }

    std::vector<double> grid(const std::string& name) {
        const std::string keys[] = {"grid." + name, "grid." + name + "_log", "grid." + name + "_lin"};
        int present = 0;
        for (const auto& k : keys) present += raw(k) != nullptr;
        if (present > 1) errors_.push_back("grid." + name + ": give exactly one of " + name + ", " + name + "_log, " + name + "_lin");
        if (raw(keys[0])) return list(keys[0]);
        if (raw(keys[1])) return range(keys[1], true);
        return range(keys[2], false);
    }

private:
    const std::map<std::string, std::string>& entries_;
    std::vector<std::string>& errors_;
};

void flatten(const pt::ptree& tree, const std::string& prefix, std::map<std::string, std::string>& out) {
    for (const auto& [key, child] : tree) {
        const std::string name = prefix.empty() ? key : prefix + "." + key;
        if (child.empty()) out[name] = trim(child.data());
        else flatten(child, name, out);
    }
}

ExperimentConfig from_entries(std::map<std::string, std::string> entries, std::vector<std::string> errors) {
    ExperimentConfig c;
    Reader r(entries, errors);
    r.text("command", c.command);
    r.number("seed", c.seed);
    r.number("workers", c.workers);
    r.text("output", c.output);

    r.number("lattice.d", c.dim);
    if (const auto* n = r.raw("lattice.n"); n && trim(*n) == "auto") c.auto_n = true;
    else r.number("lattice.n", c.n);
    r.number("lattice.dense_cap", c.dense_cap);

    r.text("spec.family", c.family);
    for (const auto& [key, value] : entries) {
        if (key.rfind("spec.", 0) != 0 || key == "spec.family") continue;
        if (auto v = parse_number<double>(value)) c.params.emplace_back(key.substr(5), *v);
        else errors.push_back(key + ": cannot parse '" + value + "' as a number");
    }

    c.t_grid = r.grid("t");
    c.E_grid = r.grid("E");

    r.number("run.n_disorder", c.n_disorder);
    r.number("run.n_paths", c.n_paths);
    r.text("run.method", c.method);
    r.number("run.tol", c.tol);
    r.number("run.eigenvalues", c.eigenvalues);
    r.number("run.max_steps", c.max_steps);

    r.number("variational.c_fk", c.c_fk);
    r.number("variational.ell_max", c.ell_max);
    r.text("variational.mode", c.variational_mode);

    r.number("ids.edge", c.ids_edge);
    r.number("ids.min_offset", c.ids_min_offset);
    r.number("ids.split", c.ids_split);
    r.number("ids.top", c.ids_top);
    r.number("ids.n_log", c.ids_n_log);
    r.number("ids.n_lin", c.ids_n_lin);
    r.number("ids.bootstrap", c.ids_bootstrap);
    r.number("ids.min_counts", c.ids_min_counts);
    r.number("ids.n_max", c.ids_n_max);

    r.number("tauber.C", c.tauber_C);
    r.number("tauber.chi_minus", c.chi_minus);
    r.number("tauber.chi_plus", c.chi_plus);

    r.text("report.bounds", c.report_bounds);
    r.text("report.ids", c.report_ids);

    c.entries = std::move(entries);
    c.parse_errors = std::move(errors);
    return c;
}

bool positive_grid(const std::vector<double>& g) {
    return std::all_of(g.begin(), g.end(), [](double x) { return std::isfinite(x) && x > 0.0; });
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    std::map<std::string, std::string> entries;
    std::vector<std::string> errors;
    try {
        std::istringstream in(text);
        pt::ptree tree;
        pt::ini_parser::read_ini(in, tree);
        flatten(tree, "", entries);
    } catch (const pt::ini_parser_error& e) {
        errors.push_back("config: " + e.message() + " (line " + std::to_string(e.line()) + ")");
    }
    return from_entries(std::move(entries), std::move(errors));
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        ExperimentConfig c;
        c.parse_errors.push_back("config: cannot open '" + path.string() + "'");
        return c;
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

ExperimentConfig with_override(const ExperimentConfig& config, const std::string& key, const std::string& value) {
    auto entries = config.entries;
    entries[key] = value;
    std::vector<std::string> errors;
    for (const auto& e : config.parse_errors)
        if (e.rfind("config:", 0) == 0) errors.push_back(e);
    return from_entries(std::move(entries), std::move(errors));
}

std::vector<std::string> validate(const ExperimentConfig& c) {
    std::vector<std::string> v = c.parse_errors;
    const bool known = std::find(kCommands.begin(), kCommands.end(), c.command) != kCommands.end();
    if (!known) v.push_back("command: must be one of spectrum, pam, ids, bounds, tauber, report (got '" + c.command + "')");
    if (!c.seed && !c.entries.count("seed")) v.push_back("seed: missing (a seed is mandatory)");
    if (c.workers < 1) v.push_back("workers: must be >= 1");
    if (c.output.empty()) v.push_back("output: must not be empty");
    if (!known) return v;

    if (c.command == "report") {
        if (c.report_bounds.empty()) v.push_back("report.bounds: missing path to a bounds CSV");
        else if (!std::filesystem::exists(c.report_bounds)) v.push_back("report.bounds: file '" + c.report_bounds + "' not found");
        if (c.report_ids.empty()) v.push_back("report.ids: missing path to an ids CSV");
        else if (!std::filesystem::exists(c.report_ids)) v.push_back("report.ids: file '" + c.report_ids + "' not found");
        return v;
    }

    if (c.dim < 1 || c.dim > 3) v.push_back("lattice.d: must be 1, 2 or 3");
    const bool needs_box = c.command != "tauber" && !(c.command == "bounds" && c.n_disorder == 0);
    if (needs_box) {
        if (c.auto_n && c.command != "bounds" && c.command != "pam")
            v.push_back("lattice.n: 'auto' is only available for bounds and pam");
        else if (!c.auto_n && !c.n && !c.entries.count("lattice.n")) v.push_back("lattice.n: missing");
        else if (c.n && *c.n < 1) v.push_back("lattice.n: must be >= 1");
    }

    if (c.family.empty()) {
        v.push_back("spec.family: missing");
    } else {
        const auto alpha = std::find_if(c.params.begin(), c.params.end(), [](const auto& p) { return p.first == "alpha"; });
        if (c.family == "weibull_tail" && alpha != c.params.end() && !(alpha->second > 1.0)) {
            v.push_back("spec.alpha: α must exceed 1");
        } else {
            static const std::map<std::string, std::vector<std::string>> known{
                {"uniform01", {}},          {"bernoulli", {"p0", "a"}},        {"exponential", {"theta"}},
                {"weibull_tail", {"alpha", "C"}}, {"double_exponential", {"c"}}, {"point_mass", {"v"}}};
            if (const auto it = known.find(c.family); it != known.end())
                for (const auto& [key, value] : c.params)
                    if (std::find(it->second.begin(), it->second.end(), key) == it->second.end())
                        v.push_back("spec." + key + ": not a parameter of " + c.family);
            try {
                disorder::make_spec(c.family, c.params);
            } catch (const DomainError& e) {
                v.push_back(std::string("spec: ") + e.what());
            }
        }
    }

    if (c.command == "pam" || c.command == "bounds") {
        if (c.t_grid.empty()) v.push_back("grid.t: missing or empty");
        else if (!positive_grid(c.t_grid)) v.push_back("grid.t: values must be positive");
    }
    if (c.command == "tauber" && c.E_grid.empty()) v.push_back("grid.E: missing or empty");
    if (c.command == "ids" && !c.E_grid.empty() && !std::is_sorted(c.E_grid.begin(), c.E_grid.end()))
        v.push_back("grid.E: must be ascending");

    if ((c.command == "spectrum" || c.command == "ids") && c.n_disorder < 1) v.push_back("run.n_disorder: must be >= 1");
    if (c.command == "pam" && c.n_disorder < 2) v.push_back("run.n_disorder: must be >= 2 for annealed averages");
    if (c.command == "bounds" && c.n_disorder == 1)
        v.push_back("run.n_disorder: must be 0 (no empirical columns) or >= 2");
    if (c.n_paths < 1) v.push_back("run.n_paths: must be >= 1");
    if (c.method != "integrator" && c.method != "mc") v.push_back("run.method: must be integrator or mc");
    if (!(c.tol > 0.0)) v.push_back("run.tol: must be positive");
    if (c.max_steps < 1) v.push_back("run.max_steps: must be >= 1");

    if (c.c_fk && !(*c.c_fk > 0.0 && *c.c_fk <= 2.0 * c.dim)) v.push_back("variational.c_fk: must lie in (0, 2d]");
    if (c.entries.count("variational.ell_max") && (!c.ell_max || *c.ell_max < 2))
        v.push_back("variational.ell_max: must be an integer >= 2");
    if (c.variational_mode != "exact" && c.variational_mode != "asymptotic")
        v.push_back("variational.mode: must be exact or asymptotic");

    if (c.command == "ids") {
        if (!(c.ids_min_offset > 0.0 && c.ids_split > c.ids_min_offset))
            v.push_back("ids.min_offset: need 0 < min_offset < split");
        if (c.ids_n_log < 2) v.push_back("ids.n_log: must be >= 2");
        if (c.ids_top && !(*c.ids_top > c.ids_edge + c.ids_split)) v.push_back("ids.top: must exceed edge + split");
        if (!(c.ids_n_max > 0.0 && c.ids_n_max < 1.0)) v.push_back("ids.n_max: must lie in (0, 1)");
    }
    if (c.command == "tauber" && !(c.tauber_C > 0.0)) v.push_back("tauber.C: must be positive");
    return v;
}

std::string canonical_text(const ExperimentConfig& c) {
    std::string out;
    for (const auto& [key, value] : c.entries) {
        if (key == "output") continue;
        out += key + " = " + value + "\n";
    }
    return out;
}

}  // namespace anderson::cli
