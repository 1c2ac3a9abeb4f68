#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace anderson::cli {

inline const std::vector<std::string> kCommands{"spectrum", "pam", "ids", "bounds", "tauber", "report"};

/// Parsed experiment file. Every field keeps the value found in the file (or
/// the default); problems met while parsing are kept in `parse_errors` and
/// reported by validate() together with the semantic checks.
struct ExperimentConfig {
    std::string command;
    std::optional<std::uint64_t> seed;
    unsigned workers = 1;
    std::string output = "out";

    int dim = 1;
    std::optional<std::int64_t> n;  ///< nullopt with auto_n: box_schedule at the largest t
    bool auto_n = false;
    std::size_t dense_cap = 4096;

    std::string family;
    std::vector<std::pair<std::string, double>> params;

    std::vector<double> t_grid;
    std::vector<double> E_grid;

    std::size_t n_disorder = 1;
    std::size_t n_paths = 10000;
    std::string method = "integrator";  ///< integrator | mc
    double tol = 1e-10;
    std::size_t eigenvalues = 0;        ///< spectrum: 0 = all
    std::size_t max_steps = 100000;     ///< integrator step budget

    std::optional<double> c_fk;
    std::optional<std::int64_t> ell_max;
    std::string variational_mode = "exact";

    double ids_edge = 0.0;
    double ids_min_offset = 1e-3;
    double ids_split = 0.5;
    std::optional<double> ids_top;
    std::size_t ids_n_log = 200;
    std::size_t ids_n_lin = 50;
    std::size_t ids_bootstrap = 200;
    double ids_min_counts = 10.0;
    double ids_n_max = 1e-2;

    double tauber_C = 1.0;
    double chi_minus = 1.0;
    double chi_plus = 1.0;

    std::string report_bounds;
    std::string report_ids;

    /// Flattened "section.key" -> value, as read (after overrides).
    std::map<std::string, std::string> entries;
    std::vector<std::string> parse_errors;
};

/// Reads the INI-style grammar documented in README.md.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Applies a "section.key" = value override and re-parses.
ExperimentConfig with_override(const ExperimentConfig& config, const std::string& key, const std::string& value);

/// Empty iff the configuration is runnable; each message starts with the
/// offending field.
std::vector<std::string> validate(const ExperimentConfig& config);

/// Sorted key = value lines of every entry except the output directory; the
/// config hash is the SHA-256 of this text.
std::string canonical_text(const ExperimentConfig& config);

}  // namespace anderson::cli
