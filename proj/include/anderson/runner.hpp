#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "anderson/config.hpp"

namespace anderson::cli {

inline constexpr std::string_view kVersion = "0.1.0";

struct StageTime {
    std::string name;
    double seconds = 0.0;
};

struct OutputFile {
    std::string name;    ///< relative to the output directory
    std::string sha256;  ///< of the full file content
};

struct RunManifest {
    std::string command;
    std::string version;
    std::string config_hash;
    std::string config_echo;  ///< canonical_text of the configuration
    std::uint64_t seed = 0;
    unsigned workers = 1;
    std::vector<StageTime> stages;
    std::vector<OutputFile> outputs;
};

/// Lower-case hex SHA-256.
std::string sha256_hex(std::string_view data);

/// Runs a validated configuration, writes `<command>*.csv` and manifest.json
/// into `out_dir` and returns the manifest. Throws DomainError when the
/// configuration does not validate; numerical failures propagate.
RunManifest run(const ExperimentConfig& config, const std::filesystem::path& out_dir);

std::string manifest_json(const RunManifest& manifest);

}  // namespace anderson::cli
