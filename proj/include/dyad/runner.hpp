#pragma once

#include "dyad/config.hpp"
#include "dyad/util.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace dyad {

inline constexpr const char* kToolVersion = "dyadlab 0.1.0";

struct FileEntry {
    std::string name;
    std::uint64_t bytes = 0;
    std::string digest;  // fnv1a-64, hex
};

struct RunManifest {
    std::string config_hash;
    std::string version;
    std::string started_utc;
    std::string finished_utc;
    std::string termination;
    std::vector<FileEntry> files;
    bool ok = false;
    std::string error;
};

/// Execute one configured run: integrate, apply the enabled analyses, and
/// write trajectory.csv, diagnostics.csv, crossings.csv, report.json,
/// spectra.csv, plot.gp and run_manifest.json under out_dir. CSV bodies are
/// deterministic for a fixed config; timestamps live only in the manifest.
RunManifest run(const RunConfig& config, const std::string& out_dir);

struct SweepResult {
    std::string cell;  // subdirectory name
    std::map<std::string, std::string> overrides;
    RunManifest manifest;
    // headline results for sweep_summary.csv
    std::string termination;
    std::optional<double> t_star;
    int deepest_resolved = -1;
    bool valid_req = false;
    bool valid_bucond = false;
    double energy_drift = 0.0;
};

using SweepGrid = std::vector<std::pair<std::string, std::vector<std::string>>>;

/// Cross-product sweep over config keys. Cells run independently (workers
/// threads), each in its own subdirectory; failures are recorded per cell and
/// the sweep continues. Writes sweep_summary.csv under out_dir.
std::vector<SweepResult> sweep(const RunConfig& templ, const SweepGrid& grid,
                               const std::string& out_dir, int workers);

/// Built-in verification suites (dyadic triads, Obukhov fixed point,
/// constants table). Prints one line per suite; returns 0 on success, 2 on
/// numeric failure.
int check_suites(std::uint64_t rng_seed, std::ostream& out);

}  // namespace dyad
