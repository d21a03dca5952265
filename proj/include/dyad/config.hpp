#pragma once

#include "dyad/blowup.hpp"
#include "dyad/integrator.hpp"
#include "dyad/shell_model.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dyad {

enum class InitialKind { SingleShell, Seed, Powerlaw, Explicit };

struct InitialSpec {
    InitialKind kind = InitialKind::SingleShell;
    int shell = 0;           // single_shell: absolute index
    double amplitude = 1.0;  // single_shell
    int seed_shell = 0;      // seed: J
    double seed_q = 0.5;     // seed: q
    double seed_energy = 0.0;
    double flux = 1.0;       // powerlaw
    std::vector<double> values;  // explicit, amplitudes from j0 upward
};

struct AnalysisSpec {
    std::vector<double> alphas;  // H^alpha norms to track; empty = analysis off
    double mu = 2.0;
    double delta = 1.0;
    std::optional<double> fp_epsilon;  // when set: q = 2^{-3-eps}, rho = 2^{-eps}
    bool cascade = false;
    bool certificate = false;
    bool fit_tstar = false;
    std::optional<int> cascade_start;  // J; defaults to the seed shell / first fit
    std::vector<int> tail_shells;      // extra tail-energy columns in diagnostics.csv

    bool enabled() const {
        return !alphas.empty() || cascade || certificate || fit_tstar;
    }
};

struct OutputSpec {
    std::string dir = "out";
    int stride = 1;  // sample thinning applied when writing CSVs
    std::string formats = "csv";
};

struct RunConfig {
    ModelParams model = ModelParams::generic(2.0, 0, 16);
    InitialSpec initial;
    IntegratorConfig integrator;
    AnalysisSpec analysis;
    OutputSpec output;

    /// Cascade constants implied by the analysis section.
    BlowupConstants constants() const;
    /// Starting shell for the cascade walk: explicit setting, else the seed
    /// shell, else the smallest J whose tail energy already meets q^J.
    /// nullopt when the initial data cannot seed the cascade.
    std::optional<int> cascade_start_shell(const ShellState& initial_state) const;
};

struct ParseError {
    int line;  // 0 = whole-document error
    std::string message;
};

struct ParseResult {
    std::optional<RunConfig> config;
    std::vector<ParseError> errors;

    bool ok() const { return config.has_value() && errors.empty(); }
};

/// Line-oriented `section.key = value` text. Unknown keys and out-of-range
/// values are reported with their line numbers; nothing is silently defaulted.
ParseResult parse_config(const std::string& text);
ParseResult parse_config_file(const std::string& path);

/// Canonical rendering; parse(render(c)) reproduces c.
std::string render_config(const RunConfig& config);

/// Initial state from the config's initial-condition section.
ShellState build_initial_state(const RunConfig& config);

/// Apply a `section.key = value` override (sweep cells); throws
/// std::invalid_argument with the parser's message on bad keys or values.
void apply_override(RunConfig& config, const std::string& key, const std::string& value);

}  // namespace dyad
