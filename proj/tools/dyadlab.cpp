#include "dyad/runner.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

int exit_code_for(const dyad::RunManifest& manifest) {
    if (manifest.ok) return 0;
    return manifest.error.rfind("io: ", 0) == 0 ? 3 : 2;
}

void print_parse_errors(const dyad::ParseResult& parsed) {
    for (const dyad::ParseError& e : parsed.errors) {
        if (e.line > 0)
            std::cerr << "config error (line " << e.line << "): " << e.message << "\n";
        else
            std::cerr << "config error: " << e.message << "\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dyadlab: dyadic shell-model cascade and blow-up laboratory"};
    app.set_version_flag("--version", std::string(dyad::kToolVersion));
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::vector<std::string> grid_specs;
    int workers = 1;
    std::uint64_t seed = 12345;

    CLI::App* cmd_run = app.add_subcommand("run", "execute one configured run");
    cmd_run->add_option("config", config_path, "run configuration file")->required();
    cmd_run->add_option("--out", out_dir, "output directory (overrides output.dir)");

    CLI::App* cmd_sweep = app.add_subcommand("sweep", "cross-product parameter sweep");
    cmd_sweep->add_option("template", config_path, "template configuration file")->required();
    cmd_sweep->add_option("--grid", grid_specs, "grid spec key=v1,v2,... (repeatable)")
        ->required();
    cmd_sweep->add_option("--out", out_dir, "output directory (overrides output.dir)");
    cmd_sweep->add_option("--workers", workers, "parallel cells");

    CLI::App* cmd_check = app.add_subcommand("check", "run the built-in verification suites");
    cmd_check->add_option("--seed", seed, "seed for the randomized property suites");

    CLI11_PARSE(app, argc, argv);

    if (cmd_run->parsed()) {
        const dyad::ParseResult parsed = dyad::parse_config_file(config_path);
        if (!parsed.ok()) {
            print_parse_errors(parsed);
            return 1;
        }
        const dyad::RunManifest manifest =
            dyad::run(*parsed.config, out_dir.empty() ? parsed.config->output.dir : out_dir);
        if (!manifest.ok) {
            std::cerr << manifest.error << "\n";
        } else {
            std::cout << "run complete: termination=" << manifest.termination << ", "
                      << manifest.files.size() << " files\n";
        }
        return exit_code_for(manifest);
    }

    if (cmd_sweep->parsed()) {
        const dyad::ParseResult parsed = dyad::parse_config_file(config_path);
        if (!parsed.ok()) {
            print_parse_errors(parsed);
            return 1;
        }
        dyad::SweepGrid grid;
        for (const std::string& spec : grid_specs) {
            const auto eq = spec.find('=');
            if (eq == std::string::npos || eq == 0) {
                std::cerr << "config error: malformed --grid spec '" << spec
                          << "' (expected key=v1,v2,...)\n";
                return 1;
            }
            const std::string key = dyad::trim(spec.substr(0, eq));
            const std::vector<std::string> values = dyad::split(spec.substr(eq + 1), ',');
            if (values.empty()) {
                std::cerr << "config error: empty value list in --grid spec '" << spec << "'\n";
                return 1;
            }
            grid.emplace_back(key, values);
        }
        const std::string base = out_dir.empty() ? parsed.config->output.dir : out_dir;
        const auto results = dyad::sweep(*parsed.config, grid, base, workers);
        std::size_t ok_cells = 0;
        for (const auto& r : results)
            if (r.manifest.ok) ++ok_cells;
        std::cout << "sweep complete: " << ok_cells << "/" << results.size()
                  << " cells ok, summary in " << base << "/sweep_summary.csv\n";
        if (!results.empty() && ok_cells == 0) return 2;
        return 0;
    }

    if (cmd_check->parsed()) {
        return dyad::check_suites(seed, std::cout);
    }

    return 0;
}
