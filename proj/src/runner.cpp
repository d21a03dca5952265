#include "dyad/runner.hpp"

#include "dyad/blowup.hpp"
#include "dyad/burgers.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

namespace dyad {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

std::string iso_utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

FileEntry write_file(const fs::path& dir, const std::string& name,
                     const std::string& content) {
    const fs::path path = dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << content;
    out.flush();
    if (!out) throw IoError("write failed for '" + path.string() + "'");
    return FileEntry{name, content.size(), hex64(fnv1a64(content))};
}

struct RunOutcome {
    RunManifest manifest;
    std::optional<double> t_star;
    std::optional<double> gamma;
    int deepest_resolved = -1;
    bool valid_req = false;
    bool valid_bucond = false;
    double energy_drift = 0.0;
};

std::string trajectory_csv(const Trajectory& traj, int stride) {
    std::ostringstream out;
    out << "t";
    for (int i = 0; i < traj.params.n_shells; ++i) out << ",a_" << (traj.params.j0 + i);
    out << "\n";
    const std::size_t n = traj.samples.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (i % stride != 0 && i != n - 1) continue;
        const Sample& s = traj.samples[i];
        out << format_double(s.t);
        for (int c = 0; c < s.y.size(); ++c) out << "," << format_double(s.y[c]);
        out << "\n";
    }
    return out.str();
}

std::string diagnostics_csv(const Trajectory& traj, const std::vector<int>& tail_shells,
                            const std::vector<double>& alphas, double mu, int stride) {
    std::ostringstream out;
    out << "t,energy";
    for (int j : tail_shells) out << ",tail_energy_" << j;
    for (double a : alphas) out << ",sobolev_sq_" << format_double(a);
    out << "\n";
    const std::size_t n = traj.samples.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (i % stride != 0 && i != n - 1) continue;
        const ShellState s = traj.state(i);
        out << format_double(s.t) << "," << format_double(energy(s));
        for (int j : tail_shells) out << "," << format_double(tail_energy(s, j));
        for (double a : alphas) out << "," << format_double(sobolev_norm_sq(s, a, mu));
        out << "\n";
    }
    return out.str();
}

std::string crossings_csv(const CrossingReport& report) {
    std::ostringstream out;
    out << "k,t_k,bound,satisfied\n";
    for (const CrossingStep& s : report.steps) {
        if (!s.resolved) break;
        out << s.k << "," << format_double(s.t_k) << "," << format_double(s.bound) << ","
            << (s.satisfied ? "true" : "false") << "\n";
    }
    return out.str();
}

std::string spectra_csv(const Trajectory& traj, int n_snapshots) {
    std::ostringstream out;
    const std::size_t n = traj.samples.size();
    std::vector<std::size_t> picks;
    for (int s = 0; s < n_snapshots; ++s)
        picks.push_back(static_cast<std::size_t>(
            std::round(static_cast<double>(s) * (n - 1) / std::max(1, n_snapshots - 1))));
    out << "j,k";
    for (std::size_t idx : picks) out << ",t=" << format_double(traj.samples[idx].t);
    out << "\n";
    for (int i = 0; i < traj.params.n_shells; ++i) {
        const int j = traj.params.j0 + i;
        out << j << "," << format_double(std::pow(traj.params.lambda, j));
        for (std::size_t idx : picks)
            out << "," << format_double(std::abs(traj.samples[idx].y[i]));
        out << "\n";
    }
    return out.str();
}

std::string plot_script(std::size_t n_tail_columns, std::size_t n_alpha_columns) {
    // diagnostics.csv layout: t, energy, tail columns, then one H-norm
    // column per alpha.
    const std::size_t norm_first = 3 + n_tail_columns;
    const std::size_t norm_last = 2 + n_tail_columns + n_alpha_columns;
    std::ostringstream out;
    out << "# gnuplot script: spectrum snapshots and norm growth\n"
        << "set datafile separator ','\n"
        << "set key autotitle columnhead\n"
        << "set terminal pngcairo size 900,600\n\n"
        << "set output 'spectrum.png'\n"
        << "set logscale xy\n"
        << "set xlabel 'wavenumber'\n"
        << "set ylabel '|a_j|'\n"
        << "plot for [col=3:*] 'spectra.csv' using 2:col with linespoints\n"
        << "\nset output 'norms.png'\n"
        << "unset logscale\n"
        << "set logscale y\n"
        << "set xlabel 't'\n"
        << "set ylabel 'H-norm squared'\n"
        << "plot for [col=" << norm_first << ":" << norm_last
        << "] 'diagnostics.csv' using 1:col with lines\n";
    return out.str();
}

ordered_json json_of_constants(const BlowupConstants& c) {
    ordered_json j;
    j["lambda"] = c.lambda;
    j["mu"] = c.mu;
    j["alpha"] = c.alpha;
    j["delta"] = c.delta;
    j["q"] = c.q;
    j["rho"] = c.rho;
    j["valid_req"] = c.valid_req;
    j["valid_bucond"] = c.valid_bucond;
    return j;
}

RunOutcome run_full(const RunConfig& cfg, const std::string& out_dir) {
    RunOutcome outcome;
    RunManifest& manifest = outcome.manifest;
    manifest.version = kToolVersion;
    manifest.started_utc = iso_utc_now();
    manifest.config_hash = hex64(fnv1a64(render_config(cfg)));

    const fs::path dir = out_dir.empty() ? fs::path(cfg.output.dir) : fs::path(out_dir);
    try {
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec || !fs::is_directory(dir))
            throw IoError("cannot create output directory '" + dir.string() + "'");

        const ShellState initial = build_initial_state(cfg);
        const bool analysis_on = cfg.analysis.enabled();
        const BlowupConstants constants = analysis_on ? cfg.constants() : BlowupConstants{};
        outcome.valid_req = constants.valid_req;
        outcome.valid_bucond = constants.valid_bucond;

        std::optional<int> start_shell;
        IntegratorConfig icfg = cfg.integrator;
        if (cfg.analysis.cascade) {
            start_shell = cfg.cascade_start_shell(initial);
            if (start_shell) {
                const int k_max = (cfg.model.last_shell() - 4) - *start_shell;
                for (int k = 1; k <= k_max; ++k)
                    icfg.events.push_back(
                        EventSpec{*start_shell + k, std::pow(constants.q, *start_shell + k), true});
            }
        }

        const Trajectory traj = integrate(cfg.model, initial, icfg);
        manifest.termination = to_string(traj.termination);

        const double e0 = energy(traj.state(0));
        double drift = 0.0;
        for (std::size_t i = 0; i < traj.samples.size(); ++i)
            drift = std::max(drift, std::abs(energy(traj.state(i)) - e0));
        outcome.energy_drift = (e0 > 0.0) ? drift / e0 : drift;

        manifest.files.push_back(
            write_file(dir, "trajectory.csv", trajectory_csv(traj, cfg.output.stride)));

        if (analysis_on) {
            std::vector<int> tail_shells = cfg.analysis.tail_shells;
            if (tail_shells.empty()) {
                tail_shells = {cfg.model.j0, cfg.model.j0 + cfg.model.n_shells / 4,
                               cfg.model.j0 + cfg.model.n_shells / 2};
            }
            std::vector<double> alphas = cfg.analysis.alphas;
            if (alphas.empty()) alphas.push_back(1.0);

            manifest.files.push_back(write_file(
                dir, "diagnostics.csv",
                diagnostics_csv(traj, tail_shells, alphas, cfg.analysis.mu, cfg.output.stride)));
            manifest.files.push_back(write_file(dir, "spectra.csv", spectra_csv(traj, 8)));
            manifest.files.push_back(
                write_file(dir, "plot.gp", plot_script(tail_shells.size(), alphas.size())));

            ordered_json report;
            report["version"] = kToolVersion;
            report["model"]["kind"] = to_string(cfg.model.kind);
            report["model"]["lambda"] = cfg.model.lambda;
            report["model"]["j0"] = cfg.model.j0;
            report["model"]["n_shells"] = cfg.model.n_shells;
            report["model"]["lhs_scale"] = cfg.model.lhs_scale;
            report["termination"] = to_string(traj.termination);
            report["steps"]["accepted"] = traj.stats.accepted;
            report["steps"]["rejected"] = traj.stats.rejected;
            report["energy"]["initial"] = e0;
            report["energy"]["max_rel_drift"] = outcome.energy_drift;
            report["constants"] = json_of_constants(constants);

            if (cfg.analysis.cascade) {
                if (start_shell) {
                    const CrossingReport cross = verify_cascade(traj, constants, *start_shell);
                    outcome.deepest_resolved = cross.resolved_depth();
                    manifest.files.push_back(
                        write_file(dir, "crossings.csv", crossings_csv(cross)));
                    ordered_json jc;
                    jc["start_shell"] = cross.start_shell;
                    jc["seeded"] = cross.seeded;
                    jc["t0"] = cross.t0;
                    jc["truncation_shell"] = cross.truncation_shell;
                    jc["resolved_depth"] = cross.resolved_depth();
                    jc["all_resolved_satisfied"] = cross.all_resolved_satisfied();
                    jc["cumulative_satisfied"] = cross.cumulative_satisfied();
                    jc["steps"] = ordered_json::array();
                    for (const CrossingStep& s : cross.steps) {
                        ordered_json js;
                        js["k"] = s.k;
                        js["resolved"] = s.resolved;
                        js["bound"] = s.bound;
                        if (s.resolved) {
                            js["t_k"] = s.t_k;
                            js["satisfied"] = s.satisfied;
                        } else {
                            js["t_k"] = nullptr;
                            js["satisfied"] = nullptr;
                        }
                        jc["steps"].push_back(js);
                    }
                    report["cascade"] = jc;

                    if (cfg.analysis.certificate) {
                        const auto cert = norm_divergence_certificate(traj, constants, cross);
                        ordered_json jcert = ordered_json::array();
                        for (const CertificateEntry& e : cert) {
                            ordered_json je;
                            je["k"] = e.k;
                            je["t_k"] = e.t_k;
                            je["lower_bound"] = e.lower_bound;
                            je["measured"] = e.measured;
                            je["holds"] = e.holds;
                            jcert.push_back(je);
                        }
                        report["certificate"] = jcert;
                    }
                } else {
                    report["cascade"] = {{"skipped", "initial data does not seed any shell"}};
                }
            }

            if (cfg.analysis.fit_tstar) {
                const double alpha = alphas.front();
                const auto fit = estimate_blowup_time(traj, alpha, cfg.analysis.mu);
                if (fit) {
                    outcome.t_star = fit->t_star;
                    outcome.gamma = fit->gamma;
                    report["tstar"]["estimate"] = fit->t_star;
                    report["tstar"]["gamma"] = fit->gamma;
                    report["tstar"]["residual_rms"] = fit->residual_rms;
                    report["tstar"]["n_points"] = fit->n_points;
                } else {
                    report["tstar"]["error"] = "insufficient norm growth for a fit";
                }
            }

            manifest.files.push_back(write_file(dir, "report.json", report.dump(2) + "\n"));
        }

        manifest.ok = true;
    } catch (const IoError& ex) {
        manifest.ok = false;
        manifest.error = std::string("io: ") + ex.what();
    } catch (const std::exception& ex) {
        manifest.ok = false;
        manifest.error = std::string("numeric: ") + ex.what();
    }

    manifest.finished_utc = iso_utc_now();

    // The manifest itself is best-effort: an unwritable directory still
    // produces the partial inventory in the returned value.
    try {
        ordered_json jm;
        jm["config_hash"] = manifest.config_hash;
        jm["version"] = manifest.version;
        jm["started_utc"] = manifest.started_utc;
        jm["finished_utc"] = manifest.finished_utc;
        jm["termination"] = manifest.termination;
        jm["ok"] = manifest.ok;
        if (!manifest.error.empty()) jm["error"] = manifest.error;
        jm["files"] = ordered_json::array();
        for (const FileEntry& f : manifest.files) {
            ordered_json jf;
            jf["name"] = f.name;
            jf["bytes"] = f.bytes;
            jf["fnv1a64"] = f.digest;
            jm["files"].push_back(jf);
        }
        write_file(dir, "run_manifest.json", jm.dump(2) + "\n");
    } catch (const std::exception&) {
        if (manifest.ok) {
            manifest.ok = false;
            manifest.error = "failed to write run_manifest.json";
        }
    }
    return outcome;
}

}  // namespace

RunManifest run(const RunConfig& config, const std::string& out_dir) {
    return run_full(config, out_dir).manifest;
}

std::vector<SweepResult> sweep(const RunConfig& templ, const SweepGrid& grid,
                               const std::string& out_dir, int workers) {
    // Cross product, first key slowest.
    std::vector<std::map<std::string, std::string>> cells;
    cells.emplace_back();
    for (const auto& [key, values] : grid) {
        std::vector<std::map<std::string, std::string>> next;
        for (const auto& cell : cells) {
            for (const std::string& v : values) {
                auto extended = cell;
                extended[key] = v;
                next.push_back(std::move(extended));
            }
        }
        cells = std::move(next);
    }
    if (!grid.empty() && cells.size() == 1 && cells.front().empty()) cells.clear();
    if (grid.empty()) cells.clear();

    std::vector<SweepResult> results(cells.size());
    const fs::path base(out_dir);
    std::error_code ec;
    fs::create_directories(base, ec);

    std::atomic<std::size_t> next_cell{0};
    const int n_workers =
        std::max(1, std::min<int>(workers <= 0 ? 1 : workers, static_cast<int>(cells.size())));
    auto worker = [&]() {
        while (true) {
            const std::size_t i = next_cell.fetch_add(1);
            if (i >= cells.size()) break;
            char name[32];
            std::snprintf(name, sizeof(name), "cell_%03zu", i);
            SweepResult& res = results[i];
            res.cell = name;
            res.overrides = cells[i];
            RunConfig cfg = templ;
            bool config_ok = true;
            try {
                for (const auto& [key, value] : cells[i]) apply_override(cfg, key, value);
            } catch (const std::exception& ex) {
                config_ok = false;
                res.manifest.ok = false;
                res.manifest.error = ex.what();
                res.termination = "config_error";
            }
            if (config_ok) {
                const RunOutcome outcome = run_full(cfg, (base / name).string());
                res.manifest = outcome.manifest;
                res.termination = outcome.manifest.ok ? outcome.manifest.termination : "failed";
                res.t_star = outcome.t_star;
                res.deepest_resolved = outcome.deepest_resolved;
                res.valid_req = outcome.valid_req;
                res.valid_bucond = outcome.valid_bucond;
                res.energy_drift = outcome.energy_drift;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    std::ostringstream summary;
    summary << "cell";
    for (const auto& [key, values] : grid) {
        (void)values;
        summary << "," << key;
    }
    summary << ",ok,termination,energy_drift,t_star,deepest_resolved,valid_req,valid_bucond\n";
    for (const SweepResult& r : results) {
        summary << r.cell;
        for (const auto& [key, values] : grid) {
            (void)values;
            auto it = r.overrides.find(key);
            summary << "," << (it == r.overrides.end() ? "" : it->second);
        }
        summary << "," << (r.manifest.ok ? "true" : "false") << "," << r.termination << ","
                << format_double(r.energy_drift) << ","
                << (r.t_star ? format_double(*r.t_star) : std::string()) << ","
                << r.deepest_resolved << "," << (r.valid_req ? "true" : "false") << ","
                << (r.valid_bucond ? "true" : "false") << "\n";
    }
    std::ofstream out(base / "sweep_summary.csv", std::ios::binary);
    out << summary.str();

    return results;
}

int check_suites(std::uint64_t rng_seed, std::ostream& out) {
    int failures = 0;
    auto report = [&](const char* name, bool pass, const std::string& detail) {
        out << (pass ? "PASS" : "FAIL") << " " << name;
        if (!detail.empty()) out << ": " << detail;
        out << "\n";
        if (!pass) ++failures;
    };

    {
        const auto triads = burgers::dyadic_triad_check(10);
        report("dyadic-triads", triads.all_match && triads.no_mixed_power_sums,
               "levels 1..10, exact integer enumeration");
    }

    {
        bool pass = true;
        std::ostringstream detail;
        for (double lambda : {2.0, 5.656854249492380195206754896838}) {
            const ModelParams params = ModelParams::obukhov(lambda, 0, 12);
            const ShellState state = obukhov_powerlaw_state(params, 1.0);
            const ArrayXd dadt = rhs(params, state);
            double worst = 0.0;
            for (int i = 1; i + 1 < params.n_shells; ++i) {
                const double scale = params.lhs_scale * std::pow(lambda, params.j0 + i) *
                                     state.a[i - 1] * state.a[i];
                worst = std::max(worst, std::abs(dadt[i]) / scale);
            }
            double flux_dev = 0.0;
            const double f0 = obukhov_flux(params, state, params.j0 + 1);
            for (int j = params.j0 + 1; j < params.last_shell(); ++j)
                flux_dev = std::max(
                    flux_dev, std::abs(obukhov_flux(params, state, j) - f0) / std::abs(f0));
            if (worst > 1e-12 || flux_dev > 1e-10) pass = false;
            detail << "lambda=" << format_double(lambda) << " residual=" << worst
                   << " flux_dev=" << flux_dev << "  ";
        }
        report("obukhov-fixed-point", pass, detail.str());
    }

    {
        // Explicit constants table for the lambda = 2^{5/2} family plus random
        // agreement between the validity flags and the defining inequalities.
        const double fp_lambda = 5.656854249492380195206754896838;
        const double eps_grid[] = {0.1, 0.3, 0.5, 0.65, 0.67, 0.7};
        const bool expected[] = {true, true, true, true, false, false};
        bool pass = true;
        for (int i = 0; i < 6; ++i) {
            const auto c = check_constants(fp_lambda, 2.0, 1.5, std::pow(2.0, -3.0 - eps_grid[i]),
                                           std::pow(2.0, -eps_grid[i]));
            if (c.valid_req != expected[i]) pass = false;
        }
        std::mt19937_64 rng(rng_seed);
        std::uniform_real_distribution<double> lam_dist(1.05, 6.0);
        std::uniform_real_distribution<double> alpha_dist(0.1, 3.0);
        std::uniform_real_distribution<double> delta_dist(-1.0, 7.0);
        int checked = 0;
        for (int i = 0; i < 1000; ++i) {
            const double lambda = lam_dist(rng);
            const double mu = (i % 2 == 0) ? lambda : 2.0;
            const double alpha = alpha_dist(rng);
            const double delta = delta_dist(rng);
            const auto c = pick_constants(lambda, mu, alpha, delta);
            const double q = std::pow(mu, -2.0 * alpha + delta);
            const double lower = 1.0 / (lambda * std::sqrt(q));
            const double rho = 0.5 * (lower + 1.0);
            const bool req = q > 0.0 && q < 1.0 && rho > 0.0 && rho < 1.0 &&
                             lambda * rho * std::sqrt(q) > 1.0;
            const bool bucond = std::pow(mu, 2.0 * alpha) * q > 1.0;
            if (c.valid_req != req || c.valid_bucond != bucond) pass = false;
            // mu = lambda admissibility window: both flags hold iff
            // max(0, 2 alpha - 2) < delta < 2 alpha (checked off-boundary).
            if (mu == lambda) {
                const double lo = std::max(0.0, 2.0 * alpha - 2.0);
                const double hi = 2.0 * alpha;
                if (std::abs(delta - lo) > 1e-9 && std::abs(delta - hi) > 1e-9) {
                    const bool inside = delta > lo && delta < hi;
                    if ((c.valid_req && c.valid_bucond) != inside) pass = false;
                    ++checked;
                }
            }
        }
        report("constants-table", pass,
               "eps grid + 1000 random tuples, " + std::to_string(checked) +
                   " window checks");
    }

    return failures == 0 ? 0 : 2;
}

}  // namespace dyad
