// Acceptance suite: one line per criterion, nonzero exit on any failure.

#include "dyad/blowup.hpp"
#include "dyad/burgers.hpp"
#include "dyad/integrator.hpp"
#include "dyad/shell_model.hpp"
#include "dyad/special.hpp"

#include <cmath>
#include <cstdio>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace dyad;

namespace {

int g_failures = 0;

void criterion(int number, const char* name, bool pass, const std::string& detail) {
    std::printf("%s  [%2d] %-28s %s\n", pass ? "PASS" : "FAIL", number, name,
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

constexpr double kFpLambda = 5.656854249492380195206754896838;  // 2^{5/2}

struct CascadeRun {
    std::optional<FloorSearch> floor;
    BlowupConstants constants;
    ModelParams params = ModelParams::generic(2.0, 0, 40);
};

// Shared run for criteria 1, 3 and 4: lambda = mu = 2, alpha = 1, delta = 1,
// 40 shells, seeded at the reported floor (q^J energy at shell J).
CascadeRun shared_cascade_run() {
    CascadeRun run;
    run.constants = pick_constants(2.0, 2.0, 1.0, 1.0);
    IntegratorConfig cfg;
    cfg.rel_tol = 1e-11;
    cfg.abs_tol = 1e-13;
    cfg.t_end = 3.0;
    cfg.stop_norm = 1e6;
    cfg.record_stride = 1;  // conservation is checked at every accepted step
    // The truncation wall pins the stable step near 1e-10; underflow at 1e-8
    // is the blow-up stop for this run.
    cfg.min_step_scale = 1e-8;
    run.floor = find_cascade_floor(run.params, run.constants, cfg, 10, 6);
    return run;
}

void criterion_energy_conservation(const CascadeRun& run) {
    std::ostringstream detail;
    bool pass = false;
    if (run.floor && run.floor->start_shell == 0) {
        const Trajectory& traj = run.floor->trajectory;
        const double e0 = energy(traj.state(0));
        double drift = 0.0;
        for (std::size_t i = 0; i < traj.samples.size(); ++i)
            drift = std::max(drift, std::abs(energy(traj.state(i)) - e0) / e0);
        pass = drift <= 1e-7;
        detail << "max |E-E0|/E0 = " << drift << " over " << traj.samples.size()
               << " samples, termination=" << to_string(traj.termination);
    } else {
        detail << "cascade floor run unavailable";
    }
    criterion(1, "energy-conservation", pass, detail.str());
}

void criterion_positivity() {
    std::mt19937_64 rng(424242);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst_amp = 0.0;
    double worst_tail = 0.0;
    for (double lambda : {2.0, kFpLambda}) {
        const ModelParams params = ModelParams::generic(lambda, 0, 8);
        for (int trial = 0; trial < 100; ++trial) {
            ShellState init;
            init.j0 = 0;
            init.a.resize(8);
            for (int i = 0; i < 8; ++i) init.a[i] = unit(rng) * 0.5 * std::pow(lambda, -i);
            IntegratorConfig cfg;
            cfg.rel_tol = 1e-10;
            cfg.abs_tol = 1e-12;
            cfg.t_end = 0.25;
            const Trajectory traj = integrate(params, init, cfg);
            for (const Sample& s : traj.samples)
                worst_amp = std::min(worst_amp, s.y.minCoeff());
            for (int j = 0; j < 8; ++j) {
                double prev = tail_energy(traj.state(0), j);
                for (std::size_t i = 1; i < traj.samples.size(); ++i) {
                    const double cur = tail_energy(traj.state(i), j);
                    worst_tail = std::min(worst_tail, cur - prev);
                    prev = cur;
                }
            }
        }
    }
    const bool pass = worst_amp >= -1e-11 && worst_tail >= -1e-9;
    std::ostringstream detail;
    detail << "min amplitude = " << worst_amp << ", worst tail decrement = " << worst_tail
           << " (200 seeded states)";
    criterion(2, "positivity-tail-monotone", pass, detail.str());
}

void criterion_cascade(const CascadeRun& run) {
    std::ostringstream detail;
    bool pass = false;
    if (run.floor) {
        const CrossingReport& report = run.floor->report;
        const int depth = report.resolved_depth();
        pass = depth >= 10 && report.all_resolved_satisfied() &&
               report.cumulative_satisfied();
        detail << "floor J = " << run.floor->start_shell << ", resolved levels = " << depth
               << ", per-step bounds " << (report.all_resolved_satisfied() ? "ok" : "VIOLATED")
               << ", cumulative " << (report.cumulative_satisfied() ? "ok" : "VIOLATED");
    } else {
        detail << "no starting shell passed the cascade check";
    }
    criterion(3, "cascade-time-bounds", pass, detail.str());
}

void criterion_norm_certificate(const CascadeRun& run) {
    std::ostringstream detail;
    bool pass = false;
    if (run.floor) {
        const Trajectory& traj = run.floor->trajectory;
        const CrossingReport& report = run.floor->report;
        const auto cert = norm_divergence_certificate(traj, run.constants, report);
        bool bounds_ok = !cert.empty();
        for (const CertificateEntry& e : cert) bounds_ok = bounds_ok && e.holds;

        const auto fit = estimate_blowup_time(traj, 1.0, 2.0);
        const double geometric_bound =
            report.t0 + std::pow(report.rho, report.start_shell) / (1.0 - report.rho);
        const bool fit_ok = fit && fit->t_star <= geometric_bound + 1e-6;
        pass = bounds_ok && fit_ok;
        detail << cert.size() << " certificate rows " << (bounds_ok ? "hold" : "VIOLATED")
               << "; t* fit = " << (fit ? fit->t_star : -1.0)
               << " <= bound " << geometric_bound;
    } else {
        detail << "cascade run unavailable";
    }
    criterion(4, "norm-divergence-certificate", pass, detail.str());
}

void criterion_fp_constants() {
    const double eps_grid[] = {0.1, 0.3, 0.5, 0.65, 0.67, 0.7};
    const bool expected[] = {true, true, true, true, false, false};
    bool pass = true;
    std::ostringstream detail;
    detail << "validity:";
    for (int i = 0; i < 6; ++i) {
        const BlowupConstants c =
            check_constants(kFpLambda, 2.0, 1.5, std::pow(2.0, -3.0 - eps_grid[i]),
                            std::pow(2.0, -eps_grid[i]));
        detail << " " << (c.valid_req ? "T" : "F");
        if (c.valid_req != expected[i]) pass = false;
    }
    detail << " (expect T T T T F F)";
    criterion(5, "fp-constants-table", pass, detail.str());
}

void criterion_kp_equivalence(const CascadeRun& run) {
    // Operational blow-up stop: the 40-shell run of the same initial data
    // ends in a step-underflow BlowupStop at the truncation wall; the
    // 20-shell comparison runs cover 80% of that time.
    double t_ref = 1.5;
    if (run.floor && run.floor->trajectory.termination == Termination::BlowupStop)
        t_ref = run.floor->trajectory.t_final();

    const ModelParams gen = ModelParams::generic(2.0, 0, 20);
    const ModelParams kp = ModelParams::katz_pavlovic(0, 20);
    ShellState init;
    init.j0 = 0;
    init.a = ArrayXd::Zero(20);
    init.a[0] = 1.0;

    double worst = 0.0;
    for (double frac : {0.13, 0.27, 0.40, 0.53, 0.67, 0.80}) {
        const double t = frac * t_ref;
        IntegratorConfig cfg;
        cfg.rel_tol = 1e-11;
        cfg.abs_tol = 1e-13;
        cfg.record_stride = 1 << 30;  // endpoints only
        cfg.t_end = t;
        const Trajectory a = integrate(gen, init, cfg);
        cfg.t_end = 8.0 * t;
        const Trajectory b = integrate(kp, init, cfg);
        const double scale = std::max(a.samples.back().y.abs().maxCoeff(), 1e-30);
        worst = std::max(
            worst, (a.samples.back().y - b.samples.back().y).abs().maxCoeff() / scale);
    }
    std::ostringstream detail;
    detail << "max relative deviation = " << worst << " over 6 probe times up to 0.8 * "
           << t_ref;
    criterion(6, "kp-dyadic-equivalence", worst <= 1e-6, detail.str());
}

void criterion_burgers_asymptotics() {
    using namespace dyad::burgers;
    const Profile p = canonical_profile();
    std::ostringstream detail;

    const ShockInfo shock = shock_time(p);
    const bool shock_ok = shock.has_shock && std::abs(shock.t_star - 1.0) <= 1e-8 &&
                          std::abs(shock.eta0) <= 1e-8;
    detail << "t* = " << shock.t_star << ", eta0 = " << shock.eta0;

    const double amp = std::pow(3.0, -1.0 / 3.0) * airy_ai_zero();
    bool ratio_ok = true;
    for (double k : {50.0, 100.0, 200.0}) {
        const double got = std::abs(fourier_coefficient(p, k, 1.0));
        const double want = amp * std::pow(k, -4.0 / 3.0);
        if (std::abs(got - want) > 0.10 * want) ratio_ok = false;
    }

    // Decay exponent over k in [50, 500].
    std::vector<double> lx, ly;
    for (int i = 0; i < 13; ++i) {
        const double k = 50.0 * std::pow(10.0, i / 12.0);
        lx.push_back(std::log(k));
        ly.push_back(std::log(std::abs(fourier_coefficient(p, k, 1.0))));
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int n = static_cast<int>(lx.size());
    for (int i = 0; i < n; ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const bool slope_ok = std::abs(slope + 4.0 / 3.0) <= 0.05;
    detail << ", |u_hat| within 10% of the k^{-4/3} law at k=50,100,200: "
           << (ratio_ok ? "yes" : "NO") << ", fitted exponent = " << slope;
    criterion(7, "burgers-shock-spectrum", shock_ok && ratio_ok && slope_ok, detail.str());
}

void criterion_divergence_classifier() {
    using dyad::burgers::halpha_diverges;
    bool pass = true;
    // p = 4/3: divergent exactly for alpha >= 5/6.
    pass = pass && !halpha_diverges(4.0 / 3.0, 0.5);
    pass = pass && !halpha_diverges(4.0 / 3.0, 5.0 / 6.0 - 1e-9);
    pass = pass && halpha_diverges(4.0 / 3.0, 5.0 / 6.0);
    pass = pass && halpha_diverges(4.0 / 3.0, 5.0 / 6.0 + 1e-9);
    pass = pass && halpha_diverges(4.0 / 3.0, 3.0);
    // p = 1: divergent exactly for alpha >= 1/2.
    pass = pass && !halpha_diverges(1.0, 0.5 - 1e-9);
    pass = pass && halpha_diverges(1.0, 0.5);
    pass = pass && halpha_diverges(1.0, 0.5 + 1e-9);
    criterion(8, "divergence-classifier", pass,
              "p = 4/3 flips at alpha = 5/6, p = 1 flips at alpha = 1/2");
}

void criterion_dyadic_projection() {
    const auto report = dyad::burgers::dyadic_triad_check(10);
    bool pass = report.all_match && report.no_mixed_power_sums;
    for (const auto& level : report.levels)
        pass = pass && level.coeff_prev_sq == 1 && level.coeff_cross == -2;
    std::ostringstream detail;
    detail << report.levels.size()
           << " levels, coefficients (+1, -2) exact in integer arithmetic";
    criterion(9, "dyadic-projection-identity", pass, detail.str());
}

void criterion_obukhov() {
    std::ostringstream detail;
    bool pass = true;
    const ModelParams params = ModelParams::obukhov(2.0, 0, 14);
    const ShellState state = obukhov_powerlaw_state(params, 1.0);
    const ArrayXd dadt = rhs(params, state);
    double worst_res = 0.0;
    for (int i = 1; i + 1 < params.n_shells; ++i) {
        const double scale =
            params.lhs_scale * std::pow(2.0, i) * state.a[i - 1] * state.a[i];
        worst_res = std::max(worst_res, std::abs(dadt[i]) / scale);
    }
    pass = pass && worst_res <= 1e-12;

    double worst_flux = 0.0;
    const double f0 = obukhov_flux(params, state, 1);
    for (int j = 1; j < params.last_shell(); ++j)
        worst_flux =
            std::max(worst_flux, std::abs(obukhov_flux(params, state, j) - f0) / f0);
    pass = pass && worst_flux <= 1e-10;

    const bool flip = powerlaw_positivity_exponent_ok(-1.0 / 3.0) &&
                      powerlaw_positivity_exponent_ok(-1.0 / 3.0 - 1e-12) &&
                      !powerlaw_positivity_exponent_ok(-1.0 / 3.0 + 1e-12);
    pass = pass && flip;
    detail << "interior residual = " << worst_res << ", flux spread = " << worst_flux
           << ", beta flip at -1/3: " << (flip ? "exact" : "WRONG");
    criterion(10, "obukhov-fixed-point-flux", pass, detail.str());
}

}  // namespace

int main() {
    std::printf("acceptance suite (%s)\n", "dyadlab");
    const CascadeRun run = shared_cascade_run();
    criterion_energy_conservation(run);
    criterion_positivity();
    criterion_cascade(run);
    criterion_norm_certificate(run);
    criterion_fp_constants();
    criterion_kp_equivalence(run);
    criterion_burgers_asymptotics();
    criterion_divergence_classifier();
    criterion_dyadic_projection();
    criterion_obukhov();
    std::printf("%d/10 criteria passed\n", 10 - g_failures);
    return g_failures == 0 ? 0 : 1;
}

