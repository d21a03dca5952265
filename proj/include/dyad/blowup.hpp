#pragma once

#include "dyad/integrator.hpp"

#include <optional>
#include <vector>

namespace dyad {

/// Constant set driving the cascade argument: tail-energy thresholds q^j,
/// per-level time bounds rho^j, and the norm-divergence rate mu^{2 alpha} q.
struct BlowupConstants {
    double lambda = 2.0;
    double mu = 2.0;
    double alpha = 1.0;
    double delta = 0.0;
    double q = 0.0;
    double rho = 0.0;
    bool valid_req = false;     // lambda * rho * sqrt(q) > 1
    bool valid_bucond = false;  // mu^{2 alpha} * q > 1

    bool valid() const { return valid_req && valid_bucond; }
};

/// q = mu^{-2 alpha + delta}; rho = midpoint of ((lambda^2 q)^{-1/2}, 1) when
/// that interval is nonempty, otherwise the (degenerate) midpoint with
/// valid_req = false. Never throws on an empty interval.
BlowupConstants pick_constants(double lambda, double mu, double alpha, double delta);

/// Validate an explicitly chosen (q, rho) pair against the same conditions.
BlowupConstants check_constants(double lambda, double mu, double alpha, double q,
                                double rho);

struct CrossingStep {
    int k = 0;          // level index; shell = start_shell + k
    double t_k = 0.0;   // first time tail_energy(start_shell + k) >= q^{start_shell + k}
    double bound = 0.0; // rho^{start_shell + k - 1}
    bool resolved = false;
    bool satisfied = false;  // t_k - t_{k-1} <= bound * (1 + tol)
};

struct CrossingReport {
    int start_shell = 0;  // J
    double q = 0.0;
    double rho = 0.0;
    double t0 = 0.0;           // first time tail_energy(J) >= q^J
    bool seeded = false;       // tail_energy(J, start) >= q^J held at the start
    int truncation_shell = 0;  // checks stop at j0 + N - 5
    double time_tol = 1e-6;
    std::vector<CrossingStep> steps;

    int resolved_depth() const;
    bool all_resolved_satisfied() const;
    /// Geometric bound on t_k - t0: rho^J (1 - rho^k) / (1 - rho).
    double cumulative_bound(int k) const;
    bool cumulative_satisfied() const;
};

/// Walk the crossing cascade on a stored trajectory. Crossings the trajectory
/// never reaches stay unresolved; nothing is extrapolated past the recorded
/// data. time_tol is the relative slack on the per-step time bounds.
CrossingReport verify_cascade(const Trajectory& traj, const BlowupConstants& c,
                              int start_shell, double time_tol = 1e-6);

struct CertificateEntry {
    int k;
    double t_k;
    double lower_bound;  // mu^{2 alpha (J+k)} q^{J+k}
    double measured;     // sobolev_norm_sq at t_k
    bool holds;
};

/// Measured H^alpha norm against the divergence lower bound at each resolved
/// crossing time. Unresolved levels are omitted.
std::vector<CertificateEntry> norm_divergence_certificate(const Trajectory& traj,
                                                          const BlowupConstants& c,
                                                          const CrossingReport& report);

struct BlowupFit {
    double t_star = 0.0;
    double gamma = 0.0;
    double residual_rms = 0.0;
    int n_points = 0;
    double window_begin = 0.0;
    double window_end = 0.0;
};

/// Least-squares fit of log v = c - gamma log(t* - t) on a (t, v) series.
/// nullopt when the series grows by less than min_growth or has too few
/// points.
std::optional<BlowupFit> fit_power_blowup(const std::vector<double>& t,
                                          const std::vector<double>& values,
                                          double min_growth = 10.0);

/// Fit applied to the H^alpha norm along a trajectory; requires three decades
/// of norm growth.
std::optional<BlowupFit> estimate_blowup_time(const Trajectory& traj, double alpha,
                                              double mu);

/// Energy flux through shell j for the Obukhov model (half the tail-energy
/// derivative): lambda^{1/3} lambda^j a_{j-1} a_j^2 minus the viscous drain.
double obukhov_flux(const ModelParams& params, const ShellState& state, int j);

/// Constant-flux power-law amplitude lambda^{-2/9} flux^{1/3} lambda^{-j/3}.
double obukhov_powerlaw_amplitude(double lambda, double flux, int j);

/// State with every shell on the power law.
ShellState obukhov_powerlaw_state(const ModelParams& params, double flux);

/// Local-Reynolds cascade criterion lambda^{l+1} a_l > nu_{l+1}.
bool cascade_criterion(const ModelParams& params, const ShellState& state, int l);

/// Power-law exponent beta admits positivity of the cascade: beta <= -1/3.
bool powerlaw_positivity_exponent_ok(double beta);

/// Single-shell seed with tail_energy(start_shell) = max(q^start_shell, min_energy).
ShellState seed_state(const ModelParams& params, int start_shell, double q,
                      double min_energy = 0.0);

struct FloorSearch {
    int start_shell;
    CrossingReport report;
    Trajectory trajectory;
};

/// Smallest J in [params.j0, j_max] whose seeded run resolves at least
/// min_levels crossings with every per-step bound satisfied. The floor is
/// reported per run, never asserted universally.
std::optional<FloorSearch> find_cascade_floor(const ModelParams& params,
                                              const BlowupConstants& c,
                                              const IntegratorConfig& config,
                                              int min_levels, int j_max);

}  // namespace dyad
