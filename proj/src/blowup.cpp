#include "dyad/blowup.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dyad {

BlowupConstants pick_constants(double lambda, double mu, double alpha, double delta) {
    if (!(lambda > 1.0) || !(mu > 1.0))
        throw std::invalid_argument("pick_constants: lambda, mu > 1 required");
    if (!(alpha > 0.0)) throw std::invalid_argument("pick_constants: alpha > 0 required");
    BlowupConstants c;
    c.lambda = lambda;
    c.mu = mu;
    c.alpha = alpha;
    c.delta = delta;
    c.q = std::pow(mu, -2.0 * alpha + delta);
    // Admissible interval for rho is ((lambda^2 q)^{-1/2}, 1); take the
    // midpoint whether or not it is nonempty and let the flags decide.
    const double lower = 1.0 / (lambda * std::sqrt(c.q));
    c.rho = 0.5 * (lower + 1.0);
    c.valid_req = (c.q > 0.0) && (c.q < 1.0) && (c.rho > 0.0) && (c.rho < 1.0) &&
                  (lambda * c.rho * std::sqrt(c.q) > 1.0);
    c.valid_bucond = std::pow(mu, 2.0 * alpha) * c.q > 1.0;
    return c;
}

BlowupConstants check_constants(double lambda, double mu, double alpha, double q,
                                double rho) {
    if (!(lambda > 1.0) || !(mu > 1.0))
        throw std::invalid_argument("check_constants: lambda, mu > 1 required");
    if (!(alpha > 0.0)) throw std::invalid_argument("check_constants: alpha > 0 required");
    BlowupConstants c;
    c.lambda = lambda;
    c.mu = mu;
    c.alpha = alpha;
    c.delta = std::log(q) / std::log(mu) + 2.0 * alpha;  // q = mu^{-2 alpha + delta}
    c.q = q;
    c.rho = rho;
    c.valid_req =
        (q > 0.0) && (q < 1.0) && (rho > 0.0) && (rho < 1.0) && (lambda * rho * std::sqrt(q) > 1.0);
    c.valid_bucond = std::pow(mu, 2.0 * alpha) * q > 1.0;
    return c;
}

int CrossingReport::resolved_depth() const {
    int depth = 0;
    for (const CrossingStep& s : steps) {
        if (!s.resolved) break;
        depth = s.k;
    }
    return depth;
}

bool CrossingReport::all_resolved_satisfied() const {
    for (const CrossingStep& s : steps) {
        if (!s.resolved) break;
        if (!s.satisfied) return false;
    }
    return resolved_depth() > 0;
}

double CrossingReport::cumulative_bound(int k) const {
    return std::pow(rho, start_shell) * (1.0 - std::pow(rho, k)) / (1.0 - rho);
}

bool CrossingReport::cumulative_satisfied() const {
    for (const CrossingStep& s : steps) {
        if (!s.resolved) break;
        if (s.t_k - t0 > cumulative_bound(s.k) * (1.0 + time_tol)) return false;
    }
    return true;
}

CrossingReport verify_cascade(const Trajectory& traj, const BlowupConstants& c,
                              int start_shell, double time_tol) {
    if (!traj.is_shell_run)
        throw std::invalid_argument("verify_cascade: shell trajectories only");
    const ModelParams& params = traj.params;
    CrossingReport report;
    report.start_shell = start_shell;
    report.q = c.q;
    report.rho = c.rho;
    report.time_tol = time_tol;
    // Zero closure distorts the last shells; stop checks five below the edge.
    report.truncation_shell = params.last_shell() - 4;

    const int k_max = report.truncation_shell - start_shell;
    std::vector<std::pair<int, double>> thresholds;
    thresholds.emplace_back(start_shell, std::pow(c.q, start_shell));
    for (int k = 1; k <= k_max; ++k)
        thresholds.emplace_back(start_shell + k, std::pow(c.q, start_shell + k));
    const auto times = crossing_times(traj, thresholds);

    report.seeded = tail_energy(traj.state(0), start_shell) >= std::pow(c.q, start_shell);
    report.t0 = times[0].value_or(std::numeric_limits<double>::quiet_NaN());

    double t_prev = report.t0;
    bool chain_resolved = times[0].has_value();
    for (int k = 1; k <= k_max; ++k) {
        CrossingStep step;
        step.k = k;
        step.bound = std::pow(c.rho, start_shell + k - 1);
        if (chain_resolved && times[k].has_value()) {
            step.resolved = true;
            step.t_k = *times[k];
            step.satisfied = (step.t_k - t_prev) <= step.bound * (1.0 + time_tol);
            t_prev = step.t_k;
        } else {
            chain_resolved = false;
            step.resolved = false;
        }
        report.steps.push_back(step);
    }
    return report;
}

std::vector<CertificateEntry> norm_divergence_certificate(const Trajectory& traj,
                                                          const BlowupConstants& c,
                                                          const CrossingReport& report) {
    std::vector<CertificateEntry> entries;
    for (const CrossingStep& s : report.steps) {
        if (!s.resolved) break;
        const int shell = report.start_shell + s.k;
        const ShellState state = traj.interpolate_state(s.t_k);
        CertificateEntry e;
        e.k = s.k;
        e.t_k = s.t_k;
        e.lower_bound = std::pow(c.mu, 2.0 * c.alpha * shell) * std::pow(c.q, shell);
        e.measured = sobolev_norm_sq(state, c.alpha, c.mu);
        e.holds = e.measured >= e.lower_bound;
        entries.push_back(e);
    }
    return entries;
}

namespace {

struct LineFit {
    double intercept;
    double slope;
    double ssr;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const int n = static_cast<int>(x.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (int i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    LineFit fit{0.0, 0.0, std::numeric_limits<double>::infinity()};
    if (denom == 0.0) return fit;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    fit.ssr = 0.0;
    for (int i = 0; i < n; ++i) {
        const double r = y[i] - fit.intercept - fit.slope * x[i];
        fit.ssr += r * r;
    }
    return fit;
}

// SSR of log v against log(t* - t) for t* = t_last + delta.
LineFit fit_at_delta(const std::vector<double>& t, const std::vector<double>& logv,
                     double t_last, double delta) {
    std::vector<double> x(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) x[i] = std::log(delta + (t_last - t[i]));
    return fit_line(x, logv);
}

}  // namespace

std::optional<BlowupFit> fit_power_blowup(const std::vector<double>& t,
                                          const std::vector<double>& values,
                                          double min_growth) {
    if (t.size() != values.size() || t.size() < 12) return std::nullopt;

    // Growth window: up to the global maximum (saturation from truncation is
    // excluded), measured from the minimum before it.
    std::size_t i_max = 0;
    for (std::size_t i = 0; i < values.size(); ++i)
        if (values[i] > values[i_max]) i_max = i;
    std::size_t i_min = 0;
    for (std::size_t i = 0; i <= i_max; ++i)
        if (values[i] < values[i_min]) i_min = i;
    if (i_max < i_min + 11) return std::nullopt;
    if (!(values[i_min] > 0.0)) return std::nullopt;
    if (values[i_max] / values[i_min] < min_growth) return std::nullopt;

    // Last 60% of the growth segment, excluding the final two samples.
    const std::size_t first = i_min + static_cast<std::size_t>(0.4 * (i_max - i_min));
    const std::size_t last = i_max - 2;
    if (last < first + 7) return std::nullopt;

    std::vector<double> tw, logv;
    for (std::size_t i = first; i <= last; ++i) {
        if (!(values[i] > 0.0)) return std::nullopt;
        tw.push_back(t[i]);
        logv.push_back(std::log(values[i]));
    }
    const double t_last = tw.back();
    const double span = t_last - tw.front();
    if (!(span > 0.0)) return std::nullopt;

    // Coarse scan in log(delta), then golden-section refinement.
    const double d_lo = 1e-6 * span, d_hi = 10.0 * span;
    const int n_scan = 200;
    double best_delta = d_lo;
    double best_ssr = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= n_scan; ++i) {
        const double d =
            d_lo * std::pow(d_hi / d_lo, static_cast<double>(i) / n_scan);
        const double ssr = fit_at_delta(tw, logv, t_last, d).ssr;
        if (ssr < best_ssr) {
            best_ssr = ssr;
            best_delta = d;
        }
    }
    double lo = best_delta / std::pow(d_hi / d_lo, 1.0 / n_scan);
    double hi = best_delta * std::pow(d_hi / d_lo, 1.0 / n_scan);
    lo = std::max(lo, d_lo);
    hi = std::min(hi, d_hi);
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = std::log(lo), b = std::log(hi);
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = fit_at_delta(tw, logv, t_last, std::exp(x1)).ssr;
    double f2 = fit_at_delta(tw, logv, t_last, std::exp(x2)).ssr;
    for (int iter = 0; iter < 120 && (b - a) > 1e-14; ++iter) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = fit_at_delta(tw, logv, t_last, std::exp(x1)).ssr;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = fit_at_delta(tw, logv, t_last, std::exp(x2)).ssr;
        }
    }
    const double delta = std::exp(0.5 * (a + b));
    const LineFit fit = fit_at_delta(tw, logv, t_last, delta);
    if (!(fit.slope < 0.0)) return std::nullopt;  // not a growth-to-singularity shape

    BlowupFit result;
    result.t_star = t_last + delta;
    result.gamma = -fit.slope;
    result.residual_rms = std::sqrt(fit.ssr / static_cast<double>(tw.size()));
    result.n_points = static_cast<int>(tw.size());
    result.window_begin = tw.front();
    result.window_end = t_last;
    return result;
}

std::optional<BlowupFit> estimate_blowup_time(const Trajectory& traj, double alpha,
                                              double mu) {
    std::vector<double> t, v;
    t.reserve(traj.samples.size());
    v.reserve(traj.samples.size());
    for (std::size_t i = 0; i < traj.samples.size(); ++i) {
        const ShellState s = traj.state(i);
        t.push_back(s.t);
        v.push_back(std::sqrt(sobolev_norm_sq(s, alpha, mu)));
    }
    // Trajectories must show three decades of norm growth before a fit is
    // attempted; bare series need only a fittable decade.
    return fit_power_blowup(t, v, 1e3);
}

double obukhov_flux(const ModelParams& params, const ShellState& state, int j) {
    if (params.kind != ModelKind::Obukhov)
        throw std::invalid_argument("obukhov_flux: Obukhov kind required");
    if (j < state.j0 || j > state.last_shell())
        throw std::out_of_range("obukhov_flux: shell index outside truncation");
    const int i = j - state.j0;
    const double prev = (i > 0) ? state.a[i - 1] : 0.0;
    double flux = std::pow(params.lambda, j) * prev * state.a[i] * state.a[i];
    if (params.viscosity && params.viscosity->nu > 0.0) {
        for (int l = i; l < state.n_shells(); ++l) {
            const double nu_l = params.viscosity->nu *
                                std::pow(params.lambda, params.viscosity->exponent * (state.j0 + l));
            flux -= nu_l * state.a[l] * state.a[l];
        }
    }
    return std::cbrt(params.lambda) * flux;
}

double obukhov_powerlaw_amplitude(double lambda, double flux, int j) {
    if (!(lambda > 1.0))
        throw std::invalid_argument("obukhov_powerlaw_amplitude: lambda > 1 required");
    if (flux < 0.0)
        throw std::invalid_argument("obukhov_powerlaw_amplitude: flux >= 0 required");
    return std::pow(lambda, -2.0 / 9.0) * std::cbrt(flux) * std::pow(lambda, -j / 3.0);
}

ShellState obukhov_powerlaw_state(const ModelParams& params, double flux) {
    if (params.kind != ModelKind::Obukhov)
        throw std::invalid_argument("obukhov_powerlaw_state: Obukhov kind required");
    ShellState state;
    state.t = 0.0;
    state.j0 = params.j0;
    state.a.resize(params.n_shells);
    for (int i = 0; i < params.n_shells; ++i)
        state.a[i] = obukhov_powerlaw_amplitude(params.lambda, flux, params.j0 + i);
    return state;
}

bool cascade_criterion(const ModelParams& params, const ShellState& state, int l) {
    if (params.kind != ModelKind::Obukhov)
        throw std::invalid_argument("cascade_criterion: Obukhov kind required");
    if (l < state.j0 || l > state.last_shell())
        throw std::out_of_range("cascade_criterion: shell index outside truncation");
    const double nu_next =
        params.viscosity
            ? params.viscosity->nu * std::pow(params.lambda, params.viscosity->exponent * (l + 1))
            : 0.0;
    return std::pow(params.lambda, l + 1) * state.a[l - state.j0] > nu_next;
}

bool powerlaw_positivity_exponent_ok(double beta) { return beta <= -1.0 / 3.0; }

ShellState seed_state(const ModelParams& params, int start_shell, double q,
                      double min_energy) {
    if (start_shell < params.j0 || start_shell > params.last_shell())
        throw std::out_of_range("seed_state: start shell outside truncation");
    if (!(q > 0.0) || !(q < 1.0)) throw std::invalid_argument("seed_state: q in (0, 1) required");
    ShellState state;
    state.t = 0.0;
    state.j0 = params.j0;
    state.a = ArrayXd::Zero(params.n_shells);
    state.a[start_shell - params.j0] =
        std::sqrt(std::max(std::pow(q, start_shell), min_energy));
    return state;
}

std::optional<FloorSearch> find_cascade_floor(const ModelParams& params,
                                              const BlowupConstants& c,
                                              const IntegratorConfig& config,
                                              int min_levels, int j_max) {
    for (int J = params.j0; J <= j_max; ++J) {
        const int k_max = (params.last_shell() - 4) - J;
        if (k_max < min_levels) break;  // deeper starts cannot resolve enough levels
        IntegratorConfig cfg = config;
        cfg.events.clear();
        for (int k = 1; k <= k_max; ++k)
            cfg.events.push_back(EventSpec{J + k, std::pow(c.q, J + k), true});
        const ShellState initial = seed_state(params, J, c.q);
        Trajectory traj = integrate(params, initial, cfg);
        CrossingReport report = verify_cascade(traj, c, J);
        if (report.resolved_depth() >= min_levels && report.all_resolved_satisfied() &&
            report.cumulative_satisfied()) {
            return FloorSearch{J, std::move(report), std::move(traj)};
        }
    }
    return std::nullopt;
}

}  // namespace dyad
