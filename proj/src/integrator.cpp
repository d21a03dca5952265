#include "dyad/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dyad {

namespace {

// Dormand-Prince 5(4) coefficients. FSAL: the 7th stage is the derivative at
// the accepted point.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                 b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
// b - bhat, the embedded error weights.
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

constexpr long kStepBudget = 100'000'000;

struct ArmedEvent {
    GenericEvent spec;
    bool fired = false;
};

double error_norm(const ArrayXd& err, const ArrayXd& y0, const ArrayXd& y1, double atol,
                  double rtol) {
    double sum = 0.0;
    for (int i = 0; i < err.size(); ++i) {
        const double sc = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        const double r = err[i] / sc;
        sum += r * r;
    }
    return std::sqrt(sum / static_cast<double>(err.size()));
}

double scaled_rms(const ArrayXd& v, const ArrayXd& ref, double atol, double rtol) {
    double sum = 0.0;
    for (int i = 0; i < v.size(); ++i) {
        const double sc = atol + rtol * std::abs(ref[i]);
        const double r = v[i] / sc;
        sum += r * r;
    }
    return std::sqrt(sum / static_cast<double>(v.size()));
}

// Hairer-style automatic initial step.
double initial_step(const OdeRhs& rhs, double t0, const ArrayXd& y0, const ArrayXd& f0,
                    const IntegratorConfig& cfg) {
    const double d0 = scaled_rms(y0, y0, cfg.abs_tol, cfg.rel_tol);
    const double d1 = scaled_rms(f0, y0, cfg.abs_tol, cfg.rel_tol);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, cfg.t_end - t0);
    ArrayXd y1 = y0 + h0 * f0;
    ArrayXd f1(y0.size());
    double d2 = 0.0;
    bool trial_ok = true;
    try {
        rhs(t0 + h0, y1, f1);
        d2 = scaled_rms(ArrayXd(f1 - f0), y0, cfg.abs_tol, cfg.rel_tol) / h0;
        trial_ok = std::isfinite(d2);
    } catch (const NumericOverflow&) {
        trial_ok = false;
    }
    double h1;
    if (!trial_ok || std::max(d1, d2) <= 1e-15) {
        h1 = std::max(1e-6, h0 * 1e-3);
    } else {
        h1 = std::pow(0.01 / std::max(d1, d2), 0.2);
    }
    double h = std::min({100.0 * h0, h1, cfg.t_end - t0});
    if (cfg.max_step > 0.0) h = std::min(h, cfg.max_step);
    return std::max(h, 1e-300);
}

}  // namespace

void IntegratorConfig::validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
        throw std::invalid_argument("IntegratorConfig: tolerances must be positive");
    if (!(t_end > 0.0)) throw std::invalid_argument("IntegratorConfig: t_end > 0 required");
    if (!(stop_norm > 1.0)) throw std::invalid_argument("IntegratorConfig: stop_norm > 1 required");
    if (max_step < 0.0) throw std::invalid_argument("IntegratorConfig: max_step >= 0 required");
    if (record_stride < 1)
        throw std::invalid_argument("IntegratorConfig: record_stride >= 1 required");
    if (!(min_step_scale > 0.0))
        throw std::invalid_argument("IntegratorConfig: min_step_scale > 0 required");
}

const char* to_string(Termination reason) {
    switch (reason) {
        case Termination::ReachedTEnd: return "reached_t_end";
        case Termination::BlowupStop: return "blowup_stop";
        case Termination::Overflow: return "overflow";
    }
    return "?";
}

ArrayXd hermite_interpolate(const Sample& s0, const Sample& s1, double t) {
    const double h = s1.t - s0.t;
    if (h <= 0.0) return s1.y;
    const double s = (t - s0.t) / h;
    const double s2 = s * s, s3 = s2 * s;
    const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    const double h10 = s3 - 2.0 * s2 + s;
    const double h01 = -2.0 * s3 + 3.0 * s2;
    const double h11 = s3 - s2;
    return h00 * s0.y + (h10 * h) * s0.dy + h01 * s1.y + (h11 * h) * s1.dy;
}

ShellState Trajectory::state(std::size_t i) const {
    const Sample& s = samples.at(i);
    return ShellState{s.t, params.j0, s.y};
}

ArrayXd Trajectory::interpolate(double t) const {
    if (samples.empty()) throw std::out_of_range("Trajectory::interpolate: no samples");
    if (t <= samples.front().t) return samples.front().y;
    if (t >= samples.back().t) return samples.back().y;
    auto it = std::lower_bound(samples.begin(), samples.end(), t,
                               [](const Sample& s, double tv) { return s.t < tv; });
    const Sample& hi = *it;
    const Sample& lo = *(it - 1);
    return hermite_interpolate(lo, hi, t);
}

ShellState Trajectory::interpolate_state(double t) const {
    return ShellState{t, params.j0, interpolate(t)};
}

namespace {

class Recorder {
  public:
    Recorder(Trajectory& traj, int stride) : traj_(traj), stride_(std::max(stride, 1)) {}

    // Record unconditionally (initial point, events, final state).
    void force(double t, const ArrayXd& y, const ArrayXd& dy) {
        if (!traj_.samples.empty() && !(t > traj_.samples.back().t)) return;
        traj_.samples.push_back(Sample{t, y, dy});
    }

    void accepted(double t, const ArrayXd& y, const ArrayXd& dy) {
        ++count_;
        if (count_ % stride_ == 0) force(t, y, dy);
    }

    std::size_t last_index() const { return traj_.samples.size() - 1; }

  private:
    Trajectory& traj_;
    int stride_;
    long count_ = 0;
};

// Locate the first root of g (in the crossing direction) inside [s0.t, s1.t]
// by bisection on the Hermite interpolant.
double bisect_event(const Sample& s0, const Sample& s1, const EventFn& g, bool upward) {
    double lo = s0.t, hi = s1.t;
    const double tol = 1e-12 * std::max(1.0, std::abs(hi));
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        const double gm = g(mid, hermite_interpolate(s0, s1, mid));
        const bool crossed = upward ? (gm >= 0.0) : (gm <= 0.0);
        if (crossed)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

}  // namespace

Trajectory integrate_system(const OdeRhs& rhs, const ArrayXd& y0, double t0,
                            const IntegratorConfig& config,
                            const std::vector<GenericEvent>& events) {
    config.validate();
    if (y0.size() == 0) throw std::invalid_argument("integrate_system: empty state");
    if (!y0.isFinite().all())
        throw std::invalid_argument("integrate_system: non-finite initial state");

    Trajectory traj;
    traj.config = config;
    Recorder rec(traj, config.record_stride);

    const int n = static_cast<int>(y0.size());
    ArrayXd y = y0;
    double t = t0;

    ArrayXd f0(n), k2(n), k3(n), k4(n), k5(n), k6(n), f_new(n), y_stage(n), y_new(n), err(n);

    auto eval = [&](double tt, const ArrayXd& yy, ArrayXd& out) {
        rhs(tt, yy, out);
        ++traj.stats.rhs_evals;
    };

    // Initial derivative. A state already past the overflow guard is a
    // contract violation, not a blow-up event.
    eval(t, y, f0);
    rec.force(t, y, f0);

    std::vector<ArmedEvent> armed;
    armed.reserve(events.size());
    for (const auto& ev : events) armed.push_back(ArmedEvent{ev, false});

    // Events already in the crossed region fire at the first sample.
    for (auto& ae : armed) {
        const double g0 = ae.spec.fn(t, y);
        const bool crossed = ae.spec.upward ? (g0 >= 0.0) : (g0 <= 0.0);
        if (crossed) {
            ae.fired = true;
            traj.events.push_back(
                EventRecord{t, ae.spec.shell, ae.spec.threshold, ae.spec.upward, 0});
        }
    }

    if (y.abs().maxCoeff() >= config.stop_norm) {
        traj.termination = Termination::BlowupStop;
        return traj;
    }

    double h = initial_step(rhs, t, y, f0, config);
    double facold = 1e-4;
    constexpr double beta = 0.04, safe = 0.9, fac1 = 0.2, fac2 = 10.0;
    constexpr double expo1 = 0.2 - beta * 0.75;

    bool done = false;
    bool overflow_reject = false;
    while (!done) {
        if (traj.stats.accepted + traj.stats.rejected > kStepBudget)
            throw std::runtime_error("integrate_system: step budget exhausted");

        const double h_floor = config.min_step_scale * std::max(1.0, std::abs(t));
        bool last_step = false;
        if (t + h >= config.t_end) {
            h = config.t_end - t;
            last_step = true;
        }

        bool stage_ok = true;
        try {
            y_stage = y + h * (a21 * f0);
            eval(t + c2 * h, y_stage, k2);
            y_stage = y + h * (a31 * f0 + a32 * k2);
            eval(t + c3 * h, y_stage, k3);
            y_stage = y + h * (a41 * f0 + a42 * k2 + a43 * k3);
            eval(t + c4 * h, y_stage, k4);
            y_stage = y + h * (a51 * f0 + a52 * k2 + a53 * k3 + a54 * k4);
            eval(t + c5 * h, y_stage, k5);
            y_stage = y + h * (a61 * f0 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
            eval(t + h, y_stage, k6);
            y_new = y + h * (b1 * f0 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
            eval(t + h, y_new, f_new);
            err = h * (e1 * f0 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * f_new);
        } catch (const NumericOverflow&) {
            stage_ok = false;
        }
        if (stage_ok && (!y_new.isFinite().all() || !f_new.isFinite().all())) stage_ok = false;

        double err_norm_val = 2.0;  // forces rejection when stages failed
        if (stage_ok) {
            err_norm_val = error_norm(err, y, y_new, config.abs_tol, config.rel_tol);
            if (!std::isfinite(err_norm_val)) {
                stage_ok = false;
                err_norm_val = 2.0;
            }
        }

        if (err_norm_val <= 1.0) {
            // Accepted.
            overflow_reject = false;
            ++traj.stats.accepted;
            const double t_new = last_step ? config.t_end : t + h;
            const Sample left{t, y, f0};
            const Sample right{t_new, y_new, f_new};

            // Event location, in time order within the step.
            std::vector<std::pair<double, ArmedEvent*>> hits;
            for (auto& ae : armed) {
                if (ae.fired) continue;
                const double g1 = ae.spec.fn(t_new, y_new);
                const bool crossed = ae.spec.upward ? (g1 >= 0.0) : (g1 <= 0.0);
                if (!crossed) continue;
                hits.emplace_back(bisect_event(left, right, ae.spec.fn, ae.spec.upward), &ae);
            }
            std::sort(hits.begin(), hits.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            for (auto& [te, ae] : hits) {
                ae->fired = true;
                ArrayXd ye = hermite_interpolate(left, right, te);
                ArrayXd fe(n);
                try {
                    eval(te, ye, fe);
                } catch (const NumericOverflow&) {
                    fe.setZero();
                }
                rec.force(te, ye, fe);
                traj.events.push_back(EventRecord{te, ae->spec.shell, ae->spec.threshold,
                                                  ae->spec.upward, rec.last_index()});
            }

            rec.accepted(t_new, y_new, f_new);
            t = t_new;
            y.swap(y_new);
            f0.swap(f_new);  // FSAL

            if (y.abs().maxCoeff() >= config.stop_norm) {
                rec.force(t, y, f0);
                traj.termination = Termination::BlowupStop;
                done = true;
                break;
            }
            if (last_step) {
                rec.force(t, y, f0);
                traj.termination = Termination::ReachedTEnd;
                done = true;
                break;
            }

            const double fac11 = std::pow(err_norm_val, expo1);
            double fac = fac11 / std::pow(facold, beta);
            fac = std::max(1.0 / fac2, std::min(1.0 / fac1, fac / safe));
            double h_next = h / fac;
            facold = std::max(err_norm_val, 1e-4);
            if (config.max_step > 0.0) h_next = std::min(h_next, config.max_step);
            if (h_next < h_floor) {
                // Step-size underflow: the blow-up signal for an explicit method.
                rec.force(t, y, f0);
                traj.termination = Termination::BlowupStop;
                done = true;
                break;
            }
            h = h_next;
        } else {
            // Rejected.
            ++traj.stats.rejected;
            overflow_reject = !stage_ok;
            double h_next;
            if (stage_ok) {
                const double fac11 = std::pow(err_norm_val, expo1);
                h_next = h / std::min(1.0 / fac1, fac11 / safe);
            } else {
                h_next = 0.5 * h;
            }
            if (h_next < h_floor) {
                rec.force(t, y, f0);
                traj.termination =
                    overflow_reject ? Termination::Overflow : Termination::BlowupStop;
                done = true;
                break;
            }
            h = h_next;
        }
    }

    return traj;
}

Trajectory integrate(const ModelParams& params, const ShellState& initial,
                     const IntegratorConfig& config) {
    params.validate();
    config.validate();
    if (initial.j0 != params.j0 || initial.n_shells() != params.n_shells)
        throw std::invalid_argument("integrate: initial state does not conform to params");

    ShellRhs f(params);
    OdeRhs rhs_fn = [&f](double t, const ArrayXd& a, ArrayXd& dadt) { f(t, a, dadt); };

    std::vector<GenericEvent> events;
    events.reserve(config.events.size());
    for (const EventSpec& spec : config.events) {
        if (spec.shell < params.j0 || spec.shell > params.last_shell())
            throw std::out_of_range("integrate: event shell outside truncation");
        const int offset = spec.shell - params.j0;
        const double theta = spec.threshold;
        GenericEvent ev;
        ev.upward = spec.upward;
        ev.shell = spec.shell;
        ev.threshold = theta;
        ev.fn = [offset, theta](double, const ArrayXd& a) {
            return a.tail(a.size() - offset).square().sum() - theta;
        };
        events.push_back(std::move(ev));
    }

    Trajectory traj = integrate_system(rhs_fn, initial.a, initial.t, config, events);
    traj.params = params;
    traj.is_shell_run = true;
    return traj;
}

std::vector<std::optional<double>> crossing_times(
    const Trajectory& traj, const std::vector<std::pair<int, double>>& thresholds) {
    if (!traj.is_shell_run)
        throw std::invalid_argument("crossing_times: shell trajectories only");
    std::vector<std::optional<double>> out;
    out.reserve(thresholds.size());

    for (const auto& [shell, theta] : thresholds) {
        if (shell < traj.params.j0 || shell > traj.params.last_shell())
            throw std::out_of_range("crossing_times: shell outside truncation");
        const int offset = shell - traj.params.j0;
        auto tail_at = [&](const ArrayXd& y) {
            return y.tail(y.size() - offset).square().sum();
        };

        // Exact event record wins.
        const EventRecord* found = nullptr;
        for (const EventRecord& ev : traj.events) {
            if (ev.shell == shell && ev.upward && ev.threshold == theta) {
                found = &ev;
                break;
            }
        }
        if (found != nullptr) {
            out.emplace_back(found->t);
            continue;
        }

        if (tail_at(traj.samples.front().y) >= theta) {
            out.emplace_back(traj.samples.front().t);
            continue;
        }
        std::optional<double> when;
        for (std::size_t i = 1; i < traj.samples.size(); ++i) {
            if (tail_at(traj.samples[i].y) >= theta) {
                EventFn g = [&](double, const ArrayXd& y) { return tail_at(y) - theta; };
                when = bisect_event(traj.samples[i - 1], traj.samples[i], g, true);
                break;
            }
        }
        out.emplace_back(when);
    }
    return out;
}

}  // namespace dyad
