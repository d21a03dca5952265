#pragma once

#include "dyad/shell_model.hpp"

#include <functional>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

namespace dyad {

/// Threshold crossing to watch during integration. The event function is the
/// tail energy over shells >= shell minus threshold; upward means crossing
/// from below.
struct EventSpec {
    int shell = 0;
    double threshold = 0.0;
    bool upward = true;
};

struct IntegratorConfig {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double max_step = 0.0;   // 0 = no cap
    double t_end = 1.0;
    double stop_norm = 1e12; // halt once max|a_j| exceeds this
    // Step-underflow floor, relative to max(1, |t|). Underflow is the
    // blow-up signal for an explicit method, reported as BlowupStop.
    double min_step_scale = 1e-11;
    int record_stride = 1;   // record every n-th accepted step
    std::vector<EventSpec> events;

    void validate() const;
};

enum class Termination {
    ReachedTEnd,
    BlowupStop,  // stop_norm exceeded, or step size underflow near blow-up
    Overflow,    // non-finite state or amplitude beyond the overflow guard
};

const char* to_string(Termination reason);

struct Sample {
    double t;
    ArrayXd y;
    ArrayXd dy;
};

struct EventRecord {
    double t;
    int shell;
    double threshold;
    bool upward;
    std::size_t sample_index;  // sample recorded at the event time
};

struct StepStats {
    long accepted = 0;
    long rejected = 0;
    long rhs_evals = 0;
};

/// Immutable record of one integration: samples at recorded accepted steps
/// and at event times (strictly increasing in t), event log, and the reason
/// the run ended.
struct Trajectory {
    ModelParams params;  // identity of the shell model (shell runs only)
    IntegratorConfig config;
    std::vector<Sample> samples;
    std::vector<EventRecord> events;
    Termination termination = Termination::ReachedTEnd;
    StepStats stats;
    bool is_shell_run = false;

    ShellState state(std::size_t i) const;
    /// Cubic Hermite interpolation between the recorded samples bracketing t.
    ArrayXd interpolate(double t) const;
    ShellState interpolate_state(double t) const;
    double t_begin() const { return samples.front().t; }
    double t_final() const { return samples.back().t; }
};

using OdeRhs = std::function<void(double, const ArrayXd&, ArrayXd&)>;
using EventFn = std::function<double(double, const ArrayXd&)>;

struct GenericEvent {
    EventFn fn;
    bool upward = true;
    int shell = std::numeric_limits<int>::min();  // bookkeeping only
    double threshold = 0.0;
};

/// Adaptive Dormand-Prince 5(4) with PI step control. Events are located by
/// bisection on cubic Hermite dense output to 1e-12 * max(1, |t|) accuracy;
/// a sample is inserted at each event time. config.events is ignored here
/// (no shell semantics); pass GenericEvents instead.
Trajectory integrate_system(const OdeRhs& rhs, const ArrayXd& y0, double t0,
                            const IntegratorConfig& config,
                            const std::vector<GenericEvent>& events = {});

/// Shell-model front end: builds the RHS from params and tail-energy event
/// functions from config.events.
Trajectory integrate(const ModelParams& params, const ShellState& initial,
                     const IntegratorConfig& config);

/// First time tail_energy(state(t), j) >= theta for each requested (j, theta),
/// or nullopt if the trajectory never crosses. Uses event records when an
/// exact match was watched, otherwise bisection on the dense samples.
std::vector<std::optional<double>> crossing_times(
    const Trajectory& traj, const std::vector<std::pair<int, double>>& thresholds);

/// Cubic Hermite value at t in [s0.t, s1.t].
ArrayXd hermite_interpolate(const Sample& s0, const Sample& s1, double t);

}  // namespace dyad
