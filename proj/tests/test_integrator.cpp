#include "dyad/integrator.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace dyad;

namespace {

OdeRhs scalar_rhs(double (*f)(double)) {
    return [f](double, const ArrayXd& y, ArrayXd& dy) {
        dy.resize(y.size());
        for (int i = 0; i < y.size(); ++i) dy[i] = f(y[i]);
    };
}

double neg(double y) { return -y; }
double neg_sq(double y) { return -y * y; }

ArrayXd scalar1(double v) {
    ArrayXd y(1);
    y[0] = v;
    return y;
}

Trajectory run_two_shell(double rel_tol, double t_end) {
    const ModelParams params = ModelParams::generic(2.0, 0, 2);
    ShellState init;
    init.j0 = 0;
    init.a.resize(2);
    init.a[0] = 1.0;
    init.a[1] = 0.5;
    IntegratorConfig cfg;
    cfg.rel_tol = rel_tol;
    cfg.abs_tol = 1e-14;
    cfg.t_end = t_end;
    return integrate(params, init, cfg);
}

ArrayXd two_shell_reference(double t_end, double h) {
    ArrayXd y(2);
    y[0] = 1.0;
    y[1] = 0.5;
    auto f = [](double, const ArrayXd& a) {
        ArrayXd d(2);
        d[0] = -2.0 * a[0] * a[1];
        d[1] = 2.0 * a[0] * a[0];
        return d;
    };
    return oracles::rk4_integrate(f, y, 0.0, t_end, h);
}

}  // namespace

TEST_CASE("exponential decay hits the closed form") {
    IntegratorConfig cfg;
    cfg.rel_tol = 1e-10;
    cfg.abs_tol = 1e-14;
    cfg.t_end = 1.0;
    const Trajectory traj = integrate_system(scalar_rhs(neg), scalar1(1.0), 0.0, cfg);
    CHECK(traj.termination == Termination::ReachedTEnd);
    CHECK(traj.samples.back().t == 1.0);
    CHECK(std::abs(traj.samples.back().y[0] - std::exp(-1.0)) <= 1e-10);
}

TEST_CASE("two-shell endpoint matches a fine fixed-step reference") {
    const Trajectory traj = run_two_shell(1e-10, 0.5);
    const ArrayXd ref = two_shell_reference(0.5, 1e-6);
    CHECK((traj.samples.back().y - ref).abs().maxCoeff() <= 1e-8);
}

TEST_CASE("tightening the tolerance tightens the endpoint error") {
    // Per-step error control gives err ~ tol^{5/6}; a 4x tolerance ladder
    // must cut the endpoint error by at least 2x per rung (and does so with
    // margin once step-count quantization is averaged out).
    const ArrayXd ref = two_shell_reference(2.0, 1e-6);
    double prev_err = -1.0;
    for (double tol : {1e-4, 2.5e-5, 6.25e-6, 1.5625e-6, 3.90625e-7}) {
        const Trajectory traj = run_two_shell(tol, 2.0);
        const double err = (traj.samples.back().y - ref).abs().maxCoeff();
        if (prev_err > 0.0) CHECK(prev_err / err >= 2.0);
        prev_err = err;
    }
}

TEST_CASE("slope equation stops at the singularity") {
    double prev_stop = 0.0;
    for (double stop : {1e4, 1e6, 1e8}) {
        IntegratorConfig cfg;
        cfg.rel_tol = 1e-10;
        cfg.abs_tol = 1e-12;
        cfg.t_end = 10.0;
        cfg.stop_norm = stop;
        const Trajectory traj = integrate_system(scalar_rhs(neg_sq), scalar1(-2.0), 0.0, cfg);
        CHECK(traj.termination == Termination::BlowupStop);
        const double t_stop = traj.samples.back().t;
        // zeta(t) = -2 / (1 - 2 t): |zeta| = S at t = 1/2 - 1/S.
        CHECK(t_stop < 0.5);
        CHECK(0.5 - t_stop <= 1.5 / stop);
        CHECK(t_stop > prev_stop);
        prev_stop = t_stop;
    }
}

TEST_CASE("energy drift stays inside the step-count budget") {
    const ModelParams params = ModelParams::generic(2.0, 0, 12);
    ShellState init;
    init.j0 = 0;
    init.a = ArrayXd::Zero(12);
    init.a[0] = 1.0;
    IntegratorConfig cfg;
    cfg.rel_tol = 1e-9;
    cfg.abs_tol = 1e-12;
    cfg.t_end = 1.5;
    const Trajectory traj = integrate(params, init, cfg);
    const double e0 = energy(traj.state(0));
    double drift = 0.0;
    for (std::size_t i = 0; i < traj.samples.size(); ++i)
        drift = std::max(drift, std::abs(energy(traj.state(i)) - e0));
    const double budget =
        100.0 * cfg.rel_tol * std::sqrt(static_cast<double>(traj.stats.accepted)) * e0;
    CHECK(drift <= budget);
}

TEST_CASE("events are located and bracketed") {
    const ModelParams params = ModelParams::generic(2.0, 0, 10);
    ShellState init;
    init.j0 = 0;
    init.a = ArrayXd::Zero(10);
    init.a[0] = 1.0;
    IntegratorConfig cfg;
    cfg.rel_tol = 1e-10;
    cfg.abs_tol = 1e-13;
    cfg.t_end = 2.0;
    for (int j = 1; j <= 4; ++j) cfg.events.push_back(EventSpec{j, std::pow(0.5, j), true});
    const Trajectory traj = integrate(params, init, cfg);
    REQUIRE(traj.events.size() == 4);

    for (const EventRecord& ev : traj.events) {
        const Sample& at = traj.samples.at(ev.sample_index);
        CHECK(at.t == ev.t);
        const ShellState here{at.t, params.j0, at.y};
        CHECK(tail_energy(here, ev.shell) >= ev.threshold - 1e-9 * ev.threshold);
        // Strictly below the threshold a moment earlier.
        if (ev.sample_index > 0) {
            const ShellState before = traj.state(ev.sample_index - 1);
            CHECK(tail_energy(before, ev.shell) < ev.threshold);
        }
    }

    // Sample times strictly increase and event samples live inside the run.
    for (std::size_t i = 1; i < traj.samples.size(); ++i)
        CHECK(traj.samples[i].t > traj.samples[i - 1].t);
}

TEST_CASE("crossing times: immediate, never, and ordered") {
    const ModelParams params = ModelParams::generic(2.0, 0, 10);
    ShellState init;
    init.j0 = 0;
    init.a = ArrayXd::Zero(10);
    init.a[0] = 1.0;
    IntegratorConfig cfg;
    cfg.rel_tol = 1e-10;
    cfg.abs_tol = 1e-13;
    cfg.t_end = 2.5;
    const Trajectory traj = integrate(params, init, cfg);

    std::vector<std::pair<int, double>> thresholds;
    thresholds.emplace_back(0, 0.0);   // already crossed at the start
    thresholds.emplace_back(1, 10.0);  // above total energy: never
    for (int j = 1; j <= 5; ++j) thresholds.emplace_back(j, 0.05);
    const auto times = crossing_times(traj, thresholds);

    CHECK(times[0].has_value());
    CHECK(*times[0] == traj.samples.front().t);
    CHECK_FALSE(times[1].has_value());
    for (int i = 3; i < 7; ++i) {
        REQUIRE(times[i].has_value());
        REQUIRE(times[i - 1].has_value());
        CHECK(*times[i] > *times[i - 1]);
    }
}

TEST_CASE("event-free crossing lookup agrees with the event locator") {
    const ModelParams params = ModelParams::generic(2.0, 0, 10);
    ShellState init;
    init.j0 = 0;
    init.a = ArrayXd::Zero(10);
    init.a[0] = 1.0;

    IntegratorConfig with_events;
    with_events.rel_tol = 1e-11;
    with_events.abs_tol = 1e-13;
    with_events.t_end = 2.0;
    with_events.events.push_back(EventSpec{3, 0.125, true});
    const Trajectory a = integrate(params, init, with_events);

    IntegratorConfig plain = with_events;
    plain.events.clear();
    const Trajectory b = integrate(params, init, plain);

    const auto ta = crossing_times(a, {{3, 0.125}});
    const auto tb = crossing_times(b, {{3, 0.125}});
    REQUIRE(ta[0].has_value());
    REQUIRE(tb[0].has_value());
    CHECK(std::abs(*ta[0] - *tb[0]) <= 1e-8 * std::max(1.0, *ta[0]));
}

TEST_CASE("interpolation reproduces recorded samples and between-sample states") {
    const Trajectory traj = run_two_shell(1e-10, 0.5);
    const Sample& mid = traj.samples[traj.samples.size() / 2];
    CHECK((traj.interpolate(mid.t) - mid.y).abs().maxCoeff() <= 1e-14);

    // Cubic Hermite between accepted steps is O(h^4); at these tolerances the
    // steps are coarse, so mid-step values are good to ~1e-7, not to rel_tol.
    const Sample& s0 = traj.samples[traj.samples.size() / 2];
    const Sample& s1 = traj.samples[traj.samples.size() / 2 + 1];
    const double tm = 0.5 * (s0.t + s1.t);
    const ArrayXd ref = two_shell_reference(tm, 1e-6);
    CHECK((traj.interpolate(tm) - ref).abs().maxCoeff() <= 1e-6);
}

TEST_CASE("contract violations are rejected up front") {
    const ModelParams params = ModelParams::generic(2.0, 0, 4);
    ShellState wrong;
    wrong.j0 = 0;
    wrong.a = ArrayXd::Zero(3);
    IntegratorConfig cfg;
    cfg.t_end = 1.0;
    CHECK_THROWS_AS(integrate(params, wrong, cfg), std::invalid_argument);

    IntegratorConfig bad;
    bad.t_end = -1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    IntegratorConfig bad2;
    bad2.t_end = 1.0;
    bad2.stop_norm = 0.5;
    CHECK_THROWS_AS(bad2.validate(), std::invalid_argument);
}
