#include "dyad/burgers.hpp"

#include "dyad/integrator.hpp"
#include "dyad/special.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

using namespace dyad;
using namespace dyad::burgers;

namespace {

Profile flat_bottom_profile() {
    // f' == -1 to eighth order around the origin: a whole stretch of
    // minimizers within 1e-8 of each other.
    Profile p;
    p.f = [](double e) { return -e * std::exp(-std::pow(e, 8.0)); };
    p.halfwidth = 4.0;
    return p;
}

Profile quartic_profile() {
    // f'''(0) = 0: degenerate cubic phase at the shock point.
    Profile p;
    p.f = [](double e) { return -e * std::exp(-std::pow(e, 4.0)); };
    p.halfwidth = 4.0;
    return p;
}

}  // namespace

TEST_CASE("canonical profile derivative anchors") {
    const Profile p = canonical_profile();
    CHECK(p.deriv(0.0) == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(p.deriv2(0.0) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(p.deriv3(0.0) == doctest::Approx(6.0).epsilon(1e-15));

    // Finite-difference fallbacks agree with the analytic evaluators.
    Profile fd;
    fd.f = p.f;
    fd.halfwidth = p.halfwidth;
    for (double e : {-1.3, -0.2, 0.0, 0.4, 2.0}) {
        CHECK(fd.deriv(e) == doctest::Approx(p.deriv(e)).epsilon(1e-8));
        CHECK(fd.deriv2(e) == doctest::Approx(p.deriv2(e)).epsilon(1e-5));
        CHECK(fd.deriv3(e) == doctest::Approx(p.deriv3(e)).epsilon(1e-4));
    }
}

TEST_CASE("characteristics reduce to the profile at t = 0") {
    const Profile p = canonical_profile();
    for (double x : {-2.0, -0.5, 0.0, 0.7, 3.1}) {
        const auto roots = characteristics_solution(p, x, 0.0);
        REQUIRE(roots.size() == 1);
        CHECK(roots[0].u == doctest::Approx(p.f(x)).epsilon(1e-12));
    }
}

TEST_CASE("linear profile pins the origin") {
    Profile lin;
    lin.f = [](double e) { return -e; };
    lin.halfwidth = 2.0;
    const auto roots = characteristics_solution(lin, 0.0, 0.5);
    REQUIRE(roots.size() == 1);
    CHECK(std::abs(roots[0].eta) <= 1e-12);
    CHECK(std::abs(roots[0].u) <= 1e-12);
}

TEST_CASE("pre-shock root agrees with a Newton continuation") {
    const Profile p = canonical_profile();
    const auto roots = characteristics_solution(p, 0.001, 0.99);
    REQUIRE(roots.size() == 1);
    const double eta_ref = oracles::newton_continuation_eta(
        p.f, [&p](double e) { return p.deriv(e); }, 0.001, 0.99);
    CHECK(std::abs(roots[0].eta - eta_ref) <= 1e-10);
    CHECK(std::abs(roots[0].u - p.f(eta_ref)) <= 1e-10);
}

TEST_CASE("the fold produces three branches after the shock") {
    const Profile p = canonical_profile();
    const auto roots = characteristics_solution(p, 0.0, 1.5);
    REQUIRE(roots.size() == 3);
    // x = 0, t = 1.5: eta (1 - 1.5 e^{-eta^2}) = 0.
    const double eta_side = std::sqrt(std::log(1.5));
    CHECK(roots[0].eta == doctest::Approx(-eta_side).epsilon(1e-10));
    CHECK(std::abs(roots[1].eta) <= 1e-10);
    CHECK(roots[2].eta == doctest::Approx(eta_side).epsilon(1e-10));
    CHECK(roots[2].u == doctest::Approx(p.f(eta_side)).epsilon(1e-10));
}

TEST_CASE("shock time of the canonical profile") {
    const ShockInfo s = shock_time(canonical_profile());
    REQUIRE(s.has_shock);
    CHECK(std::abs(s.t_star - 1.0) <= 1e-8);
    CHECK(std::abs(s.eta0) <= 1e-8);
    CHECK_FALSE(s.tie);
}

TEST_CASE("monotone profiles never shock") {
    Profile mono;
    mono.f = [](double e) { return std::tanh(e); };
    mono.halfwidth = 6.0;
    const ShockInfo s = shock_time(mono);
    CHECK_FALSE(s.has_shock);
}

TEST_CASE("flat slope minimum is reported as a tie") {
    const ShockInfo s = shock_time(flat_bottom_profile());
    REQUIRE(s.has_shock);
    CHECK(std::abs(s.t_star - 1.0) <= 1e-6);
    CHECK(s.tie);
}

TEST_CASE("max slope grows like the slope-equation solution") {
    const Profile p = canonical_profile();
    // Along the steepest characteristic zeta(t) = -1 / (1 - t).
    std::vector<double> lx, ly;
    for (double t : {0.80, 0.84, 0.88, 0.92, 0.96, 0.99}) {
        const double m = max_slope(p, t);
        CHECK(m == doctest::Approx(1.0 / (1.0 - t)).epsilon(1e-6));
        lx.push_back(std::log(1.0 - t));
        ly.push_back(std::log(m));
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
    CHECK(std::abs(-slope - 1.0) <= 0.05);
}

TEST_CASE("fourier coefficients at t = 0 match the gaussian transform") {
    const Profile p = canonical_profile();
    for (double k : {0.5, 2.0, 6.0}) {
        const Complex got = fourier_coefficient(p, k, 0.0);
        const Complex want{0.0, k * std::exp(-k * k / 4.0) / (4.0 * std::sqrt(M_PI))};
        CHECK(std::abs(got - want) <= 1e-6 * std::abs(want));
    }
}

TEST_CASE("reality and oddness of the spectrum") {
    const Profile p = canonical_profile();
    for (double k : {3.0, 40.0}) {
        const QuadResult plus = fourier_coefficient_detailed(p, k, 0.7);
        const QuadResult minus = fourier_coefficient_detailed(p, -k, 0.7);
        CHECK(std::abs(minus.value - std::conj(plus.value)) <=
              10.0 * (plus.abs_err + minus.abs_err) + 1e-14);
        // Odd real profiles have purely imaginary coefficients.
        CHECK(std::abs(plus.value.real()) <= 10.0 * plus.abs_err + 1e-14);
    }
}

TEST_CASE("k = 0 is outside the formula's domain") {
    CHECK_THROWS_AS(fourier_coefficient(canonical_profile(), 0.0, 0.5), std::domain_error);
}

TEST_CASE("refining the panels moves the value less than the reported error") {
    const Profile p = canonical_profile();
    for (double k : {7.0, 90.0}) {
        const QuadResult coarse = fourier_coefficient_detailed(p, k, 1.0, 1e-6);
        const QuadResult fine = fourier_coefficient_detailed(p, k, 1.0, 1e-6 / 16.0);
        CHECK(coarse.converged);
        CHECK(std::abs(coarse.value - fine.value) <= coarse.abs_err);
    }
}

TEST_CASE("airy constant from the gamma route matches lobe-summed quadrature") {
    CHECK(std::abs(gamma_lanczos(0.5) - std::sqrt(M_PI)) <= 1e-14);
    const double by_integral = oracles::airy_zero_by_quadrature();
    CHECK(std::abs(airy_ai_zero() - by_integral) <= 5e-8);
    CHECK(airy_ai_zero() == doctest::Approx(0.355028).epsilon(1e-5));
}

TEST_CASE("stationary phase asymptote at the canonical shock") {
    const Profile p = canonical_profile();
    for (double k : {50.0, 128.0}) {
        const Complex got = stationary_phase_asymptote(p, k, 1.0);
        const Complex want{0.0, std::pow(3.0, -1.0 / 3.0) * airy_ai_zero() *
                                    std::pow(k, -4.0 / 3.0)};
        CHECK(std::abs(got - want) <= 1e-6 * std::abs(want));
    }
    // |asymptote| obeys the k^{-4/3} power law exactly.
    const double r = std::abs(stationary_phase_asymptote(p, 160.0, 1.0)) /
                     std::abs(stationary_phase_asymptote(p, 80.0, 1.0));
    CHECK(r == doctest::Approx(std::pow(2.0, -4.0 / 3.0)).epsilon(1e-10));
}

TEST_CASE("quadrature approaches the asymptote at large k") {
    const Profile p = canonical_profile();
    for (double k : {50.0, 100.0, 200.0}) {
        const Complex exact = fourier_coefficient(p, k, 1.0);
        const Complex asym = stationary_phase_asymptote(p, k, 1.0);
        CHECK(std::abs(std::abs(exact) - std::abs(asym)) <= 0.10 * std::abs(asym));
    }
}

TEST_CASE("degenerate cubic phase is rejected") {
    CHECK_THROWS_AS(stationary_phase_asymptote(quartic_profile(), 50.0, 1.0),
                    std::domain_error);
}

TEST_CASE("spectrum norm integral and decay fit on k^-2") {
    std::vector<SpectrumSample> samples;
    const double k_max = 1e3;
    const int n = 361;
    for (int i = 0; i < n; ++i) {
        const double k = std::pow(10.0, 3.0 * i / (n - 1.0));
        samples.push_back({k, std::pow(k, -2.0)});
    }
    const auto result = continuum_sobolev_norm_sq(samples, 1.0);
    REQUIRE(result.has_value());
    const double analytic = (1.0 - std::pow(k_max, -3.0)) / 3.0 + (1.0 - 1.0 / k_max);
    CHECK(result->integral == doctest::Approx(analytic).epsilon(5e-3));
    CHECK(result->p_hat == doctest::Approx(2.0).epsilon(1e-9));
    CHECK_FALSE(result->diverges);  // alpha = 1 < (2p - 1)/2 = 3/2
}

TEST_CASE("divergence classifier boundaries are exact") {
    // p = 4/3: divergent exactly for alpha >= 5/6.
    CHECK_FALSE(halpha_diverges(4.0 / 3.0, 0.5));
    CHECK_FALSE(halpha_diverges(4.0 / 3.0, 0.8));
    CHECK(halpha_diverges(4.0 / 3.0, 5.0 / 6.0));
    CHECK(halpha_diverges(4.0 / 3.0, 0.84));
    CHECK(halpha_diverges(4.0 / 3.0, 2.0));
    // p = 1: divergent exactly for alpha >= 1/2.
    CHECK_FALSE(halpha_diverges(1.0, 0.3));
    CHECK_FALSE(halpha_diverges(1.0, 0.49));
    CHECK(halpha_diverges(1.0, 0.5));
    CHECK(halpha_diverges(1.0, 0.51));
}

TEST_CASE("too few spectrum samples yield no estimate") {
    std::vector<SpectrumSample> samples = {{1.0, 1.0}, {2.0, 0.25}, {4.0, 0.06}};
    CHECK_FALSE(continuum_sobolev_norm_sq(samples, 1.0).has_value());
}

TEST_CASE("galerkin convolution on a single seeded mode") {
    SpectralField field;
    field.j0 = 0;
    field.v = Eigen::ArrayXd::Zero(4);
    field.v[0] = 1.0;  // v_1
    const Eigen::ArrayXd d = galerkin_rhs(field);
    CHECK(d[0] == 0.0);                                  // dv_1/dt
    CHECK(d[1] == doctest::Approx(2.0).epsilon(1e-15));  // k_2 v_1^2
    CHECK(d[2] == 0.0);
    CHECK(d[3] == 0.0);

    SpectralField zero;
    zero.j0 = 0;
    zero.v = Eigen::ArrayXd::Zero(6);
    CHECK(galerkin_rhs(zero).abs().maxCoeff() == 0.0);
}

TEST_CASE("truncated convolution conserves energy algebraically") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int L : {2, 5, 8}) {
        for (int trial = 0; trial < 20; ++trial) {
            SpectralField field;
            field.j0 = 0;
            field.v = Eigen::ArrayXd::Zero(L);
            for (int i = 0; i < L; ++i) field.v[i] = dist(rng);
            const Eigen::ArrayXd d = galerkin_rhs(field);
            double de = 0.0, scale = 0.0;
            for (int i = 0; i < L; ++i) {
                de += 2.0 * field.v[i] * d[i];
                scale += std::abs(2.0 * field.v[i] * d[i]);
            }
            CHECK(std::abs(de) <= 1e-13 * std::max(1.0, scale));
        }
    }
}

TEST_CASE("galerkin solution tracks characteristics before the shock") {
    // w solves w_t + (w^2)_x = 0; u = 2w solves u_t + u u_x = 0 with
    // f = 2 w0 = -0.5 sin(eta), so t* = 2 and we compare at t = 1 = 0.5 t*.
    const int L = 256;
    SpectralField field;
    field.j0 = 0;
    field.v = Eigen::ArrayXd::Zero(L);
    field.v[0] = 0.125;  // w0 = -0.25 sin x

    OdeRhs rhs_fn = [&](double, const ArrayXd& v, ArrayXd& dv) {
        SpectralField f;
        f.j0 = field.j0;
        f.v = v;
        dv = galerkin_rhs(f);
    };
    IntegratorConfig cfg;
    cfg.rel_tol = 1e-10;
    cfg.abs_tol = 1e-14;
    cfg.t_end = 1.0;
    cfg.record_stride = 1000000;  // endpoint only
    const Trajectory traj = integrate_system(rhs_fn, field.v, 0.0, cfg);
    REQUIRE(traj.termination == Termination::ReachedTEnd);

    SpectralField evolved;
    evolved.j0 = 0;
    evolved.v = traj.samples.back().y;

    Profile sine = profile_by_name("sine", 0.5);
    for (double x : {0.3, 0.9, 1.4, 2.2, 2.9}) {
        const auto roots = characteristics_solution(sine, x, 1.0);
        REQUIRE(roots.size() == 1);
        const double w_char = 0.5 * roots[0].u;
        CHECK(std::abs(field_value(evolved, x) - w_char) <= 1e-6);
    }

    // Truncation drift of the quadratic invariant stays tiny before t*.
    const double e0 = 0.125 * 0.125;
    CHECK(std::abs(field_energy(evolved) - e0) <= 1e-8);
}

TEST_CASE("dyadic triads survive exactly and nothing else does") {
    const TriadReport report = dyadic_triad_check(10);
    CHECK(report.all_match);
    CHECK(report.no_mixed_power_sums);
    REQUIRE(report.levels.size() == 10);
    for (const TriadLevel& level : report.levels) {
        CHECK(level.coeff_prev_sq == 1);
        CHECK(level.coeff_cross == -2);
        CHECK(level.match);
    }
    // l = 2: ordered pairs (1,1), (4,-2), (-2,4).
    CHECK(report.levels[0].terms.size() == 3);
}
