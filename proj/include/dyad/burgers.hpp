#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace dyad::burgers {

using Real = double;
using Complex = std::complex<double>;

/// Thrown when adaptive quadrature cannot meet the requested accuracy; the
/// achieved estimate rides along.
class AccuracyNotMet : public std::runtime_error {
  public:
    AccuracyNotMet(const std::string& what, Complex value, double abs_err)
        : std::runtime_error(what), value_(value), abs_err_(abs_err) {}
    Complex value() const { return value_; }
    double abs_err() const { return abs_err_; }

  private:
    Complex value_;
    double abs_err_;
};

/// Initial profile u(x, 0) = f(x) with derivative evaluators. Analytic
/// derivatives are used when supplied; otherwise central differences at
/// step 1e-5.
struct Profile {
    std::function<double(double)> f;
    std::function<double(double)> df;   // may be empty
    std::function<double(double)> d2f;  // may be empty
    std::function<double(double)> d3f;  // may be empty
    double halfwidth = 8.0;  // root-scan / quadrature window [-L, L]

    double value(double eta) const { return f(eta); }
    double deriv(double eta) const;
    double deriv2(double eta) const;
    double deriv3(double eta) const;
};

/// f(eta) = -eta exp(-eta^2): f'(0) = -1, f''(0) = 0, f'''(0) = 6.
Profile canonical_profile();

/// Odd profile by name for the CLI: "canonical", "linear_gaussian" (alias of
/// canonical), "sine" (periodic -amp sin(eta)). Throws on unknown names.
Profile profile_by_name(const std::string& name, double amplitude = 1.0);

struct CharacteristicRoot {
    double eta;
    double u;  // f(eta)
};

/// All solutions of x = eta + t f(eta); single-valued before the shock,
/// multi-valued after (every branch is returned, not the entropy solution).
std::vector<CharacteristicRoot> characteristics_solution(const Profile& p, double x,
                                                         double t);

/// max over eta of |f'(eta) / (1 + t f'(eta))| = max_x |du/dx| at time t.
double max_slope(const Profile& p, double t);

struct ShockInfo {
    bool has_shock = false;
    double t_star = 0.0;
    double eta0 = 0.0;
    bool tie = false;  // several minimizers of f' within 1e-8; eta0 is one of them
};

/// t* = -1 / min f' and the minimizer, by grid scan + golden-section with a
/// Newton polish on f'' when curvature information is usable. No shock when
/// f' >= 0 everywhere.
ShockInfo shock_time(const Profile& p);

struct QuadResult {
    Complex value{0.0, 0.0};
    double abs_err = 0.0;
    bool converged = false;
    long panels = 0;
};

/// u_hat(k, t) = (1 / (2 pi i k)) \int f'(eta) exp(-i k [eta + t f(eta)]) deta
/// by adaptive Gauss panels with phase-resolved panel sizing. Relative
/// accuracy target 1e-6 for k <= 500. k = 0 is a domain error.
QuadResult fourier_coefficient_detailed(const Profile& p, double k, double t,
                                        double rel_target = 1e-6);

/// Same, returning only the value; throws AccuracyNotMet when the target is
/// missed.
Complex fourier_coefficient(const Profile& p, double k, double t);

/// Stationary-phase limit of u_hat(k, t*) at a cubic-degenerate shock point:
/// (Ai(0) / (i k)) (2 / (k t f'''_0))^{1/3} f'(eta0) exp(-i k [eta0 + t f(eta0)]).
/// Throws std::domain_error when f'''(eta0) = 0.
Complex stationary_phase_asymptote(const Profile& p, double k, double t_star);

struct SpectrumSample {
    double k;
    double abs_u;  // |u_hat(k)|
};

struct SpectrumNorm {
    double integral;  // truncated \int (1 + k^{2 alpha}) |u_hat|^2 dk over the samples
    double p_hat;     // fitted decay exponent of |u_hat| ~ k^{-p}
    bool diverges;    // 2 alpha >= 2 p_hat - 1
};

/// Divergence is decided by the decay exponent alone.
bool halpha_diverges(double decay_p, double alpha);

/// Trapezoid on the (log-spaced) samples plus the decay-exponent fit over the
/// last decade. nullopt when there are too few samples to fit p.
std::optional<SpectrumNorm> continuum_sobolev_norm_sq(
    const std::vector<SpectrumSample>& samples, double alpha);

/// Odd real spectral field u = sum_l i v_l e^{i k_l x} + c.c. with
/// k_l = 2^{j0} l and v[-l] = -v[l]; v(0) is v_1.
struct SpectralField {
    int j0 = 0;
    Eigen::ArrayXd v;

    int max_mode() const { return static_cast<int>(v.size()); }
    double wavenumber(int l) const;
    double mode(int l) const;  // v_l with the odd extension and truncation
};

/// dv_l/dt = k_l sum_n v_n v_{l-n}, direct O(L^2) convolution.
Eigen::ArrayXd galerkin_rhs(const SpectralField& field);

/// u(x) = -2 sum_{l>=1} v_l sin(k_l x).
double field_value(const SpectralField& field, double x);

double field_energy(const SpectralField& field);  // sum_{l>=1} v_l^2

struct TriadTerm {
    std::int64_t n;        // first index of the ordered pair (n, l - n)
    int abs_exp_first;     // |n| = 2^this
    int abs_exp_second;    // |l - n| = 2^this
    int sign;              // sign of the product v_n v_{l-n} in a-variables
};

struct TriadLevel {
    int m;  // l = 2^m
    std::vector<TriadTerm> terms;
    std::int64_t coeff_prev_sq = 0;  // coefficient of a_{m-1}^2 (expect 1, or 0 at m = 0)
    std::int64_t coeff_cross = 0;    // coefficient of a_m a_{m+1} (expect -2)
    bool match = false;
};

struct TriadReport {
    std::vector<TriadLevel> levels;
    bool all_match = false;
    // No 2^p + 2^q with p != q, both positive, ever lands on a power of two.
    bool no_mixed_power_sums = false;
};

/// Exhaustively enumerate, in exact integer arithmetic, every pair of
/// (signed) powers of two summing to 2^m and confirm the surviving triads
/// reproduce the dyadic chain coefficients for m = 1..m_max.
TriadReport dyadic_triad_check(int m_max);

}  // namespace dyad::burgers
