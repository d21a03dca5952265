#pragma once

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>

namespace dyad {

using Eigen::ArrayXd;

/// Thrown by RHS evaluation when an amplitude is non-finite or leaves the
/// representable range. The integrator converts this into an Overflow
/// termination instead of propagating a crash.
class NumericOverflow : public std::runtime_error {
  public:
    explicit NumericOverflow(double max_abs)
        : std::runtime_error("shell amplitude overflow"), max_abs_(max_abs) {}
    double max_abs() const { return max_abs_; }

  private:
    double max_abs_;
};

// Amplitudes beyond this are treated as numeric overflow long before they
// reach the floating-point ceiling, so downstream squares stay finite.
inline constexpr double kOverflowGuard = 1e150;

enum class ModelKind {
    GenericChain,         // da_j/dt = lam^j a_{j-1}^2 - lam^{j+1} a_j a_{j+1}
    KatzPavlovic,         // same chain at lambda = 2, time scaled by 1/8
    FriedlanderPavlovic,  // same chain at lambda = 2^{5/2}, time scaled by 1/2
    Obukhov,              // instability cascade: lam^{1/3}(lam^j a_{j-1} a_j - lam^{j+1} a_{j+1}^2 - nu_j a_j)
};

const char* to_string(ModelKind kind);

/// Wavenumber-dependent viscosity nu_j = nu * lambda^(exponent * j), Obukhov only.
struct Viscosity {
    double nu = 0.0;
    double exponent = 2.0;
};

struct ModelParams {
    ModelKind kind = ModelKind::GenericChain;
    double lambda = 2.0;  // wavenumber ratio, > 1
    int j0 = 0;           // absolute index of the root shell (may be negative)
    int n_shells = 2;     // truncation length N, >= 2
    double lhs_scale = 1.0;
    std::optional<Viscosity> viscosity;

    static ModelParams generic(double lambda, int j0, int n_shells);
    static ModelParams katz_pavlovic(int j0, int n_shells);
    static ModelParams friedlander_pavlovic(int j0, int n_shells);
    static ModelParams obukhov(double lambda, int j0, int n_shells,
                               std::optional<Viscosity> visc = std::nullopt);

    /// Throws std::invalid_argument on any violated invariant.
    void validate() const;

    bool is_chain() const { return kind != ModelKind::Obukhov; }
    int last_shell() const { return j0 + n_shells - 1; }
};

/// Snapshot of the shell amplitudes at one time. a[i] holds a_{j0+i}.
struct ShellState {
    double t = 0.0;
    int j0 = 0;
    ArrayXd a;

    int n_shells() const { return static_cast<int>(a.size()); }
    int last_shell() const { return j0 + n_shells() - 1; }
};

/// RHS functor with the lambda^j coefficient tables precomputed once, so the
/// hot loop never calls pow. Pure function of (t, a); safe to share across
/// threads.
class ShellRhs {
  public:
    explicit ShellRhs(const ModelParams& params);

    /// dadt is resized to match a. Truncation closure: a_{j0-1} = a_{j0+N} = 0.
    void operator()(double t, const ArrayXd& a, ArrayXd& dadt) const;

    const ModelParams& params() const { return params_; }

  private:
    ModelParams params_;
    ArrayXd lam_j_;    // lambda^(j0+i)
    ArrayXd lam_jp1_;  // lambda^(j0+i+1)
    ArrayXd nu_j_;     // viscosity table (Obukhov), zero-size otherwise
    double scale_;     // multiplies the bracketed RHS
};

/// One-off evaluation; use ShellRhs directly inside integration loops.
ArrayXd rhs(const ModelParams& params, const ShellState& state);

/// Total energy E = sum_j a_j^2.
double energy(const ShellState& state);

/// Tail energy over shells >= j (absolute index). Throws std::out_of_range
/// unless j0 <= j <= last shell.
double tail_energy(const ShellState& state, int j);

/// d/dt of tail_energy(j) along the chain flow: 2 lam^j a_{j-1}^2 a_j / lhs_scale.
/// Defined for j0 < j <= last shell; chain kinds only (Obukhov has a
/// different flux law, see obukhov_flux).
double tail_flux(const ModelParams& params, const ShellState& state, int j);

/// sum_j (1 + mu^{2 alpha j}) a_j^2 with j the absolute shell index.
double sobolev_norm_sq(const ShellState& state, double alpha, double mu);

/// Wavelet-tree lower bound 2^{-3 j0} sum_j 2^{2 alpha j} a_j^2 (lambda = 2 semantics).
double wavelet_norm_lower_bound_sq(const ShellState& state, double alpha);

/// Rescaling between tree-amplitude and chain-amplitude variables:
/// a_j = 2^{3j/2} u_j with j the absolute index. u[i] holds u_{j0+i}.
ArrayXd wavelet_to_chain(const ArrayXd& u, int j0);
ArrayXd chain_to_wavelet(const ArrayXd& a, int j0);

/// Tree total energy 2^{-3 j0} sum_j 2^{3j} u_j^2.
double wavelet_energy(const ArrayXd& u, int j0);

}  // namespace dyad
