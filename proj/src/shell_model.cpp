#include "dyad/shell_model.hpp"

#include <cmath>
#include <sstream>

namespace dyad {

namespace {

constexpr double kFpLambda = 5.656854249492380195206754896838;  // 2^{5/2}

void require(bool cond, const char* what) {
    if (!cond) throw std::invalid_argument(what);
}

}  // namespace

const char* to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::GenericChain: return "generic";
        case ModelKind::KatzPavlovic: return "kp";
        case ModelKind::FriedlanderPavlovic: return "fp";
        case ModelKind::Obukhov: return "obukhov";
    }
    return "?";
}

ModelParams ModelParams::generic(double lambda, int j0, int n_shells) {
    ModelParams p;
    p.kind = ModelKind::GenericChain;
    p.lambda = lambda;
    p.j0 = j0;
    p.n_shells = n_shells;
    p.lhs_scale = 1.0;
    p.validate();
    return p;
}

ModelParams ModelParams::katz_pavlovic(int j0, int n_shells) {
    ModelParams p;
    p.kind = ModelKind::KatzPavlovic;
    p.lambda = 2.0;
    p.j0 = j0;
    p.n_shells = n_shells;
    p.lhs_scale = 8.0;
    p.validate();
    return p;
}

ModelParams ModelParams::friedlander_pavlovic(int j0, int n_shells) {
    ModelParams p;
    p.kind = ModelKind::FriedlanderPavlovic;
    p.lambda = kFpLambda;
    p.j0 = j0;
    p.n_shells = n_shells;
    p.lhs_scale = 2.0;
    p.validate();
    return p;
}

ModelParams ModelParams::obukhov(double lambda, int j0, int n_shells,
                                 std::optional<Viscosity> visc) {
    ModelParams p;
    p.kind = ModelKind::Obukhov;
    p.lambda = lambda;
    p.j0 = j0;
    p.n_shells = n_shells;
    p.lhs_scale = std::cbrt(lambda);
    p.viscosity = visc;
    p.validate();
    return p;
}

void ModelParams::validate() const {
    require(lambda > 1.0, "ModelParams: lambda > 1 required");
    require(n_shells >= 2, "ModelParams: n_shells >= 2 required");
    require(lhs_scale > 0.0, "ModelParams: lhs_scale > 0 required");
    if (kind == ModelKind::KatzPavlovic) {
        require(lambda == 2.0, "ModelParams: the wavelet-tree chain fixes lambda = 2");
    }
    if (kind == ModelKind::FriedlanderPavlovic) {
        require(std::abs(lambda - kFpLambda) < 1e-12 * kFpLambda,
                "ModelParams: this model fixes lambda = 2^(5/2)");
    }
    if (viscosity) {
        require(kind == ModelKind::Obukhov, "ModelParams: viscosity applies to the Obukhov model only");
        require(viscosity->nu >= 0.0, "ModelParams: nu >= 0 required");
    }
}

ShellRhs::ShellRhs(const ModelParams& params) : params_(params) {
    params_.validate();
    const int n = params_.n_shells;
    lam_j_.resize(n);
    lam_jp1_.resize(n);
    for (int i = 0; i < n; ++i) {
        const int j = params_.j0 + i;
        lam_j_[i] = std::pow(params_.lambda, j);
        lam_jp1_[i] = std::pow(params_.lambda, j + 1);
    }
    if (params_.kind == ModelKind::Obukhov) {
        scale_ = params_.lhs_scale;  // lambda^{1/3} multiplies the bracket
        nu_j_.resize(n);
        for (int i = 0; i < n; ++i) {
            const int j = params_.j0 + i;
            nu_j_[i] = params_.viscosity
                           ? params_.viscosity->nu *
                                 std::pow(params_.lambda, params_.viscosity->exponent * j)
                           : 0.0;
        }
    } else {
        scale_ = 1.0 / params_.lhs_scale;  // the time-scale factor divides
    }
}

void ShellRhs::operator()(double, const ArrayXd& a, ArrayXd& dadt) const {
    const int n = params_.n_shells;
    if (a.size() != n) {
        std::ostringstream msg;
        msg << "ShellRhs: state has " << a.size() << " shells, params expect " << n;
        throw std::invalid_argument(msg.str());
    }
    const double max_abs = a.abs().maxCoeff();
    if (!std::isfinite(max_abs) || max_abs > kOverflowGuard) throw NumericOverflow(max_abs);

    dadt.resize(n);
    const double* av = a.data();
    double* out = dadt.data();
    if (params_.kind == ModelKind::Obukhov) {
        for (int i = 0; i < n; ++i) {
            const double prev = (i > 0) ? av[i - 1] : 0.0;
            const double next = (i + 1 < n) ? av[i + 1] : 0.0;
            out[i] = scale_ * (lam_j_[i] * prev * av[i] - lam_jp1_[i] * next * next -
                               nu_j_[i] * av[i]);
        }
    } else {
        out[0] = -scale_ * lam_jp1_[0] * av[0] * ((n > 1) ? av[1] : 0.0);
        for (int i = 1; i < n; ++i) {
            const double next = (i + 1 < n) ? av[i + 1] : 0.0;
            out[i] = scale_ * (lam_j_[i] * av[i - 1] * av[i - 1] - lam_jp1_[i] * av[i] * next);
        }
    }
}

ArrayXd rhs(const ModelParams& params, const ShellState& state) {
    if (state.j0 != params.j0)
        throw std::invalid_argument("rhs: state root shell differs from params");
    ShellRhs f(params);
    ArrayXd dadt;
    f(state.t, state.a, dadt);
    return dadt;
}

double energy(const ShellState& state) { return state.a.square().sum(); }

double tail_energy(const ShellState& state, int j) {
    if (j < state.j0 || j > state.last_shell())
        throw std::out_of_range("tail_energy: shell index outside truncation");
    const int offset = j - state.j0;
    return state.a.tail(state.n_shells() - offset).square().sum();
}

double tail_flux(const ModelParams& params, const ShellState& state, int j) {
    if (params.kind == ModelKind::Obukhov)
        throw std::invalid_argument("tail_flux: chain kinds only (see obukhov_flux)");
    if (j <= state.j0 || j > state.last_shell())
        throw std::out_of_range("tail_flux: need j0 < j <= last shell");
    const int i = j - state.j0;
    const double prev = state.a[i - 1];
    return 2.0 * std::pow(params.lambda, j) * prev * prev * state.a[i] / params.lhs_scale;
}

double sobolev_norm_sq(const ShellState& state, double alpha, double mu) {
    double sum = 0.0;
    for (int i = 0; i < state.n_shells(); ++i) {
        const int j = state.j0 + i;
        sum += (1.0 + std::pow(mu, 2.0 * alpha * j)) * state.a[i] * state.a[i];
    }
    return sum;
}

double wavelet_norm_lower_bound_sq(const ShellState& state, double alpha) {
    double sum = 0.0;
    for (int i = 0; i < state.n_shells(); ++i) {
        const int j = state.j0 + i;
        sum += std::pow(2.0, 2.0 * alpha * j) * state.a[i] * state.a[i];
    }
    return std::pow(2.0, -3.0 * state.j0) * sum;
}

ArrayXd wavelet_to_chain(const ArrayXd& u, int j0) {
    ArrayXd a(u.size());
    for (int i = 0; i < u.size(); ++i) a[i] = std::pow(2.0, 1.5 * (j0 + i)) * u[i];
    return a;
}

ArrayXd chain_to_wavelet(const ArrayXd& a, int j0) {
    ArrayXd u(a.size());
    for (int i = 0; i < a.size(); ++i) u[i] = std::pow(2.0, -1.5 * (j0 + i)) * a[i];
    return u;
}

double wavelet_energy(const ArrayXd& u, int j0) {
    double sum = 0.0;
    for (int i = 0; i < u.size(); ++i) sum += std::pow(2.0, 3.0 * (j0 + i)) * u[i] * u[i];
    return std::pow(2.0, -3.0 * j0) * sum;
}

}  // namespace dyad
