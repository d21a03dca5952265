#pragma once

#include <vector>

namespace dyad {

/// Gamma function by the Lanczos rational approximation (g = 7, 9 terms),
/// accurate to ~1e-14 relative for positive arguments at this scale.
double gamma_lanczos(double x);

/// Ai(0) = 3^{-2/3} / Gamma(2/3) ~= 0.3550280538878172.
double airy_ai_zero();

struct GaussRule {
    std::vector<double> nodes;    // on (-1, 1)
    std::vector<double> weights;
};

/// Gauss-Legendre nodes/weights by Newton iteration on P_n; cached per n.
const GaussRule& gauss_legendre(int n);

}  // namespace dyad
