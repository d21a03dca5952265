#include "dyad/burgers.hpp"

#include "dyad/special.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <map>
#include <stdexcept>

namespace dyad::burgers {

namespace {

constexpr double kFdStep = 1e-5;
// Third differences divide by h^3; at h = 1e-5 roundoff alone costs O(0.1),
// so the f''' fallback uses a wider stencil.
constexpr double kFdStep3 = 5e-4;
constexpr double kTwoPi = 2.0 * M_PI;

double golden_min(const std::function<double(double)>& fn, double a, double b, double tol) {
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = fn(x1), f2 = fn(x2);
    while (b - a > tol) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = fn(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = fn(x2);
        }
    }
    return 0.5 * (a + b);
}

double bisect(const std::function<double(double)>& fn, double a, double b, double fa,
              double fb, int iters = 200) {
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (fa * fb > 0.0) throw std::runtime_error("bisect: root not bracketed");
    for (int i = 0; i < iters && (b - a) > 4.0 * std::numeric_limits<double>::epsilon() *
                                             std::max(1.0, std::abs(a) + std::abs(b));
         ++i) {
        const double m = 0.5 * (a + b);
        const double fm = fn(m);
        if (fm == 0.0) return m;
        if (fa * fm < 0.0) {
            b = m;
            fb = fm;
        } else {
            a = m;
            fa = fm;
        }
    }
    (void)fb;
    return 0.5 * (a + b);
}

}  // namespace

double Profile::deriv(double eta) const {
    if (df) return df(eta);
    return (f(eta + kFdStep) - f(eta - kFdStep)) / (2.0 * kFdStep);
}

double Profile::deriv2(double eta) const {
    if (d2f) return d2f(eta);
    return (f(eta + kFdStep) - 2.0 * f(eta) + f(eta - kFdStep)) / (kFdStep * kFdStep);
}

double Profile::deriv3(double eta) const {
    if (d3f) return d3f(eta);
    const double h = kFdStep3;
    return (f(eta + 2.0 * h) - 2.0 * f(eta + h) + 2.0 * f(eta - h) - f(eta - 2.0 * h)) /
           (2.0 * h * h * h);
}

Profile canonical_profile() {
    Profile p;
    p.f = [](double e) { return -e * std::exp(-e * e); };
    p.df = [](double e) { return (2.0 * e * e - 1.0) * std::exp(-e * e); };
    p.d2f = [](double e) { return (6.0 * e - 4.0 * e * e * e) * std::exp(-e * e); };
    p.d3f = [](double e) {
        const double e2 = e * e;
        return (6.0 - 24.0 * e2 + 8.0 * e2 * e2) * std::exp(-e2);
    };
    p.halfwidth = 8.0;
    return p;
}

Profile profile_by_name(const std::string& name, double amplitude) {
    if (name == "canonical" || name == "linear_gaussian") {
        Profile p = canonical_profile();
        if (amplitude != 1.0) {
            const double amp = amplitude;
            Profile base = canonical_profile();
            p.f = [base, amp](double e) { return amp * base.f(e); };
            p.df = [base, amp](double e) { return amp * base.df(e); };
            p.d2f = [base, amp](double e) { return amp * base.d2f(e); };
            p.d3f = [base, amp](double e) { return amp * base.d3f(e); };
        }
        return p;
    }
    if (name == "sine") {
        Profile p;
        const double amp = amplitude;
        p.f = [amp](double e) { return -amp * std::sin(e); };
        p.df = [amp](double e) { return -amp * std::cos(e); };
        p.d2f = [amp](double e) { return amp * std::sin(e); };
        p.d3f = [amp](double e) { return amp * std::cos(e); };
        p.halfwidth = 2.0 * M_PI;
        return p;
    }
    throw std::invalid_argument("profile_by_name: unknown profile '" + name + "'");
}

std::vector<CharacteristicRoot> characteristics_solution(const Profile& p, double x,
                                                         double t) {
    if (t < 0.0) throw std::invalid_argument("characteristics_solution: t >= 0 required");
    const double L = p.halfwidth;

    // Every root satisfies eta = x - t f(eta), so |eta| <= |x| + t max|f|.
    double f_max = 0.0;
    const int n_coarse = 2001;
    for (int i = 0; i < n_coarse; ++i) {
        const double e = -L + 2.0 * L * i / (n_coarse - 1);
        f_max = std::max(f_max, std::abs(p.f(e)));
    }
    const double lo = std::min(-L, x - t * f_max - 1.0);
    const double hi = std::max(L, x + t * f_max + 1.0);

    auto g = [&](double e) { return e + t * p.f(e) - x; };
    auto gp = [&](double e) { return 1.0 + t * p.deriv(e); };

    // Split [lo, hi] into monotone pieces of g at the roots of g'.
    const int n = 4001;
    const double step = (hi - lo) / (n - 1);
    std::vector<double> breakpoints{lo};
    double prev_e = lo, prev_gp = gp(lo);
    for (int i = 1; i < n; ++i) {
        const double e = lo + i * step;
        const double cur_gp = gp(e);
        if (prev_gp == 0.0 || prev_gp * cur_gp < 0.0) {
            breakpoints.push_back(
                bisect([&](double s) { return gp(s); }, prev_e, e, prev_gp, cur_gp));
        }
        prev_e = e;
        prev_gp = cur_gp;
    }
    breakpoints.push_back(hi);
    std::sort(breakpoints.begin(), breakpoints.end());

    std::vector<CharacteristicRoot> roots;
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
        const double a = breakpoints[i], b = breakpoints[i + 1];
        if (!(b > a)) continue;
        const double ga = g(a), gb = g(b);
        if (ga == 0.0) {
            roots.push_back({a, p.f(a)});
            continue;
        }
        if (ga * gb > 0.0) continue;
        const double eta = bisect(g, a, b, ga, gb);
        roots.push_back({eta, p.f(eta)});
    }

    // Tangencies at piece boundaries can report twice.
    std::sort(roots.begin(), roots.end(),
              [](const CharacteristicRoot& a, const CharacteristicRoot& b) {
                  return a.eta < b.eta;
              });
    std::vector<CharacteristicRoot> unique;
    for (const auto& r : roots) {
        if (unique.empty() ||
            std::abs(r.eta - unique.back().eta) > 1e-10 * std::max(1.0, std::abs(r.eta)))
            unique.push_back(r);
    }
    if (unique.empty())
        throw std::runtime_error("characteristics_solution: no root in scan window");
    return unique;
}

double max_slope(const Profile& p, double t) {
    const double L = p.halfwidth;
    auto slope_neg = [&](double e) {
        const double fp = p.deriv(e);
        const double denom = 1.0 + t * fp;
        if (denom == 0.0) return -std::numeric_limits<double>::infinity();
        return -std::abs(fp / denom);
    };
    const int n = 8001;
    double best_e = -L;
    double best = slope_neg(-L);
    for (int i = 1; i < n; ++i) {
        const double e = -L + 2.0 * L * i / (n - 1);
        const double v = slope_neg(e);
        if (v < best) {
            best = v;
            best_e = e;
        }
    }
    const double cell = 2.0 * L / (n - 1);
    const double refined =
        golden_min(slope_neg, best_e - cell, best_e + cell, 1e-12 * std::max(1.0, L));
    return -slope_neg(refined);
}

ShockInfo shock_time(const Profile& p) {
    const double L = p.halfwidth;
    auto fp = [&](double e) { return p.deriv(e); };

    const int n = 4001;
    const double cell = 2.0 * L / (n - 1);
    std::vector<double> grid(n), vals(n);
    for (int i = 0; i < n; ++i) {
        grid[i] = -L + i * cell;
        vals[i] = fp(grid[i]);
    }

    // Refine every grid-local minimum; keep the global one, flag near-ties.
    struct Candidate {
        double eta;
        double val;
    };
    std::vector<Candidate> candidates;
    for (int i = 1; i + 1 < n; ++i) {
        if (vals[i] <= vals[i - 1] && vals[i] <= vals[i + 1]) {
            double eta = golden_min(fp, grid[i - 1], grid[i + 1], 1e-10);
            // Newton polish on f'' = 0 when the curvature is informative.
            for (int it = 0; it < 30; ++it) {
                const double d2 = p.deriv2(eta);
                const double d3 = p.deriv3(eta);
                if (!(d3 > 1e-8) || !std::isfinite(d2)) break;
                const double delta = d2 / d3;
                if (std::abs(delta) > cell) break;
                eta -= delta;
                if (std::abs(delta) < 1e-15 * std::max(1.0, std::abs(eta))) break;
            }
            candidates.push_back({eta, fp(eta)});
        }
    }
    ShockInfo info;
    if (candidates.empty()) {
        info.has_shock = false;
        return info;
    }
    auto best = std::min_element(candidates.begin(), candidates.end(),
                                 [](const Candidate& a, const Candidate& b) {
                                     return a.val < b.val;
                                 });
    if (!(best->val < 0.0)) {
        info.has_shock = false;
        return info;
    }
    info.has_shock = true;
    info.eta0 = best->eta;
    info.t_star = -1.0 / best->val;
    const double tie_tol = 1e-8 * std::max(1.0, std::abs(best->val));
    for (const Candidate& c : candidates) {
        if (&c == &(*best)) continue;
        if (std::abs(c.val - best->val) <= tie_tol &&
            std::abs(c.eta - best->eta) > 1e-6 * std::max(1.0, L)) {
            info.tie = true;
            break;
        }
    }
    return info;
}

namespace {

struct Panel {
    double a, b;
    Complex coarse;  // single-rule value, kept to size the refinement error
};

Complex gauss_panel(const Profile& p, double k, double t, double a, double b) {
    const GaussRule& rule = gauss_legendre(15);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    Complex acc{0.0, 0.0};
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double eta = mid + half * rule.nodes[i];
        const double phase = -k * (eta + t * p.f(eta));
        acc += rule.weights[i] * p.deriv(eta) * Complex{std::cos(phase), std::sin(phase)};
    }
    return half * acc;
}

}  // namespace

QuadResult fourier_coefficient_detailed(const Profile& p, double k, double t,
                                        double rel_target) {
    if (k == 0.0)
        throw std::domain_error("fourier_coefficient: k = 0 excluded by the k-division");
    const double L = p.halfwidth;

    // Initial panels sized to resolve the local phase: length <= period / 8.
    std::deque<Panel> pending;
    {
        const double h_max = L / 4.0;
        double a = -L;
        while (a < L) {
            double fp_loc = std::max({std::abs(p.deriv(a)), std::abs(p.deriv(a + 1e-3)),
                                      std::abs(p.deriv(std::min(a + h_max, L)))});
            const double rate = std::abs(k) * (1.0 + t * fp_loc);
            double h = std::min(h_max, kTwoPi / (8.0 * std::max(rate, 1e-30)));
            h = std::min(h, L - a);
            pending.push_back(Panel{a, a + h, gauss_panel(p, k, t, a, a + h)});
            a += h;
        }
    }

    Complex prelim{0.0, 0.0};
    double mass = 0.0;
    for (const Panel& panel : pending) {
        prelim += panel.coarse;
        mass += std::abs(panel.coarse);
    }
    const double tol_abs =
        std::max({rel_target * std::abs(prelim), 1e-16 * mass, 1e-300});

    Complex total{0.0, 0.0};
    double err_total = 0.0;
    long panels_done = 0;
    const long panel_budget = 400000;
    bool budget_ok = true;
    while (!pending.empty()) {
        Panel panel = pending.front();
        pending.pop_front();
        const double mid = 0.5 * (panel.a + panel.b);
        const Complex left = gauss_panel(p, k, t, panel.a, mid);
        const Complex right = gauss_panel(p, k, t, mid, panel.b);
        const Complex refined = left + right;
        const double e = std::abs(panel.coarse - refined);
        const double share = tol_abs * (panel.b - panel.a) / (2.0 * L);
        ++panels_done;
        if (panels_done > panel_budget) budget_ok = false;
        const double width_floor = 2.0 * L * 1e-12;
        if (e <= share || (panel.b - panel.a) < width_floor || !budget_ok) {
            total += refined;
            err_total += e;
        } else {
            pending.push_back(Panel{panel.a, mid, left});
            pending.push_back(Panel{mid, panel.b, right});
        }
    }

    const Complex denom{0.0, kTwoPi * k};
    QuadResult result;
    result.value = total / denom;
    result.abs_err = 2.0 * err_total / (kTwoPi * std::abs(k));  // safety factor 2
    result.panels = panels_done;
    // Heavily cancelling integrals bottom out at the roundoff of the panel
    // mass; below that floor the error estimate is pure noise.
    const double eps = std::numeric_limits<double>::epsilon();
    const double floor = 50.0 * eps * mass *
                         std::sqrt(static_cast<double>(std::max(panels_done, 1L))) /
                         (kTwoPi * std::abs(k));
    result.converged =
        budget_ok &&
        (result.abs_err <= std::max(4.0 * rel_target * std::abs(result.value), floor));
    return result;
}

Complex fourier_coefficient(const Profile& p, double k, double t) {
    QuadResult r = fourier_coefficient_detailed(p, k, t);
    if (!r.converged)
        throw AccuracyNotMet("fourier_coefficient: accuracy target not met", r.value,
                             r.abs_err);
    return r.value;
}

Complex stationary_phase_asymptote(const Profile& p, double k, double t_star) {
    const ShockInfo shock = shock_time(p);
    if (!shock.has_shock)
        throw std::domain_error("stationary_phase_asymptote: profile has no shock");
    const double eta0 = shock.eta0;
    const double f3 = p.deriv3(eta0);
    // Threshold sits above the finite-difference noise of the f''' fallback.
    if (std::abs(f3) < 1e-4)
        throw std::domain_error(
            "stationary_phase_asymptote: cubic phase coefficient vanishes");
    const double fp0 = p.deriv(eta0);
    const Complex ik{0.0, k};
    const double cube = std::cbrt(2.0 / (k * t_star * f3));
    const double phase = -k * (eta0 + t_star * p.f(eta0));
    return (airy_ai_zero() / ik) * cube * fp0 * Complex{std::cos(phase), std::sin(phase)};
}

bool halpha_diverges(double decay_p, double alpha) {
    return 2.0 * alpha >= 2.0 * decay_p - 1.0;
}

std::optional<SpectrumNorm> continuum_sobolev_norm_sq(
    const std::vector<SpectrumSample>& samples, double alpha) {
    if (samples.size() < 5) return std::nullopt;
    std::vector<SpectrumSample> s = samples;
    std::sort(s.begin(), s.end(),
              [](const SpectrumSample& a, const SpectrumSample& b) { return a.k < b.k; });
    if (!(s.front().k > 0.0)) return std::nullopt;
    if (s.back().k / s.front().k < 3.0) return std::nullopt;

    double integral = 0.0;
    auto weight = [&](const SpectrumSample& q) {
        return (1.0 + std::pow(q.k, 2.0 * alpha)) * q.abs_u * q.abs_u;
    };
    for (std::size_t i = 0; i + 1 < s.size(); ++i)
        integral += 0.5 * (weight(s[i]) + weight(s[i + 1])) * (s[i + 1].k - s[i].k);

    // Decay exponent from the last decade of wavenumbers.
    const double k_cut = s.back().k / 10.0;
    std::vector<double> lx, ly;
    for (const auto& q : s) {
        if (q.k >= k_cut && q.abs_u > 0.0) {
            lx.push_back(std::log(q.k));
            ly.push_back(std::log(q.abs_u));
        }
    }
    if (lx.size() < 3) {
        for (std::size_t i = s.size() / 2; i < s.size(); ++i) {
            if (s[i].abs_u > 0.0) {
                lx.push_back(std::log(s[i].k));
                ly.push_back(std::log(s[i].abs_u));
            }
        }
    }
    if (lx.size() < 3) return std::nullopt;
    const std::size_t n = lx.size();
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) return std::nullopt;
    const double slope = (n * sxy - sx * sy) / denom;

    SpectrumNorm out;
    out.integral = integral;
    out.p_hat = -slope;
    out.diverges = halpha_diverges(out.p_hat, alpha);
    return out;
}

double SpectralField::wavenumber(int l) const { return std::pow(2.0, j0) * l; }

double SpectralField::mode(int l) const {
    if (l == 0) return 0.0;
    if (l < 0) return -mode(-l);
    if (l > max_mode()) return 0.0;
    return v[l - 1];
}

Eigen::ArrayXd galerkin_rhs(const SpectralField& field) {
    const int L = field.max_mode();
    Eigen::ArrayXd out(L);
    for (int l = 1; l <= L; ++l) {
        double conv = 0.0;
        // Both factors vanish outside |n| <= L and |l - n| <= L.
        for (int n = l - L; n <= L; ++n) conv += field.mode(n) * field.mode(l - n);
        out[l - 1] = field.wavenumber(l) * conv;
    }
    return out;
}

double field_value(const SpectralField& field, double x) {
    double acc = 0.0;
    for (int l = 1; l <= field.max_mode(); ++l)
        acc += field.v[l - 1] * std::sin(field.wavenumber(l) * x);
    return -2.0 * acc;
}

double field_energy(const SpectralField& field) { return field.v.square().sum(); }

TriadReport dyadic_triad_check(int m_max) {
    if (m_max < 1) throw std::invalid_argument("dyadic_triad_check: m_max >= 1 required");
    TriadReport report;
    const int p_max = m_max + 2;

    // 2^p + 2^q with distinct positive exponents has two set bits: never a
    // power of two. Verified exhaustively anyway.
    report.no_mixed_power_sums = true;
    for (int p = 0; p <= p_max; ++p) {
        for (int q = 0; q <= p_max; ++q) {
            if (p == q) continue;
            const std::int64_t sum = (std::int64_t{1} << p) + (std::int64_t{1} << q);
            if ((sum & (sum - 1)) == 0) report.no_mixed_power_sums = false;
        }
    }

    report.all_match = true;
    for (int m = 1; m <= m_max; ++m) {
        TriadLevel level;
        level.m = m;
        const std::int64_t l = std::int64_t{1} << m;
        std::map<std::pair<int, int>, std::int64_t> coeff;
        for (int s1 : {+1, -1}) {
            for (int s2 : {+1, -1}) {
                for (int pexp = 0; pexp <= p_max; ++pexp) {
                    for (int qexp = 0; qexp <= p_max; ++qexp) {
                        const std::int64_t n = s1 * (std::int64_t{1} << pexp);
                        const std::int64_t other = s2 * (std::int64_t{1} << qexp);
                        if (n + other != l) continue;
                        level.terms.push_back(TriadTerm{n, pexp, qexp, s1 * s2});
                        auto key = std::minmax(pexp, qexp);
                        coeff[{key.first, key.second}] += s1 * s2;
                    }
                }
            }
        }
        for (auto it = coeff.begin(); it != coeff.end();) {
            if (it->second == 0)
                it = coeff.erase(it);
            else
                ++it;
        }
        level.coeff_prev_sq = 0;
        level.coeff_cross = 0;
        if (auto it = coeff.find({m - 1, m - 1}); it != coeff.end())
            level.coeff_prev_sq = it->second;
        if (auto it = coeff.find({m, m + 1}); it != coeff.end())
            level.coeff_cross = it->second;
        level.match = (coeff.size() == 2) && (level.coeff_prev_sq == 1) &&
                      (level.coeff_cross == -2);
        if (!level.match) report.all_match = false;
        report.levels.push_back(std::move(level));
    }
    return report;
}

}  // namespace dyad::burgers
