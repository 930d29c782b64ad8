#include "roadfield/dispersion.hpp"

#include <algorithm>
#include <cmath>

#include "roadfield/linalg.hpp"

namespace roadfield {

SpectralPoint spectral_point(const ModelParams& p, double c, double lambda) {
    return {c, lambda, lambda * c - p.d * lambda * lambda - p.f_prime0};
}

double road_response(const ModelParams& p, double c, double lambda) {
    return -p.D * lambda * lambda + c * lambda + p.mu_bar;
}

std::pair<double, double> decay_rate_interval(const ModelParams& p, double c) {
    const double ck = p.c_kpp();
    if (c < ck) throw std::domain_error("decay_rate_interval: c below c_KPP");
    const double disc = std::sqrt(std::max(0.0, c * c - ck * ck));
    return {(c - disc) / (2.0 * p.d), (c + disc) / (2.0 * p.d)};
}

namespace {

// The response curves extend continuously to the closure of the admissible
// region; tolerate roundoff-level negativity at the interval endpoints.
double clamp_admissible(double P, const char* where) {
    if (P < 0.0) {
        if (P < -1e-9) throw std::domain_error(std::string(where) + ": P below the admissible region");
        return 0.0;
    }
    return P;
}

} // namespace

double field_response_local(const ModelParams& p, double c, double lambda) {
    const double P = clamp_admissible(spectral_point(p, c, lambda).P, "field_response_local");
    return p.nu_bar * p.mu_bar / (p.nu_bar + 2.0 * std::sqrt(p.d * P));
}

double PhiProfile::at_y(double y) const {
    if (eps > 0.0 && std::abs(y) <= eps && !grid.empty()) {
        const double z = y / eps;
        const double h = grid[1] - grid[0];
        const double pos = (z - grid.front()) / h;
        const std::size_t i = std::min(grid.size() - 2, static_cast<std::size_t>(std::max(0.0, pos)));
        const double w = pos - static_cast<double>(i);
        return values[i] * (1.0 - w) + values[i + 1] * w;
    }
    const double K = (y >= 0.0) ? K_plus : K_minus;
    const double boundary = K * std::exp(-decay_rate * eps); // profile value at |y| = eps
    if (trunc.finite()) {
        const double L = trunc.L;
        if (std::abs(y) >= L) return 0.0;
        if (decay_rate > 0.0)
            return boundary * std::sinh(decay_rate * (L - std::abs(y))) / std::sinh(decay_rate * (L - eps));
        return boundary * (L - std::abs(y)) / (L - eps);
    }
    return K * std::exp(-decay_rate * std::abs(y));
}

namespace {

// Effective Robin coefficient q_tilde with phi'(eps) = -q_tilde * phi(eps):
// q coth(q (L - eps)) for a finite box, q for the whole line, and the
// linear-tail limit 1/(L - eps) when P + delta = 0.
double robin_coefficient(double q, double eps, const Truncation& trunc) {
    if (!trunc.finite()) return q;
    const double span = trunc.L - eps;
    if (span <= 0.0) throw std::invalid_argument("truncation L must exceed eps");
    if (q == 0.0) return 1.0 / span;
    return q / std::tanh(q * span);
}

} // namespace

PhiProfile solve_phi_bvp(const ModelParams& p, const KernelPair& kernels, double eps,
                         const SpectralPoint& point, const Truncation& trunc, int n_nodes) {
    if (!(eps > 0.0)) throw std::invalid_argument("solve_phi_bvp: eps must be > 0");
    if (n_nodes < 9 || n_nodes % 2 == 0) throw std::invalid_argument("solve_phi_bvp: n_nodes must be odd and >= 9");
    const double Peff = clamp_admissible(point.P + trunc.delta, "solve_phi_bvp");
    if (trunc.finite() && trunc.L <= eps) throw std::invalid_argument("solve_phi_bvp: L must exceed eps");

    const std::size_t n = static_cast<std::size_t>(n_nodes);
    const double h = 2.0 / static_cast<double>(n_nodes - 1);
    const double q = std::sqrt(Peff / p.d);
    const double qt = robin_coefficient(q, eps, trunc);
    const double d = p.d;
    const double inv_h2 = 1.0 / (h * h);

    std::vector<double> sub(n, 0.0), diag(n, 0.0), super(n, 0.0), rhs(n, 0.0), grid(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double z = -1.0 + static_cast<double>(i) * h;
        grid[i] = z;
        const double coef = eps * eps * Peff + eps * p.nu_bar * kernels.nu(z);
        diag[i] = 2.0 * d * inv_h2 + coef;
        sub[i] = -d * inv_h2;
        super[i] = -d * inv_h2;
        rhs[i] = eps * p.mu_bar * kernels.mu(z);
    }
    // Robin closures by ghost elimination keep second order:
    //   psi'(-1) = +eps*qt*psi(-1),  psi'(+1) = -eps*qt*psi(+1).
    diag[0] += 2.0 * d * eps * qt / h;
    super[0] = -2.0 * d * inv_h2;
    sub[0] = 0.0;
    diag[n - 1] += 2.0 * d * eps * qt / h;
    sub[n - 1] = -2.0 * d * inv_h2;
    super[n - 1] = 0.0;

    TridiagFactorD factor(std::move(sub), diag, super);
    factor.solve(rhs);

    PhiProfile out;
    out.eps = eps;
    out.grid = std::move(grid);
    out.values = std::move(rhs);
    out.decay_rate = q;
    out.trunc = trunc;
    out.even_kernels = kernels.is_even();
    // Tail amplitudes in the convention phi(y) = K exp(-q|y|), one per side.
    out.K_plus = out.values.back() * std::exp(q * eps);
    out.K_minus = out.values.front() * std::exp(q * eps);
    for (double v : out.values) {
        if (!std::isfinite(v)) throw NumericalFailure("solve_phi_bvp: non-finite profile");
    }
    return out;
}

double field_response(const ModelParams& p, const KernelPair& kernels, double eps,
                      const SpectralPoint& point, const Truncation& trunc, int n_nodes) {
    const PhiProfile phi = solve_phi_bvp(p, kernels, eps, point, trunc, n_nodes);
    const double h = phi.grid[1] - phi.grid[0];
    double acc = 0.0;
    for (std::size_t i = 0; i < phi.grid.size(); ++i) {
        const double w = (i == 0 || i + 1 == phi.grid.size()) ? 0.5 : 1.0;
        acc += w * kernels.nu(phi.grid[i]) * phi.values[i];
    }
    return p.nu_bar * acc * h;
}

const char* SpeedMode::name() const {
    switch (kind) {
    case Kind::LocalLimit: return "local-limit";
    case Kind::Nonlocal: return "nonlocal";
    case Kind::Truncated: return "truncated";
    }
    return "?";
}

std::pair<double, double> envelope_speed(const ModelParams& p) {
    if (!(p.D > 2.0 * p.d)) throw std::domain_error("envelope_speed: requires D > 2d");
    const double r = 1.0 - 2.0 * p.d / p.D;
    const double c_bar = p.c_kpp() / std::sqrt(1.0 - r * r);
    return {c_bar, c_bar / p.D};
}

namespace {

struct CurveEval {
    const ModelParams& p;
    const KernelPair& kernels;
    const SpeedMode& mode;
    int n_nodes;

    double psi2(double c, double lambda) const {
        if (mode.kind == SpeedMode::Kind::LocalLimit)
            return field_response_local(p, c, lambda);
        return field_response(p, kernels, mode.eps, spectral_point(p, c, lambda), mode.trunc, n_nodes);
    }
    double gap(double c, double lambda) const { return road_response(p, c, lambda) - psi2(c, lambda); }
};

// Admissible decay-rate interval, widened by the penalty for truncated mode.
std::pair<double, double> scan_interval(const ModelParams& p, const SpeedMode& mode, double c) {
    const double fp_eff = p.f_prime0 - mode.trunc.delta;
    if (fp_eff <= 0.0) {
        // Penalty at or above f'(0): P + delta >= 0 on (0, c/d]; scan a
        // conservative positive interval.
        return {1e-9, c / p.d};
    }
    ModelParams q = p;
    q.f_prime0 = fp_eff;
    return decay_rate_interval(q, c);
}

struct InnerMax {
    double lambda;
    double value;
};

// Dense scan to bracket the peak, then golden-section refinement inside the
// winning bracket; plateau ties resolve to the smallest lambda.
InnerMax max_gap_over_lambda(const CurveEval& eval, const ModelParams& p, const SpeedMode& mode,
                             double c, const FindSpeedOptions& opt) {
    auto [lo, hi] = scan_interval(p, mode, c);
    if (!(hi > lo)) return {lo, eval.gap(c, lo)};
    const int n = std::max(8, opt.lambda_scan);
    const double step = (hi - lo) / static_cast<double>(n - 1);
    int best = 0;
    double best_val = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        const double lam = lo + step * i;
        const double g = eval.gap(c, lam);
        if (g > best_val) {
            best_val = g;
            best = i;
        }
    }
    double a = lo + step * std::max(0, best - 1);
    double b = lo + step * std::min(n - 1, best + 1);
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = eval.gap(c, x1), f2 = eval.gap(c, x2);
    for (int it = 0; it < opt.golden_iters; ++it) {
        if (f1 >= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = eval.gap(c, x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = eval.gap(c, x2);
        }
    }
    if (best_val >= f1 && best_val >= f2) return {lo + step * best, best_val};
    return f1 >= f2 ? InnerMax{x1, f1} : InnerMax{x2, f2};
}

} // namespace

DispersionResult find_speed(const ModelParams& p, const KernelPair& kernels, const SpeedMode& mode,
                            const FindSpeedOptions& opt) {
    p.validate();
    if (mode.kind != SpeedMode::Kind::LocalLimit && !(mode.eps > 0.0))
        throw std::invalid_argument("find_speed: eps must be > 0 for nonlocal/truncated modes");

    DispersionResult out;
    out.mode = mode;
    const double ck = p.c_kpp();
    CurveEval eval{p, kernels, mode, opt.n_nodes};

    auto fill_profile = [&](double c, double lambda) {
        const SpectralPoint pt = spectral_point(p, c, lambda);
        if (mode.kind == SpeedMode::Kind::LocalLimit) {
            // Exponential limit profile sampled on [-1,1] in y.
            PhiProfile phi;
            phi.eps = 0.0;
            const double q = std::sqrt(std::max(0.0, pt.P) / p.d);
            const double phi0 = p.mu_bar / (p.nu_bar + 2.0 * std::sqrt(p.d * std::max(0.0, pt.P)));
            const int n = 201;
            phi.grid.resize(n);
            phi.values.resize(n);
            for (int i = 0; i < n; ++i) {
                const double y = -1.0 + 2.0 * i / static_cast<double>(n - 1);
                phi.grid[i] = y;
                phi.values[i] = phi0 * std::exp(-q * std::abs(y));
            }
            phi.K_plus = phi.K_minus = phi0;
            phi.decay_rate = q;
            phi.even_kernels = true;
            return phi;
        }
        return solve_phi_bvp(p, kernels, mode.eps, pt, mode.trunc, opt.n_nodes);
    };

    auto fill_curves = [&](double c) {
        auto [lo, hi] = scan_interval(p, mode, c);
        out.diagnostics.clear();
        if (!(hi - lo > 1e-14)) { // degenerate interval at c = c_KPP
            out.diagnostics.push_back({lo, road_response(p, c, lo), eval.psi2(c, lo)});
            return;
        }
        const int n = std::max(2, opt.curve_samples);
        for (int i = 0; i < n; ++i) {
            const double lam = lo + (hi - lo) * i / static_cast<double>(n - 1);
            out.diagnostics.push_back({lam, road_response(p, c, lam), eval.psi2(c, lam)});
        }
    };

    if (p.D <= 2.0 * p.d) {
        // Field-driven regime: closed form, no numerics.
        out.c_star = ck;
        out.lambda_star = ck / (2.0 * p.d);
        out.phi_star = fill_profile(out.c_star, out.lambda_star);
        out.iterations = 0;
        out.residual = 0.0;
        fill_curves(out.c_star);
        return out;
    }

    const double c_cap = envelope_speed(p).first;
    const double c_lo0 = (mode.kind == SpeedMode::Kind::Truncated && mode.trunc.delta > 0.0 &&
                          mode.trunc.delta < p.f_prime0)
                             ? 2.0 * std::sqrt(p.d * (p.f_prime0 - mode.trunc.delta))
                             : ck;

    double c_lo = c_lo0;
    InnerMax m_lo = max_gap_over_lambda(eval, p, mode, c_lo, opt);
    if (m_lo.value >= 0.0)
        throw NumericalFailure("find_speed: tangency indicator already nonnegative at the lower speed bound");

    // Step-doubling from the lower bound, capped at the envelope speed where
    // the indicator is provably nonnegative.
    double step = 0.25 * ck;
    double c_hi = c_lo;
    InnerMax m_hi = m_lo;
    while (m_hi.value < 0.0 && c_hi < c_cap) {
        c_lo = c_hi;
        m_lo = m_hi;
        c_hi = std::min(c_cap, c_hi + step);
        m_hi = max_gap_over_lambda(eval, p, mode, c_hi, opt);
        step *= 2.0;
    }
    if (m_hi.value < 0.0)
        throw NumericalFailure("find_speed: no tangency below the envelope speed cap");

    const double c_tol = opt.c_tol_rel * ck;
    const double r_tol = opt.residual_tol_rel * p.mu_bar;
    double c_mid = c_hi;
    InnerMax m_mid = m_hi;
    for (int it = 0; it < opt.max_bisect; ++it) {
        ++out.iterations;
        c_mid = 0.5 * (c_lo + c_hi);
        m_mid = max_gap_over_lambda(eval, p, mode, c_mid, opt);
        if (std::abs(m_mid.value) <= r_tol) break;
        if (m_mid.value > 0.0) {
            c_hi = c_mid;
            m_hi = m_mid;
        } else {
            c_lo = c_mid;
            m_lo = m_mid;
        }
        if (c_hi - c_lo <= c_tol) {
            c_mid = c_hi; // keep the side where a wave exists
            m_mid = m_hi;
            break;
        }
    }

    out.c_star = c_mid;
    out.lambda_star = m_mid.lambda;
    out.residual = std::abs(m_mid.value);
    out.phi_star = fill_profile(out.c_star, out.lambda_star);
    fill_curves(out.c_star);
    return out;
}

std::vector<std::complex<double>> solve_helmholtz_complex(
    const std::vector<std::complex<double>>& m,
    const std::vector<std::complex<double>>& rhs,
    double kappa, const UniformGrid1D& grid) {
    using C = std::complex<double>;
    const std::size_t n = grid.n;
    if (n < 3 || m.size() != n || rhs.size() != n)
        throw std::invalid_argument("solve_helmholtz_complex: inconsistent sizes");
    if (!(kappa > 0.0)) throw std::invalid_argument("solve_helmholtz_complex: kappa must be > 0");
    const double k2 = kappa * kappa;
    for (const C& mi : m) {
        if (mi.real() < k2 - 1e-14)
            throw std::invalid_argument("solve_helmholtz_complex: Re(m) >= kappa^2 violated");
    }
    const double h = grid.h;
    const double inv_h2 = 1.0 / (h * h);
    std::vector<C> sub(n, C(-inv_h2)), diag(n), super(n, C(-inv_h2)), b = rhs;
    for (std::size_t i = 0; i < n; ++i) diag[i] = C(2.0 * inv_h2) + m[i];
    // Decay closures with the local rate sqrt(m) (principal branch,
    // Re sqrt(m) >= kappa), eliminated through ghost nodes.
    const C s_left = std::sqrt(m.front());
    const C s_right = std::sqrt(m.back());
    diag[0] += 2.0 * s_left / h;
    super[0] = C(-2.0 * inv_h2);
    sub[0] = C(0.0);
    diag[n - 1] += 2.0 * s_right / h;
    sub[n - 1] = C(-2.0 * inv_h2);
    super[n - 1] = C(0.0);
    TridiagFactorZ factor(std::move(sub), diag, super);
    factor.solve(b);
    return b;
}

} // namespace roadfield
