#include "roadfield/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "roadfield/linalg.hpp"

namespace roadfield {

double phase_plane_slope(const Reaction& r, double d, double value) {
    if (!(d > 0.0)) throw std::invalid_argument("phase_plane_slope: d must be > 0");
    const double F = r.antiderivative_from_one(value);
    if (F > 1e-12 * std::max(1.0, r.f_prime0()))
        throw std::domain_error("phase_plane_slope: value does not connect to the saddle");
    return std::sqrt(std::max(0.0, -2.0 * F) / d);
}

namespace {

// Signed connection slope G(V) = sign(V-1) sqrt(-2F(V)/d). F vanishes
// quadratically at 1, so G extends smoothly through the saddle; near 1 we
// switch to the linearization to avoid 0/0 in the derivative.
struct SaddleSlope {
    const Reaction& r;
    double d;
    double lin_rate; // sqrt(-f'(1)/d)

    SaddleSlope(const Reaction& reaction, double diffusivity)
        : r(reaction), d(diffusivity),
          lin_rate(std::sqrt(std::max(0.0, -reaction.derivative(1.0)) / diffusivity)) {}

    double value(double V) const {
        if (std::abs(V - 1.0) < 1e-7) return (V - 1.0) * lin_rate;
        const double F = r.antiderivative_from_one(V);
        const double mag = std::sqrt(std::max(0.0, -2.0 * F / d));
        return V > 1.0 ? mag : -mag;
    }
    double derivative(double V) const {
        if (std::abs(V - 1.0) < 1e-7) return lin_rate;
        const double G = value(V); // G' = -f(V) / (d G) on both branches
        return -r(V) / (d * G);
    }
};

std::vector<double> build_grid(double eps, const StationaryNumerics& num) {
    if (!(num.Y >= 10.0)) throw std::invalid_argument("solve_stationary: Y must be >= 10");
    if (num.N < 41) throw std::invalid_argument("solve_stationary: N too small");
    const double core = 2.0 * eps;
    std::vector<double> right; // nodes in (core, Y]
    double h = 2.0 * core / static_cast<double>(num.N - 1);
    double y = core;
    while (y < num.Y) {
        h *= num.stretch;
        y += h;
        right.push_back(std::min(y, num.Y));
        if (y >= num.Y) break;
    }
    if (right.empty() || right.back() < num.Y) right.push_back(num.Y);
    std::vector<double> grid;
    grid.reserve(2 * right.size() + num.N);
    for (std::size_t i = right.size(); i-- > 0;) grid.push_back(-right[i]);
    for (int i = 0; i < num.N; ++i)
        grid.push_back(-core + 2.0 * core * static_cast<double>(i) / static_cast<double>(num.N - 1));
    for (double v : right) grid.push_back(v);
    return grid;
}

} // namespace

StationaryState solve_stationary(const ModelParams& p, const KernelPair& kernels,
                                 const Reaction& reaction, double eps,
                                 const StationaryNumerics& num) {
    if (!(eps > 0.0)) throw std::invalid_argument("solve_stationary: eps must be > 0");
    if (!(num.Y > 4.0 * eps)) throw std::invalid_argument("solve_stationary: Y must exceed the kernel core");

    const std::vector<double> grid = build_grid(eps, num);
    const std::size_t n = grid.size();
    const double d = p.d;

    // Trapezoid weights and kernel shape samples on the nonuniform grid.
    // Samples are rescaled so their discrete mass is exact; this makes the
    // proportional-kernel state V = 1 an exact fixed point of the scheme.
    std::vector<double> w(n, 0.0), nu_s(n, 0.0), mu_s(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double hl = i > 0 ? grid[i] - grid[i - 1] : 0.0;
        const double hr = i + 1 < n ? grid[i + 1] - grid[i] : 0.0;
        w[i] = 0.5 * (hl + hr);
        nu_s[i] = kernels.nu.eval_scaled(eps, grid[i]);
        mu_s[i] = kernels.mu.eval_scaled(eps, grid[i]);
    }
    auto normalize = [&](std::vector<double>& s, double target) {
        if (target == 0.0) return;
        double mass = 0.0;
        for (std::size_t i = 0; i < n; ++i) mass += w[i] * s[i];
        if (mass <= 0.0) throw std::invalid_argument("solve_stationary: grid does not resolve the kernel");
        const double scale = target / mass;
        for (double& v : s) v *= scale;
    };
    normalize(nu_s, kernels.nu.mass());
    normalize(mu_s, kernels.mu.mass());

    const SaddleSlope slope(reaction, d);

    // Residual of the discrete system; boundary rows impose the outward
    // phase-plane derivative with first-order one-sided differences (the
    // boundary sits ~Y away from the core, so its error is invisible there).
    auto residual = [&](const std::vector<double>& V, std::vector<double>& R) {
        double Q = 0.0; // integral of nu_shape_eps * V
        for (std::size_t i = 0; i < n; ++i) Q += w[i] * nu_s[i] * V[i];
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double hl = grid[i] - grid[i - 1];
            const double hr = grid[i + 1] - grid[i];
            const double d2 = 2.0 * ((V[i + 1] - V[i]) / hr - (V[i] - V[i - 1]) / hl) / (hl + hr);
            R[i] = -d * d2 - reaction(V[i]) - mu_s[i] * p.nu_bar * Q + p.nu_bar * nu_s[i] * V[i];
        }
        const double h0 = grid[1] - grid[0];
        const double hN = grid[n - 1] - grid[n - 2];
        R[0] = (V[1] - V[0]) / h0 - slope.value(V[0]);
        R[n - 1] = (V[n - 1] - V[n - 2]) / hN + slope.value(V[n - 1]);
        return Q;
    };

    auto max_norm = [](const std::vector<double>& v) {
        double m = 0.0;
        for (double x : v) m = std::max(m, std::abs(x));
        return m;
    };

    StationaryState out;
    out.eps = eps;
    out.grid = grid;
    out.V.assign(n, 1.0);

    std::vector<double> R(n, 0.0), Rtrial(n, 0.0), Vtrial(n, 0.0), step(n, 0.0);
    std::vector<double> sub(n, 0.0), diag(n, 0.0), super(n, 0.0), a_col(n, 0.0), b_row(n, 0.0);
    double Q = residual(out.V, R);
    double rnorm = max_norm(R);
    std::ostringstream history;

    for (int it = 0; it < num.max_iters && rnorm > num.newton_tol; ++it) {
        out.iters = it + 1;
        history << rnorm << " ";
        // Jacobian: tridiagonal part plus the rank-one nonlocal coupling
        // -nu_bar * mu_shape(y_i) * (w_j nu_shape(y_j)); solved exactly via
        // Sherman-Morrison so the Newton step is the true one.
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double hl = grid[i] - grid[i - 1];
            const double hr = grid[i + 1] - grid[i];
            const double cl = 2.0 / (hl * (hl + hr));
            const double cr = 2.0 / (hr * (hl + hr));
            sub[i] = -d * cl;
            super[i] = -d * cr;
            diag[i] = d * (cl + cr) - reaction.derivative(out.V[i]) + p.nu_bar * nu_s[i];
            a_col[i] = -p.nu_bar * mu_s[i];
            b_row[i] = w[i] * nu_s[i];
        }
        const double h0 = grid[1] - grid[0];
        const double hN = grid[n - 1] - grid[n - 2];
        diag[0] = -1.0 / h0 - slope.derivative(out.V[0]);
        super[0] = 1.0 / h0;
        sub[0] = 0.0;
        a_col[0] = 0.0;
        b_row[0] = w[0] * nu_s[0];
        diag[n - 1] = 1.0 / hN + slope.derivative(out.V[n - 1]);
        sub[n - 1] = -1.0 / hN;
        super[n - 1] = 0.0;
        a_col[n - 1] = 0.0;
        b_row[n - 1] = w[n - 1] * nu_s[n - 1];

        TridiagFactorD J0(sub, diag, super);
        step = R;
        J0.solve(step);
        std::vector<double> Ja = a_col;
        J0.solve(Ja);
        double bJr = 0.0, bJa = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            bJr += b_row[i] * step[i];
            bJa += b_row[i] * Ja[i];
        }
        const double denom = 1.0 + bJa;
        if (denom == 0.0) throw NumericalFailure("solve_stationary: singular bordered Jacobian");
        for (std::size_t i = 0; i < n; ++i) step[i] -= Ja[i] * (bJr / denom);

        // Damped update: halve until the residual decreases, floor 2^-10.
        double s = 1.0;
        bool accepted = false;
        for (int halvings = 0; halvings <= 10; ++halvings) {
            for (std::size_t i = 0; i < n; ++i) Vtrial[i] = out.V[i] - s * step[i];
            residual(Vtrial, Rtrial);
            if (max_norm(Rtrial) < rnorm) {
                accepted = true;
                break;
            }
            s *= 0.5;
        }
        if (!accepted)
            for (std::size_t i = 0; i < n; ++i) Vtrial[i] = out.V[i] - s * step[i];
        out.V.swap(Vtrial);
        for (double v : out.V) {
            if (v <= 0.0 || v >= reaction.clamp_hi()) out.clamped = true;
        }
        Q = residual(out.V, R);
        rnorm = max_norm(R);
        if (!std::isfinite(rnorm))
            throw NumericalFailure("solve_stationary: non-finite residual; history: " + history.str());
    }

    if (rnorm > num.newton_tol)
        throw NumericalFailure("solve_stationary: Newton stalled at residual " + std::to_string(rnorm) +
                               "; history: " + history.str());

    out.U = p.nu_bar / p.mu_bar * Q;
    out.residual = rnorm;
    double dev = 0.0;
    for (double v : out.V) dev = std::max(dev, std::abs(v - 1.0));
    out.sup_dev = dev;
    return out;
}

std::vector<StationaryRow> stationary_convergence_sweep(const ModelParams& p,
                                                        const KernelPair& kernels,
                                                        const Reaction& reaction,
                                                        const std::vector<double>& eps_list,
                                                        const StationaryNumerics& num) {
    std::vector<StationaryRow> rows;
    rows.reserve(eps_list.size());
    for (double eps : eps_list) {
        StationaryRow row;
        row.eps = eps;
        try {
            StationaryState st = solve_stationary(p, kernels, reaction, eps, num);
            row.sup_dev = st.sup_dev;
            row.U = st.U;
            row.residual = st.residual;
            row.iters = st.iters;
            row.ok = true;
        } catch (const std::exception& e) {
            row.ok = false;
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace roadfield
