// Acceptance suite: runs every release criterion at its stated tolerance and
// prints one pass/fail line per criterion. Exit status is the number of
// failed criteria.
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "roadfield/analysis.hpp"
#include "roadfield/config.hpp"
#include "roadfield/dispersion.hpp"
#include "roadfield/simulate.hpp"
#include "roadfield/stationary.hpp"

using namespace roadfield;

namespace {

struct Check {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " FAILED{" << what << "}";
        }
    }
    template <typename T>
    void note(const std::string& key, T value) {
        detail << " " << key << "=" << value;
    }
};

struct Harness {
    int failures = 0;

    void criterion(int id, const std::string& name, double budget_seconds,
                   const std::function<void(Check&)>& body) {
        Check check;
        const auto start = std::chrono::steady_clock::now();
        try {
            body(check);
        } catch (const std::exception& e) {
            check.pass = false;
            check.detail << " EXCEPTION{" << e.what() << "}";
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (secs >= budget_seconds) {
            check.pass = false;
            check.detail << " OVER-BUDGET";
        }
        if (!check.pass) ++failures;
        std::printf("[%s] %2d. %-28s (%7.2f s / budget %g s)%s\n", check.pass ? "PASS" : "FAIL",
                    id, name.c_str(), secs, budget_seconds, check.detail.str().c_str());
        std::fflush(stdout);
    }
};

const ModelParams kEnhanced{5.0, 1.0, 1.0, 1.0, 1.0};

// Independent oracle for criterion 2: dense (c, lambda) scan of the first
// sign change of psi1 - psi2 for the limit problem, refined by one linear
// interpolation on the bracketing speeds.
double grid_scan_speed_oracle(const ModelParams& p, int nc, int nl) {
    const double c_lo = p.c_kpp();
    const double c_hi = envelope_speed(p).first;
    double prev_h = -1.0, prev_c = c_lo;
    for (int i = 1; i <= nc; ++i) {
        const double c = c_lo + (c_hi - c_lo) * static_cast<double>(i) / nc;
        const auto [llo, lhi] = decay_rate_interval(p, c);
        double h = -1e300;
        for (int j = 0; j < nl; ++j) {
            const double lam = llo + (lhi - llo) * j / static_cast<double>(nl - 1);
            h = std::max(h, road_response(p, c, lam) - field_response_local(p, c, lam));
        }
        if (h >= 0.0) {
            if (prev_h < 0.0 && i > 1) return prev_c + (c - prev_c) * (-prev_h) / (h - prev_h);
            return c;
        }
        prev_h = h;
        prev_c = c;
    }
    return c_hi;
}

double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace

int main() {
    Harness h;

    h.criterion(1, "closed-form speed", 1.0, [](Check& c) {
        for (const ModelParams p : {ModelParams{1.0, 1.0, 1.0, 1.0, 1.0},
                                    ModelParams{2.0, 1.0, 1.0, 1.0, 1.0},
                                    ModelParams{1.0, 2.0, 3.0, 1.0, 0.5}}) {
            const double ck = p.c_kpp();
            const double c0 =
                find_speed(p, KernelPair::proportional(), SpeedMode::local_limit()).c_star;
            c.require(std::abs(c0 - ck) <= 1e-8 * ck, "local-limit closed form");
            for (double eps : {0.4, 0.1}) {
                const double ce =
                    find_speed(p, KernelPair::proportional(), SpeedMode::nonlocal(eps)).c_star;
                c.require(std::abs(ce - ck) <= 1e-8 * ck, "nonlocal closed form");
            }
        }
    });

    h.criterion(2, "oracle equivalence", 30.0, [](Check& c) {
        const double bisect =
            find_speed(kEnhanced, KernelPair::proportional(), SpeedMode::local_limit()).c_star;
        const double oracle = grid_scan_speed_oracle(kEnhanced, 2000, 2000);
        c.note("bisect", format_g17(bisect));
        c.note("oracle", format_g17(oracle));
        c.require(std::abs(bisect - oracle) <= 1e-4, "|bisect - grid oracle| <= 1e-4");
    });

    h.criterion(3, "speed convergence trend", 120.0, [](Check& c) {
        const auto table = speed_convergence_experiment(kEnhanced, KernelPair::proportional(),
                                                        {0.4, 0.2, 0.1, 0.05});
        c.note("c0", format_g17(table.c0));
        double prev = 1e300;
        for (const auto& r : table.rows) {
            c.note("gap", r.gap);
            c.require(r.gap < prev, "gaps strictly decreasing");
            prev = r.gap;
        }
        c.require(table.rows.back().gap < 0.02 * table.c0, "final gap < 2% of c0");
    });

    h.criterion(4, "phi center anchor", 10.0, [](Check& c) {
        const ModelParams p{1.0, 1.0, 1.0, 1.0, 1.0};
        const double speed = 4.0;
        const double lam = (speed - std::sqrt(speed * speed - 4.0 * (p.f_prime0 + 1.0))) / 2.0;
        const SpectralPoint pt = spectral_point(p, speed, lam); // P = 1
        const double limit = p.mu_bar / (1.0 + 2.0 * std::sqrt(p.d * pt.P));
        std::vector<double> log_eps, log_err;
        for (double eps : {0.2, 0.1, 0.05, 0.025}) {
            const double err =
                std::abs(solve_phi_bvp(p, KernelPair::proportional(), eps, pt).center() - limit);
            c.note("err", err);
            c.require(err <= 1.0 * eps, "|phi_eps(0) - limit| <= C eps (C = 1)");
            log_eps.push_back(std::log(eps));
            log_err.push_back(std::log(std::max(err, 1e-300)));
        }
        const double order = ols_slope(log_eps, log_err);
        c.note("order", order);
        c.require(order >= 0.9, "observed order >= 0.9");
    });

    h.criterion(5, "stationary states", 60.0, [](Check& c) {
        const StationaryState exact =
            solve_stationary(kEnhanced, KernelPair::proportional(), Reaction::logistic(), 0.1);
        c.note("exact_dev", exact.sup_dev);
        c.require(exact.sup_dev <= 1e-8, "proportional kernels give V = 1");

        const auto rows = stationary_convergence_sweep(kEnhanced, KernelPair::independent(),
                                                       Reaction::logistic(), {0.4, 0.2, 0.1, 0.05});
        double prev = 1e300;
        for (const auto& r : rows) {
            c.require(r.ok, "sweep row solved");
            c.note("dev", r.sup_dev);
            c.require(r.sup_dev < prev, "deviation strictly decreasing");
            prev = r.sup_dev;
        }
        c.require(rows.back().sup_dev < 0.05, "deviation < 0.05 at eps = 0.05");
    });

    h.criterion(6, "simulated front speeds", 600.0, [](Check& c) {
        const Problem prob = Problem::with_defaults(kEnhanced);
        InitialDatum datum;
        datum.amplitude = 0.5;
        datum.radius = 5.0;

        const double c0 =
            find_speed(kEnhanced, prob.kernels, SpeedMode::local_limit()).c_star;
        const SimGrid local_grid = SimGrid::make(150.0, 30.0, 0.25, 0.25);
        const MeasuredSpeed local =
            measure_front_speed(prob, SimModel::LocalLimit, 0.0, datum, local_grid, 120.0);
        c.note("c0", format_g17(c0));
        c.note("fit0", format_g17(local.fit.speed));
        c.require(std::abs(local.fit.speed - c0) / c0 < 0.05, "limit-model speed within 5%");

        const double eps = 0.2;
        const double c_eps =
            find_speed(kEnhanced, prob.kernels, SpeedMode::nonlocal(eps)).c_star;
        const SimGrid eps_grid = SimGrid::make(150.0, 12.0, 0.25, 0.025);
        const MeasuredSpeed nl =
            measure_front_speed(prob, SimModel::Nonlocal, eps, datum, eps_grid, 120.0);
        c.note("c_eps", format_g17(c_eps));
        c.note("fit_eps", format_g17(nl.fit.speed));
        c.require(std::abs(nl.fit.speed - c_eps) / c_eps < 0.05, "eps-model speed within 5%");
    });

    h.criterion(7, "solution convergence trend", 900.0, [](Check& c) {
        const Problem prob = Problem::with_defaults(kEnhanced);
        const SimGrid grid = SimGrid::make(20.0, 5.0, 0.05, 0.00625);
        InitialDatum datum;
        datum.amplitude = 0.5;
        datum.radius = 2.0;
        const auto table =
            solution_convergence_experiment(prob, {0.2, 0.1, 0.05}, 1.0, grid, datum);
        double prev = 1e300;
        for (const auto& r : table.rows) {
            c.note("du+dv", r.du + r.dv);
            c.require(r.du + r.dv < prev, "du + dv strictly decreasing");
            prev = r.du + r.dv;
        }
    });

    h.criterion(8, "uniform spreading verdict", 900.0, [](Check& c) {
        const Problem prob = Problem::with_defaults(kEnhanced);
        const SimGrid grid = SimGrid::make(150.0, 6.0, 0.25, 0.0125);
        const auto [c_bar, lambda_bar] = envelope_speed(kEnhanced);
        (void)lambda_bar;
        InitialDatum datum;
        datum.amplitude = 0.5;
        datum.radius = 5.0;
        const auto table = uniform_spreading_experiment(
            prob, {0.2, 0.1}, {0.5 * kEnhanced.c_kpp(), 1.5 * c_bar}, datum, 120.0, grid, 0.0125);
        c.note("m", table.m);
        for (const auto& p : table.probes) {
            std::ostringstream what;
            what << (p.supercritical ? "outer sup" : "inner deviation") << " eps=" << p.eps;
            c.note(p.supercritical ? "outer" : "inner", p.value);
            c.require(p.value < 0.05, what.str() + " below eta");
        }
        c.require(table.verdict, "joint verdict");
    });

    h.criterion(9, "Kato bound property suite", 5.0, [](Check& c) {
        using C = std::complex<double>;
        const UniformGrid1D grid{-10.0, 0.01, 2001};
        std::mt19937 rng(20240817);
        std::uniform_real_distribution<double> kap(0.5, 2.0), gap(0.1, 3.0), osc(-3.0, 3.0),
            amp(0.2, 2.0), width(0.3, 2.0), freq(0.2, 2.0);
        double worst_pointwise = -1e300, worst_scalar = -1e300;
        for (int inst = 0; inst < 100; ++inst) {
            const double kappa = kap(rng);
            const double a0 = gap(rng), a1 = amp(rng), w1 = freq(rng), p1 = osc(rng);
            const double b1 = osc(rng), w2 = freq(rng), p2 = osc(rng);
            const double ra = amp(rng), rw = width(rng), rp = osc(rng);
            std::vector<C> m(grid.n), rhs(grid.n), abs_rhs(grid.n), k2(grid.n, C(kappa * kappa, 0));
            for (std::size_t i = 0; i < grid.n; ++i) {
                const double y = grid.at(i);
                m[i] = C(kappa * kappa + a0 + a1 * (1.0 + std::cos(w1 * y + p1)),
                         b1 * std::cos(w2 * y + p2));
                const double bump = ra * std::exp(-y * y / (rw * rw));
                rhs[i] = bump * std::exp(C(0.0, rp * y));
                abs_rhs[i] = C(std::abs(rhs[i]), 0.0);
            }
            const auto phi = solve_helmholtz_complex(m, rhs, kappa, grid);
            const auto dom = solve_helmholtz_complex(k2, abs_rhs, kappa, grid);
            // Pointwise domination by the kappa^2 comparison solve.
            double max_mod = 0.0;
            for (std::size_t i = 0; i < grid.n; ++i) {
                worst_pointwise = std::max(worst_pointwise, std::abs(phi[i]) - dom[i].real());
                max_mod = std::max(max_mod, std::abs(phi[i]));
            }
            // Scalar form with the exponential weight at the origin.
            double integral = 0.0;
            for (std::size_t i = 0; i < grid.n; ++i) {
                const double wq = (i == 0 || i + 1 == grid.n) ? 0.5 : 1.0;
                integral += wq * std::exp(-kappa * std::abs(grid.at(i))) * std::abs(rhs[i]);
            }
            integral *= grid.h;
            worst_scalar = std::max(worst_scalar, max_mod - integral / (2.0 * kappa));
        }
        c.note("worst_pointwise", worst_pointwise);
        c.note("worst_scalar", worst_scalar);
        c.require(worst_pointwise <= 1e-10, "pointwise Kato domination");
        c.require(worst_scalar <= 1e-10, "weighted-integral bound");
    });

    h.criterion(10, "structural invariants", 300.0, [](Check& c) {
        const Problem prob = Problem::with_defaults(kEnhanced);
        const SimGrid grid = SimGrid::make(10.0, 4.0, 0.25, 0.05);

        { // positivity and supersolution ceiling
            InitialDatum datum;
            datum.amplitude = 0.7;
            datum.radius = 2.0;
            for (auto model : {SimModel::LocalLimit, SimModel::Nonlocal}) {
                double vmin = 1e300, vmax = -1e300, umin = 1e300, umax = -1e300;
                RunOptions opts;
                opts.T = 3.0;
                opts.wall_guard = false;
                opts.observe_every = 0.25;
                opts.observer = [&](const FieldState& s) {
                    for (double x : s.v) {
                        vmin = std::min(vmin, x);
                        vmax = std::max(vmax, x);
                    }
                    for (double x : s.u) {
                        umin = std::min(umin, x);
                        umax = std::max(umax, x);
                    }
                };
                run(prob, model, 0.4, datum, grid, opts);
                c.require(vmin >= 0.0 && umin >= 0.0, "positivity");
                c.require(vmax <= 1.0 + 1e-12 && umax <= 1.0 + 1e-12, "supersolution ceiling");
            }
        }
        { // comparison monotonicity
            std::mt19937 rng(4242);
            std::uniform_real_distribution<double> a(0.1, 0.5), extra(0.05, 0.4), rad(1.0, 2.5),
                grow(0.1, 1.0);
            for (int pair = 0; pair < 3; ++pair) {
                InitialDatum d1, d2;
                d1.amplitude = a(rng);
                d1.radius = rad(rng);
                d2.amplitude = d1.amplitude + extra(rng);
                d2.radius = d1.radius + grow(rng);
                RunOptions opts;
                opts.T = 1.0;
                opts.wall_guard = false;
                const FieldState s1 = run(prob, SimModel::Nonlocal, 0.4, d1, grid, opts).state;
                const FieldState s2 = run(prob, SimModel::Nonlocal, 0.4, d2, grid, opts).state;
                bool ordered = true;
                for (std::size_t i = 0; i < s1.v.size(); ++i)
                    ordered = ordered && s1.v[i] <= s2.v[i] + 1e-12;
                for (std::size_t i = 0; i < s1.u.size(); ++i)
                    ordered = ordered && s1.u[i] <= s2.u[i] + 1e-12;
                c.require(ordered, "comparison monotonicity");
            }
        }
        { // mass-exchange conservation with f = 0
            Problem frozen{kEnhanced, KernelPair::independent(), Reaction::zero()};
            InitialDatum datum;
            datum.amplitude = 0.8;
            datum.radius = 2.0;
            FieldState st = make_state(grid, SimModel::Nonlocal, 0.4, datum, frozen.params);
            auto wx = [&](int i) { return (i == 0 || i == grid.Nx - 1) ? 0.5 : 1.0; };
            auto wy = [&](int j) { return (j == 0 || j == grid.Ny - 1) ? 0.5 : 1.0; };
            auto mass = [&](const FieldState& s) {
                double mu = 0.0, mv = 0.0;
                for (int i = 0; i < grid.Nx; ++i) {
                    mu += wx(i) * s.u[i];
                    for (int j = 0; j < grid.Ny; ++j) mv += wx(i) * wy(j) * s.at(i, j);
                }
                return mu * grid.dx + mv * grid.dx * grid.dy;
            };
            const double m0 = mass(st);
            Stepper stepper(frozen, SimModel::Nonlocal, 0.4, grid, 0.0125);
            for (int k = 0; k < 400; ++k) stepper.step(st);
            c.note("mass_drift", std::abs(mass(st) - m0) / m0);
            c.require(std::abs(mass(st) - m0) <= 1e-11 * m0, "mass conservation");
        }
        { // flux-jump residual O(dy)
            InitialDatum datum;
            datum.radius = 2.0;
            auto residual_at = [&](double dy) {
                const SimGrid g = SimGrid::make(5.0, 2.0, 0.25, dy);
                RunOptions opts;
                opts.T = 0.5;
                opts.dt = 0.25 * dy;
                opts.wall_guard = false;
                const FieldState s = run(prob, SimModel::LocalLimit, 0.0, datum, g, opts).state;
                const int j0 = g.road_row();
                double worst = 0.0;
                for (int i = 0; i < g.Nx; ++i) {
                    const double dplus = (-3.0 * s.at(i, j0) + 4.0 * s.at(i, j0 + 1) -
                                          s.at(i, j0 + 2)) /
                                         (2.0 * g.dy);
                    const double dminus = (3.0 * s.at(i, j0) - 4.0 * s.at(i, j0 - 1) +
                                           s.at(i, j0 - 2)) /
                                          (2.0 * g.dy);
                    worst = std::max(worst, std::abs(-prob.params.d * (dplus - dminus) -
                                                     (prob.params.mu_bar * s.u[i] -
                                                      prob.params.nu_bar * s.at(i, j0))));
                }
                return worst;
            };
            const double coarse = residual_at(0.1);
            const double fine = residual_at(0.05);
            c.note("flux_res", coarse);
            c.require(fine < coarse && coarse < 0.05, "flux-jump residual O(dy)");
        }
        { // field-exchange response: discrete curvature sign and c-monotonicity.
            // psi2 dips between endpoint values (convex along lambda), making
            // the gap against the road parabola strictly concave.
            const ModelParams p{1.0, 1.0, 1.0, 1.0, 1.0};
            const KernelPair kernels = KernelPair::proportional();
            const double eps = 0.1;
            const auto [lo, hi] = decay_rate_interval(p, 3.0);
            std::vector<double> vals, gapc;
            const int n = 33;
            for (int i = 0; i < n; ++i) {
                const double lam = lo + (hi - lo) * i / (n - 1.0);
                vals.push_back(field_response(p, kernels, eps, spectral_point(p, 3.0, lam)));
                gapc.push_back(road_response(p, 3.0, lam) - vals.back());
            }
            bool curvature_ok = true;
            for (int i = 1; i + 1 < n; ++i) {
                curvature_ok = curvature_ok && vals[i + 1] - 2.0 * vals[i] + vals[i - 1] >= -1e-9;
                curvature_ok = curvature_ok && gapc[i + 1] - 2.0 * gapc[i] + gapc[i - 1] <= 1e-9;
            }
            c.require(curvature_ok, "psi2 curvature / concave gap");
            const double at3 = field_response(p, kernels, eps, spectral_point(p, 3.0, 1.0));
            const double at35 = field_response(p, kernels, eps, spectral_point(p, 3.5, 1.0));
            c.require(at3 > at35, "psi2 decreasing in c");
            c.require(road_response(p, 3.5, 1.0) > road_response(p, 3.0, 1.0),
                      "psi1 increasing in c");
        }
        { // decay envelope along a default run
            InitialDatum datum;
            datum.amplitude = 0.5;
            datum.radius = 2.0;
            const SimGrid g = SimGrid::make(40.0, 4.0, 0.25, 0.25);
            const double K = calibrate_envelope_K(kEnhanced, datum);
            bool all_ok = true;
            double worst = -1e300;
            RunOptions opts;
            opts.T = 12.0;
            opts.observe_every = 2.0;
            opts.wall_guard = false;
            opts.observer = [&](const FieldState& s) {
                const EnvelopeCheck ec = check_decay_envelope(s, kEnhanced, K);
                all_ok = all_ok && ec.ok;
                worst = std::max(worst, ec.max_violation);
            };
            run(prob, SimModel::LocalLimit, 0.0, datum, g, opts);
            c.note("envelope_margin", worst);
            c.require(all_ok, "decay envelope at every snapshot");
        }
    });

    std::printf("%d/10 criteria passed\n", 10 - h.failures);
    return h.failures;
}
