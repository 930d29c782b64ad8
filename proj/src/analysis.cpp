#include "roadfield/analysis.hpp"

#include <algorithm>
#include <cmath>

namespace roadfield {

double track_front(const FieldState& state, double theta) {
    if (!(theta > 0.0)) throw std::invalid_argument("track_front: theta must be > 0");
    const SimGrid& g = state.grid;
    for (int i = g.Nx - 1; i >= 0; --i) {
        if (state.u[i] >= theta) {
            if (i == g.Nx - 1) return g.Lx;
            // Interpolate the theta crossing between node i (>= theta) and
            // node i+1 (< theta).
            const double u0 = state.u[i], u1 = state.u[i + 1];
            return g.x(i) + g.dx * (u0 - theta) / (u0 - u1);
        }
    }
    return -g.Lx;
}

SpeedFit fit_speed(const FrontTrace& trace, double window_fraction) {
    if (!(window_fraction > 0.0 && window_fraction <= 1.0))
        throw std::invalid_argument("fit_speed: window_fraction must be in (0, 1]");
    const std::size_t n = trace.times.size();
    if (n != trace.positions.size()) throw std::invalid_argument("fit_speed: ragged trace");
    const std::size_t take = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(window_fraction * n)));
    if (take < 10) throw std::invalid_argument("fit_speed: fewer than 10 samples in the window");
    const std::size_t from = n - take;
    double st = 0, sx = 0, stt = 0, stx = 0;
    for (std::size_t i = from; i < n; ++i) {
        st += trace.times[i];
        sx += trace.positions[i];
        stt += trace.times[i] * trace.times[i];
        stx += trace.times[i] * trace.positions[i];
    }
    const double m = static_cast<double>(take);
    const double denom = m * stt - st * st;
    if (denom == 0.0) throw std::invalid_argument("fit_speed: degenerate time samples");
    SpeedFit out;
    out.speed = (m * stx - st * sx) / denom;
    const double intercept = (sx - out.speed * st) / m;
    double ss = 0.0;
    for (std::size_t i = from; i < n; ++i) {
        const double r = trace.positions[i] - (intercept + out.speed * trace.times[i]);
        ss += r * r;
    }
    out.residual = std::sqrt(ss / m);
    out.n_window = take;
    return out;
}

double calibrate_envelope_K(const ModelParams& params, const InitialDatum& datum) {
    const auto [c_bar, lambda_bar] = envelope_speed(params);
    (void)c_bar;
    const double amp_u = datum.amplitude_u >= 0.0 ? datum.amplitude_u
                                                  : params.nu_bar / params.mu_bar * datum.amplitude;
    return std::max(datum.amplitude, amp_u) * std::exp(lambda_bar * datum.radius);
}

EnvelopeCheck check_decay_envelope(const FieldState& state, const ModelParams& params, double K) {
    const auto [c_bar, lambda_bar] = envelope_speed(params);
    const SimGrid& g = state.grid;
    double worst = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < g.Nx; ++i) {
        const double bound = K * std::exp(-lambda_bar * (std::abs(g.x(i)) - c_bar * state.t));
        worst = std::max(worst, state.u[i] - bound);
        const double* col = &state.v[static_cast<std::size_t>(i) * g.Ny];
        double vmax = 0.0;
        for (int j = 0; j < g.Ny; ++j) vmax = std::max(vmax, col[j]);
        worst = std::max(worst, vmax - bound);
    }
    return {worst <= 1e-12, worst};
}

SpeedConvergenceTable speed_convergence_experiment(const ModelParams& p, const KernelPair& kernels,
                                                   const std::vector<double>& eps_list,
                                                   const FindSpeedOptions& opt) {
    SpeedConvergenceTable table;
    table.c0 = find_speed(p, kernels, SpeedMode::local_limit(), opt).c_star;
    const double zero_tol = 1e-12 * table.c0; // closed-form branch: all gaps identically 0
    double prev_gap = std::numeric_limits<double>::infinity();
    for (double eps : eps_list) {
        const double c_eps = find_speed(p, kernels, SpeedMode::nonlocal(eps), opt).c_star;
        const double gap = std::abs(c_eps - table.c0);
        if (!table.rows.empty() && !(gap < prev_gap) && gap > zero_tol) table.monotone = false;
        prev_gap = gap;
        table.rows.push_back({eps, c_eps, gap});
    }
    return table;
}

SolutionConvergenceTable solution_convergence_experiment(
    const Problem& problem, const std::vector<double>& eps_list, double t_sample,
    const SimGrid& grid, const InitialDatum& datum, double dt, bool include_control) {
    if (!(t_sample >= 0.1))
        throw std::invalid_argument("solution_convergence_experiment: t_sample must be >= 0.1");
    for (double eps : eps_list) grid.validate_for_eps(eps);

    RunOptions opts;
    opts.T = t_sample;
    opts.dt = dt;
    opts.wall_guard = false; // short horizon on a small box

    SolutionConvergenceTable table;
    const RunResult local = run(problem, SimModel::LocalLimit, 0.0, datum, grid, opts);
    if (include_control) {
        const RunResult again = run(problem, SimModel::LocalLimit, 0.0, datum, grid, opts);
        const auto [du, dv] = sup_difference(local.state, again.state);
        table.rows.push_back({std::nullopt, du, dv});
    }
    double prev = std::numeric_limits<double>::infinity();
    for (double eps : eps_list) {
        const RunResult nl = run(problem, SimModel::Nonlocal, eps, datum, grid, opts);
        const auto [du, dv] = sup_difference(local.state, nl.state);
        if (!(du + dv < prev) && prev != std::numeric_limits<double>::infinity()) table.monotone = false;
        prev = du + dv;
        table.rows.push_back({eps, du, dv});
    }
    return table;
}

SpreadingTable uniform_spreading_experiment(const Problem& problem,
                                            const std::vector<double>& eps_list,
                                            const std::vector<double>& c_probes,
                                            const InitialDatum& datum, double T,
                                            const SimGrid& grid, double dt, double eta) {
    SpreadingTable table;
    table.eta = eta;
    table.c0 = find_speed(problem.params, problem.kernels, SpeedMode::local_limit()).c_star;
    for (double c : c_probes) {
        if (std::abs(c - table.c0) < 1e-9)
            throw std::invalid_argument("uniform_spreading_experiment: probe equals c*_0");
    }

    // Small-datum level from the stationary sandwich over the sweep.
    double m = std::numeric_limits<double>::infinity();
    for (double eps : eps_list) {
        const StationaryState st =
            solve_stationary(problem.params, problem.kernels, problem.reaction, eps);
        double vmin = std::numeric_limits<double>::infinity();
        for (double v : st.V) vmin = std::min(vmin, v);
        m = std::min(m, vmin);
    }
    table.m = m;
    const double amp_u = datum.amplitude_u >= 0.0
                             ? datum.amplitude_u
                             : problem.params.nu_bar / problem.params.mu_bar * datum.amplitude;
    if (datum.amplitude > m || amp_u > m / problem.params.mu_bar)
        throw std::invalid_argument("uniform_spreading_experiment: datum violates the smallness hypothesis");

    RunOptions opts;
    opts.T = T;
    opts.dt = dt;
    opts.wall_guard = false; // fronts are expected to cross the box

    const double steady_u = problem.params.nu_bar / problem.params.mu_bar;
    table.verdict = true;
    for (double eps : eps_list) {
        const RunResult res = run(problem, SimModel::Nonlocal, eps, datum, grid, opts);
        const FieldState& s = res.state;
        for (double c : c_probes) {
            SpreadingProbe probe;
            probe.eps = eps;
            probe.c = c;
            probe.supercritical = c > table.c0;
            const double edge = c * T;
            double value = 0.0;
            bool any = false;
            for (int i = 0; i < grid.Nx; ++i) {
                const double ax = std::abs(grid.x(i));
                if (probe.supercritical ? ax > edge : ax < edge) {
                    any = true;
                    value = std::max(value, probe.supercritical ? std::abs(s.u[i])
                                                                : std::abs(s.u[i] - steady_u));
                }
            }
            probe.value = value;
            probe.vacuous = !any;
            if (value >= eta) table.verdict = false;
            table.probes.push_back(probe);
        }
    }
    return table;
}

MeasuredSpeed measure_front_speed(const Problem& problem, SimModel model, double eps,
                                  const InitialDatum& datum, const SimGrid& grid, double T,
                                  double dt, double theta, double observe_every,
                                  double window_fraction) {
    const double th = theta > 0.0 ? theta : 0.1 * problem.params.nu_bar / problem.params.mu_bar;
    MeasuredSpeed out;
    out.trace.theta = th;
    RunOptions opts;
    opts.T = T;
    opts.dt = dt;
    opts.observe_every = observe_every;
    opts.wall_guard = true;
    opts.observer = [&](const FieldState& s) {
        out.trace.times.push_back(s.t);
        out.trace.positions.push_back(track_front(s, th));
    };
    const RunResult res = run(problem, model, eps, datum, grid, opts);
    out.wall_stopped = res.wall_stopped;
    out.min_guard_margin = res.min_guard_margin;
    out.fit = fit_speed(out.trace, window_fraction);
    return out;
}

} // namespace roadfield
