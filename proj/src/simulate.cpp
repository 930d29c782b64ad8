#include "roadfield/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>

#include "roadfield/linalg.hpp"

namespace roadfield {

SimGrid SimGrid::make(double Lx, double Ly, double dx, double dy) {
    if (!(Lx > 0 && Ly > 0 && dx > 0 && dy > 0))
        throw std::invalid_argument("SimGrid: extents and spacings must be > 0");
    auto count = [](double L, double h, const char* axis) {
        const double raw = 2.0 * L / h;
        const long long n = std::llround(raw);
        if (std::abs(raw - static_cast<double>(n)) > 1e-6)
            throw std::invalid_argument(std::string("SimGrid: 2*L") + axis + " must be a multiple of d" + axis);
        return static_cast<int>(n) + 1;
    };
    SimGrid g;
    g.Lx = Lx;
    g.Ly = Ly;
    g.dx = dx;
    g.dy = dy;
    g.Nx = count(Lx, dx, "x");
    g.Ny = count(Ly, dy, "y");
    if (g.Ny % 2 == 0) throw std::invalid_argument("SimGrid: Ny must be odd so y = 0 is a node");
    if (g.Ny < 9 || g.Nx < 9) throw std::invalid_argument("SimGrid: grid too small");
    if (std::abs(g.y(g.road_row())) > 1e-9 * std::max(1.0, Ly))
        throw std::invalid_argument("SimGrid: y = 0 is not a node");
    return g;
}

bool SimGrid::same_as(const SimGrid& o) const {
    return Nx == o.Nx && Ny == o.Ny && Lx == o.Lx && Ly == o.Ly && dx == o.dx && dy == o.dy;
}

void SimGrid::validate_for_eps(double eps) const {
    if (!(eps > 0.0)) throw std::invalid_argument("nonlocal run: eps must be > 0");
    if (dy > eps / 8.0 * (1.0 + 1e-12))
        throw std::invalid_argument("nonlocal run: dy must satisfy dy <= eps/8");
    int inside = 0;
    for (int j = 0; j < Ny; ++j)
        if (std::abs(y(j)) <= eps * (1.0 + 1e-12)) ++inside;
    if (inside < 17) throw std::invalid_argument("nonlocal run: fewer than 17 nodes across the kernel support");
}

void InitialDatum::validate() const {
    if (shape != "cos2") throw std::invalid_argument("InitialDatum: unknown shape '" + shape + "'");
    if (!(amplitude > 0.0)) throw std::invalid_argument("InitialDatum: amplitude must be > 0");
    if (!(radius > 0.0)) throw std::invalid_argument("InitialDatum: radius must be > 0");
}

namespace {

double bump(double s) {
    if (std::abs(s) >= 1.0) return 0.0;
    const double c = std::cos(0.5 * std::numbers::pi * s);
    return c * c;
}

} // namespace

FieldState make_state(const SimGrid& grid, SimModel model, double eps,
                      const InitialDatum& datum, const ModelParams& params) {
    datum.validate();
    const double amp_u = datum.amplitude_u >= 0.0 ? datum.amplitude_u
                                                  : params.nu_bar / params.mu_bar * datum.amplitude;
    FieldState st;
    st.t = 0.0;
    st.grid = grid;
    st.model = model;
    st.eps = model == SimModel::Nonlocal ? eps : 0.0;
    st.u.assign(grid.Nx, 0.0);
    st.v.assign(grid.cells(), 0.0);
    for (int i = 0; i < grid.Nx; ++i) st.u[i] = amp_u * bump(grid.x(i) / datum.radius);
    for (int i = 0; i < grid.Nx; ++i) {
        const double bx = bump(grid.x(i) / datum.radius);
        if (bx == 0.0) continue;
        for (int j = 0; j < grid.Ny; ++j)
            st.at(i, j) = datum.amplitude * bx * bump(grid.y(j) / datum.radius);
    }
    return st;
}

// ---------------------------------------------------------------------------

struct Stepper::Impl {
    SimModel model;
    double eps = 0.0;
    SimGrid grid;
    double dt = 0.0;
    Reaction reaction = Reaction::logistic();
    bool zero_reaction = false;

    // Crank-Nicolson x-sweeps: shared factors plus explicit-half weights.
    double beta_u = 0.0, beta_v = 0.0;
    TridiagFactorD cn_u, cn_v;

    // Per-column exchange solve (identical matrix for every column).
    std::optional<ArrowheadSolver> column;
    int j0 = 0;

    static constexpr int kLanes = 48;

    Impl(const Problem& problem, SimModel model_, double eps_, const SimGrid& grid_, double dt_)
        : model(model_), eps(eps_), grid(grid_), dt(dt_), reaction(problem.reaction) {
        problem.validate();
        if (!(dt > 0.0)) throw std::invalid_argument("Stepper: dt must be > 0");
        if (model == SimModel::Nonlocal) grid.validate_for_eps(eps);
        zero_reaction = reaction.kind() == ReactionKind::Zero;
        const ModelParams& p = problem.params;
        j0 = grid.road_row();

        beta_u = p.D * dt / (2.0 * grid.dx * grid.dx);
        beta_v = p.d * dt / (2.0 * grid.dx * grid.dx);
        cn_u = make_cn_factor(grid.Nx, beta_u);
        cn_v = make_cn_factor(grid.Nx, beta_v);

        build_column_solver(p, problem.kernels);
    }

    static TridiagFactorD make_cn_factor(int n, double beta) {
        std::vector<double> sub(n, -beta), diag(n, 1.0 + 2.0 * beta), super(n, -beta);
        super[0] = -2.0 * beta; // Neumann by ghost reflection
        sub[0] = 0.0;
        sub[n - 1] = -2.0 * beta;
        super[n - 1] = 0.0;
        return TridiagFactorD(std::move(sub), diag, super);
    }

    void build_column_solver(const ModelParams& p, const KernelPair& kernels) {
        const int Ny = grid.Ny;
        const double alpha = p.d * dt / (grid.dy * grid.dy);
        std::vector<double> sub(Ny, -alpha), diag(Ny, 0.0), super(Ny, -alpha);
        std::vector<double> col(Ny, 0.0), row(Ny, 0.0);
        std::ptrdiff_t patch_row = -1;
        std::vector<double> patch;

        if (model == SimModel::Nonlocal) {
            // Kernel samples rescaled to exact discrete mass; this makes the
            // exchange mass transfer conservative and keeps the proportional
            // steady state exact at any dt.
            std::vector<double> nu_col(Ny, 0.0), mu_col(Ny, 0.0);
            double nu_sum = 0.0, mu_sum = 0.0;
            for (int j = 0; j < Ny; ++j) {
                nu_col[j] = kernels.nu.eval_scaled(eps, grid.y(j));
                mu_col[j] = kernels.mu.eval_scaled(eps, grid.y(j));
                nu_sum += nu_col[j] * grid.dy;
                mu_sum += mu_col[j] * grid.dy;
            }
            if (!(nu_sum > 0.0) || !(mu_sum > 0.0))
                throw std::invalid_argument("nonlocal run: kernels are not resolved on the grid");
            for (int j = 0; j < Ny; ++j) {
                nu_col[j] *= p.nu_bar / nu_sum;
                mu_col[j] *= p.mu_bar / mu_sum;
            }
            for (int j = 0; j < Ny; ++j) {
                diag[j] = 1.0 + 2.0 * alpha + dt * nu_col[j];
                col[j] = -dt * mu_col[j];
                row[j] = -dt * grid.dy * nu_col[j];
            }
        } else {
            for (int j = 0; j < Ny; ++j) diag[j] = 1.0 + 2.0 * alpha;
            // The road row carries the flux-jump constraint with one-sided
            // second-order stencils; the j0 +- 2 couplings ride in a
            // rank-one patch to keep the block tridiagonal.
            const double g = p.d / grid.dy;
            diag[j0] = 3.0 * g + p.nu_bar;
            sub[j0] = -2.0 * g;
            super[j0] = -2.0 * g;
            col[j0] = -p.mu_bar;
            row[j0] = -dt * p.nu_bar;
            patch_row = j0;
            patch.assign(Ny, 0.0);
            patch[j0 - 2] = 0.5 * g;
            patch[j0 + 2] = 0.5 * g;
        }
        // Neumann walls in y.
        super[0] = -2.0 * alpha;
        sub[0] = 0.0;
        sub[Ny - 1] = -2.0 * alpha;
        super[Ny - 1] = 0.0;

        column.emplace(std::move(sub), diag, super, std::move(col), std::move(row),
                       1.0 + dt * p.mu_bar, patch_row, std::move(patch));
    }

    // --- phase A -----------------------------------------------------------

    // CN sweep along x for one contiguous block of y-lanes of v.
    void cn_sweep_block(std::vector<double>& v, int jb, int lanes, std::vector<double>& buf) const {
        const int Nx = grid.Nx;
        const int Ny = grid.Ny;
        const double b = beta_v;
        for (int i = 0; i < Nx; ++i) {
            const double* mid = &v[static_cast<std::size_t>(i) * Ny + jb];
            const double* lo = i > 0 ? &v[static_cast<std::size_t>(i - 1) * Ny + jb] : &v[static_cast<std::size_t>(1) * Ny + jb];
            const double* hi = i + 1 < Nx ? &v[static_cast<std::size_t>(i + 1) * Ny + jb]
                                          : &v[static_cast<std::size_t>(Nx - 2) * Ny + jb];
            double* out = &buf[static_cast<std::size_t>(i) * lanes];
            for (int l = 0; l < lanes; ++l)
                out[l] = mid[l] + b * (lo[l] - 2.0 * mid[l] + hi[l]);
        }
        cn_v.solve_block(buf.data(), Nx, lanes);
        for (int i = 0; i < Nx; ++i) {
            double* mid = &v[static_cast<std::size_t>(i) * Ny + jb];
            const double* in = &buf[static_cast<std::size_t>(i) * lanes];
            for (int l = 0; l < lanes; ++l) mid[l] = in[l];
        }
    }

    void phase_a(FieldState& s, std::vector<double>& buf, std::vector<double>& urhs) const {
        const int Nx = grid.Nx;
        // Road.
        urhs.resize(Nx);
        for (int i = 0; i < Nx; ++i) {
            const double lo = s.u[i > 0 ? i - 1 : 1];
            const double hi = s.u[i + 1 < Nx ? i + 1 : Nx - 2];
            urhs[i] = s.u[i] + beta_u * (lo - 2.0 * s.u[i] + hi);
        }
        cn_u.solve(urhs);
        s.u.swap(urhs);
        // Field rows, blocked across y-lanes.
        buf.resize(static_cast<std::size_t>(Nx) * kLanes);
        for (int jb = 0; jb < grid.Ny; jb += kLanes)
            cn_sweep_block(s.v, jb, std::min(kLanes, grid.Ny - jb), buf);
    }

    // --- phase B -----------------------------------------------------------

    void phase_b(FieldState& s, std::vector<double>& colbuf) const {
        const int Nx = grid.Nx;
        const int Ny = grid.Ny;
        colbuf.resize(Ny);
        for (int i = 0; i < Nx; ++i) {
            double* vc = &s.v[static_cast<std::size_t>(i) * Ny];
            std::copy(vc, vc + Ny, colbuf.begin());
            if (model == SimModel::LocalLimit) colbuf[j0] = 0.0; // constraint row
            double bu = s.u[i];
            column->solve(colbuf.data(), bu);
            std::copy(colbuf.begin(), colbuf.end(), vc);
            s.u[i] = bu;
        }
    }

    // --- phase C -----------------------------------------------------------

    void phase_c(FieldState& s, long step_index) const {
        double mn = std::numeric_limits<double>::infinity();
        double mx = -mn;
        if (!zero_reaction) {
            for (double& x : s.v) {
                x += dt * reaction(x);
                mn = std::min(mn, x);
                mx = std::max(mx, x);
            }
        } else {
            for (double x : s.v) {
                mn = std::min(mn, x);
                mx = std::max(mx, x);
            }
        }
        for (double x : s.u) {
            mn = std::min(mn, x);
            mx = std::max(mx, x);
        }
        if (!std::isfinite(mn) || !std::isfinite(mx)) {
            std::ostringstream msg;
            msg << "step: non-finite state at t=" << s.t << " (step " << step_index << ")";
            throw NumericalFailure(msg.str());
        }
    }
};

Stepper::Stepper(const Problem& problem, SimModel model, double eps, const SimGrid& grid, double dt)
    : dt_(dt) {
    auto impl = std::make_shared<Impl>(problem, model, eps, grid, dt);
    impl_ = std::move(impl);
}

void Stepper::step(FieldState& state) const {
    if (!state.grid.same_as(impl_->grid)) throw std::invalid_argument("step: state grid mismatch");
    thread_local std::vector<double> buf, urhs, colbuf;
    impl_->phase_a(state, buf, urhs);
    impl_->phase_b(state, colbuf);
    state.t += impl_->dt;
    impl_->phase_c(state, -1);
}

void step(FieldState& state, const Problem& problem, double dt) {
    Stepper s(problem, state.model, state.eps, state.grid, dt);
    s.step(state);
}

RunResult run(const Problem& problem, SimModel model, double eps, const InitialDatum& datum,
              const SimGrid& grid, const RunOptions& options) {
    if (!(options.T >= 0.0)) throw std::invalid_argument("run: T must be >= 0");
    const double dt = options.dt > 0.0 ? options.dt : 0.25 * std::min(grid.dx, grid.dy);
    const double theta = options.guard_theta > 0.0
                             ? options.guard_theta
                             : 0.1 * problem.params.nu_bar / problem.params.mu_bar;

    RunResult res;
    res.state = make_state(grid, model, eps, datum, problem.params);
    res.min_guard_margin = 2.0 * grid.Lx;
    double last_observed = -1.0;
    auto observe = [&](const FieldState& s) {
        if (options.observer && s.t > last_observed) {
            options.observer(s);
            last_observed = s.t;
        }
    };
    observe(res.state);
    if (options.T == 0.0) return res;

    Stepper stepper(problem, model, eps, grid, dt);
    const long n_full = static_cast<long>(std::floor(options.T / dt * (1.0 + 1e-14)));
    const double remainder = options.T - static_cast<double>(n_full) * dt;
    double next_obs = options.observe_every > 0.0 ? options.observe_every
                                                  : std::numeric_limits<double>::infinity();

    auto guard_margin = [&](const FieldState& s) {
        for (int i = grid.Nx - 1; i >= 0; --i)
            if (s.u[i] >= theta) return grid.Lx - grid.x(i);
        return 2.0 * grid.Lx;
    };

    for (long k = 0; k < n_full; ++k) {
        stepper.step(res.state);
        res.state.t = static_cast<double>(k + 1) * dt;
        ++res.steps;
        if (options.wall_guard) {
            const double margin = guard_margin(res.state);
            res.min_guard_margin = std::min(res.min_guard_margin, margin);
            if (margin < 5.0 * grid.dx) {
                res.wall_stopped = true;
                res.stop_time = res.state.t;
                observe(res.state);
                return res;
            }
        }
        if (options.observer && res.state.t >= next_obs - 1e-12) {
            observe(res.state);
            while (next_obs <= res.state.t + 1e-12) next_obs += options.observe_every;
        }
    }
    if (remainder > 1e-12 * std::max(1.0, options.T)) {
        Stepper last(problem, model, eps, grid, remainder);
        last.step(res.state);
        ++res.steps;
    }
    res.state.t = options.T;
    if (options.wall_guard)
        res.min_guard_margin = std::min(res.min_guard_margin, guard_margin(res.state));
    observe(res.state);
    return res;
}

std::pair<double, double> sup_difference(const FieldState& a, const FieldState& b) {
    if (!a.grid.same_as(b.grid)) throw std::invalid_argument("sup_difference: grid mismatch");
    if (std::abs(a.t - b.t) > 1e-9 * std::max(1.0, std::max(a.t, b.t)))
        throw std::invalid_argument("sup_difference: time mismatch");
    double du = 0.0, dv = 0.0;
    for (std::size_t i = 0; i < a.u.size(); ++i) du = std::max(du, std::abs(a.u[i] - b.u[i]));
    for (std::size_t i = 0; i < a.v.size(); ++i) dv = std::max(dv, std::abs(a.v[i] - b.v[i]));
    return {du, dv};
}

} // namespace roadfield
