// Time integration of the road-field systems on a truncated rectangle.
// One Lie-split step = (A) Crank-Nicolson x-diffusion for the road and for
// every field row, (B) per-column implicit solve coupling the road value to
// its field column (backward-Euler y-diffusion plus exchange), (C) explicit
// reaction. The exchange terms are implicit, so dt is an accuracy choice,
// not an eps-stability constraint.
#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "roadfield/params.hpp"

namespace roadfield {

enum class SimModel { Nonlocal, LocalLimit };

struct SimGrid {
    double Lx = 0.0, Ly = 0.0;
    int Nx = 0, Ny = 0; // Ny odd so y = 0 is a node
    double dx = 0.0, dy = 0.0;

    static SimGrid make(double Lx, double Ly, double dx, double dy);

    double x(int i) const { return -Lx + dx * i; }
    double y(int j) const { return -Ly + dy * j; }
    int road_row() const { return (Ny - 1) / 2; }
    std::size_t cells() const { return static_cast<std::size_t>(Nx) * static_cast<std::size_t>(Ny); }
    bool same_as(const SimGrid& o) const;

    // Nonlocal runs must resolve the kernel: dy <= eps/8 and at least 17
    // nodes across the closed support [-eps, eps].
    void validate_for_eps(double eps) const;
};

struct FieldState {
    double t = 0.0;
    SimGrid grid;
    SimModel model = SimModel::LocalLimit;
    double eps = 0.0;              // kernel width for the nonlocal model
    std::vector<double> u;         // road density, size Nx
    std::vector<double> v;         // field density, v[ix*Ny + iy]

    double& at(int ix, int iy) { return v[static_cast<std::size_t>(ix) * grid.Ny + iy]; }
    double at(int ix, int iy) const { return v[static_cast<std::size_t>(ix) * grid.Ny + iy]; }
};

struct InitialDatum {
    std::string shape = "cos2";  // cos2 product bump is the only built-in
    double amplitude = 0.5;      // field amplitude
    double amplitude_u = -1.0;   // road amplitude; < 0 means nu_bar/mu_bar * amplitude
    double radius = 5.0;

    void validate() const;
};

FieldState make_state(const SimGrid& grid, SimModel model, double eps,
                      const InitialDatum& datum, const ModelParams& params);

// Precomputes every factorization for a fixed (problem, model, grid, dt);
// stepping is then a handful of streaming passes over the state.
class Stepper {
public:
    Stepper(const Problem& problem, SimModel model, double eps, const SimGrid& grid, double dt);

    void step(FieldState& state) const;
    double dt() const { return dt_; }

private:
    struct Impl;
    std::shared_ptr<const Impl> impl_;
    double dt_;
};

// Convenience single-step entry point (builds a Stepper each call).
void step(FieldState& state, const Problem& problem, double dt);

struct RunOptions {
    double T = 0.0;
    double dt = 0.0;               // <= 0 means 0.25 * min(dx, dy)
    double observe_every = 0.0;    // 0 disables intermediate observations
    bool wall_guard = true;        // stop when the road front nears a wall
    double guard_theta = -1.0;     // < 0 means 0.1 * nu_bar/mu_bar
    std::function<void(const FieldState&)> observer; // called at t=0, on the schedule, and at the end
};

struct RunResult {
    FieldState state;
    bool wall_stopped = false; // guard fired; state.t < T
    double stop_time = 0.0;
    double min_guard_margin = 0.0; // closest front-to-wall distance seen
    long steps = 0;
};

RunResult run(const Problem& problem, SimModel model, double eps, const InitialDatum& datum,
              const SimGrid& grid, const RunOptions& options);

// Max-norm differences (du, dv) over all nodes; the grids and times must
// match (the models may differ).
std::pair<double, double> sup_difference(const FieldState& a, const FieldState& b);

} // namespace roadfield
