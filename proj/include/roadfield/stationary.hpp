// Stationary states of the nonlocal system: the field profile V solves
//   -d V'' = f(V) + (mu_eps/mu_bar) * integral(nu_eps V) - nu_eps V
// on a truncated line with nonlinear phase-plane boundary conditions, and
// the road level is U = (1/mu_bar) * integral(nu_eps V).
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "roadfield/params.hpp"

namespace roadfield {

struct StationaryNumerics {
    double Y = 20.0;       // truncation half-width
    int N = 1001;          // uniform nodes in the kernel core [-2 eps, 2 eps]
    double stretch = 1.05; // geometric spacing ratio outside the core
    double newton_tol = 1e-8;
    int max_iters = 50;
};

struct StationaryState {
    double eps = 0.0;
    std::vector<double> grid;   // y-nodes, dense in the kernel core
    std::vector<double> V;      // field profile at the nodes
    double U = 0.0;             // road level
    double sup_dev = 0.0;       // max |V - 1|
    double residual = 0.0;      // final Newton residual (max norm)
    int iters = 0;
    bool clamped = false;       // V left (0, clamp_hi) during the iteration
};

// Outward connection slope sqrt(-2 F(value) / d) of the planar phase
// portrait around the saddle at V = 1; F is the reaction antiderivative
// from 1. Values with F > 0 cannot connect and raise std::domain_error.
double phase_plane_slope(const Reaction& r, double d, double value);

StationaryState solve_stationary(const ModelParams& p, const KernelPair& kernels,
                                 const Reaction& reaction, double eps,
                                 const StationaryNumerics& num = {});

struct StationaryRow {
    double eps = 0.0;
    double sup_dev = 0.0;
    double U = 0.0;
    double residual = 0.0;
    int iters = 0;
    bool ok = false;
    std::string error;
};

// One solve per eps, rows in input order; a failed solve marks its row
// instead of aborting the sweep.
std::vector<StationaryRow> stationary_convergence_sweep(const ModelParams& p,
                                                        const KernelPair& kernels,
                                                        const Reaction& reaction,
                                                        const std::vector<double>& eps_list,
                                                        const StationaryNumerics& num = {});

} // namespace roadfield
