// Front tracking, speed fitting, decay-envelope checks, and the orchestrated
// convergence experiments (speed, stationary profile, solution difference,
// uniform spreading).
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "roadfield/dispersion.hpp"
#include "roadfield/simulate.hpp"
#include "roadfield/stationary.hpp"

namespace roadfield {

// Road-front position: largest x with u >= theta, linearly interpolated
// between nodes; -Lx when the road never reaches the threshold.
double track_front(const FieldState& state, double theta);

struct FrontTrace {
    std::vector<double> times;
    std::vector<double> positions;
    double theta = 0.0;
};

struct SpeedFit {
    double speed = 0.0;
    double residual = 0.0; // RMS of the least-squares residuals
    std::size_t n_window = 0;
};

// Ordinary least squares over the trailing window_fraction of the trace;
// fewer than 10 samples in the window is an invalid_argument.
SpeedFit fit_speed(const FrontTrace& trace, double window_fraction = 0.5);

struct EnvelopeCheck {
    bool ok = false;
    double max_violation = 0.0; // worst signed margin value - bound
};

// Verifies u(t,x) <= K exp(-lambda_bar (|x| - c_bar t)) and the same for v
// at every node; requires D > 2d for the envelope pair.
EnvelopeCheck check_decay_envelope(const FieldState& state, const ModelParams& params, double K);

// Envelope amplitude calibrated from a compact datum: K = sup(datum) *
// exp(lambda_bar * radius) makes the bound hold at t = 0.
double calibrate_envelope_K(const ModelParams& params, const InitialDatum& datum);

// --- experiments -----------------------------------------------------------

struct SpeedConvergenceRow {
    double eps = 0.0;
    double c_eps = 0.0;
    double gap = 0.0; // |c_eps - c_0|
};

struct SpeedConvergenceTable {
    double c0 = 0.0;
    std::vector<SpeedConvergenceRow> rows;
    bool monotone = true; // gaps strictly decreasing (trivially true for < 2 rows)
};

SpeedConvergenceTable speed_convergence_experiment(const ModelParams& p, const KernelPair& kernels,
                                                   const std::vector<double>& eps_list,
                                                   const FindSpeedOptions& opt = {});

struct SolutionConvergenceRow {
    std::optional<double> eps; // empty marks the self-comparison control row
    double du = 0.0;
    double dv = 0.0;
};

struct SolutionConvergenceTable {
    std::vector<SolutionConvergenceRow> rows;
    bool monotone = true; // du + dv strictly decreasing over the eps rows
};

// Runs the limit model once and the eps-model per entry on a common datum
// and grid, reporting sup differences at t_sample (must be >= 0.1: the
// solution convergence is local in time away from 0).
SolutionConvergenceTable solution_convergence_experiment(
    const Problem& problem, const std::vector<double>& eps_list, double t_sample,
    const SimGrid& grid, const InitialDatum& datum, double dt = 0.0, bool include_control = false);

struct SpreadingProbe {
    double eps = 0.0;
    double c = 0.0;
    bool supercritical = false; // c > c*_0: outer sup; else inner deviation
    double value = 0.0;         // sup_{|x|>cT}|u| or sup_{|x|<cT}|u - nu_bar/mu_bar|
    bool vacuous = false;       // probe region empty on the truncated domain
};

struct SpreadingTable {
    double c0 = 0.0;
    double m = 0.0; // small-datum level from the stationary sandwich
    double eta = 0.05;
    std::vector<SpreadingProbe> probes;
    bool verdict = false; // all probes below eta
};

// Uniform-spreading experiment: one run per eps to horizon T (wall guard
// off: fronts are expected to cross the truncated domain), probes
// evaluated on the final state. The datum must satisfy the smallness
// hypothesis amplitude <= (m/mu_bar, m); m is computed from the sweep.
SpreadingTable uniform_spreading_experiment(const Problem& problem,
                                            const std::vector<double>& eps_list,
                                            const std::vector<double>& c_probes,
                                            const InitialDatum& datum, double T,
                                            const SimGrid& grid, double dt = 0.0,
                                            double eta = 0.05);

struct MeasuredSpeed {
    SpeedFit fit;
    FrontTrace trace;
    bool wall_stopped = false;
    double min_guard_margin = 0.0;
};

// Runs the model with front observation and fits the trailing-window speed;
// a wall-guard stop ends the trace early and the fit uses what was
// collected (the horizon is a cap, not a promise).
MeasuredSpeed measure_front_speed(const Problem& problem, SimModel model, double eps,
                                  const InitialDatum& datum, const SimGrid& grid, double T,
                                  double dt = 0.0, double theta = -1.0,
                                  double observe_every = 0.5, double window_fraction = 0.5);

} // namespace roadfield
