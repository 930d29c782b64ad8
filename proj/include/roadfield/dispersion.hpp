// Linear travelling-wave machinery: the road/field dispersion curves, the
// exchange boundary-value problem for the transverse profile, spreading
// speeds for the limit, nonlocal and truncated/penalized problems, and the
// complex Helmholtz solver with its Kato-type modulus bound.
#pragma once

#include <complex>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "roadfield/params.hpp"

namespace roadfield {

// A point (c, lambda) of the wave-parameter plane together with
// P = lambda*c - d*lambda^2 - f'(0); P/d is the squared transverse decay
// rate of the field profile. Admissible points have P >= 0.
struct SpectralPoint {
    double c = 0.0;
    double lambda = 0.0;
    double P = 0.0;
};

SpectralPoint spectral_point(const ModelParams& p, double c, double lambda);

// Road response -D*lambda^2 + c*lambda + mu_bar (the "psi1" curve).
double road_response(const ModelParams& p, double c, double lambda);

// Roots of P: the admissible decay-rate interval [lambda_minus, lambda_plus]
// for a given speed c >= c_KPP. Throws std::domain_error below c_KPP.
std::pair<double, double> decay_rate_interval(const ModelParams& p, double c);

// Limit field-exchange response nu_bar*mu_bar / (nu_bar + 2 sqrt(d P));
// equals mu_bar at the interval endpoints. Requires P >= 0 (the "psi2"
// curve of the localized-exchange problem).
double field_response_local(const ModelParams& p, double c, double lambda);

// Optional domain truncation/penalization of the exchange BVP: Dirichlet
// walls at +-L and a zero-order penalty delta added to P.
struct Truncation {
    double L = std::numeric_limits<double>::infinity();
    double delta = 0.0;
    bool finite() const { return std::isfinite(L); }
};

// Transverse profile of a linear travelling wave, stored on a uniform grid
// in the rescaled variable z = y/eps over [-1,1]. Outside the kernel
// support the profile is exactly exponential (or a sinh arch when
// truncated); tail amplitudes are kept per side so asymmetric kernels are
// representable.
struct PhiProfile {
    double eps = 0.0; // 0 marks the limit profile (grid then lives in y)
    std::vector<double> grid;   // z-nodes on [-1,1]
    std::vector<double> values; // profile at the nodes
    double K_plus = 0.0;        // tail amplitude for y > eps
    double K_minus = 0.0;       // tail amplitude for y < -eps
    double decay_rate = 0.0;    // sqrt((P+delta)/d)
    Truncation trunc;
    bool even_kernels = true;   // false flags the asymmetric case

    double center() const { return values.empty() ? 0.0 : values[values.size() / 2]; }

    // Evaluate in the physical variable y: linear interpolation on the grid
    // inside the kernel support, the exact tail formula outside.
    double at_y(double y) const;
};

// Solves the exchange BVP
//   -d phi'' + (P + delta + nu_eps(y)) phi = mu_eps(y)
// in the rescaled variable with exact-decay Robin conditions (or the sinh
// closure when L is finite). Requires P + delta >= 0; P + delta < 0 throws
// std::domain_error. n_nodes is the uniform node count on [-1,1].
PhiProfile solve_phi_bvp(const ModelParams& p, const KernelPair& kernels, double eps,
                         const SpectralPoint& point, const Truncation& trunc = {},
                         int n_nodes = 2001);

// Nonlocal field-exchange response: integral of nu_eps * phi over the
// kernel support, evaluated on the rescaled grid.
double field_response(const ModelParams& p, const KernelPair& kernels, double eps,
                      const SpectralPoint& point, const Truncation& trunc = {},
                      int n_nodes = 2001);

struct SpeedMode {
    enum class Kind { LocalLimit, Nonlocal, Truncated };
    Kind kind = Kind::LocalLimit;
    double eps = 0.0;
    Truncation trunc;

    static SpeedMode local_limit() { return {}; }
    static SpeedMode nonlocal(double eps) { return {Kind::Nonlocal, eps, {}}; }
    static SpeedMode truncated(double eps, double L, double delta) { return {Kind::Truncated, eps, {L, delta}}; }
    const char* name() const;
};

struct CurveSample {
    double lambda, psi1, psi2;
};

struct DispersionResult {
    double c_star = 0.0;
    double lambda_star = 0.0;
    PhiProfile phi_star;
    SpeedMode mode;
    std::vector<CurveSample> diagnostics; // curves sampled at c_star
    int iterations = 0;       // outer bisection count (0 for the closed form)
    double residual = 0.0;    // |psi1 - psi2| at (c_star, lambda_star)
};

struct FindSpeedOptions {
    int lambda_scan = 512;  // dense scan of the decay-rate interval
    int golden_iters = 40;  // golden-section refinement of the best bracket
    int max_bisect = 200;
    int n_nodes = 2001;
    double residual_tol_rel = 1e-10; // on mu_bar
    double c_tol_rel = 1e-13;        // on c_KPP
    int curve_samples = 65;
};

// Spreading speed: the first c at which the road and field response curves
// meet. D <= 2d short-circuits to the closed form c_KPP. For D > 2d runs a
// bisection in c on the tangency indicator max_lambda(psi1 - psi2), capped
// at the envelope speed.
DispersionResult find_speed(const ModelParams& p, const KernelPair& kernels, const SpeedMode& mode,
                            const FindSpeedOptions& opt = {});

// Envelope pair (c_bar, lambda_bar): c_bar solves lambda_minus(c) = c/D and
// lambda_bar = c_bar/D. Every speed/decay pair lies below this envelope.
// Requires D > 2d.
std::pair<double, double> envelope_speed(const ModelParams& p);

struct UniformGrid1D {
    double y0 = 0.0;
    double h = 0.0;
    std::size_t n = 0;
    double at(std::size_t i) const { return y0 + h * static_cast<double>(i); }
};

// Solves -phi'' + m(y) phi = rhs(y) with decay conditions at the grid ends,
// for complex potential m with Re m >= kappa^2 everywhere (checked). The
// solution modulus is dominated by the real solve with potential kappa^2
// and right-hand side |rhs|.
std::vector<std::complex<double>> solve_helmholtz_complex(
    const std::vector<std::complex<double>>& m,
    const std::vector<std::complex<double>>& rhs,
    double kappa, const UniformGrid1D& grid);

} // namespace roadfield
