// Problem definition for the road-field reaction-diffusion system:
// physical parameters, exchange kernels with their 1/eps scaling, and
// the KPP reaction term with its coercive linear extension.
#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace roadfield {

// Thrown when an iterative solver fails to converge or a linear system
// degenerates; carries diagnostics in what().
class NumericalFailure : public std::runtime_error {
public:
    explicit NumericalFailure(const std::string& msg) : std::runtime_error(msg) {}
};

struct ModelParams {
    double D = 1.0;        // road diffusivity
    double d = 1.0;        // field diffusivity
    double mu_bar = 1.0;   // total jump-off rate (road -> field)
    double nu_bar = 1.0;   // total jump-on rate (field -> road)
    double f_prime0 = 1.0; // reaction slope at 0

    double c_kpp() const { return 2.0 * std::sqrt(d * f_prime0); }

    // All rates strictly positive; throws std::invalid_argument naming the
    // offending field.
    void validate() const;
};

enum class KernelShape { Cos2, Quartic, Shifted, Zero };

// Compactly supported exchange profile on (-1,1), normalized to unit mass
// (except the zero kernel). Closed-form evaluators only: tabulated kernels
// would add interpolation error in the stiff 1/eps regime.
class ExchangeKernel {
public:
    static ExchangeKernel cos2()    { return ExchangeKernel(KernelShape::Cos2); }
    static ExchangeKernel quartic() { return ExchangeKernel(KernelShape::Quartic); }
    static ExchangeKernel shifted() { return ExchangeKernel(KernelShape::Shifted); }
    static ExchangeKernel zero()    { return ExchangeKernel(KernelShape::Zero); }
    static ExchangeKernel from_name(const std::string& name);

    // Profile value at z; identically zero outside (-1,1).
    double operator()(double z) const;

    // Exact profile mass (1 for the built-in bumps, 0 for the zero kernel).
    double mass() const;

    // (1/eps) * profile(y/eps); zero for |y| >= eps. eps <= 0 is rejected.
    double eval_scaled(double eps, double y) const;

    bool is_even() const { return shape_ == KernelShape::Cos2 || shape_ == KernelShape::Quartic || shape_ == KernelShape::Zero; }
    KernelShape shape() const { return shape_; }
    const char* name() const;

private:
    explicit ExchangeKernel(KernelShape s) : shape_(s) {}
    KernelShape shape_;
};

// Quadrature of the scaled kernel over its support; eps-independent up to
// quadrature error.
double kernel_mass(const ExchangeKernel& kernel, double eps);

// The two exchange profiles. The physical exchange functions are
// nu = nu_bar * nu_shape and mu = mu_bar * mu_shape.
struct KernelPair {
    ExchangeKernel nu = ExchangeKernel::cos2();
    ExchangeKernel mu = ExchangeKernel::cos2();

    static KernelPair proportional() { return {ExchangeKernel::cos2(), ExchangeKernel::cos2()}; }
    static KernelPair independent()  { return {ExchangeKernel::cos2(), ExchangeKernel::quartic()}; }

    bool is_proportional() const { return nu.shape() == mu.shape(); }
    bool is_even() const { return nu.is_even() && mu.is_even(); }
};

enum class ReactionKind { Logistic, Zero };

// KPP reaction f(s) = f'(0) s (1 - s) inside [clamp_lo, clamp_hi], extended
// linearly outside with the slope attained at the clamp. The extension keeps
// f uniformly Lipschitz with f(s)/s eventually below any fixed negative
// level, which the stationary solver relies on.
class Reaction {
public:
    static Reaction logistic(double f_prime0 = 1.0, double clamp_lo = -1.0, double clamp_hi = 3.0);
    static Reaction zero();

    double operator()(double s) const;
    double derivative(double s) const;

    // F(t) = integral of f from 1 to t, using the clamped extension.
    double antiderivative_from_one(double t) const;

    double f_prime0() const { return f_prime0_; }
    double clamp_lo() const { return clamp_lo_; }
    double clamp_hi() const { return clamp_hi_; }
    ReactionKind kind() const { return kind_; }

    // Slope of the linear extension above clamp_hi.
    double upper_extension_slope() const { return kind_ == ReactionKind::Zero ? 0.0 : f_prime0_ * (1.0 - 2.0 * clamp_hi_); }

private:
    Reaction(ReactionKind k, double fp0, double lo, double hi)
        : kind_(k), f_prime0_(fp0), clamp_lo_(lo), clamp_hi_(hi) {}
    ReactionKind kind_;
    double f_prime0_;
    double clamp_lo_, clamp_hi_;
};

inline double eval_reaction(const Reaction& r, double s) { return r(s); }

// A full problem instance. Immutable after construction; safe to share
// across threads.
struct Problem {
    ModelParams params;
    KernelPair kernels;
    Reaction reaction = Reaction::logistic();

    static Problem with_defaults(ModelParams p, KernelPair k = KernelPair::proportional()) {
        Problem prob{p, k, Reaction::logistic(p.f_prime0)};
        prob.validate();
        return prob;
    }

    // Parameter invariants plus the reaction coercivity requirement
    // lim f(s)/s < -2 nu_bar^2 / d needed for uniform stationary bounds.
    void validate() const;
};

} // namespace roadfield
