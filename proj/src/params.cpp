#include "roadfield/params.hpp"

#include <numbers>

namespace roadfield {

namespace {
constexpr double kPi = std::numbers::pi;
} // namespace

void ModelParams::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw std::invalid_argument(std::string(name) + " must be > 0");
    };
    positive(D, "D");
    positive(d, "d");
    positive(mu_bar, "mu_bar");
    positive(nu_bar, "nu_bar");
    positive(f_prime0, "f_prime0");
    if (!std::isfinite(c_kpp()) || c_kpp() <= 0.0)
        throw std::invalid_argument("derived c_KPP must be finite and positive");
}

ExchangeKernel ExchangeKernel::from_name(const std::string& name) {
    if (name == "cos2") return cos2();
    if (name == "quartic") return quartic();
    if (name == "shifted") return shifted();
    if (name == "zero") return zero();
    throw std::invalid_argument("unknown kernel '" + name + "' (expected cos2|quartic|shifted|zero)");
}

double ExchangeKernel::operator()(double z) const {
    switch (shape_) {
    case KernelShape::Cos2: {
        if (std::abs(z) >= 1.0) return 0.0;
        double c = std::cos(0.5 * kPi * z);
        return c * c;
    }
    case KernelShape::Quartic: {
        if (std::abs(z) >= 1.0) return 0.0;
        double w = 1.0 - z * z;
        return (15.0 / 16.0) * w * w;
    }
    case KernelShape::Shifted: {
        // cos^2 bump centered at 0.3 with half-width 0.6, support (-0.3, 0.9).
        constexpr double a = 0.3, w = 0.6;
        double s = z - a;
        if (std::abs(s) >= w) return 0.0;
        double c = std::cos(0.5 * kPi * s / w);
        return c * c / w;
    }
    case KernelShape::Zero:
        return 0.0;
    }
    return 0.0;
}

double ExchangeKernel::mass() const { return shape_ == KernelShape::Zero ? 0.0 : 1.0; }

double ExchangeKernel::eval_scaled(double eps, double y) const {
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be > 0");
    if (std::abs(y) >= eps) return 0.0;
    return (*this)(y / eps) / eps;
}

const char* ExchangeKernel::name() const {
    switch (shape_) {
    case KernelShape::Cos2: return "cos2";
    case KernelShape::Quartic: return "quartic";
    case KernelShape::Shifted: return "shifted";
    case KernelShape::Zero: return "zero";
    }
    return "?";
}

double kernel_mass(const ExchangeKernel& kernel, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be > 0");
    // Composite Simpson over (-eps, eps).
    const int n = 4096; // even
    const double h = 2.0 * eps / n;
    double sum = kernel.eval_scaled(eps, -eps) + kernel.eval_scaled(eps, eps);
    for (int i = 1; i < n; ++i) {
        double y = -eps + i * h;
        sum += kernel.eval_scaled(eps, y) * (i % 2 ? 4.0 : 2.0);
    }
    return sum * h / 3.0;
}

Reaction Reaction::logistic(double f_prime0, double clamp_lo, double clamp_hi) {
    if (!(f_prime0 > 0.0)) throw std::invalid_argument("f_prime0 must be > 0");
    if (!(clamp_lo < 0.0 && clamp_hi > 1.0)) throw std::invalid_argument("clamp bounds must satisfy lo < 0 < 1 < hi");
    return Reaction(ReactionKind::Logistic, f_prime0, clamp_lo, clamp_hi);
}

Reaction Reaction::zero() { return Reaction(ReactionKind::Zero, 0.0, -1.0, 3.0); }

double Reaction::operator()(double s) const {
    if (kind_ == ReactionKind::Zero) return 0.0;
    auto core = [this](double t) { return f_prime0_ * t * (1.0 - t); };
    auto slope = [this](double t) { return f_prime0_ * (1.0 - 2.0 * t); };
    if (s > clamp_hi_) return core(clamp_hi_) + slope(clamp_hi_) * (s - clamp_hi_);
    if (s < clamp_lo_) return core(clamp_lo_) + slope(clamp_lo_) * (s - clamp_lo_);
    return core(s);
}

double Reaction::derivative(double s) const {
    if (kind_ == ReactionKind::Zero) return 0.0;
    double t = std::min(std::max(s, clamp_lo_), clamp_hi_);
    return f_prime0_ * (1.0 - 2.0 * t);
}

double Reaction::antiderivative_from_one(double t) const {
    if (kind_ == ReactionKind::Zero) return 0.0;
    auto core_F = [this](double x) {
        // antiderivative of f'(0) x (1-x), evaluated from 1
        return f_prime0_ * (x * x / 2.0 - x * x * x / 3.0 - 1.0 / 6.0);
    };
    if (t >= clamp_lo_ && t <= clamp_hi_) return core_F(t);
    if (t > clamp_hi_) {
        double fh = (*this)(clamp_hi_);
        double sh = f_prime0_ * (1.0 - 2.0 * clamp_hi_);
        double dt = t - clamp_hi_;
        return core_F(clamp_hi_) + fh * dt + 0.5 * sh * dt * dt;
    }
    double fl = (*this)(clamp_lo_);
    double sl = f_prime0_ * (1.0 - 2.0 * clamp_lo_);
    double dt = t - clamp_lo_;
    return core_F(clamp_lo_) + fl * dt + 0.5 * sl * dt * dt;
}

void Problem::validate() const {
    params.validate();
    if (reaction.kind() == ReactionKind::Zero) return;
    if (std::abs(reaction.f_prime0() - params.f_prime0) > 1e-12 * std::max(1.0, params.f_prime0))
        throw std::invalid_argument("reaction slope at 0 must match ModelParams.f_prime0");
    // Coercivity of the extension: the limit slope of f(s)/s must undercut
    // -2 nu_bar^2 / d, and so must the sampled ratio past the clamp.
    const double level = -2.0 * params.nu_bar * params.nu_bar / params.d;
    if (!(reaction.upper_extension_slope() < level))
        throw std::invalid_argument("reaction extension slope too shallow for coercivity");
    const double s_far = 2.0 * reaction.clamp_hi();
    if (!(reaction(s_far) / s_far < level))
        throw std::invalid_argument("reaction ratio past clamp violates coercivity");
}

} // namespace roadfield
