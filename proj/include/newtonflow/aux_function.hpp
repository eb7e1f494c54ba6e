#pragma once

// Nonnegative coercive auxiliary functions k: ℝⁿ → ℝ₊ and their right
// directional derivatives D⁺ᵥk(x) = lim_{s→0⁺} (k(x+sv) − k(x))/s.

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "newtonflow/c1map.hpp"
#include "newtonflow/errors.hpp"
#include "newtonflow/linalg.hpp"
#include "newtonflow/sampling.hpp"

namespace newtonflow {

// ---- ω: growth bound for the inverse Jacobian norm ----

/// Positive continuous ω: ℝ₊ → ℝ₊∖{0}. Built-in families carry their
/// coefficients so that divergence of ∫ ds/ω can be decided exactly.
class Omega {
public:
    enum class Family { Constant, Affine, Polynomial, User };
    enum class Divergence { Diverges, Converges, Unknown };

    static Omega constant(double c) {
        if (!(c > 0)) throw ParameterError("const omega must be positive");
        return Omega(Family::Constant, {c});
    }

    /// a + b·s
    static Omega affine(double a, double b) {
        if (!(a > 0) || b < 0) throw ParameterError("affine omega needs a > 0, b >= 0");
        return Omega(Family::Affine, {a, b});
    }

    /// c0 + c1·s + c2·s² + ...
    static Omega polynomial(std::vector<double> coeffs) {
        if (coeffs.empty() || !(coeffs[0] > 0)) throw ParameterError("polynomial omega needs c0 > 0");
        for (double c : coeffs)
            if (c < 0) throw ParameterError("polynomial omega needs nonnegative coefficients");
        return Omega(Family::Polynomial, std::move(coeffs));
    }

    static Omega user(std::function<double(double)> fn, std::string label) {
        Omega o(Family::User, {});
        o.fn_ = std::move(fn);
        o.label_ = std::move(label);
        return o;
    }

    /// "const:c", "affine:a,b" or "poly:c0,c1,...".
    static Omega parse(const std::string& spec) {
        const auto colon = spec.find(':');
        if (colon == std::string::npos) throw ParameterError("omega spec needs 'family:coefficients'");
        const std::string fam = spec.substr(0, colon);
        const Vector v = parse_vector(spec.substr(colon + 1));
        if (fam == "const") {
            if (v.size() != 1) throw ParameterError("const omega takes one value");
            return constant(v[0]);
        }
        if (fam == "affine") {
            if (v.size() != 2) throw ParameterError("affine omega takes a,b");
            return affine(v[0], v[1]);
        }
        if (fam == "poly") return polynomial(v);
        throw ParameterError("unknown omega family: " + fam);
    }

    double operator()(double s) const {
        if (family_ == Family::User) return fn_(s);
        double acc = 0.0;
        for (std::size_t i = coeffs_.size(); i-- > 0;) acc = acc * s + coeffs_[i];
        return acc;
    }

    Family family() const noexcept { return family_; }
    const std::vector<double>& coefficients() const noexcept { return coeffs_; }

    /// ∫₀^∞ ds/ω diverges iff ω grows at most linearly (polynomial degree ≤ 1).
    Divergence divergence() const {
        if (family_ == Family::User) return Divergence::Unknown;
        std::size_t degree = 0;
        for (std::size_t i = 0; i < coeffs_.size(); ++i)
            if (coeffs_[i] != 0.0) degree = i;
        return degree <= 1 ? Divergence::Diverges : Divergence::Converges;
    }

    std::string label() const {
        if (family_ == Family::User) return label_;
        std::string s = family_ == Family::Constant ? "const:" : family_ == Family::Affine ? "affine:" : "poly:";
        for (std::size_t i = 0; i < coeffs_.size(); ++i) {
            if (i) s += ",";
            std::ostringstream os;
            os.precision(17);
            os << coeffs_[i];
            s += os.str();
        }
        return s;
    }

private:
    Omega(Family f, std::vector<double> c) : family_(f), coeffs_(std::move(c)) {}

    Family family_;
    std::vector<double> coeffs_;
    std::function<double(double)> fn_;
    std::string label_;
};

inline const char* to_string(Omega::Divergence d) {
    switch (d) {
        case Omega::Divergence::Diverges: return "diverges";
        case Omega::Divergence::Converges: return "converges";
        case Omega::Divergence::Unknown: return "unknown";
    }
    return "?";
}

/// ∫_a^b ds/ω(s) by adaptive Gauss–Kronrod.
inline double integrate_reciprocal(const Omega& omega, double a, double b) {
    if (b <= a) return 0.0;
    double error = 0.0;
    const double value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [&omega](double s) { return 1.0 / omega(s); }, a, b, 15, 1e-14, &error);
    if (!std::isfinite(value) || error > 1e-9 * (1.0 + std::abs(value))) {
        throw QuadratureError("quadrature failed on [" + std::to_string(a) + ", " + std::to_string(b) + "]");
    }
    return value;
}

// ---- auxiliary functions ----

enum class AuxKind { LogH, HadamardIntegral, LogCoercive, UserSupplied };

inline const char* to_string(AuxKind k) {
    switch (k) {
        case AuxKind::LogH: return "log-h";
        case AuxKind::HadamardIntegral: return "hadamard";
        case AuxKind::LogCoercive: return "log-coercive";
        case AuxKind::UserSupplied: return "user";
    }
    return "?";
}

/// A locally Lipschitz k ≥ 0 with right directional derivatives. Kinds with a
/// C¹ closed form expose ∇k, and D⁺ᵥk = ∇k·v.
class AuxFunction {
public:
    using ValueFn = std::function<double(const Vector&)>;
    using GradientFn = std::function<Vector(const Vector&)>;

    AuxFunction(AuxKind kind, std::string description, ValueFn value, std::optional<GradientFn> gradient)
        : kind_(kind), description_(std::move(description)), value_(std::move(value)), gradient_(std::move(gradient)) {}

    AuxKind kind() const noexcept { return kind_; }
    const std::string& description() const noexcept { return description_; }
    bool has_closed_form() const noexcept { return gradient_.has_value(); }

    double operator()(const Vector& x) const { return value_(x); }

    std::optional<double> dplus_closed(const Vector& x, const Vector& v) const {
        if (!gradient_) return std::nullopt;
        return dot((*gradient_)(x), v);
    }

    Vector gradient(const Vector& x) const {
        if (!gradient_) throw ParameterError("auxiliary function has no closed-form gradient");
        return (*gradient_)(x);
    }

private:
    AuxKind kind_;
    std::string description_;
    ValueFn value_;
    std::optional<GradientFn> gradient_;
};

/// D⁺₀k = 0. Otherwise a one-sided difference at s = 1e-6·(1+‖x‖)/‖v‖, refined once by Richardson
/// extrapolation with s/2.
inline double dplus_numeric(const AuxFunction& k, const Vector& x, const Vector& v) {
    const double nv = norm2(v);
    if (nv == 0.0) return 0.0;
    if (!std::isfinite(nv)) throw NonFiniteError("dplus: non-finite direction");
    const double s = 1e-6 * (1.0 + norm2(x)) / nv;
    const double k0 = k(x);
    Vector xs = x;
    axpy(s, v, xs);
    const double d1 = (k(xs) - k0) / s;
    xs = x;
    axpy(0.5 * s, v, xs);
    const double d2 = (k(xs) - k0) / (0.5 * s);
    return 2.0 * d2 - d1;
}

/// D⁺ᵥk(x): closed form when the kind provides one, numeric otherwise.
inline double dplus(const AuxFunction& k, const Vector& x, const Vector& v) {
    if (auto d = k.dplus_closed(x, v)) return *d;
    return dplus_numeric(k, x, v);
}

/// Constants of the quadratic injectivity criterion after enlargement to
/// a ≥ b > 2, which the log-h auxiliary function requires.
struct QuadraticConstants {
    double a, b, c;
};

inline QuadraticConstants normalize_quadratic_constants(double a, double b, double c) {
    if (a < 0 || b < 0 || c < 0) throw ParameterError("a, b, c must be nonnegative");
    if (!(a >= b && b > 2.0)) {
        a = a + b + 3.0;
        b = b + 3.0;
    }
    return {a, b, c};
}

/// k(x) = ln(a/b + ‖x−x₁‖² + c/(b−2)·‖f(x)−f(x₀)‖²) with (a, b, c) normalized.
inline AuxFunction aux_log_h(double a, double b, double c, const Vector& x0, const Vector& x1,
                             std::shared_ptr<const C1Map> map) {
    const QuadraticConstants q = normalize_quadratic_constants(a, b, c);
    if (x0.size() != x1.size()) throw DimensionError("aux_log_h: x0 and x1 differ in size");
    if (q.c > 0 && !map) throw ParameterError("aux_log_h: c > 0 needs the map");
    const double base = q.a / q.b;
    const double weight = q.c / (q.b - 2.0);
    const Vector fx0 = (weight > 0) ? map->eval(x0) : Vector{};

    auto h_of = [=](const Vector& x, Vector* r_out) {
        double h = base;
        for (std::size_t i = 0; i < x.size(); ++i) h += (x[i] - x1[i]) * (x[i] - x1[i]);
        if (weight > 0) {
            Vector r = sub(map->eval(x), fx0);
            h += weight * dot(r, r);
            if (r_out) *r_out = std::move(r);
        }
        return h;
    };
    auto value = [h_of](const Vector& x) { return std::log(h_of(x, nullptr)); };
    auto gradient = [=](const Vector& x) {
        Vector r;
        const double h = h_of(x, &r);
        Vector g(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) g[i] = 2.0 * (x[i] - x1[i]);
        if (weight > 0) {
            const Matrix jt = map->jacobian(x).transposed();
            axpy(2.0 * weight, jt * r, g);
        }
        for (double& e : g) e /= h;
        return g;
    };
    std::ostringstream desc;
    desc.precision(17);
    desc << "log-h(a=" << q.a << ",b=" << q.b << ",c=" << q.c << ")";
    return AuxFunction(AuxKind::LogH, desc.str(), value, gradient);
}

/// Radius of the ball inside which the Hadamard integral is replaced by a
/// quadratic so that k is C¹ at the origin.
inline constexpr double kHadamardSmoothingRadius = 1.0;

/// k(x) = ∫₀^{‖x‖} ds/ω(s) outside the smoothing ball; inside it the even
/// quadratic α + β‖x‖² matching value and slope at the ball's boundary.
inline AuxFunction aux_hadamard(const Omega& omega, double rho0 = kHadamardSmoothingRadius) {
    if (!(rho0 > 0)) throw ParameterError("smoothing radius must be positive");
    const double k_rho0 = integrate_reciprocal(omega, 0.0, rho0);
    const double w_rho0 = omega(rho0);
    const double beta = 1.0 / (2.0 * rho0 * w_rho0);
    const double alpha = k_rho0 - beta * rho0 * rho0;

    auto value = [=](const Vector& x) {
        const double rho = norm2(x);
        if (rho <= rho0) return alpha + beta * rho * rho;
        return k_rho0 + integrate_reciprocal(omega, rho0, rho);
    };
    auto gradient = [=](const Vector& x) {
        const double rho = norm2(x);
        Vector g = x;
        const double factor = rho <= rho0 ? 2.0 * beta : 1.0 / (rho * omega(rho));
        for (double& e : g) e *= factor;
        return g;
    };
    return AuxFunction(AuxKind::HadamardIntegral, "hadamard(" + omega.label() + ")", value, gradient);
}

/// k(x) = ln(1 + ‖f(x)‖²), coercive exactly when f is.
inline AuxFunction aux_log_coercive(std::shared_ptr<const C1Map> map) {
    if (!map) throw ParameterError("aux_log_coercive needs a map");
    auto value = [map](const Vector& x) {
        const Vector fx = map->eval(x);
        return std::log1p(dot(fx, fx));
    };
    auto gradient = [map](const Vector& x) {
        const Vector fx = map->eval(x);
        Vector g = map->jacobian(x).transposed() * fx;
        const double denom = 1.0 + dot(fx, fx);
        for (double& e : g) e *= 2.0 / denom;
        return g;
    };
    return AuxFunction(AuxKind::LogCoercive, "log-coercive(" + map->name() + ")", value, gradient);
}

inline AuxFunction aux_user(std::string description, AuxFunction::ValueFn value) {
    return AuxFunction(AuxKind::UserSupplied, std::move(description), std::move(value), std::nullopt);
}

}  // namespace newtonflow
