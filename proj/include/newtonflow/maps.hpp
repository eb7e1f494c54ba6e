#pragma once

// Built-in maps. Each entry is specified natively in code with an analytic
// Jacobian; oracle maps also carry closed-form companions.

#include <cmath>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "newtonflow/c1map.hpp"

namespace newtonflow {

struct MapParams {
    /// Row-major matrix for "linear"; identity when empty.
    std::vector<double> matrix;
    /// Test hook: added to the (0,0) entry of the analytic Jacobian.
    double jacobian_perturbation = 0.0;
};

struct MapRegistryEntry {
    std::string key;
    /// 0 means the dimension is taken from the parameters.
    std::size_t dim;
    std::string description;
    std::string paper_ref;
    std::function<C1Map(std::size_t, const MapParams&)> make;
};

namespace maps {

/// f(ξ, η) = e^ξ / √(1+η²) · (1, η): injective local diffeomorphism of the
/// plane whose first component is positive, hence not onto.
inline C1Map planar_exp(double jacobian_perturbation = 0.0) {
    auto f = [](const Vector& x) {
        const double s = std::exp(x[0]) / std::sqrt(1.0 + x[1] * x[1]);
        return Vector{s, s * x[1]};
    };
    auto jac = [jacobian_perturbation](const Vector& x) {
        const double eta = x[1];
        const double q = 1.0 + eta * eta;
        const double pre = std::exp(x[0]) / (q * std::sqrt(q));
        return Matrix(2, {pre * q + jacobian_perturbation, -pre * eta, pre * eta * q, pre});
    };
    C1Map map("zampieri-ex5", 2, f, jac);
    MapCompanions c;
    c.inverse_jacobian = [](const Vector& x) {
        const double eta = x[1];
        const double q = 1.0 + eta * eta;
        const double pre = std::exp(-x[0]) / std::sqrt(q);
        return Matrix(2, {pre, pre * eta, -pre * eta * q, pre * q});
    };
    c.field_to_origin_image = [](const Vector& x) {
        const double eta = x[1];
        const double pre = std::exp(-x[0]) / std::sqrt(1.0 + eta * eta);
        return Vector{pre - 1.0, -pre * eta * (1.0 + eta * eta)};
    };
    c.x_dot_field = [](const Vector& x) {
        const double xi = x[0], eta = x[1];
        const double q = 1.0 + eta * eta;
        return xi * (std::exp(-xi) / std::sqrt(q) - 1.0) - eta * eta * std::exp(-xi) * std::sqrt(q);
    };
    map.with_companions(std::move(c));
    return map;
}

inline C1Map arctan1d() {
    return C1Map(
        "arctan1d", 1, [](const Vector& x) { return Vector{std::atan(x[0])}; },
        [](const Vector& x) { return Matrix(1, {1.0 / (1.0 + x[0] * x[0])}); });
}

inline C1Map linear(Matrix a) {
    const std::size_t n = a.dim();
    return C1Map(
        "linear", n, [a](const Vector& x) { return a * x; }, [a](const Vector&) { return a; });
}

inline C1Map cubic1d() {
    return C1Map(
        "cubic1d", 1, [](const Vector& x) { return Vector{x[0] + x[0] * x[0] * x[0]}; },
        [](const Vector& x) { return Matrix(1, {1.0 + 3.0 * x[0] * x[0]}); });
}

inline C1Map exp1d() {
    return C1Map(
        "exp1d", 1, [](const Vector& x) { return Vector{std::exp(x[0])}; },
        [](const Vector& x) { return Matrix(1, {std::exp(x[0])}); });
}

/// Rotation by π/6 of x + 0.1·(x₁³, x₂³): a coercive diffeomorphism of the plane.
inline C1Map rot_poly2d() {
    constexpr double kTheta = 0.5235987755982988;  // π/6
    constexpr double kEps = 0.1;
    auto f = [](const Vector& x) {
        const double u = x[0] + kEps * x[0] * x[0] * x[0];
        const double v = x[1] + kEps * x[1] * x[1] * x[1];
        const double c = std::cos(kTheta), s = std::sin(kTheta);
        return Vector{c * u - s * v, s * u + c * v};
    };
    auto jac = [](const Vector& x) {
        const double du = 1.0 + 3.0 * kEps * x[0] * x[0];
        const double dv = 1.0 + 3.0 * kEps * x[1] * x[1];
        const double c = std::cos(kTheta), s = std::sin(kTheta);
        return Matrix(2, {c * du, -s * dv, s * du, c * dv});
    };
    return C1Map("rot-poly2d", 2, f, jac);
}

/// Complex exponential on ℝ²: local diffeomorphism, 2π-periodic in η.
inline C1Map cexp2d() {
    auto f = [](const Vector& x) {
        const double r = std::exp(x[0]);
        return Vector{r * std::cos(x[1]), r * std::sin(x[1])};
    };
    auto jac = [](const Vector& x) {
        const double r = std::exp(x[0]);
        const double c = r * std::cos(x[1]), s = r * std::sin(x[1]);
        return Matrix(2, {c, -s, s, c});
    };
    return C1Map("cexp2d", 2, f, jac);
}

/// (ξ² + 1, η): even in ξ, so f(ξ, η) = f(−ξ, η).
inline C1Map fold2d() {
    return C1Map(
        "fold2d", 2, [](const Vector& x) { return Vector{x[0] * x[0] + 1.0, x[1]}; },
        [](const Vector& x) { return Matrix(2, {2.0 * x[0], 0.0, 0.0, 1.0}); });
}

}  // namespace maps

inline const std::vector<MapRegistryEntry>& map_registry() {
    static const std::vector<MapRegistryEntry> entries = [] {
        auto fixed = [](auto maker) {
            return [maker](std::size_t, const MapParams&) { return maker(); };
        };
        std::vector<MapRegistryEntry> e;
        e.push_back({"zampieri-ex5", 2,
                     "exp(xi)/sqrt(1+eta^2)*(1,eta): injective planar local diffeomorphism, not onto",
                     "nonsurjective planar example satisfying the quadratic injectivity criterion",
                     [](std::size_t, const MapParams& p) { return maps::planar_exp(p.jacobian_perturbation); }});
        e.push_back({"arctan1d", 1, "arctan(x): one-to-one, range (-pi/2, pi/2)",
                     "one-to-one but not surjective scalar map", fixed(maps::arctan1d)});
        e.push_back({"linear", 0, "x -> A x for a row-major matrix A (identity by default)",
                     "constant bound on the inverse Jacobian norm",
                     [](std::size_t n, const MapParams& p) {
                         if (p.matrix.empty()) return maps::linear(Matrix::identity(n == 0 ? 1 : n));
                         const auto m = static_cast<std::size_t>(std::llround(std::sqrt(p.matrix.size())));
                         if (m * m != p.matrix.size()) throw ParameterError("linear: matrix must be square");
                         if (n != 0 && n != m) throw DimensionError("linear: matrix does not match dimension");
                         return maps::linear(Matrix(m, p.matrix));
                     }});
        e.push_back({"cubic1d", 1, "x + x^3: global diffeomorphism of R with f' >= 1", "",
                     fixed(maps::cubic1d)});
        e.push_back({"exp1d", 1, "exp(x): injective, not surjective", "", fixed(maps::exp1d)});
        e.push_back({"rot-poly2d", 2, "rotation(pi/6) applied to x + 0.1*x^3 componentwise: coercive diffeomorphism",
                     "coercive local diffeomorphism", fixed(maps::rot_poly2d)});
        e.push_back({"cexp2d", 2, "complex exponential on R^2: local diffeomorphism, not injective", "",
                     fixed(maps::cexp2d)});
        e.push_back({"fold2d", 2, "(xi^2 + 1, eta): even in xi, not injective", "", fixed(maps::fold2d)});
        return e;
    }();
    return entries;
}

inline const MapRegistryEntry& find_map(std::string_view key) {
    for (const auto& e : map_registry())
        if (e.key == key) return e;
    throw UnknownMapError(std::string(key));
}

/// Builds a registered map; `dim` = 0 accepts the entry's natural dimension.
inline C1Map builtin(std::string_view key, std::size_t dim = 0, const MapParams& params = {}) {
    const auto& entry = find_map(key);
    if (entry.dim != 0 && dim != 0 && dim != entry.dim) {
        throw DimensionError(std::string(key) + " has dimension " + std::to_string(entry.dim));
    }
    return entry.make(dim, params);
}

}  // namespace newtonflow
