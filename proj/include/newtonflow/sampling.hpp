#pragma once

// Deterministic point sets on which certificates estimate suprema.

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "newtonflow/errors.hpp"
#include "newtonflow/linalg.hpp"

namespace newtonflow {

/// Tensor grid over a box; `resolution` points per axis, endpoints included.
struct GridSampler {
    Vector lo, hi;
    std::size_t resolution = 2;
};

/// Uniform points in the ball ‖x − center‖ ≤ radius.
struct BallSampler {
    double radius = 1.0;
    std::size_t count = 1;
    std::uint64_t seed = 0;
    Vector center;  // origin when empty
};

/// Uniform points on the sphere ‖x − center‖ = radius.
struct SphereSampler {
    double radius = 1.0;
    std::size_t count = 1;
    std::uint64_t seed = 0;
    Vector center;  // origin when empty
};

using Sampler = std::variant<GridSampler, BallSampler, SphereSampler>;

inline std::uint64_t sampler_seed(const Sampler& s) {
    return std::visit(
        [](const auto& m) -> std::uint64_t {
            if constexpr (std::is_same_v<std::decay_t<decltype(m)>, GridSampler>) return 0;
            else return m.seed;
        },
        s);
}

namespace detail {

inline Vector random_unit(std::size_t dim, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector v(dim);
    double n = 0.0;
    do {
        for (double& e : v) e = normal(rng);
        n = norm2(v);
    } while (n < 1e-12);
    for (double& e : v) e /= n;
    return v;
}

inline Vector centered(const Vector& center, std::size_t dim) { return center.empty() ? Vector(dim, 0.0) : center; }

}  // namespace detail

/// Random unit vector stream for direction sampling.
inline Vector random_unit_vector(std::size_t dim, std::mt19937_64& rng) { return detail::random_unit(dim, rng); }

inline std::vector<Vector> generate_samples(const Sampler& sampler, std::size_t dim) {
    std::vector<Vector> pts;
    if (const auto* g = std::get_if<GridSampler>(&sampler)) {
        if (g->lo.size() != dim || g->hi.size() != dim) throw DimensionError("grid bounds do not match dimension");
        if (g->resolution == 0) throw ParameterError("grid resolution must be positive");
        std::size_t total = 1;
        for (std::size_t d = 0; d < dim; ++d) total *= g->resolution;
        pts.reserve(total);
        std::vector<std::size_t> idx(dim, 0);
        auto coord = [&](std::size_t d, std::size_t i) {
            if (g->resolution == 1) return 0.5 * (g->lo[d] + g->hi[d]);
            const double frac = static_cast<double>(i) / static_cast<double>(g->resolution - 1);
            return g->lo[d] + frac * (g->hi[d] - g->lo[d]);
        };
        for (std::size_t k = 0; k < total; ++k) {
            Vector p(dim);
            for (std::size_t d = 0; d < dim; ++d) p[d] = coord(d, idx[d]);
            pts.push_back(std::move(p));
            for (std::size_t d = 0; d < dim; ++d) {
                if (++idx[d] < g->resolution) break;
                idx[d] = 0;
            }
        }
        return pts;
    }
    if (const auto* b = std::get_if<BallSampler>(&sampler)) {
        if (b->count == 0) throw ParameterError("sample count must be at least 1");
        std::mt19937_64 rng(b->seed);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        const Vector c = detail::centered(b->center, dim);
        pts.reserve(b->count);
        for (std::size_t k = 0; k < b->count; ++k) {
            Vector u = detail::random_unit(dim, rng);
            const double r = b->radius * std::pow(unif(rng), 1.0 / static_cast<double>(dim));
            for (std::size_t d = 0; d < dim; ++d) u[d] = c[d] + r * u[d];
            pts.push_back(std::move(u));
        }
        return pts;
    }
    const auto& s = std::get<SphereSampler>(sampler);
    if (s.count == 0) throw ParameterError("sample count must be at least 1");
    std::mt19937_64 rng(s.seed);
    const Vector c = detail::centered(s.center, dim);
    pts.reserve(s.count);
    for (std::size_t k = 0; k < s.count; ++k) {
        Vector u = detail::random_unit(dim, rng);
        for (std::size_t d = 0; d < dim; ++d) u[d] = c[d] + s.radius * u[d];
        pts.push_back(std::move(u));
    }
    return pts;
}

/// Parses comma-separated decimals, e.g. "1,-2.5,3e-4".
inline Vector parse_vector(const std::string& text) {
    Vector out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            throw ParameterError("not a number: '" + item + "'");
        }
        while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
        if (used != item.size()) throw ParameterError("not a number: '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw ParameterError("empty vector");
    return out;
}

/// "grid:lo0,hi0,...,lo_{n-1},hi_{n-1},res", "ball:radius,count" or "sphere:radius,count".
inline Sampler parse_sampler(const std::string& spec, std::size_t dim, std::uint64_t seed) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos) throw ParameterError("sampler spec needs 'kind:values': " + spec);
    const std::string kind = spec.substr(0, colon);
    const Vector v = parse_vector(spec.substr(colon + 1));
    auto as_count = [](double d) {
        if (d < 1 || d != std::floor(d)) throw ParameterError("count must be a positive integer");
        return static_cast<std::size_t>(d);
    };
    if (kind == "grid") {
        if (v.size() != 2 * dim + 1) throw ParameterError("grid needs 2*dim bounds and a resolution");
        GridSampler g;
        for (std::size_t d = 0; d < dim; ++d) {
            g.lo.push_back(v[2 * d]);
            g.hi.push_back(v[2 * d + 1]);
        }
        g.resolution = as_count(v.back());
        return g;
    }
    if (v.size() != 2) throw ParameterError(kind + " needs radius,count");
    if (kind == "ball") return BallSampler{v[0], as_count(v[1]), seed, {}};
    if (kind == "sphere") return SphereSampler{v[0], as_count(v[1]), seed, {}};
    throw ParameterError("unknown sampler kind: " + kind);
}

}  // namespace newtonflow
