#pragma once

// Sampled checks of the injectivity and bijectivity criteria. Suprema over
// the whole space cannot be decided from samples, so every check returns a
// graded Certificate and never claims more than the samples support.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "newtonflow/aux_function.hpp"
#include "newtonflow/c1map.hpp"
#include "newtonflow/certificate.hpp"
#include "newtonflow/flow.hpp"
#include "newtonflow/linalg.hpp"
#include "newtonflow/parallel.hpp"
#include "newtonflow/sampling.hpp"

namespace newtonflow {

/// Tuning of the growth and coercivity statistics shared by the checks.
struct CertifyOptions {
    /// Relative rise of the outermost-annulus supremum that counts as growth.
    double trend_tol = 0.05;
    /// Number of nested annuli (radii halving inward from the largest sample).
    std::size_t annuli = 4;
    /// Coercivity evidence needs the last increment ≥ this fraction of the first.
    double increment_ratio = 0.1;
    /// Radii multipliers (of the largest sample radius) for coercivity probes of k.
    std::vector<double> coercivity_scales{0.25, 0.5, 1.0, 2.0, 4.0, 8.0};
    std::size_t coercivity_samples = 256;
    std::size_t workers = 0;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Per-sample value; empty when the sample was skipped.
struct SampleValue {
    std::optional<double> value;
    bool singular = false;
};

template <class Fn>
std::vector<SampleValue> evaluate_samples(const std::vector<Vector>& pts, Fn&& fn, std::size_t workers) {
    std::vector<SampleValue> out(pts.size());
    parallel_for(
        pts.size(),
        [&](std::size_t i) {
            try {
                out[i].value = fn(i, pts[i]);
            } catch (const SingularError&) {
                out[i].singular = true;
            } catch (const Error&) {
                // non-finite or domain failure: skipped
            }
        },
        workers);
    return out;
}

struct Extremum {
    double value = -std::numeric_limits<double>::infinity();
    std::size_t index = 0;
    bool found = false;
};

// Ties resolve to the lowest index so results do not depend on worker count.
inline Extremum arg_max(const std::vector<SampleValue>& vals) {
    Extremum e;
    for (std::size_t i = 0; i < vals.size(); ++i) {
        if (vals[i].value && (!e.found || *vals[i].value > e.value)) {
            e = {*vals[i].value, i, true};
        }
    }
    return e;
}

inline Extremum arg_min(const std::vector<SampleValue>& vals) {
    Extremum e;
    e.value = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < vals.size(); ++i) {
        if (vals[i].value && (!e.found || *vals[i].value < e.value)) {
            e = {*vals[i].value, i, true};
        }
    }
    return e;
}

inline void count_samples(Certificate& cert, const std::vector<SampleValue>& vals) {
    for (const auto& v : vals) {
        if (v.value) ++cert.samples_used;
        else if (v.singular) ++cert.samples_skipped_singular;
    }
    const std::size_t other = vals.size() - cert.samples_used - cert.samples_skipped_singular;
    if (other) cert.stats.emplace_back("samples_skipped_other", static_cast<double>(other));
}

struct GrowthTrend {
    bool stable = false;
    std::size_t populated = 0;
    std::vector<double> annulus_sup;
    double growth = 0.0;
};

// Sups on nested annuli [R/2^k, R/2^(k-1)] (innermost is a ball) with R the
// largest sample radius; stable when the outermost sup does not rise above
// the inner ones by more than trend_tol (relative).
inline GrowthTrend growth_trend(const std::vector<Vector>& pts, const std::vector<SampleValue>& vals,
                                const CertifyOptions& opts) {
    GrowthTrend g;
    double rmax = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        if (vals[i].value) rmax = std::max(rmax, norm2(pts[i]));
    const std::size_t m = std::max<std::size_t>(opts.annuli, 2);
    std::vector<std::optional<double>> sup(m);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (!vals[i].value) continue;
        const double r = norm2(pts[i]);
        std::size_t k = 0;  // 0 = outermost
        double edge = 0.5 * rmax;
        while (k + 1 < m && r < edge) {
            ++k;
            edge *= 0.5;
        }
        if (!sup[k] || *vals[i].value > *sup[k]) sup[k] = *vals[i].value;
    }
    std::optional<double> inner_max;
    for (std::size_t k = m; k-- > 0;) {
        if (!sup[k]) continue;
        ++g.populated;
        g.annulus_sup.push_back(*sup[k]);
        if (k > 0) inner_max = inner_max ? std::max(*inner_max, *sup[k]) : *sup[k];
    }
    if (!sup[0] || !inner_max || g.populated < 2) return g;
    g.growth = *sup[0] - *inner_max;
    g.stable = g.growth <= opts.trend_tol * (1.0 + std::abs(*inner_max));
    return g;
}

inline std::vector<Vector> sphere_points_with_axes(std::size_t dim, double radius, const Vector& center,
                                                   std::size_t count, std::uint64_t seed) {
    std::vector<Vector> pts;
    for (std::size_t d = 0; d < dim; ++d) {
        for (double s : {1.0, -1.0}) {
            Vector p = center.empty() ? Vector(dim, 0.0) : center;
            p[d] += s * radius;
            pts.push_back(std::move(p));
        }
    }
    auto random = generate_samples(SphereSampler{radius, std::max<std::size_t>(count, 1), seed, center}, dim);
    pts.insert(pts.end(), std::make_move_iterator(random.begin()), std::make_move_iterator(random.end()));
    return pts;
}

}  // namespace detail

/// (x − x₁)·F(x) with F(x) = −f′(x)⁻¹(f(x) − f(x₀)), one Jacobian solve.
inline double inner_field(const C1Map& map, const Vector& x, const Vector& x0, const Vector& x1) {
    const Vector fv = newton_field(map, x, map.eval(x0));
    return dot(sub(x, x1), fv);
}

/// Evidence that k(x) → ∞: minima of k over spheres of increasing radius
/// must not decrease, and their increments must not die out.
inline Certificate check_aux_coercivity(const AuxFunction& k, std::size_t dim, const std::vector<double>& radii,
                                        std::size_t samples_per_sphere, std::uint64_t seed,
                                        const CertifyOptions& opts = {}) {
    Certificate cert;
    cert.criterion = "aux-coercivity";
    cert.seed = seed;
    if (radii.size() < 2) {
        cert.note = "need at least two radii";
        return cert;
    }
    std::vector<double> minima;
    std::vector<Vector> argmins;
    for (std::size_t j = 0; j < radii.size(); ++j) {
        const auto pts = detail::sphere_points_with_axes(dim, radii[j], {}, samples_per_sphere, seed + j);
        const auto vals = detail::evaluate_samples(
            pts, [&](std::size_t, const Vector& x) { return k(x); }, opts.workers);
        auto lo = detail::arg_min(vals);
        for (const auto& v : vals) {
            if (v.value) ++cert.samples_used;
        }
        // points where k overflowed are not minima
        minima.push_back(lo.found ? lo.value : std::numeric_limits<double>::infinity());
        argmins.push_back(lo.found ? pts[lo.index] : pts.front());
        cert.stats.emplace_back("min_k_r" + std::to_string(j), minima.back());
    }
    cert.threshold = minima.front();
    for (std::size_t j = 1; j < minima.size(); ++j) {
        if (minima[j] < minima[j - 1] - kViolationSlack * (1.0 + std::abs(minima[j - 1]))) {
            cert.verdict = Verdict::Violated;
            cert.extremal_value = minima[j];
            cert.witness = argmins[j];
            cert.note = "minimum of k decreases with radius";
            for (std::size_t i = j + 1; i < minima.size(); ++i) {
                if (minima[i] < cert.extremal_value) {
                    cert.extremal_value = minima[i];
                    cert.witness = argmins[i];
                }
            }
            return cert;
        }
    }
    cert.extremal_value = minima.back();
    cert.witness = argmins.back();
    const double first = minima[1] - minima[0];
    const double last = minima.back() - minima[minima.size() - 2];
    if (std::isinf(minima.back()) || (last > 0 && last >= opts.increment_ratio * first)) {
        cert.verdict = Verdict::Satisfied;
    } else {
        cert.note = "minimum of k grows with vanishing increments (possibly bounded)";
    }
    return cert;
}

namespace detail {

inline std::vector<double> coercivity_radii(const std::vector<Vector>& pts, const CertifyOptions& opts) {
    double rmax = 1.0;
    for (const auto& p : pts) rmax = std::max(rmax, norm2(p));
    std::vector<double> radii;
    for (double s : opts.coercivity_scales) radii.push_back(s * rmax);
    return radii;
}

// Folds the coercivity evidence for k into a sampled-supremum certificate.
inline void apply_trend_and_coercivity(Certificate& cert, const GrowthTrend& trend, const Certificate& coercive) {
    cert.stats.emplace_back("annuli_populated", static_cast<double>(trend.populated));
    cert.stats.emplace_back("outer_growth", trend.growth);
    cert.stats.emplace_back("aux_coercivity_verdict", static_cast<double>(coercive.verdict));
    if (cert.samples_used == 0) {
        cert.verdict = Verdict::Inconclusive;
        cert.note = "no valid samples";
        return;
    }
    if (coercive.verdict == Verdict::Violated) {
        cert.verdict = Verdict::Violated;
        cert.points.emplace_back("coercivity_witness", coercive.witness);
        cert.note = "auxiliary function is not coercive: " + coercive.note;
        return;
    }
    if (!trend.stable) {
        cert.verdict = Verdict::Inconclusive;
        cert.note = trend.populated < 2 ? "too few annuli populated" : "sampled supremum grows with radius";
        return;
    }
    if (coercive.verdict != Verdict::Satisfied) {
        cert.verdict = Verdict::Inconclusive;
        cert.note = "coercivity of the auxiliary function not established";
        return;
    }
    cert.verdict = Verdict::Satisfied;
}

}  // namespace detail

/// Injectivity via an auxiliary function: sup_x D⁺_{F(x)}k(x) < ∞ with
/// F(x) = −f′(x)⁻¹(f(x) − f(x₀)).
inline Certificate check_theorem21(const C1Map& map, const Vector& x0, const AuxFunction& k, const Sampler& sampler,
                                   const CertifyOptions& opts = {}) {
    Certificate cert;
    cert.criterion = "theorem21";
    cert.seed = sampler_seed(sampler);
    const auto pts = generate_samples(sampler, map.dim());
    const Vector target = map.eval(x0);
    const auto vals = detail::evaluate_samples(
        pts, [&](std::size_t, const Vector& x) { return dplus(k, x, newton_field(map, x, target)); }, opts.workers);
    detail::count_samples(cert, vals);
    const auto hi = detail::arg_max(vals);
    if (hi.found) {
        cert.extremal_value = hi.value;
        cert.witness = pts[hi.index];
    }
    cert.threshold = std::numeric_limits<double>::infinity();
    const auto trend = detail::growth_trend(pts, vals, opts);
    const auto coercive = check_aux_coercivity(k, map.dim(), detail::coercivity_radii(pts, opts),
                                               opts.coercivity_samples, cert.seed, opts);
    detail::apply_trend_and_coercivity(cert, trend, coercive);
    return cert;
}

/// Quadratic criterion (x−x₁)·F(x) ≤ a + b‖x−x₁‖² + c‖f(x)−f(x₀)‖², with the
/// left side taken without a factor 2.
inline Certificate check_cor22(const C1Map& map, const Vector& x0, const Vector& x1, double a, double b, double c,
                               const Sampler& sampler, const CertifyOptions& opts = {}) {
    if (a < 0 || b < 0 || c < 0) throw ParameterError("cor22: a, b, c must be nonnegative");
    Certificate cert;
    cert.criterion = "cor22";
    cert.seed = sampler_seed(sampler);
    const auto pts = generate_samples(sampler, map.dim());
    const Vector fx0 = map.eval(x0);
    std::vector<double> rhs(pts.size(), 0.0);
    const auto vals = detail::evaluate_samples(
        pts,
        [&](std::size_t i, const Vector& x) {
            const Vector r = sub(map.eval(x), fx0);
            const Vector d = sub(x, x1);
            const LuFactors lu = lu_decompose(map.jacobian(x));
            const Vector step = solve(lu, r);
            const double lhs = -dot(d, step);
            rhs[i] = a + b * dot(d, d) + c * dot(r, r);
            return lhs - rhs[i];
        },
        opts.workers);
    detail::count_samples(cert, vals);
    const auto hi = detail::arg_max(vals);
    std::size_t violations = 0;
    for (std::size_t i = 0; i < vals.size(); ++i) {
        if (vals[i].value && *vals[i].value > kViolationSlack * (1.0 + std::abs(rhs[i]))) ++violations;
    }
    cert.threshold = 0.0;
    cert.stats.emplace_back("violations", static_cast<double>(violations));
    if (!hi.found) {
        cert.note = "no valid samples";
        return cert;
    }
    cert.extremal_value = hi.value;
    cert.witness = pts[hi.index];
    if (violations > 0) {
        cert.verdict = Verdict::Violated;
        // witness: the worst violating point
        double worst = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < vals.size(); ++i) {
            if (vals[i].value && *vals[i].value > kViolationSlack * (1.0 + std::abs(rhs[i])) && *vals[i].value > worst) {
                worst = *vals[i].value;
                cert.witness = pts[i];
            }
        }
    } else {
        cert.verdict = Verdict::Satisfied;
    }
    return cert;
}

/// Bijectivity via an auxiliary function: sup over x and unit u of
/// D⁺_{f′(x)⁻¹u}k(x) < ∞, with u ranging over random and axis directions.
inline Certificate check_theorem31(const C1Map& map, const AuxFunction& k, const Sampler& sampler, std::size_t n_dirs,
                                   std::uint64_t seed, const CertifyOptions& opts = {}) {
    Certificate cert;
    cert.criterion = "theorem31";
    cert.seed = seed;
    const std::size_t n = map.dim();
    const auto pts = generate_samples(sampler, n);
    std::vector<Vector> best_dir(pts.size());
    const auto vals = detail::evaluate_samples(
        pts,
        [&](std::size_t i, const Vector& x) {
            const LuFactors lu = lu_decompose(map.jacobian(x));
            std::mt19937_64 rng(detail::splitmix64(seed ^ detail::splitmix64(i)));
            std::vector<Vector> dirs;
            for (std::size_t d = 0; d < n; ++d) {
                for (double s : {1.0, -1.0}) {
                    Vector u(n, 0.0);
                    u[d] = s;
                    dirs.push_back(std::move(u));
                }
            }
            for (std::size_t d = 0; d < n_dirs; ++d) dirs.push_back(random_unit_vector(n, rng));
            double best = -std::numeric_limits<double>::infinity();
            for (const auto& u : dirs) {
                const double val = dplus(k, x, solve(lu, u));
                if (val > best) {
                    best = val;
                    best_dir[i] = u;
                }
            }
            return best;
        },
        opts.workers);
    detail::count_samples(cert, vals);
    const auto hi = detail::arg_max(vals);
    if (hi.found) {
        cert.extremal_value = hi.value;
        cert.witness = pts[hi.index];
        cert.points.emplace_back("witness_direction", best_dir[hi.index]);
    }
    cert.threshold = std::numeric_limits<double>::infinity();
    const auto trend = detail::growth_trend(pts, vals, opts);
    const auto coercive =
        check_aux_coercivity(k, n, detail::coercivity_radii(pts, opts), opts.coercivity_samples, seed, opts);
    detail::apply_trend_and_coercivity(cert, trend, coercive);
    return cert;
}

/// Growth bound ‖f′(x)⁻¹‖ ≤ ω(‖x‖) with ∫₀^∞ ds/ω = ∞. The pointwise part is
/// sampled; divergence is exact for built-in ω families and only numeric
/// evidence (never Satisfied) for user-supplied ω.
inline Certificate check_hadamard(const C1Map& map, const Omega& omega, const Sampler& sampler,
                                  const std::vector<double>& radii = {1, 2, 4, 8, 16, 32, 64, 128},
                                  const CertifyOptions& opts = {}) {
    Certificate cert;
    cert.criterion = "hadamard";
    cert.seed = sampler_seed(sampler);
    const auto pts = generate_samples(sampler, map.dim());
    std::vector<double> inv_norms(pts.size(), std::numeric_limits<double>::infinity());
    std::vector<double> bounds(pts.size(), 0.0);
    const auto vals = detail::evaluate_samples(
        pts,
        [&](std::size_t i, const Vector& x) {
            bounds[i] = omega(norm2(x));
            double inv = std::numeric_limits<double>::infinity();
            try {
                inv = inverse_norm(map.jacobian(x));
            } catch (const SingularError&) {
            }
            inv_norms[i] = inv;
            return inv - bounds[i];
        },
        opts.workers);
    detail::count_samples(cert, vals);
    const auto hi = detail::arg_max(vals);
    cert.threshold = 0.0;

    double max_inv = 0.0;
    std::size_t violations = 0;
    for (std::size_t i = 0; i < vals.size(); ++i) {
        if (!vals[i].value) continue;
        max_inv = std::max(max_inv, inv_norms[i]);
        if (*vals[i].value > kViolationSlack * (1.0 + std::abs(bounds[i]))) ++violations;
    }
    cert.stats.emplace_back("max_inverse_norm", max_inv);
    cert.stats.emplace_back("violations", static_cast<double>(violations));

    const auto divergence = omega.divergence();
    cert.stats.emplace_back("integral_diverges", divergence == Omega::Divergence::Diverges   ? 1.0
                                                 : divergence == Omega::Divergence::Converges ? 0.0
                                                                                              : -1.0);
    std::string divergence_note = std::string("integral of 1/omega ") + to_string(divergence);
    if (divergence == Omega::Divergence::Unknown) {
        std::vector<double> integrals;
        for (double r : radii) integrals.push_back(integrate_reciprocal(omega, 0.0, r));
        for (std::size_t j = 0; j < integrals.size(); ++j)
            cert.stats.emplace_back("integral_r" + std::to_string(j), integrals[j]);
        bool growing = integrals.size() >= 3;
        if (growing) {
            const double first = integrals[1] - integrals[0];
            const double last = integrals.back() - integrals[integrals.size() - 2];
            growing = last > 0 && last >= opts.increment_ratio * first;
        }
        divergence_note = growing ? "numeric evidence: integral keeps growing (Inconclusive-Divergence)"
                                  : "numeric evidence: integral flattens";
    }

    if (!hi.found) {
        cert.note = "no valid samples; " + divergence_note;
        return cert;
    }
    cert.extremal_value = hi.value;
    cert.witness = pts[hi.index];
    if (violations > 0) {
        cert.verdict = Verdict::Violated;
        cert.note = "pointwise bound fails; " + divergence_note;
    } else if (divergence == Omega::Divergence::Diverges) {
        cert.verdict = Verdict::Satisfied;
        cert.note = divergence_note;
    } else {
        cert.verdict = Verdict::Inconclusive;
        cert.note = "pointwise bound holds; " + divergence_note;
    }
    return cert;
}

/// Coercivity of f: m(R) = min ‖f‖ over sphere samples must grow by
/// `growth_factor` from the smallest to the largest radius.
inline Certificate check_coercive_map(const C1Map& map, const std::vector<double>& radii, std::size_t samples_per_sphere,
                                      std::uint64_t seed, double growth_factor = 10.0,
                                      const CertifyOptions& opts = {}) {
    if (radii.size() < 2) throw ParameterError("coercive check needs at least two radii");
    for (std::size_t j = 1; j < radii.size(); ++j)
        if (!(radii[j] > radii[j - 1])) throw ParameterError("radii must be increasing");
    Certificate cert;
    cert.criterion = "coercive";
    cert.seed = seed;
    std::vector<double> minima;
    std::vector<Vector> argmins;
    for (std::size_t j = 0; j < radii.size(); ++j) {
        const auto pts = detail::sphere_points_with_axes(map.dim(), radii[j], {}, samples_per_sphere, seed + j);
        const auto vals = detail::evaluate_samples(
            pts, [&](std::size_t, const Vector& x) { return norm2(map.eval(x)); }, opts.workers);
        for (const auto& v : vals)
            if (v.value) ++cert.samples_used;
        const auto lo = detail::arg_min(vals);
        minima.push_back(lo.found ? lo.value : std::numeric_limits<double>::infinity());
        argmins.push_back(lo.found ? pts[lo.index] : pts.front());
        cert.stats.emplace_back("min_norm_r" + std::to_string(j), minima.back());
    }
    cert.threshold = growth_factor * minima.front();
    cert.extremal_value = minima.back();
    cert.witness = argmins.back();
    if (minima.back() > cert.threshold) {
        cert.verdict = Verdict::Satisfied;
        cert.note = "min |f| on spheres grows with radius";
    } else {
        cert.verdict = Verdict::Violated;
        cert.note = "min |f| on spheres stays flat or decays; witness is the flat direction";
    }
    return cert;
}

/// Sphere criterion (x−x₀)·F(x) ≤ 0 on ‖x−x₀‖ = r. Reports the sign profile
/// (minimum and maximum with witnesses).
inline Certificate check_ball_criterion(const C1Map& map, const Vector& x0, double r, std::size_t sphere_samples,
                                        std::uint64_t seed, const CertifyOptions& opts = {}) {
    if (!(r > 0)) throw ParameterError("ball radius must be positive");
    Certificate cert;
    cert.criterion = "ball";
    cert.seed = seed;
    const auto pts = detail::sphere_points_with_axes(map.dim(), r, x0, sphere_samples, seed);
    const Vector target = map.eval(x0);
    const auto vals = detail::evaluate_samples(
        pts, [&](std::size_t, const Vector& x) { return dot(sub(x, x0), newton_field(map, x, target)); }, opts.workers);
    detail::count_samples(cert, vals);
    cert.threshold = kViolationSlack;
    const auto hi = detail::arg_max(vals);
    const auto lo = detail::arg_min(vals);
    if (!hi.found) {
        cert.note = "no valid samples";
        return cert;
    }
    cert.extremal_value = hi.value;
    cert.witness = pts[hi.index];
    cert.stats.emplace_back("min", lo.value);
    cert.stats.emplace_back("max", hi.value);
    cert.points.emplace_back("min_witness", pts[lo.index]);
    cert.points.emplace_back("max_witness", pts[hi.index]);
    cert.verdict = hi.value <= kViolationSlack ? Verdict::Satisfied : Verdict::Violated;
    return cert;
}

struct SupEstimate {
    double value = 0.0;
    Vector witness;
    std::size_t samples_used = 0;
    std::size_t samples_outside = 0;
};

/// Sampled sup of ‖f′(x)⁻¹‖ over ‖x‖ ≤ r; +∞ with witness at a singular Jacobian.
inline SupEstimate check_bounded_inverse_on_ball(const C1Map& map, double r, const Sampler& sampler,
                                                 const CertifyOptions& opts = {}) {
    if (!(r > 0)) throw ParameterError("ball radius must be positive");
    const auto all = generate_samples(sampler, map.dim());
    SupEstimate est;
    std::vector<Vector> pts;
    for (const auto& p : all) {
        if (norm2(p) <= r * (1.0 + 1e-12)) pts.push_back(p);
        else ++est.samples_outside;
    }
    const auto vals = detail::evaluate_samples(
        pts,
        [&](std::size_t, const Vector& x) {
            try {
                return inverse_norm(map.jacobian(x));
            } catch (const SingularError&) {
                return std::numeric_limits<double>::infinity();
            }
        },
        opts.workers);
    const auto hi = detail::arg_max(vals);
    for (const auto& v : vals)
        if (v.value) ++est.samples_used;
    if (hi.found) {
        est.value = hi.value;
        est.witness = pts[hi.index];
    }
    return est;
}

}  // namespace newtonflow
