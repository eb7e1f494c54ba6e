#pragma once

// Newton (Davidenko) flow ẋ = −f′(x)⁻¹(f(x) − y*).
//
// Along exact solutions the residual obeys r(t) = e^{−t}·r(0), so it shrinks
// along a fixed direction. The integrator uses this identity twice: as a
// per-step acceptance test (a step must reproduce the e^{−Δt} contraction of
// the residual) and, after the fact, as a global error measure (decay_drift).

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "newtonflow/c1map.hpp"
#include "newtonflow/errors.hpp"
#include "newtonflow/linalg.hpp"

namespace newtonflow {

struct FlowOptions {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    /// Horizon in flow time (|t| for backward integration).
    double t_max = 40.0;
    double blowup_radius = 1e8;
    double residual_tol = 1e-9;
    std::size_t max_steps = 100000;
    /// κ₂(f′(x)) above this ends the flow with SingularJacobian.
    double max_condition = 1e14;
    /// Keep every accepted step; otherwise only the endpoints are stored.
    bool record_samples = true;

    /// Allowed per-step deviation from the e^{−Δt} contraction, relative to ‖r‖.
    double oracle_tol() const { return 10.0 * rel_tol; }

    bool operator==(const FlowOptions&) const = default;

    void validate() const {
        if (!(abs_tol > 0 && rel_tol > 0 && t_max > 0 && blowup_radius > 0 && residual_tol > 0 &&
              max_steps > 0 && max_condition > 0)) {
            throw ParameterError("flow options must all be positive");
        }
    }
};

enum class FlowStatus { Converged, BlowUp, SingularJacobian, HorizonReached, StepFailure };
enum class FlowDirection { Forward, Backward };

inline const char* to_string(FlowStatus s) {
    switch (s) {
        case FlowStatus::Converged: return "Converged";
        case FlowStatus::BlowUp: return "BlowUp";
        case FlowStatus::SingularJacobian: return "SingularJacobian";
        case FlowStatus::HorizonReached: return "HorizonReached";
        case FlowStatus::StepFailure: return "StepFailure";
    }
    return "?";
}

inline const char* to_string(FlowDirection d) { return d == FlowDirection::Forward ? "forward" : "backward"; }

struct FlowSample {
    double t;
    Vector x;
    /// f(x) − y*
    Vector residual;
};

struct Trajectory {
    FlowDirection direction = FlowDirection::Forward;
    FlowStatus status = FlowStatus::StepFailure;
    std::vector<FlowSample> samples;
    std::size_t steps = 0;
    std::size_t rejected_steps = 0;
    /// Time at which ‖r‖ ≤ residual_tol was first observed (Converged only).
    std::optional<double> t_conv;
    std::string message;

    const FlowSample& initial() const { return samples.front(); }
    const FlowSample& final() const { return samples.back(); }
    double t_final() const { return samples.back().t; }
    double final_residual_norm() const { return norm2(samples.back().residual); }
};

/// F(x) = −f′(x)⁻¹(f(x) − y*). Throws SingularError when f′(x) is singular.
inline Vector newton_field(const C1Map& map, const Vector& x, const Vector& target) {
    const Vector r = sub(map.eval(x), target);
    const LuFactors lu = lu_decompose(map.jacobian(x));
    Vector v = solve(lu, r);
    for (double& e : v) e = -e;
    return v;
}

namespace detail {

struct FieldEval {
    Vector field;
    Vector residual;
    double condition = 1.0;
    double jac_norm = 0.0;
};

inline FieldEval eval_field(const C1Map& map, const Vector& x, const Vector& target, double sign,
                            bool with_condition) {
    FieldEval out;
    out.residual = sub(map.eval(x), target);
    const Matrix j = map.jacobian(x);
    const LuFactors lu = lu_decompose(j);
    out.field = solve(lu, out.residual);
    for (double& e : out.field) e *= -sign;
    if (!all_finite(out.field)) throw NonFiniteError("non-finite Newton field");
    out.jac_norm = j.norm_inf();
    if (with_condition) out.condition = condition_number(j, lu);
    return out;
}

// Dormand–Prince 5(4) tableau.
struct Dopri5 {
    static constexpr std::array<double, 7> c{0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                            a76 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;
};

inline Vector combine(const Vector& x, double h, std::initializer_list<std::pair<double, const Vector*>> terms) {
    Vector out = x;
    for (const auto& [coef, k] : terms) {
        if (coef == 0.0) continue;
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += h * coef * (*k)[i];
    }
    return out;
}

}  // namespace detail

/// Integrates the Newton flow from `start` toward `target`.
///
/// Forward flow contracts the residual by e^{−t}; backward flow follows the
/// opposite field and expands it by e^{|t|}. Every accepted step is stored as
/// a sample when `opts.record_samples` is set.
inline Trajectory integrate(const C1Map& map, const Vector& start, const Vector& target, const FlowOptions& opts,
                            FlowDirection direction = FlowDirection::Forward) {
    using detail::Dopri5;
    opts.validate();
    if (start.size() != map.dim() || target.size() != map.dim()) throw DimensionError("integrate: size mismatch");
    if (!all_finite(start) || !all_finite(target)) throw NonFiniteError("integrate: non-finite start or target");

    const double sign = direction == FlowDirection::Forward ? 1.0 : -1.0;
    const bool forward = direction == FlowDirection::Forward;
    constexpr double eps = std::numeric_limits<double>::epsilon();
    const std::size_t n = map.dim();

    Trajectory traj;
    traj.direction = direction;

    double t = 0.0;
    Vector x = start;
    {
        Vector r = sub(map.eval(x), target);
        if (forward && norm2(r) <= opts.residual_tol) {
            traj.samples.push_back({0.0, x, std::move(r)});
            traj.status = FlowStatus::Converged;
            traj.t_conv = 0.0;
            return traj;
        }
    }
    detail::FieldEval cur;
    try {
        cur = detail::eval_field(map, x, target, sign, true);
    } catch (const SingularError& e) {
        traj.samples.push_back({0.0, x, sub(map.eval(x), target)});
        traj.status = FlowStatus::SingularJacobian;
        traj.message = e.what();
        return traj;
    }
    traj.samples.push_back({0.0, x, cur.residual});
    double rnorm = norm2(cur.residual);
    if (cur.condition > opts.max_condition) {
        traj.status = FlowStatus::SingularJacobian;
        traj.message = "condition number above limit at start";
        return traj;
    }

    auto error_norm = [&](const Vector& x0, const Vector& x1, const Vector& errvec) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double sc = opts.abs_tol + opts.rel_tol * std::max(std::abs(x0[i]), std::abs(x1[i]));
            const double q = errvec[i] / sc;
            s += q * q;
        }
        return std::sqrt(s / static_cast<double>(n));
    };

    // Initial step from first and second derivative estimates.
    double h;
    {
        double dnf = 0.0, dny = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double sc = opts.abs_tol + opts.rel_tol * std::abs(x[i]);
            dnf += (cur.field[i] / sc) * (cur.field[i] / sc);
            dny += (x[i] / sc) * (x[i] / sc);
        }
        h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * std::sqrt(dny / dnf);
        h = std::min(h, opts.t_max);
        double h1 = h;
        try {
            const Vector x1 = detail::combine(x, h, {{1.0, &cur.field}});
            const auto f1 = detail::eval_field(map, x1, target, sign, false);
            double der2 = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double sc = opts.abs_tol + opts.rel_tol * std::abs(x[i]);
                const double d = (f1.field[i] - cur.field[i]) / sc;
                der2 += d * d;
            }
            der2 = std::sqrt(der2) / h;
            const double der12 = std::max(der2, std::sqrt(dnf));
            h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.2);
        } catch (const Error&) {
            h1 = h * 1e-3;
        }
        h = std::min(100.0 * h, h1);
    }

    constexpr double kSafety = 0.9, kFacMin = 0.2, kFacMax = 10.0, kBeta = 0.04;
    const double expo1 = 0.2 - kBeta * 0.75;
    double facold = 1e-4;
    bool last_rejected = false;

    Vector k2, k3, k4, k5, k6;
    while (true) {
        if (traj.steps + traj.rejected_steps >= opts.max_steps) {
            traj.status = FlowStatus::StepFailure;
            traj.message = "step budget exhausted";
            break;
        }
        const double remaining = opts.t_max - std::abs(t);
        const bool hits_horizon = h >= remaining;
        const double step = hits_horizon ? remaining : h;
        const double h_min = 16.0 * eps * std::max(1.0, std::abs(t));
        if (step < h_min && !hits_horizon) {
            traj.status = FlowStatus::StepFailure;
            traj.message = "step size underflow";
            break;
        }

        detail::FieldEval next;
        Vector x_new, errvec(n);
        bool stage_failed = false;
        std::string stage_error;
        bool stage_singular = false;
        try {
            const Vector& k1 = cur.field;
            k2 = detail::eval_field(map, detail::combine(x, step, {{Dopri5::a21, &k1}}), target, sign, false).field;
            k3 = detail::eval_field(map, detail::combine(x, step, {{Dopri5::a31, &k1}, {Dopri5::a32, &k2}}), target,
                                    sign, false)
                     .field;
            k4 = detail::eval_field(
                     map, detail::combine(x, step, {{Dopri5::a41, &k1}, {Dopri5::a42, &k2}, {Dopri5::a43, &k3}}),
                     target, sign, false)
                     .field;
            k5 = detail::eval_field(map,
                                    detail::combine(x, step,
                                                    {{Dopri5::a51, &k1},
                                                     {Dopri5::a52, &k2},
                                                     {Dopri5::a53, &k3},
                                                     {Dopri5::a54, &k4}}),
                                    target, sign, false)
                     .field;
            k6 = detail::eval_field(map,
                                    detail::combine(x, step,
                                                    {{Dopri5::a61, &k1},
                                                     {Dopri5::a62, &k2},
                                                     {Dopri5::a63, &k3},
                                                     {Dopri5::a64, &k4},
                                                     {Dopri5::a65, &k5}}),
                                    target, sign, false)
                     .field;
            x_new = detail::combine(x, step,
                                    {{Dopri5::a71, &k1},
                                     {Dopri5::a73, &k3},
                                     {Dopri5::a74, &k4},
                                     {Dopri5::a75, &k5},
                                     {Dopri5::a76, &k6}});
            next = detail::eval_field(map, x_new, target, sign, true);
            for (std::size_t i = 0; i < n; ++i) {
                errvec[i] = step * (Dopri5::e1 * k1[i] + Dopri5::e3 * k3[i] + Dopri5::e4 * k4[i] +
                                    Dopri5::e5 * k5[i] + Dopri5::e6 * k6[i] + Dopri5::e7 * next.field[i]);
            }
        } catch (const SingularError& e) {
            stage_failed = true;
            stage_singular = true;
            stage_error = e.what();
        } catch (const Error& e) {
            stage_failed = true;
            stage_error = e.what();
        }

        if (stage_failed) {
            ++traj.rejected_steps;
            h = 0.5 * step;
            last_rejected = true;
            if (h < h_min) {
                traj.status = stage_singular ? FlowStatus::SingularJacobian : FlowStatus::StepFailure;
                traj.message = stage_error;
                break;
            }
            continue;
        }

        const double err = error_norm(x, x_new, errvec);

        // Decay oracle: r_new must equal e^{∓Δt}·r_old up to oracle_tol plus rounding.
        const double contraction = std::exp(-sign * step);
        double dev2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = next.residual[i] - contraction * cur.residual[i];
            dev2 += d * d;
        }
        const double dev = std::sqrt(dev2);
        const double rounding =
            100.0 * eps * (norm2(next.residual) + norm2(target) + norm_inf(x_new) * cur.jac_norm + rnorm);
        const double allowed = opts.oracle_tol() * rnorm + rounding;
        const double oracle_ratio = dev / allowed;

        if (err > 1.0 || !std::isfinite(err)) {
            ++traj.rejected_steps;
            const double fac11 = std::isfinite(err) ? std::pow(err, expo1) : 1.0 / kFacMin;
            h = step / std::min(1.0 / kFacMin, fac11 / kSafety);
            last_rejected = true;
            continue;
        }
        if (oracle_ratio > 1.0) {
            ++traj.rejected_steps;
            h = 0.5 * step;
            last_rejected = true;
            continue;
        }

        // accepted
        ++traj.steps;
        t += sign * step;
        x = std::move(x_new);
        cur = std::move(next);
        rnorm = norm2(cur.residual);
        if (opts.record_samples) traj.samples.push_back({t, x, cur.residual});

        if (norm2(x) > opts.blowup_radius) {
            traj.status = FlowStatus::BlowUp;
            break;
        }
        if (forward && rnorm <= opts.residual_tol) {
            traj.status = FlowStatus::Converged;
            traj.t_conv = t;
            break;
        }
        if (cur.condition > opts.max_condition) {
            traj.status = FlowStatus::SingularJacobian;
            traj.message = "condition number above limit";
            break;
        }
        if (hits_horizon) {
            traj.status = FlowStatus::HorizonReached;
            break;
        }

        // PI step-size control on the larger of the two error measures.
        const double err_ctl = std::max({err, oracle_ratio, 1e-10});
        const double fac11 = std::pow(err_ctl, expo1);
        double fac = fac11 / std::pow(facold, kBeta);
        fac = std::clamp(fac / kSafety, 1.0 / kFacMax, 1.0 / kFacMin);
        double h_new = step / fac;
        if (last_rejected) h_new = std::min(h_new, step);
        facold = std::max(err_ctl, 1e-4);
        last_rejected = false;
        h = h_new;
    }

    if (!opts.record_samples && traj.steps > 0) {
        traj.samples.push_back({t, x, cur.residual});
    }
    return traj;
}

/// max over samples of ‖r(t) − e^{−t}·r(0)‖ / ‖r(0)‖.
inline double decay_drift(const Trajectory& traj) {
    const FlowSample& s0 = traj.initial();
    const double r0 = norm2(s0.residual);
    if (r0 == 0.0) return 0.0;
    double worst = 0.0;
    for (const auto& s : traj.samples) {
        const double c = std::exp(-s.t);
        double d2 = 0.0;
        for (std::size_t i = 0; i < s.residual.size(); ++i) {
            const double d = s.residual[i] - c * s0.residual[i];
            d2 += d * d;
        }
        worst = std::max(worst, std::sqrt(d2) / r0);
    }
    return worst;
}

/// Largest angle (radians) between r(t) and r(0) over samples with r(t) ≠ 0.
inline double direction_deviation(const Trajectory& traj) {
    const Vector& r0 = traj.initial().residual;
    const double n0 = norm2(r0);
    if (n0 == 0.0) return 0.0;
    double worst = 0.0;
    for (const auto& s : traj.samples) {
        const double ns = norm2(s.residual);
        if (ns == 0.0) continue;
        double chord2 = 0.0;
        for (std::size_t i = 0; i < r0.size(); ++i) {
            const double d = s.residual[i] / ns - r0[i] / n0;
            chord2 += d * d;
        }
        worst = std::max(worst, 2.0 * std::asin(std::min(1.0, 0.5 * std::sqrt(chord2))));
    }
    return worst;
}

/// Thrown by solve_inverse when the flow does not converge.
class FlowFailure : public Error {
public:
    explicit FlowFailure(Trajectory traj)
        : Error(std::string("flow failed: ") + to_string(traj.status) +
                (traj.message.empty() ? "" : " (" + traj.message + ")")),
          traj_(std::move(traj)) {}

    FlowStatus status() const noexcept { return traj_.status; }
    const Trajectory& trajectory() const noexcept { return traj_; }

private:
    Trajectory traj_;
};

struct InverseSolution {
    Vector x;
    double residual = 0.0;
    int polish_steps = 0;
    Trajectory trajectory;
};

/// Finds x with f(x) = y* by flowing from `start`, then polishing with at most
/// three guarded Newton steps.
inline InverseSolution solve_inverse(const C1Map& map, const Vector& target, const Vector& start,
                                     const FlowOptions& opts = {}) {
    Trajectory traj = integrate(map, start, target, opts, FlowDirection::Forward);
    if (traj.status != FlowStatus::Converged) throw FlowFailure(std::move(traj));

    InverseSolution sol;
    sol.x = traj.final().x;
    sol.residual = norm2(sub(map.eval(sol.x), target));
    for (int i = 0; i < 3 && sol.residual > 0.0; ++i) {
        Vector candidate;
        try {
            candidate = sol.x;
            axpy(1.0, newton_field(map, sol.x, target), candidate);
        } catch (const Error&) {
            break;
        }
        double res;
        try {
            res = norm2(sub(map.eval(candidate), target));
        } catch (const Error&) {
            break;
        }
        if (!(res < sol.residual)) break;
        sol.x = std::move(candidate);
        sol.residual = res;
        ++sol.polish_steps;
    }
    sol.trajectory = std::move(traj);
    return sol;
}

}  // namespace newtonflow
