// Inverts f(ξ, η) = e^ξ/√(1+η²)·(1, η) at a few targets, then aims at (−1, 0),
// which is not in the image. There ξ runs off like ln(2e^{−t} − 1), so the
// integrator gives up just before t = ln 2.

#include <cmath>

#include <fmt/format.h>

#include "newtonflow/certify.hpp"
#include "newtonflow/flow.hpp"
#include "newtonflow/maps.hpp"

int main() {
    using namespace newtonflow;
    const C1Map f = maps::planar_exp();

    for (const Vector& target : {Vector{1, 0}, Vector{2, 3}, Vector{0.01, -5}}) {
        const InverseSolution sol = solve_inverse(f, target, {0, 0});
        fmt::print("target ({}, {}) -> x = ({:.12f}, {:.12f}), residual {:.2e}, {} steps, drift {:.1e}\n", target[0],
                   target[1], sol.x[0], sol.x[1], sol.residual, sol.trajectory.steps, decay_drift(sol.trajectory));
    }

    const Trajectory out = integrate(f, {0, 0}, {-1, 0}, {}, FlowDirection::Forward);
    fmt::print("target (-1, 0): {} ({}) at t = {:.6f} (ln 2 = {:.6f}), |x| = {:.3g}\n", to_string(out.status),
               out.message, out.t_final(), std::log(2.0), norm2(out.final().x));

    const Certificate cert = check_cor22(f, {0, 0}, {0, 0}, 1, 1, 0, GridSampler{{-5, -5}, {5, 5}, 101});
    fmt::print("x.F(x) <= 1 + |x|^2 on a 101x101 grid: {} (max excess {:.3g})\n", to_string(cert.verdict),
               cert.extremal_value);
}
