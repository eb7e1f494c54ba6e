#pragma once

// Grid scans of the basin of attraction of x₀ under the forward Newton flow
// toward f(x₀), for planar maps.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "newtonflow/c1map.hpp"
#include "newtonflow/flow.hpp"
#include "newtonflow/parallel.hpp"

namespace newtonflow {

struct Box2 {
    double xmin = -1, xmax = 1, ymin = -1, ymax = 1;
};

struct BasinCell {
    std::size_t i = 0, j = 0;
    double cx = 0, cy = 0;
    FlowStatus status = FlowStatus::StepFailure;
    /// NaN unless Converged.
    double t_conv = std::numeric_limits<double>::quiet_NaN();
    double final_residual = 0;
    Vector final_x;
    /// Converged and the endpoint lies within `basin_tol` of x₀.
    bool in_basin = false;
};

struct BasinGrid {
    Box2 box;
    std::size_t nx = 0, ny = 0;
    Vector x0;
    /// Row-major in j (y index), then i (x index).
    std::vector<BasinCell> cells;

    const BasinCell& at(std::size_t i, std::size_t j) const { return cells[j * nx + i]; }
    std::size_t count(FlowStatus s) const {
        std::size_t c = 0;
        for (const auto& cell : cells) c += cell.status == s;
        return c;
    }
};

/// Center of cell (i, j).
inline Vector cell_center(const Box2& box, std::size_t nx, std::size_t ny, std::size_t i, std::size_t j) {
    const double dx = (box.xmax - box.xmin) / static_cast<double>(nx);
    const double dy = (box.ymax - box.ymin) / static_cast<double>(ny);
    return {box.xmin + (static_cast<double>(i) + 0.5) * dx, box.ymin + (static_cast<double>(j) + 0.5) * dy};
}

/// One forward flow per cell center toward f(x₀). Deterministic for any
/// worker count: cells are independent and stored by index.
inline BasinGrid scan_basin(const C1Map& map, const Vector& x0, const Box2& box, std::size_t nx, std::size_t ny,
                            FlowOptions opts = {}, std::size_t workers = 0, double basin_tol = 1e-6) {
    if (map.dim() != 2) throw DimensionError("basin scans need a planar map");
    if (nx < 2 || ny < 2) throw ParameterError("basin resolution must be at least 2x2");
    if (!(box.xmax > box.xmin && box.ymax > box.ymin)) throw ParameterError("empty basin box");
    opts.record_samples = false;
    const Vector target = map.eval(x0);

    BasinGrid grid{box, nx, ny, x0, std::vector<BasinCell>(nx * ny)};
    parallel_for(
        nx * ny,
        [&](std::size_t k) {
            BasinCell& cell = grid.cells[k];
            cell.i = k % nx;
            cell.j = k / nx;
            const Vector c = cell_center(box, nx, ny, cell.i, cell.j);
            cell.cx = c[0];
            cell.cy = c[1];
            try {
                const Trajectory tr = integrate(map, c, target, opts, FlowDirection::Forward);
                cell.status = tr.status;
                cell.final_residual = tr.final_residual_norm();
                cell.final_x = tr.final().x;
                if (tr.t_conv) cell.t_conv = *tr.t_conv;
            } catch (const NonFiniteError&) {
                cell.status = FlowStatus::StepFailure;
                cell.final_residual = std::numeric_limits<double>::infinity();
                cell.final_x = c;
            }
            cell.in_basin = cell.status == FlowStatus::Converged && norm2(sub(cell.final_x, x0)) <= basin_tol;
        },
        workers);
    return grid;
}

struct InjectivityReport {
    std::size_t pairs_tested = 0;
    std::size_t collisions = 0;
    /// min ‖f(x) − f(x′)‖ / ‖x − x′‖ over tested pairs.
    double min_ratio = std::numeric_limits<double>::infinity();
    Vector min_a, min_b;
    /// First collision found, if any.
    Vector collision_a, collision_b;
    bool collision_found() const { return collisions > 0; }
};

/// Random pairs of distinct Converged cell centers; a pair with
/// ‖f(x) − f(x′)‖ ≤ sep_tol·‖x − x′‖ refutes injectivity.
inline InjectivityReport injectivity_probe(const BasinGrid& grid, const C1Map& map, std::size_t pairs,
                                           std::uint64_t seed, double sep_tol = 1e-9) {
    std::vector<Vector> pts;
    for (const auto& c : grid.cells)
        if (c.status == FlowStatus::Converged) pts.push_back({c.cx, c.cy});
    if (pts.size() < 2) throw ParameterError("injectivity probe needs at least two Converged cells");
    std::vector<Vector> images;
    images.reserve(pts.size());
    for (const auto& p : pts) images.push_back(map.eval(p));

    InjectivityReport rep;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, pts.size() - 1);
    for (std::size_t k = 0; k < pairs; ++k) {
        const std::size_t a = pick(rng);
        std::size_t b = pick(rng);
        while (b == a) b = pick(rng);
        const double dx = norm2(sub(pts[a], pts[b]));
        const double df = norm2(sub(images[a], images[b]));
        ++rep.pairs_tested;
        const double ratio = df / dx;
        if (ratio < rep.min_ratio) {
            rep.min_ratio = ratio;
            rep.min_a = pts[a];
            rep.min_b = pts[b];
        }
        if (df <= sep_tol * dx) {
            if (rep.collisions == 0) {
                rep.collision_a = pts[a];
                rep.collision_b = pts[b];
            }
            ++rep.collisions;
        }
    }
    return rep;
}

}  // namespace newtonflow
