#pragma once

// Subcommands behind the command-line tool. Each takes a resolved RunConfig
// and returns an exit code plus a JSON document carrying `"schema": 1`.
//
// Exit codes: 0 success / Satisfied, 1 configuration error, 2 flow failure,
// 3 Violated, 4 Inconclusive, 5 failed self-check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "newtonflow/aux_function.hpp"
#include "newtonflow/basin.hpp"
#include "newtonflow/certify.hpp"
#include "newtonflow/config.hpp"
#include "newtonflow/flow.hpp"
#include "newtonflow/io.hpp"
#include "newtonflow/maps.hpp"

namespace newtonflow {

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kConfig = 1;
inline constexpr int kFlowFailure = 2;
inline constexpr int kViolated = 3;
inline constexpr int kInconclusive = 4;
inline constexpr int kSelfCheck = 5;
}  // namespace exit_code

struct CommandResult {
    int exit_code = exit_code::kOk;
    Json json;
    /// Optional CSV payload for `--csv`.
    std::string csv;
};

inline Json schema_header(const std::string& command) {
    Json j;
    j["schema"] = kSchemaVersion;
    j["command"] = command;
    return j;
}

inline CommandResult config_error(const std::string& command, const std::string& message) {
    CommandResult r{exit_code::kConfig, schema_header(command), {}};
    r.json["error"] = message;
    return r;
}

inline std::shared_ptr<const C1Map> make_map(const RunConfig& cfg) {
    MapParams p;
    p.matrix = cfg.matrix;
    p.jacobian_perturbation = cfg.inject_jacobian_fault;
    const std::size_t dim = cfg.map == "linear" && cfg.matrix.empty() ? cfg.start.size() : 0;
    return std::make_shared<const C1Map>(builtin(cfg.map, dim, p));
}

inline CertifyOptions certify_options(const RunConfig& cfg) {
    CertifyOptions o;
    o.workers = cfg.workers;
    return o;
}

inline int verdict_exit(Verdict v) {
    switch (v) {
        case Verdict::Satisfied: return exit_code::kOk;
        case Verdict::Violated: return exit_code::kViolated;
        case Verdict::Inconclusive: return exit_code::kInconclusive;
    }
    return exit_code::kInconclusive;
}

// ---- solve ----

inline CommandResult run_solve(const RunConfig& cfg) {
    CommandResult res{exit_code::kOk, schema_header("solve"), {}};
    std::shared_ptr<const C1Map> map;
    try {
        cfg.flow.validate();
        map = make_map(cfg);
        if (cfg.target.size() != map->dim()) throw DimensionError("target must have the map's dimension");
        if (cfg.start.size() != map->dim()) throw DimensionError("start must have the map's dimension");
    } catch (const Error& e) {
        return config_error("solve", e.what());
    }
    res.json["map"] = cfg.map;
    res.json["target"] = json_vector(cfg.target);
    res.json["start"] = json_vector(cfg.start);
    try {
        const InverseSolution sol = solve_inverse(*map, cfg.target, cfg.start, cfg.flow);
        res.json["status"] = to_string(FlowStatus::Converged);
        res.json["x"] = json_vector(sol.x);
        res.json["residual"] = json_number(sol.residual);
        res.json["steps"] = sol.trajectory.steps;
        res.json["max_drift"] = json_number(decay_drift(sol.trajectory));
        res.json["polish_steps"] = sol.polish_steps;
        res.json["trajectory"] = trajectory_summary_json(sol.trajectory);
        res.csv = trajectory_csv(sol.trajectory);
    } catch (const FlowFailure& e) {
        res.exit_code = exit_code::kFlowFailure;
        res.json["status"] = to_string(e.status());
        res.json["message"] = e.what();
        res.json["trajectory"] = trajectory_summary_json(e.trajectory());
        res.csv = trajectory_csv(e.trajectory());
    } catch (const Error& e) {
        return config_error("solve", e.what());
    }
    return res;
}

// ---- certify ----

inline const std::vector<std::string>& certify_criteria() {
    static const std::vector<std::string> ids{"theorem21", "cor22", "theorem31", "hadamard",
                                              "coercive",  "ball",  "bounded-inverse"};
    return ids;
}

inline AuxFunction make_aux(const RunConfig& cfg, const std::shared_ptr<const C1Map>& map) {
    if (cfg.aux == "log-h") return aux_log_h(cfg.a, cfg.b, cfg.c, cfg.x0, cfg.x1, map);
    if (cfg.aux == "hadamard") return aux_hadamard(Omega::parse(cfg.omega));
    if (cfg.aux == "log-coercive") return aux_log_coercive(map);
    throw ParameterError("unknown aux function '" + cfg.aux + "' (log-h, hadamard, log-coercive)");
}

inline CommandResult run_certify(const RunConfig& cfg) {
    const auto& ids = certify_criteria();
    if (std::find(ids.begin(), ids.end(), cfg.criterion) == ids.end()) {
        return config_error("certify", "unknown criterion '" + cfg.criterion + "'");
    }
    CommandResult res{exit_code::kOk, schema_header("certify"), {}};
    res.json["map"] = cfg.map;
    try {
        const auto map = make_map(cfg);
        const std::size_t n = map->dim();
        if (cfg.x0.size() != n || cfg.x1.size() != n) throw DimensionError("x0 and x1 must have the map's dimension");
        const CertifyOptions opts = certify_options(cfg);
        const auto sampler = [&] { return parse_sampler(cfg.sampler, n, cfg.seed); };

        Certificate cert;
        if (cfg.criterion == "theorem21") {
            cert = check_theorem21(*map, cfg.x0, make_aux(cfg, map), sampler(), opts);
        } else if (cfg.criterion == "cor22") {
            cert = check_cor22(*map, cfg.x0, cfg.x1, cfg.a, cfg.b, cfg.c, sampler(), opts);
        } else if (cfg.criterion == "theorem31") {
            cert = check_theorem31(*map, make_aux(cfg, map), sampler(), cfg.n_dirs, cfg.seed, opts);
        } else if (cfg.criterion == "hadamard") {
            cert = check_hadamard(*map, Omega::parse(cfg.omega), sampler(), {1, 2, 4, 8, 16, 32, 64, 128}, opts);
        } else if (cfg.criterion == "coercive") {
            cert = check_coercive_map(*map, cfg.radii, cfg.samples, cfg.seed, cfg.growth_factor, opts);
        } else if (cfg.criterion == "ball") {
            cert = check_ball_criterion(*map, cfg.x0, cfg.r, cfg.samples, cfg.seed, opts);
        } else {
            const SupEstimate est = check_bounded_inverse_on_ball(*map, cfg.r, sampler(), opts);
            cert.criterion = "bounded-inverse";
            cert.seed = cfg.seed;
            cert.extremal_value = est.value;
            cert.witness = est.witness;
            cert.threshold = std::numeric_limits<double>::infinity();
            cert.samples_used = est.samples_used;
            cert.stats.emplace_back("samples_outside", static_cast<double>(est.samples_outside));
            if (est.samples_used == 0) {
                cert.verdict = Verdict::Inconclusive;
                cert.note = "no samples inside the ball";
            } else if (std::isinf(est.value)) {
                cert.verdict = Verdict::Violated;
                cert.note = "singular Jacobian inside the ball";
            } else {
                cert.verdict = Verdict::Satisfied;
            }
        }
        res.json["certificate"] = certificate_json(cert);
        res.exit_code = verdict_exit(cert.verdict);
    } catch (const Error& e) {
        return config_error("certify", e.what());
    }
    return res;
}

// ---- basin ----

inline CommandResult run_basin(const RunConfig& cfg) {
    CommandResult res{exit_code::kOk, schema_header("basin"), {}};
    try {
        cfg.flow.validate();
        if (cfg.box.size() != 4) throw ParameterError("box needs xmin,xmax,ymin,ymax");
        const auto map = make_map(cfg);
        const Box2 box{cfg.box[0], cfg.box[1], cfg.box[2], cfg.box[3]};
        const BasinGrid grid = scan_basin(*map, cfg.x0, box, cfg.resolution, cfg.resolution, cfg.flow, cfg.workers);
        Json g = basin_json(grid, cfg.map);
        g.erase("schema");
        res.json.update(g);
        if (cfg.pairs > 0) {
            Json probe;
            const std::size_t converged = grid.count(FlowStatus::Converged);
            if (converged < 2) {
                probe["skipped"] = "fewer than two Converged cells";
            } else {
                const InjectivityReport rep = injectivity_probe(grid, *map, cfg.pairs, cfg.seed);
                probe["pairs_tested"] = rep.pairs_tested;
                probe["collisions"] = rep.collisions;
                probe["min_ratio"] = json_number(rep.min_ratio);
                probe["min_pair"] = {json_vector(rep.min_a), json_vector(rep.min_b)};
                if (rep.collision_found()) {
                    probe["collision"] = {json_vector(rep.collision_a), json_vector(rep.collision_b)};
                }
            }
            probe["seed"] = cfg.seed;
            res.json["injectivity"] = std::move(probe);
        }
        res.csv = basin_csv(grid);
    } catch (const Error& e) {
        return config_error("basin", e.what());
    }
    return res;
}

// ---- verify-ex5 ----

/// |pipeline − closed form| relative to the scale of the dot product.
inline double ex5_oracle_error(const C1Map& map, const Vector& x) {
    const Vector fx0 = map.eval(Vector{0.0, 0.0});
    const Vector field = scaled(solve(lu_decompose(map.jacobian(x)), sub(map.eval(x), fx0)), -1.0);
    const double pipeline = dot(x, field);
    const double closed = map.companions()->x_dot_field(x);
    const double scale = std::abs(closed) + norm2(x) * norm2(field);
    return scale > 0 ? std::abs(pipeline - closed) / scale : std::abs(pipeline - closed);
}

inline CommandResult run_verify_ex5(const RunConfig& cfg) {
    CommandResult res{exit_code::kOk, schema_header("verify-ex5"), {}};
    std::shared_ptr<const C1Map> map;
    try {
        if (cfg.grid_res < 2) throw ParameterError("grid_res must be at least 2");
        MapParams p;
        p.jacobian_perturbation = cfg.inject_jacobian_fault;
        map = std::make_shared<const C1Map>(builtin("zampieri-ex5", 2, p));
    } catch (const Error& e) {
        return config_error("verify-ex5", e.what());
    }
    const CertifyOptions opts = certify_options(cfg);
    Json checks = Json::array();
    std::string first_failure;
    auto record = [&](const std::string& name, bool passed, Json details, bool gated = true) {
        Json c;
        c["name"] = name;
        c["gated"] = gated;
        c["passed"] = passed;
        c["details"] = std::move(details);
        checks.push_back(std::move(c));
        if (gated && !passed && first_failure.empty()) first_failure = name;
    };

    // Closed-form x·F against the LU pipeline on random points with ‖x‖ ≤ 5.
    {
        const std::size_t count = 10000;
        const auto pts = generate_samples(BallSampler{5.0, count, cfg.seed, {}}, 2);
        double worst = 0.0;
        Vector worst_x = pts.front();
        for (const auto& x : pts) {
            const double e = ex5_oracle_error(*map, x);
            if (!(e <= worst)) {
                worst = e;
                worst_x = x;
            }
        }
        Json d;
        d["points"] = count;
        d["max_relative_error"] = json_number(worst);
        d["worst_point"] = json_vector(worst_x);
        d["tolerance"] = 1e-9;
        record("oracle", worst <= 1e-9, std::move(d));
    }

    // Quadratic criterion with a = b = 1, c = 0 on a grid over [−5, 5]².
    const GridSampler grid{{-5.0, -5.0}, {5.0, 5.0}, cfg.grid_res};
    {
        const Certificate cert = check_cor22(*map, {0, 0}, {0, 0}, 1, 1, 0, grid, opts);
        record("cor22-grid", cert.verdict == Verdict::Satisfied && cert.stat("violations") == 0.0,
               certificate_json(cert));
    }

    // The sampled sup of D⁺_F k for the log-h auxiliary function stays ≤ b.
    {
        const QuadraticConstants q = normalize_quadratic_constants(1, 1, 0);
        const AuxFunction k = aux_log_h(1, 1, 0, {0, 0}, {0, 0}, map);
        const auto pts = generate_samples(grid, 2);
        const Vector fx0 = map->eval({0, 0});
        double sup = -std::numeric_limits<double>::infinity();
        Vector arg;
        for (const auto& x : pts) {
            const double v = dplus(k, x, newton_field(*map, x, fx0));
            if (v > sup) {
                sup = v;
                arg = x;
            }
        }
        Json d;
        d["a"] = q.a;
        d["b"] = q.b;
        d["c"] = q.c;
        d["sup_dplus"] = json_number(sup);
        d["witness"] = json_vector(arg);
        d["samples"] = pts.size();
        record("proof-constant", sup <= q.b + 1e-6, std::move(d));
    }

    // First component positive on 10⁵ samples, so (−1, 0) is never attained.
    {
        const std::size_t count = 100000;
        const auto pts = generate_samples(BallSampler{10.0, count, cfg.seed + 1, {}}, 2);
        double lo = std::numeric_limits<double>::infinity();
        Vector arg;
        for (const auto& x : pts) {
            const double v = map->eval(x)[0];
            if (v < lo) {
                lo = v;
                arg = x;
            }
        }
        Json d;
        d["samples"] = count;
        d["min_first_component"] = json_number(lo);
        d["argmin"] = json_vector(arg);
        record("non-surjectivity", lo > 0.0, std::move(d));
    }

    // Flow from (1, 1) to f(0) = (1, 0).
    {
        Json d;
        bool ok = false;
        try {
            const Trajectory tr = integrate(*map, {1, 1}, {1, 0}, cfg.flow, FlowDirection::Forward);
            const double drift = decay_drift(tr);
            const double angle = direction_deviation(tr);
            d["summary"] = trajectory_summary_json(tr);
            d["direction_deviation"] = json_number(angle);
            d["distance_to_origin"] = json_number(norm2(tr.final().x));
            ok = tr.status == FlowStatus::Converged && drift <= 1e-6 && angle <= 1e-5 &&
                 norm2(tr.final().x) <= 1e-6;
        } catch (const Error& e) {
            d["error"] = e.what();
        }
        record("flow", ok, std::move(d));
    }

    // Sign of x·F on spheres, reported only.
    {
        Json d = Json::array();
        for (double r : {0.5, 1.0, 2.0, 5.0}) {
            const Certificate cert = check_ball_criterion(*map, {0, 0}, r, 256, cfg.seed, opts);
            Json e;
            e["r"] = r;
            e["min"] = json_number(cert.stat("min"));
            e["max"] = json_number(cert.stat("max"));
            e["both_signs"] = cert.stat("min") < 0 && cert.stat("max") > 0;
            d.push_back(std::move(e));
        }
        record("sign-profile", true, std::move(d), false);
    }

    res.json["grid_res"] = cfg.grid_res;
    res.json["seed"] = cfg.seed;
    res.json["checks"] = std::move(checks);
    res.json["passed"] = first_failure.empty();
    if (!first_failure.empty()) {
        res.json["failed_check"] = first_failure;
        res.exit_code = exit_code::kSelfCheck;
    }
    return res;
}

// ---- list-maps ----

/// One JSON object per registry entry.
inline std::vector<Json> list_maps() {
    std::vector<Json> out;
    for (const auto& e : map_registry()) {
        Json j;
        j["key"] = e.key;
        j["dim"] = e.dim;
        j["description"] = e.description;
        j["paper_ref"] = e.paper_ref;
        out.push_back(std::move(j));
    }
    return out;
}

inline CommandResult run_command(const RunConfig& cfg) {
    if (cfg.command == "solve") return run_solve(cfg);
    if (cfg.command == "certify") return run_certify(cfg);
    if (cfg.command == "basin") return run_basin(cfg);
    if (cfg.command == "verify-ex5") return run_verify_ex5(cfg);
    return config_error(cfg.command, "unknown command '" + cfg.command + "'");
}

}  // namespace newtonflow
