#pragma once

// JSON and CSV encodings of trajectories, certificates and basin grids.
// Numbers are written in shortest round-trip form so output is bit-stable.

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "json.hpp"
#include "newtonflow/basin.hpp"
#include "newtonflow/certificate.hpp"
#include "newtonflow/flow.hpp"

namespace newtonflow {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// Finite numbers as numbers; NaN and ±∞ as null.
inline Json json_number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json json_vector(const Vector& v) {
    Json a = Json::array();
    for (double e : v) a.push_back(json_number(e));
    return a;
}

inline std::string csv_number(double v) { return fmt::format("{}", v); }

inline FlowStatus parse_flow_status(const std::string& s) {
    for (auto st : {FlowStatus::Converged, FlowStatus::BlowUp, FlowStatus::SingularJacobian, FlowStatus::HorizonReached,
                    FlowStatus::StepFailure}) {
        if (s == to_string(st)) return st;
    }
    throw ParameterError("unknown flow status: " + s);
}

// ---- trajectories ----

inline Json trajectory_summary_json(const Trajectory& traj) {
    Json j;
    j["status"] = to_string(traj.status);
    j["direction"] = to_string(traj.direction);
    j["t_final"] = json_number(traj.t_final());
    j["steps"] = traj.steps;
    j["rejected_steps"] = traj.rejected_steps;
    j["final_x"] = json_vector(traj.final().x);
    j["final_residual"] = json_number(traj.final_residual_norm());
    j["max_drift"] = json_number(decay_drift(traj));
    if (!traj.message.empty()) j["message"] = traj.message;
    return j;
}

/// Header `t,x_0,...,x_{n-1},r_norm,drift`, one row per sample.
inline std::string trajectory_csv(const Trajectory& traj) {
    std::ostringstream os;
    const std::size_t n = traj.initial().x.size();
    os << "t";
    for (std::size_t i = 0; i < n; ++i) os << ",x_" << i;
    os << ",r_norm,drift\n";
    const Vector& r0 = traj.initial().residual;
    const double n0 = norm2(r0);
    for (const auto& s : traj.samples) {
        double drift = 0.0;
        if (n0 > 0) {
            const double c = std::exp(-s.t);
            double d2 = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double d = s.residual[i] - c * r0[i];
                d2 += d * d;
            }
            drift = std::sqrt(d2) / n0;
        }
        os << csv_number(s.t);
        for (double xi : s.x) os << ',' << csv_number(xi);
        os << ',' << csv_number(norm2(s.residual)) << ',' << csv_number(drift) << '\n';
    }
    return os.str();
}

// ---- certificates ----

inline Json certificate_json(const Certificate& c) {
    Json j;
    j["criterion"] = c.criterion;
    j["verdict"] = to_string(c.verdict);
    j["extremal_value"] = json_number(c.extremal_value);
    j["witness"] = json_vector(c.witness);
    j["threshold"] = json_number(c.threshold);
    j["samples_used"] = c.samples_used;
    j["samples_skipped_singular"] = c.samples_skipped_singular;
    j["seed"] = c.seed;
    if (!c.note.empty()) j["note"] = c.note;
    if (!c.stats.empty()) {
        Json s = Json::object();
        for (const auto& [k, v] : c.stats) s[k] = json_number(v);
        j["stats"] = s;
    }
    if (!c.points.empty()) {
        Json p = Json::object();
        for (const auto& [k, v] : c.points) p[k] = json_vector(v);
        j["points"] = p;
    }
    return j;
}

// ---- basin grids ----

inline constexpr const char* kBasinCsvHeader = "i,j,cx,cy,status,t_conv,final_residual";

/// One row per cell `i,j,cx,cy,status,t_conv,final_residual`.
inline std::string basin_csv(const BasinGrid& grid) {
    std::string out = kBasinCsvHeader;
    out += '\n';
    for (const auto& c : grid.cells) {
        out += fmt::format("{},{},{},{},{},{},{}\n", c.i, c.j, csv_number(c.cx), csv_number(c.cy), to_string(c.status),
                           csv_number(c.t_conv), csv_number(c.final_residual));
    }
    return out;
}

inline std::vector<BasinCell> parse_basin_csv(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || line != kBasinCsvHeader) throw ParameterError("basin csv: bad header");
    std::vector<BasinCell> cells;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ls(line);
        std::string item;
        while (std::getline(ls, item, ',')) f.push_back(item);
        if (f.size() != 7) throw ParameterError("basin csv: expected 7 fields: " + line);
        BasinCell c;
        c.i = std::stoul(f[0]);
        c.j = std::stoul(f[1]);
        c.cx = std::strtod(f[2].c_str(), nullptr);
        c.cy = std::strtod(f[3].c_str(), nullptr);
        c.status = parse_flow_status(f[4]);
        c.t_conv = std::strtod(f[5].c_str(), nullptr);
        c.final_residual = std::strtod(f[6].c_str(), nullptr);
        cells.push_back(std::move(c));
    }
    return cells;
}

inline Json basin_json(const BasinGrid& grid, const std::string& map_name) {
    Json j;
    j["schema"] = kSchemaVersion;
    j["map"] = map_name;
    j["box"] = {grid.box.xmin, grid.box.xmax, grid.box.ymin, grid.box.ymax};
    j["nx"] = grid.nx;
    j["ny"] = grid.ny;
    j["x0"] = json_vector(grid.x0);
    Json counts = Json::object();
    for (auto st : {FlowStatus::Converged, FlowStatus::BlowUp, FlowStatus::SingularJacobian, FlowStatus::HorizonReached,
                    FlowStatus::StepFailure}) {
        counts[to_string(st)] = grid.count(st);
    }
    j["counts"] = counts;
    Json cells = Json::array();
    for (const auto& c : grid.cells) {
        Json cj;
        cj["i"] = c.i;
        cj["j"] = c.j;
        cj["cx"] = c.cx;
        cj["cy"] = c.cy;
        cj["status"] = to_string(c.status);
        cj["t_conv"] = json_number(c.t_conv);
        cj["final_residual"] = json_number(c.final_residual);
        cj["final_x"] = json_vector(c.final_x);
        cj["in_basin"] = c.in_basin;
        cells.push_back(std::move(cj));
    }
    j["cells"] = std::move(cells);
    return j;
}

enum class GridFormat { Csv, Json };

inline void export_grid(const BasinGrid& grid, const std::string& path, GridFormat format,
                        const std::string& map_name = "") {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path + " for writing");
    if (format == GridFormat::Csv) out << basin_csv(grid);
    else out << basin_json(grid, map_name).dump(2) << '\n';
    if (!out) throw Error("write failed: " + path);
}

}  // namespace newtonflow
