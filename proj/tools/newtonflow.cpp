// Command-line front end: newtonflow <solve|certify|basin|verify-ex5|list-maps> [flags]
//
// Every config key is also a flag (`grid_res` -> `--grid-res`). A `--config`
// file is applied first and flags override it.

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <fmt/chrono.h>

#include "CLI11.hpp"
#include "newtonflow/commands.hpp"

namespace nf = newtonflow;

namespace {

std::string flag_name(std::string key) {
    for (char& ch : key)
        if (ch == '_') ch = '-';
    return "--" + key;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw nf::ParameterError("cannot read config file " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw nf::Error("cannot open " + path + " for writing");
    out << text;
    if (!out) throw nf::Error("write failed: " + path);
}

std::string utc_timestamp() {
    const auto now = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
    return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", now);
}

struct SubcommandFlags {
    CLI::App* app = nullptr;
    std::vector<std::pair<std::string, CLI::Option*>> keyed;
    std::string config_path, matrix, grid, ball, sphere;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Global inversion of C1 maps by the Newton flow"};
    app.require_subcommand(1);

    std::vector<std::string> values(nf::config_keys().size());
    std::vector<SubcommandFlags> subs;
    const std::vector<std::pair<std::string, std::string>> commands{
        {"solve", "Solve f(x) = target by flowing from start"},
        {"certify", "Check an injectivity or bijectivity criterion on samples"},
        {"basin", "Scan the basin of attraction of x0 on a planar grid"},
        {"verify-ex5", "Run the self-check battery on the planar exponential example"},
        {"list-maps", "List the built-in maps"},
    };
    subs.reserve(commands.size());
    for (const auto& [name, help] : commands) {
        SubcommandFlags& s = subs.emplace_back();
        s.app = app.add_subcommand(name, help);
        s.app->add_option("--config", s.config_path, "key = value configuration file");
        s.app->add_option("--A", s.matrix, "row-major matrix (same as --matrix)");
        s.app->add_option("--grid", s.grid, "grid sampler lo0,hi0,...,res");
        s.app->add_option("--ball", s.ball, "ball sampler radius,count");
        s.app->add_option("--sphere", s.sphere, "sphere sampler radius,count");
        const auto keys = nf::config_keys();
        for (std::size_t k = 0; k < keys.size(); ++k) {
            if (keys[k] == "command") continue;
            s.keyed.emplace_back(keys[k], s.app->add_option(flag_name(keys[k]), values[k]));
        }
    }

    CLI11_PARSE(app, argc, argv);

    const SubcommandFlags* active = nullptr;
    for (const auto& s : subs)
        if (s.app->parsed()) active = &s;
    const std::string command = active->app->get_name();

    if (command == "list-maps") {
        for (const auto& j : nf::list_maps()) std::cout << j.dump() << '\n';
        return nf::exit_code::kOk;
    }

    nf::RunConfig cfg;
    try {
        if (!active->config_path.empty()) cfg = nf::parse_config(read_file(active->config_path));
        cfg.command = command;
        const auto keys = nf::config_keys();
        for (const auto& [key, opt] : active->keyed) {
            if (opt->count() == 0) continue;
            const auto idx = static_cast<std::size_t>(std::find(keys.begin(), keys.end(), key) - keys.begin());
            nf::set_config_value(cfg, key, values[idx]);
        }
        if (!active->matrix.empty()) nf::set_config_value(cfg, "matrix", active->matrix);
        if (!active->grid.empty()) cfg.sampler = "grid:" + active->grid;
        if (!active->ball.empty()) cfg.sampler = "ball:" + active->ball;
        if (!active->sphere.empty()) cfg.sampler = "sphere:" + active->sphere;
        cfg = nf::resolve_config(cfg);
    } catch (const nf::Error& e) {
        nf::CommandResult r = nf::config_error(command, e.what());
        std::cout << r.json.dump(2) << '\n';
        return r.exit_code;
    }

    nf::CommandResult result = nf::run_command(cfg);
    result.json["timestamp"] = utc_timestamp();
    const std::string text = result.json.dump(2) + "\n";
    try {
        if (cfg.out.empty()) std::cout << text;
        else write_text(cfg.out, text);
        if (!cfg.csv.empty() && !result.csv.empty()) write_text(cfg.csv, result.csv);
    } catch (const nf::Error& e) {
        std::cerr << "newtonflow: " << e.what() << '\n';
        return nf::exit_code::kConfig;
    }
    return result.exit_code;
}
