#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <gtest/gtest.h>

#include "json.hpp"

#ifndef NEWTONFLOW_CLI
#error "NEWTONFLOW_CLI must point at the newtonflow executable"
#endif

namespace {

struct CliRun {
    int code = -1;
    std::string out;
};

CliRun run(const std::string& args) {
    const std::string cmd = std::string(NEWTONFLOW_CLI) + " " + args + " 2>/dev/null";
    CliRun r;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return r;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
    const int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

nlohmann::ordered_json parse(const CliRun& r) { return nlohmann::ordered_json::parse(r.out); }

std::string without_timestamp(const CliRun& r) {
    auto j = parse(r);
    EXPECT_TRUE(j.contains("timestamp"));
    j.erase("timestamp");
    return j.dump();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST(CliSolve, ExampleConverges) {
    const CliRun r = run("solve --map zampieri-ex5 --target 1,0 --start 1,1");
    ASSERT_EQ(r.code, 0) << r.out;
    const auto j = parse(r);
    EXPECT_EQ(j["schema"], 1);
    EXPECT_EQ(j["status"], "Converged");
    EXPECT_NEAR(j["x"][0].get<double>(), 0.0, 1e-8);
    EXPECT_NEAR(j["x"][1].get<double>(), 0.0, 1e-8);
    EXPECT_LE(j["residual"].get<double>(), 1e-9);
    EXPECT_GT(j["steps"].get<int>(), 0);
    EXPECT_LE(j["max_drift"].get<double>(), 1e-6);
}

TEST(CliSolve, OutOfRangeTargetBlowsUp) {
    const CliRun r = run("solve --map arctan1d --target 2 --start 0");
    EXPECT_EQ(r.code, 2);
    EXPECT_EQ(parse(r)["status"], "BlowUp");
}

TEST(CliSolve, LinearIdentity) {
    const CliRun r = run("solve --map linear --A 1,0,0,1 --target 0,0 --start 5,5");
    ASSERT_EQ(r.code, 0);
    const auto j = parse(r);
    EXPECT_NEAR(j["x"][0].get<double>(), 0.0, 1e-9);
    EXPECT_NEAR(j["x"][1].get<double>(), 0.0, 1e-9);
}

TEST(CliSolve, ConfigErrorsExitOne) {
    EXPECT_EQ(run("solve --map no-such-map --target 1").code, 1);
    EXPECT_EQ(run("solve --map zampieri-ex5 --target 1,2,3").code, 1);
    EXPECT_EQ(run("solve --map zampieri-ex5 --target 1,x").code, 1);
    EXPECT_EQ(run("solve --config /nonexistent/file.cfg").code, 1);
}

TEST(CliCertify, QuadraticCriterionOnExample) {
    const CliRun r =
        run("certify --map zampieri-ex5 --criterion cor22 --a 1 --b 1 --c 0 --x0 0,0 --x1 0,0 --grid -5,5,-5,5,201");
    ASSERT_EQ(r.code, 0);
    const auto c = parse(r)["certificate"];
    EXPECT_EQ(c["verdict"], "Satisfied");
    EXPECT_EQ(c["samples_used"], 201 * 201);
}

TEST(CliCertify, HadamardGate) {
    const CliRun at = run("certify --map arctan1d --criterion hadamard --omega poly:1,0,1");
    EXPECT_TRUE(at.code == 3 || at.code == 4);
    EXPECT_NE(parse(at)["certificate"]["verdict"], "Satisfied");
    EXPECT_EQ(parse(at)["certificate"]["stats"]["integral_diverges"], 0.0);
    const CliRun cubic = run("certify --map cubic1d --criterion hadamard --omega const:1");
    EXPECT_EQ(cubic.code, 0);
}

TEST(CliCertify, VerdictExitCodes) {
    EXPECT_EQ(run("certify --map zampieri-ex5 --criterion coercive").code, 3);
    EXPECT_EQ(run("certify --map rot-poly2d --criterion coercive").code, 0);
    EXPECT_EQ(run("certify --map zampieri-ex5 --criterion theorem31 --aux log-coercive --grid -3,3,-3,3,21").code, 3);
    EXPECT_EQ(run("certify --map zampieri-ex5 --criterion theorem21 --grid -3,3,-3,3,21").code, 0);
    EXPECT_EQ(run("certify --map arctan1d --criterion bounded-inverse --r 3").code, 0);
    EXPECT_EQ(run("certify --map linear --A 2,0,0,2 --criterion ball --r 2").code, 0);
}

TEST(CliCertify, UnknownCriterionOrAuxExitsOne) {
    EXPECT_EQ(run("certify --map zampieri-ex5 --criterion theorem99").code, 1);
    EXPECT_EQ(run("certify --map zampieri-ex5 --criterion theorem21 --aux nope").code, 1);
    EXPECT_EQ(run("certify --map zampieri-ex5 --criterion hadamard --omega cosh:1").code, 1);
}

TEST(CliVerify, DefaultPasses) {
    const CliRun r = run("verify-ex5");
    ASSERT_EQ(r.code, 0) << r.out;
    const auto j = parse(r);
    EXPECT_EQ(j["passed"], true);
    std::vector<std::string> names;
    for (const auto& c : j["checks"]) names.push_back(c["name"]);
    const std::vector<std::string> expected{"oracle", "cor22-grid", "proof-constant", "non-surjectivity", "flow",
                                            "sign-profile"};
    EXPECT_EQ(names, expected);
}

TEST(CliVerify, InjectedJacobianFaultNamesOracle) {
    const CliRun r = run("verify-ex5 --inject-jacobian-fault 1e-3");
    EXPECT_EQ(r.code, 5);
    EXPECT_EQ(parse(r)["failed_check"], "oracle");
}

TEST(CliVerify, CoarseGridRecordsFewerSamples) {
    const CliRun r = run("verify-ex5 --grid-res 11");
    ASSERT_EQ(r.code, 0);
    const auto j = parse(r);
    EXPECT_EQ(j["checks"][1]["details"]["samples_used"], 121);
    EXPECT_EQ(j["grid_res"], 11);
}

TEST(CliListMaps, OneJsonObjectPerLine) {
    const CliRun r = run("list-maps");
    ASSERT_EQ(r.code, 0);
    std::istringstream is(r.out);
    std::string line;
    int count = 0;
    bool saw_example = false;
    while (std::getline(is, line)) {
        const auto j = nlohmann::ordered_json::parse(line);
        std::vector<std::string> keys;
        for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
        EXPECT_EQ(keys, (std::vector<std::string>{"key", "dim", "description", "paper_ref"}));
        saw_example |= j["key"] == "zampieri-ex5";
        ++count;
    }
    EXPECT_GE(count, 6);
    EXPECT_TRUE(saw_example);
}

TEST(CliConfig, FileThenFlagOverride) {
    const std::string path = ::testing::TempDir() + "nf_solve.cfg";
    std::ofstream(path) << "# cubic solve\nmap = cubic1d\ntarget = 10\nstart = 0\n";
    const CliRun r = run("solve --config " + path);
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_NEAR(parse(r)["x"][0].get<double>(), 2.0, 1e-8);
    const CliRun o = run("solve --config " + path + " --target 2");
    ASSERT_EQ(o.code, 0);
    EXPECT_NEAR(parse(o)["x"][0].get<double>(), 1.0, 1e-8);
    std::ofstream(path) << "map = cubic1d\ncolour = blue\n";
    EXPECT_EQ(run("solve --config " + path).code, 1);
}

TEST(CliOutput, OutAndCsvFiles) {
    const std::string json = ::testing::TempDir() + "nf_basin.json";
    const std::string csv = ::testing::TempDir() + "nf_basin.csv";
    const CliRun r = run("basin --map zampieri-ex5 --resolution 5 --out " + json + " --csv " + csv);
    ASSERT_EQ(r.code, 0);
    EXPECT_TRUE(r.out.empty());
    const auto j = nlohmann::ordered_json::parse(read_file(json));
    EXPECT_EQ(j["schema"], 1);
    EXPECT_EQ(j["counts"]["Converged"], 25);
    const std::string text = read_file(csv);
    EXPECT_EQ(text.substr(0, text.find('\n')), "i,j,cx,cy,status,t_conv,final_residual");
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 26);
}

TEST(CliDeterminism, SeededCommandsAreByteIdentical) {
    for (const std::string args :
         {"certify --map zampieri-ex5 --criterion theorem31 --aux log-coercive --ball 4,500 --seed 11",
          "certify --map rot-poly2d --criterion coercive --seed 11 --samples 64",
          "certify --map zampieri-ex5 --criterion ball --r 2 --samples 300 --seed 3",
          "basin --map fold2d --x0 0.5,0.5 --resolution 15 --pairs 5000 --seed 4",
          "verify-ex5 --seed 9 --grid-res 31",
          "solve --map zampieri-ex5 --target 2,3 --start 0,0"}) {
        const CliRun a = run(args), b = run(args);
        EXPECT_EQ(a.code, b.code) << args;
        EXPECT_EQ(without_timestamp(a), without_timestamp(b)) << args;
    }
    const CliRun s1 = run("certify --map zampieri-ex5 --criterion ball --r 2 --samples 300 --seed 3");
    const CliRun s2 = run("certify --map zampieri-ex5 --criterion ball --r 2 --samples 300 --seed 4");
    EXPECT_NE(without_timestamp(s1), without_timestamp(s2));
}
