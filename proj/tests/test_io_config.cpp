#include <atomic>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "newtonflow/config.hpp"
#include "newtonflow/io.hpp"
#include "newtonflow/maps.hpp"
#include "newtonflow/parallel.hpp"
#include "newtonflow/sampling.hpp"

using namespace newtonflow;

TEST(Config, RoundTripOfDefaults) {
    const RunConfig cfg;
    EXPECT_EQ(parse_config(serialize_config(cfg)), cfg);
}

TEST(ConfigProperty, RoundTripOfRandomConfigs) {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-1e3, 1e3);
    std::uniform_int_distribution<int> len(0, 4);
    auto vec = [&] {
        Vector v(static_cast<std::size_t>(len(rng)));
        for (double& e : v) e = u(rng) * std::pow(10.0, static_cast<int>(u(rng)) % 20);
        return v;
    };
    for (int trial = 0; trial < 200; ++trial) {
        RunConfig c;
        c.command = trial % 2 ? "solve" : "certify";
        c.map = trial % 3 ? "linear" : "zampieri-ex5";
        c.matrix = vec();
        c.target = vec();
        c.start = vec();
        c.x0 = vec();
        c.x1 = vec();
        c.flow.abs_tol = std::abs(u(rng)) * 1e-12 + 1e-300;
        c.flow.t_max = std::abs(u(rng));
        c.flow.max_steps = static_cast<std::size_t>(rng() % 1000000);
        c.a = u(rng) / 7.0;
        c.b = 1.0 / 3.0;
        c.c = std::nextafter(1.0, 2.0);
        c.omega = "poly:1,0,1";
        c.sampler = "ball:3,100";
        c.radii = vec();
        c.seed = rng();
        c.inject_jacobian_fault = 1e-3;
        c.out = "out dir/result.json";
        const std::string text = serialize_config(c);
        const RunConfig back = parse_config(text);
        EXPECT_EQ(back, c) << text;
        EXPECT_EQ(serialize_config(back), text);
    }
}

TEST(Config, CommentsBlankLinesAndOverrides) {
    const RunConfig c = parse_config("# header\n\nmap = cubic1d   # trailing\n  target=10\nseed = 42\n");
    EXPECT_EQ(c.map, "cubic1d");
    EXPECT_EQ(c.target, Vector{10});
    EXPECT_EQ(c.seed, 42u);
    RunConfig base;
    base.seed = 7;
    EXPECT_EQ(parse_config("map = arctan1d\n", base).seed, 7u);
}

TEST(Config, ErrorsNameTheLine) {
    try {
        parse_config("map = cubic1d\nbogus = 1\n");
        FAIL();
    } catch (const ParameterError& e) {
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("bogus"), std::string::npos);
    }
    EXPECT_THROW(parse_config("seed = -3\n"), ParameterError);
    EXPECT_THROW(parse_config("a = 1x\n"), ParameterError);
    EXPECT_THROW(parse_config("just text\n"), ParameterError);
    EXPECT_THROW(parse_config("target = 1,,2\n"), ParameterError);
}

TEST(Config, ResolutionFillsDimensionDefaults) {
    RunConfig c;
    c.command = "solve";
    c.map = "cubic1d";
    const RunConfig r = resolve_config(c);
    EXPECT_EQ(r.start, Vector{0});
    EXPECT_EQ(r.x0, Vector{0});
    EXPECT_EQ(r.x1, Vector{0});
    EXPECT_EQ(r.sampler, "grid:-5,5,2001");
    EXPECT_EQ(resolve_config(r), r);
    EXPECT_EQ(parse_config(serialize_config(r)), r);

    RunConfig lin;
    lin.command = "solve";
    lin.map = "linear";
    lin.matrix = {1, 0, 0, 0, 1, 0, 0, 0, 1};
    EXPECT_EQ(resolve_config(lin).start.size(), 3u);
    lin.matrix = {1, 2, 3};
    EXPECT_THROW(resolve_config(lin), ParameterError);
    RunConfig unknown;
    unknown.map = "nope";
    EXPECT_THROW(resolve_config(unknown), UnknownMapError);
}

TEST(Sampling, GridIncludesEndpointsFirstAxisFastest) {
    const auto pts = generate_samples(GridSampler{{-1, 0}, {1, 2}, 3}, 2);
    ASSERT_EQ(pts.size(), 9u);
    EXPECT_EQ(pts[0], (Vector{-1, 0}));
    EXPECT_EQ(pts[1], (Vector{0, 0}));
    EXPECT_EQ(pts[3], (Vector{-1, 1}));
    EXPECT_EQ(pts[8], (Vector{1, 2}));
}

TEST(Sampling, BallAndSphereAreSeededAndInside) {
    const auto a = generate_samples(BallSampler{2.0, 500, 5, {}}, 3);
    const auto b = generate_samples(BallSampler{2.0, 500, 5, {}}, 3);
    EXPECT_EQ(a, b);
    for (const auto& p : a) EXPECT_LE(norm2(p), 2.0 + 1e-12);
    const auto s = generate_samples(SphereSampler{3.0, 200, 6, {1, 1}}, 2);
    for (const auto& p : s) EXPECT_NEAR(norm2(sub(p, Vector{1, 1})), 3.0, 1e-12);
    EXPECT_NE(generate_samples(BallSampler{2.0, 10, 6, {}}, 3), generate_samples(BallSampler{2.0, 10, 7, {}}, 3));
}

TEST(Sampling, ParsesSpecs) {
    const Sampler g = parse_sampler("grid:-5,5,-5,5,201", 2, 1);
    ASSERT_TRUE(std::holds_alternative<GridSampler>(g));
    EXPECT_EQ(std::get<GridSampler>(g).resolution, 201u);
    const Sampler b = parse_sampler("ball:2.5,100", 3, 9);
    EXPECT_EQ(std::get<BallSampler>(b).seed, 9u);
    EXPECT_EQ(sampler_seed(b), 9u);
    EXPECT_THROW(parse_sampler("grid:-5,5,201", 2, 1), ParameterError);
    EXPECT_THROW(parse_sampler("ball:1,0.5", 2, 1), ParameterError);
    EXPECT_THROW(parse_sampler("cube:1,2", 2, 1), ParameterError);
    EXPECT_EQ(parse_vector(" 1, -2.5e3 ,3"), (Vector{1, -2500, 3}));
    EXPECT_THROW(parse_vector("1,x"), ParameterError);
}

TEST(Parallel, CoversEveryIndexAndRethrows) {
    std::vector<std::atomic<int>> hits(1000);
    parallel_for(hits.size(), [&](std::size_t i) { hits[i]++; }, 4);
    for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
    EXPECT_THROW(parallel_for(
                     100, [](std::size_t i) { if (i == 37) throw ParameterError("boom"); }, 3),
                 ParameterError);
}

TEST(Json, NonFiniteBecomesNull) {
    EXPECT_TRUE(json_number(NAN).is_null());
    EXPECT_TRUE(json_number(INFINITY).is_null());
    EXPECT_EQ(json_number(0.1).get<double>(), 0.1);
    EXPECT_EQ(csv_number(0.1), "0.1");
    EXPECT_EQ(csv_number(1e-300), "1e-300");
}

TEST(Json, CertificateFieldsInOrder) {
    Certificate c;
    c.criterion = "cor22";
    c.verdict = Verdict::Violated;
    c.extremal_value = 2.0;
    c.witness = {1, 2};
    c.stats.emplace_back("violations", 3);
    c.points.emplace_back("p", Vector{4});
    const Json j = certificate_json(c);
    std::vector<std::string> keys;
    for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
    const std::vector<std::string> expected{"criterion", "verdict", "extremal_value", "witness", "threshold",
                                            "samples_used", "samples_skipped_singular", "seed", "stats", "points"};
    EXPECT_EQ(keys, expected);
    EXPECT_EQ(j["verdict"], "Violated");
    EXPECT_EQ(j["stats"]["violations"], 3.0);
}

TEST(Csv, TrajectoryColumnsAndDrift) {
    const Trajectory tr = integrate(maps::planar_exp(), {1, 1}, {1, 0}, {});
    const std::string csv = trajectory_csv(tr);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,x_0,x_1,r_norm,drift");
    EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), tr.samples.size() + 1);
    const Json s = trajectory_summary_json(tr);
    EXPECT_EQ(s["status"], "Converged");
    EXPECT_LE(s["max_drift"].get<double>(), 1e-6);
}

TEST(Status, NamesRoundTrip) {
    for (auto st : {FlowStatus::Converged, FlowStatus::BlowUp, FlowStatus::SingularJacobian, FlowStatus::HorizonReached,
                    FlowStatus::StepFailure})
        EXPECT_EQ(parse_flow_status(to_string(st)), st);
    EXPECT_THROW(parse_flow_status("Done"), ParameterError);
}
