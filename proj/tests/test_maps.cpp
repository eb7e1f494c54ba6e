#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "newtonflow/maps.hpp"
#include "newtonflow/sampling.hpp"

using namespace newtonflow;

namespace {

std::vector<Vector> ball_points(std::size_t dim, double r, std::size_t count, std::uint64_t seed) {
    return generate_samples(BallSampler{r, count, seed, {}}, dim);
}

}  // namespace

TEST(Ex5, EvaluatesAtKnownPoints) {
    const C1Map f = maps::planar_exp();
    const Vector o = f.eval({0, 0});
    EXPECT_DOUBLE_EQ(o[0], 1.0);
    EXPECT_DOUBLE_EQ(o[1], 0.0);
    const Vector p = f.eval({1, 1});
    const double expected = std::exp(1.0) / std::sqrt(2.0);
    EXPECT_NEAR(p[0], expected, 1e-15);
    EXPECT_NEAR(p[1], expected, 1e-15);
    EXPECT_NEAR(p[0], 1.922116, 1e-6);
}

TEST(Ex5, JacobianAtKnownPoints) {
    const C1Map f = maps::planar_exp();
    EXPECT_EQ(f.jacobian({0, 0}), Matrix::identity(2));
    const Matrix j = f.jacobian({0, 1});
    const double pre = 1.0 / std::pow(2.0, 1.5);
    EXPECT_NEAR(j(0, 0), 2 * pre, 1e-15);
    EXPECT_NEAR(j(0, 1), -pre, 1e-15);
    EXPECT_NEAR(j(1, 0), 2 * pre, 1e-15);
    EXPECT_NEAR(j(1, 1), pre, 1e-15);
    const Matrix fd = f.fd_jacobian({0, 1});
    for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(fd.data()[k], j.data()[k], 1e-8);
}

TEST(Ex5Property, CompanionInverseTimesJacobianIsIdentity) {
    const C1Map f = maps::planar_exp();
    ASSERT_TRUE(f.companions().has_value());
    for (const Vector& x : ball_points(2, 5.0, 1000, 21)) {
        const Matrix prod = f.companions()->inverse_jacobian(x) * f.jacobian(x);
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(prod(i, j), i == j ? 1.0 : 0.0, 1e-12);
    }
}

TEST(Ex5Property, CompanionFieldAndDotProductMatchLuPipeline) {
    const C1Map f = maps::planar_exp();
    const Vector y0 = f.eval({0, 0});
    for (const Vector& x : ball_points(2, 5.0, 1000, 22)) {
        const Vector field = scaled(solve(lu_decompose(f.jacobian(x)), sub(f.eval(x), y0)), -1.0);
        const Vector closed = f.companions()->field_to_origin_image(x);
        const double scale = 1.0 + norm2(field);
        EXPECT_NEAR(field[0], closed[0], 1e-12 * scale);
        EXPECT_NEAR(field[1], closed[1], 1e-12 * scale);
        EXPECT_NEAR(dot(x, field), f.companions()->x_dot_field(x), 1e-11 * (1.0 + norm2(x) * norm2(field)));
    }
}

TEST(Ex5, FieldAtOneOne) {
    const C1Map f = maps::planar_exp();
    const Vector field = f.companions()->field_to_origin_image({1, 1});
    EXPECT_NEAR(field[0], std::exp(-1.0) / std::sqrt(2.0) - 1.0, 1e-15);
    EXPECT_NEAR(field[1], -std::sqrt(2.0) * std::exp(-1.0), 1e-15);
    EXPECT_NEAR(field[0], -0.739870, 1e-6);
    EXPECT_NEAR(field[1], -0.520260, 1e-6);
}

TEST(Ex5, JacobianFaultHookShiftsOnlyTopLeft) {
    const C1Map clean = maps::planar_exp();
    const C1Map faulty = builtin("zampieri-ex5", 2, MapParams{{}, 1e-3});
    const Matrix a = clean.jacobian({0.3, -0.7});
    const Matrix b = faulty.jacobian({0.3, -0.7});
    EXPECT_NEAR(b(0, 0) - a(0, 0), 1e-3, 1e-15);
    EXPECT_EQ(a(1, 1), b(1, 1));
}

TEST(Registry, ScalarMaps) {
    EXPECT_DOUBLE_EQ(maps::arctan1d().eval({0})[0], 0.0);
    const C1Map cubic = builtin("cubic1d", 1);
    EXPECT_DOUBLE_EQ(cubic.eval({2})[0], 10.0);
    EXPECT_DOUBLE_EQ(cubic.jacobian({2})(0, 0), 13.0);
    EXPECT_NEAR(cubic.fd_jacobian({2})(0, 0), 13.0, 1e-8 * 13.0);
}

TEST(Registry, LinearMap) {
    const Matrix a(2, {2, 1, -1, 3});
    const C1Map lin = builtin("linear", 2, MapParams{{2, 1, -1, 3}, 0});
    const Vector y = lin.eval({1, 2});
    EXPECT_DOUBLE_EQ(y[0], 4.0);
    EXPECT_DOUBLE_EQ(y[1], 5.0);
    EXPECT_EQ(lin.jacobian({7, -7}), a);
    EXPECT_EQ(builtin("linear", 3).jacobian({1, 2, 3}), Matrix::identity(3));
    EXPECT_THROW(builtin("linear", 2, MapParams{{1, 2, 3}, 0}), ParameterError);
}

TEST(Registry, UnknownKeyAndDimensionMismatch) {
    EXPECT_THROW(builtin("no-such-map"), UnknownMapError);
    EXPECT_THROW(builtin("zampieri-ex5", 3), DimensionError);
    EXPECT_THROW(maps::planar_exp().eval({1, 2, 3}), DimensionError);
}

TEST(Registry, EveryEntryBuildsAndHasDocumentation) {
    for (const auto& e : map_registry()) {
        const C1Map m = e.make(e.dim == 0 ? 2 : e.dim, {});
        EXPECT_EQ(m.dim(), e.dim == 0 ? 2u : e.dim) << e.key;
        EXPECT_FALSE(e.description.empty()) << e.key;
    }
}

TEST(EvalGuards, NonFiniteValuesAreReported) {
    const C1Map e = maps::exp1d();
    EXPECT_THROW(e.eval({1000.0}), NonFiniteError);
}

// Central differences of an affine map only carry the rounding of f itself,
// about eps·‖f‖/h with h = cbrt(eps)·max(1, |x_j|).
TEST(FdCheck, LinearMapIsExactToRounding) {
    const C1Map lin = builtin("linear", 3, MapParams{{1, 2, 0, -1, 3, 1, 0.5, 0, 2}, 0});
    EXPECT_LE(fd_jacobian_check(lin, ball_points(3, 10.0, 50, 1)), 1e-10);
    const C1Map id = builtin("linear", 2, MapParams{{1, 0, 0, 1}, 0});
    EXPECT_LE(fd_jacobian_check(id, std::vector<Vector>{{0.5, -0.25}, {4, 8}}), 1e-12);
}

TEST(FdCheckProperty, AnalyticJacobiansAgreeWithCentralDifferences) {
    const auto probes2 = ball_points(2, 3.0, 100, 2);
    const auto probes1 = ball_points(1, 3.0, 100, 3);
    EXPECT_LE(fd_jacobian_check(maps::planar_exp(), probes2), 1e-6);
    for (const auto& e : map_registry()) {
        const C1Map m = e.make(e.dim == 0 ? 2 : e.dim, {});
        if (!m.has_analytic_jacobian()) continue;
        EXPECT_LE(fd_jacobian_check(m, m.dim() == 1 ? probes1 : probes2), 1e-5) << e.key;
    }
}

TEST(FdCheck, FaultyJacobianIsDetected) {
    const C1Map faulty = builtin("zampieri-ex5", 2, MapParams{{}, 1e-3});
    EXPECT_GT(fd_jacobian_check(faulty, ball_points(2, 1.0, 20, 4)), 1e-5);
}
