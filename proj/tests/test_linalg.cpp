#include <cmath>
#include <complex>
#include <random>

#include <gtest/gtest.h>

#include "newtonflow/linalg.hpp"
#include "newtonflow/maps.hpp"

using namespace newtonflow;

namespace {

Matrix random_matrix(std::size_t n, std::mt19937_64& rng, double diag_boost = 0.0) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Matrix a(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a(i, j) = u(rng) + (i == j ? diag_boost : 0.0);
    return a;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    double m = 0;
    for (std::size_t i = 0; i < a.dim(); ++i)
        for (std::size_t j = 0; j < a.dim(); ++j) m = std::max(m, std::abs(a(i, j) - b(i, j)));
    return m;
}

// Laplace expansion, independent of the LU path.
double brute_det(const Matrix& a) {
    const std::size_t n = a.dim();
    if (n == 1) return a(0, 0);
    double d = 0;
    for (std::size_t c = 0; c < n; ++c) {
        Matrix m(n - 1);
        for (std::size_t i = 1; i < n; ++i)
            for (std::size_t j = 0, k = 0; j < n; ++j)
                if (j != c) m(i - 1, k++) = a(i, j);
        d += ((c % 2) ? -1.0 : 1.0) * a(0, c) * brute_det(m);
    }
    return d;
}

// Singular values of a 3x3 matrix from the characteristic polynomial of AᵀA
// solved by the trigonometric cubic formula.
std::array<double, 3> singular_values_3x3(const Matrix& a) {
    const Matrix g = a.transposed() * a;
    const double tr = g(0, 0) + g(1, 1) + g(2, 2);
    const double minors = g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0) + g(0, 0) * g(2, 2) - g(0, 2) * g(2, 0) +
                          g(1, 1) * g(2, 2) - g(1, 2) * g(2, 1);
    const double dt = brute_det(g);
    // λ³ − tr λ² + minors λ − det = 0, shifted λ = t + tr/3.
    const double p = minors - tr * tr / 3.0;
    const double q = -2.0 * tr * tr * tr / 27.0 + tr * minors / 3.0 - dt;
    const double m = 2.0 * std::sqrt(std::max(0.0, -p / 3.0));
    const double arg = m > 0 ? std::clamp(3.0 * q / (p * m), -1.0, 1.0) : 0.0;
    const double theta = std::acos(arg) / 3.0;
    std::array<double, 3> s{};
    for (int k = 0; k < 3; ++k) {
        const double lam = m * std::cos(theta - 2.0 * M_PI * k / 3.0) + tr / 3.0;
        s[k] = std::sqrt(std::max(0.0, lam));
    }
    std::sort(s.begin(), s.end());
    return s;
}

}  // namespace

TEST(Lu, IdentityHasTrivialFactors) {
    const Matrix i3 = Matrix::identity(3);
    const LuFactors f = lu_decompose(i3);
    EXPECT_EQ(f.lower(), i3);
    EXPECT_EQ(f.upper(), i3);
    EXPECT_EQ(f.parity, 1);
    EXPECT_DOUBLE_EQ(det(f), 1.0);
}

TEST(Lu, PermutationMatrixPivots) {
    const Matrix p(2, {0, 1, 1, 0});
    const LuFactors f = lu_decompose(p);
    EXPECT_EQ(f.parity, -1);
    EXPECT_DOUBLE_EQ(det(f), -1.0);
    EXPECT_EQ(f.lower() * f.upper(), f.permuted(p));
}

TEST(Lu, ExampleJacobianAtOriginIsIdentity) {
    const C1Map f = maps::planar_exp();
    const LuFactors lu = lu_decompose(f.jacobian({0, 0}));
    EXPECT_EQ(lu.lower(), Matrix::identity(2));
    EXPECT_EQ(lu.upper(), Matrix::identity(2));
    const Vector x = solve(lu, Vector{1, 0});
    EXPECT_DOUBLE_EQ(x[0], 1.0);
    EXPECT_DOUBLE_EQ(x[1], 0.0);
}

TEST(Lu, SingularMatrixReportsColumn) {
    const Matrix a(3, {1, 2, 3, 2, 4, 6, 1, 0, 1});
    try {
        lu_decompose(a);
        FAIL() << "expected SingularError";
    } catch (const SingularError& e) {
        EXPECT_LT(e.column(), 3u);
    }
}

TEST(Lu, RejectsNonFiniteAndMismatchedInput) {
    EXPECT_THROW(Matrix(2, {1, 2, 3}), DimensionError);
    EXPECT_THROW(Matrix(2, {1, NAN, 0, 1}), NonFiniteError);
}

TEST(LuProperty, ReconstructsThousandRandomMatrices) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 1 + static_cast<std::size_t>(trial % 6);
        const Matrix a = random_matrix(n, rng);
        LuFactors f;
        try {
            f = lu_decompose(a);
        } catch (const SingularError&) {
            continue;
        }
        EXPECT_LE(max_abs_diff(f.lower() * f.upper(), f.permuted(a)), 1e-12 * (1.0 + a.max_abs())) << trial;
        EXPECT_NEAR(det(f), brute_det(a), 1e-10 * (1.0 + std::abs(brute_det(a))));
        for (std::size_t i = 0; i < n; ++i) EXPECT_DOUBLE_EQ(f.lower()(i, i), 1.0);
    }
}

TEST(Solve, IdentityReturnsRightHandSide) {
    const Vector b{3, -1, 2};
    EXPECT_EQ(solve(lu_decompose(Matrix::identity(3)), b), b);
}

TEST(SolveProperty, RoundTripOnWellConditioned5x5) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 200; ++trial) {
        const Matrix a = random_matrix(5, rng, 6.0);
        Vector x0(5);
        for (double& v : x0) v = u(rng);
        const Vector b = a * x0;
        const LuFactors f = lu_decompose(a);
        const Vector x = solve(f, b);
        for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(x[i], x0[i], 1e-10);
        const Vector bt = a.transposed() * x0;
        const Vector xt = solve_transposed(f, bt);
        for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(xt[i], x0[i], 1e-10);
    }
}

TEST(Solve, DimensionMismatchThrows) {
    EXPECT_THROW(solve(lu_decompose(Matrix::identity(2)), Vector{1, 2, 3}), DimensionError);
}

TEST(InverseNorm, ClosedFormCases) {
    EXPECT_DOUBLE_EQ(inverse_norm(Matrix::identity(3)), 1.0);
    EXPECT_DOUBLE_EQ(inverse_norm(Matrix::diagonal(Vector{2, 0.5})), 2.0);
    const C1Map at = maps::arctan1d();
    EXPECT_NEAR(inverse_norm(at.jacobian({3.0})), 10.0, 1e-12);
}

TEST(InverseNormProperty, MatchesCharacteristicPolynomialOracle) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 300; ++trial) {
        const Matrix a = random_matrix(3, rng, 1.0);
        const auto s = singular_values_3x3(a);
        if (s[0] < 1e-3) continue;
        EXPECT_NEAR(inverse_norm(a), 1.0 / s[0], 1e-8 / s[0]) << trial;
        EXPECT_NEAR(spectral_norm(a), s[2], 1e-8 * s[2]) << trial;
        EXPECT_NEAR(condition_number(a, lu_decompose(a)), s[2] / s[0], 1e-7 * s[2] / s[0]);
    }
}

TEST(InverseNormProperty, TwoByTwoAgreesWithExplicitInverse) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 500; ++trial) {
        const Matrix a = random_matrix(2, rng, 0.5);
        const double d = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
        if (std::abs(d) < 1e-3) continue;
        const Matrix inv(2, {a(1, 1) / d, -a(0, 1) / d, -a(1, 0) / d, a(0, 0) / d});
        EXPECT_NEAR(inverse_norm(a), spectral_norm(inv), 1e-9 * spectral_norm(inv));
    }
}

TEST(Det, ClosedFormCases) {
    EXPECT_DOUBLE_EQ(det(lu_decompose(Matrix::identity(4))), 1.0);
    EXPECT_DOUBLE_EQ(det(lu_decompose(Matrix::diagonal(Vector{2, 3}))), 6.0);
}

TEST(DetProperty, ExampleJacobianDeterminant) {
    const C1Map f = maps::planar_exp();
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int trial = 0; trial < 200; ++trial) {
        const Vector x{u(rng), u(rng)};
        const Matrix j = f.jacobian(x);
        const double expected = std::exp(2 * x[0]) / (1 + x[1] * x[1]);
        EXPECT_NEAR(det(lu_decompose(j)), expected, 1e-12 * expected);
        EXPECT_NEAR(brute_det(j), expected, 1e-12 * expected);
    }
}

TEST(VectorOps, ScaledNormAvoidsOverflow) {
    EXPECT_DOUBLE_EQ(norm2(Vector{3e200, 4e200}), 5e200);
    EXPECT_DOUBLE_EQ(norm2(Vector{0, 0}), 0.0);
    EXPECT_DOUBLE_EQ(norm_inf(Vector{-7, 2}), 7.0);
}
