#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "mwlab/errors.hpp"
#include "mwlab/quadrature.hpp"

using namespace mwlab;

namespace {

QuadratureConfig singular_at(std::initializer_list<double> s) {
    QuadratureConfig cfg;
    cfg.singular_points = {make_point(s)};
    return cfg;
}

std::vector<double> values(const CubeRule& r, const ScalarField& f) {
    std::vector<double> v(r.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(r.node(i));
    return v;
}

}  // namespace

TEST(CubeRule, KronrodExactOnPolynomials) {
    QuadratureConfig cfg;
    cfg.base_subdivisions = 2;
    Cube q = Cube::interval(0, 1);
    CubeRule r(q, cfg);
    for (int k = 0; k <= 20; ++k) {
        auto v = values(r, [k](const Point& x) { return std::pow(x(0), k); });
        EXPECT_NEAR(r.average(v).value, 1.0 / (k + 1), 1e-14) << "degree " << k;
    }
    Cube sq = Cube::from_corner(make_point({0.0, 0.0}), 1.0);
    CubeRule r2(sq, cfg);
    for (int a = 0; a <= 6; ++a)
        for (int b = 0; b <= 6; ++b) {
            auto v = values(r2, [a, b](const Point& x) { return std::pow(x(0), a) * std::pow(x(1), b); });
            EXPECT_NEAR(r2.average(v).value, 1.0 / ((a + 1) * (b + 1)), 1e-14);
        }
}

TEST(CubeRule, WeightsSumToOne) {
    CubeRule r(Cube::from_corner(make_point({-1.0, -1.0}), 2.0), singular_at({0.0, 0.0}));
    double s = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) s += r.weight(i);
    EXPECT_LE(s, 1.0 + 1e-12);
    EXPECT_GT(s, 1.0 - 1e-6);
}

TEST(CubeAverage, InverseSquareRootSingularity) {
    auto res = cube_average([](const Point& x) { return 1.0 / std::sqrt(std::abs(x(0))); }, Cube::interval(0, 1),
                            singular_at({0.0}));
    EXPECT_NEAR(res.value, 2.0, 1e-5);
    EXPECT_FALSE(res.diverged);
    ASSERT_FALSE(res.refined_near.empty());
    EXPECT_EQ(res.refined_near[0](0), 0.0);
}

TEST(CubeAverage, LogSingularityInterior) {
    auto res = cube_average([](const Point& x) { return -std::log(std::abs(x(0) - 0.3)); }, Cube::interval(0, 1),
                            singular_at({0.3}));
    const double exact = 1.0 - (0.3 * std::log(0.3) + 0.7 * std::log(0.7));
    EXPECT_NEAR(res.value, exact, 1e-6 * exact);
}

TEST(CubeAverage, TwoDimensionalPower) {
    // |x|^{-1} on [0,1]^2: integral is 2 * asinh(1) by polar coordinates.
    auto res = cube_average([](const Point& x) { return 1.0 / x.norm(); }, Cube::from_corner(make_point({0.0, 0.0}), 1.0),
                            singular_at({0.0, 0.0}));
    EXPECT_NEAR(res.value, 2.0 * std::asinh(1.0), 1e-5);
}

TEST(CubeAverage, NonIntegrableDiverges) {
    auto res = cube_average([](const Point& x) { return 1.0 / std::abs(x(0)); }, Cube::interval(0, 1), singular_at({0.0}));
    EXPECT_TRUE(res.diverged);
    auto res2 = cube_average([](const Point& x) { return std::pow(std::abs(x(0)), -1.05); }, Cube::interval(-1, 1),
                             singular_at({0.0}));
    EXPECT_TRUE(res2.diverged);
    auto res3 = cube_average([](const Point& x) { return std::pow(std::abs(x(0)), -0.95); }, Cube::interval(0, 1),
                             singular_at({0.0}));
    EXPECT_FALSE(res3.diverged);
    EXPECT_NEAR(res3.value, 20.0, 20.0 * 1e-4);
}

TEST(CubeAverage, NearbySingularityOutside) {
    QuadratureConfig cfg = singular_at({-1e-3});
    auto res = cube_average([](const Point& x) { return 1.0 / std::sqrt(x(0) + 1e-3); }, Cube::interval(0, 1), cfg);
    const double exact = 2.0 * (std::sqrt(1.001) - std::sqrt(1e-3));
    EXPECT_NEAR(res.value, exact, 1e-6 * exact);
}

TEST(CubeLogAverage, Identity) {
    auto res = cube_log_average([](const Point& x) { return x(0); }, Cube::interval(0, 1), singular_at({0.0}));
    EXPECT_NEAR(res.value, std::exp(-1.0), 1e-6);
    auto c = cube_log_average([](const Point&) { return 3.5; }, Cube::interval(2, 3), QuadratureConfig{});
    EXPECT_NEAR(c.value, 3.5, 1e-14);
}

TEST(CubeLogAverage, RejectsNonPositive) {
    EXPECT_THROW(cube_log_average([](const Point& x) { return x(0) - 0.5; }, Cube::interval(0, 1), QuadratureConfig{}),
                 NumericError);
}

TEST(CubeLogAverage, JensenAgainstAverage) {
    auto f = [](const Point& x) { return 1.0 + std::sin(7 * x(0)) * std::sin(7 * x(0)) + x(1); };
    Cube q = Cube::from_corner(make_point({0.0, 0.0}), 1.0);
    EXPECT_LE(cube_log_average(f, q, QuadratureConfig{}).value, cube_average(f, q, QuadratureConfig{}).value);
}

// exp avg log (avg |x|/|y|) on [0,1] = (1/2) e.
TEST(NestedAverage, ScalarBridge) {
    QuadratureConfig cfg = singular_at({0.0});
    Cube q = Cube::interval(0, 1);
    auto res = nested_logavg_of_avg([](const Point& x, const Point& y) { return std::abs(x(0)) / std::abs(y(0)); }, q, q, cfg);
    EXPECT_NEAR(res.value, std::numbers::e / 2.0, 1e-5);
}

TEST(CubeRule, SupDetectsBlowUp) {
    QuadratureConfig cfg = singular_at({0.0});
    CubeRule r(Cube::interval(0, 1), cfg);
    auto bounded = r.sup(values(r, [](const Point& x) { return 2.0 - x(0); }));
    EXPECT_FALSE(bounded.diverged);
    EXPECT_NEAR(bounded.value, 2.0, 1e-3);
    auto blow = r.sup(values(r, [](const Point& x) { return std::pow(x(0), -0.2); }));
    EXPECT_TRUE(blow.diverged);
}

TEST(CubeRule, SuperlevelFraction) {
    CubeRule r(Cube::interval(0, 1), QuadratureConfig{});
    EXPECT_NEAR(r.superlevel_fraction([](const Point& x) { return x(0); }, 0.3), 0.7, 1e-6);
    CubeRule r2(Cube::from_corner(make_point({-1.0, -1.0}), 2.0), singular_at({0.0, 0.0}));
    const double frac = r2.superlevel_fraction([](const Point& x) { return 1.0 / x.norm(); }, 2.0);
    EXPECT_NEAR(frac, std::numbers::pi * 0.25 / 4.0, 2e-3);
}

TEST(QuadratureConfig, Validation) {
    QuadratureConfig cfg;
    cfg.base_subdivisions = 1;
    EXPECT_THROW(cfg.validate(), ConfigurationError);
    cfg = QuadratureConfig{};
    cfg.max_refine_depth = 2;
    EXPECT_THROW(CubeRule(Cube::interval(0, 1), cfg), ConfigurationError);
}
