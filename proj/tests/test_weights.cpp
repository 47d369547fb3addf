#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "mwlab/errors.hpp"
#include "mwlab/weights.hpp"
#include "test_support.hpp"

using namespace mwlab;
using namespace mwlab::testing;

TEST(Weights, PointEvaluation) {
    EXPECT_NEAR(WeightSpec::power(1).evaluate(make_point({0.25}), 1)(0, 0).real(), 0.25, 1e-15);
    WeightSpec w = WeightSpec::scalar_times_identity(WeightSpec::power(2, 2), 2);
    Mat v = w.evaluate(make_point({3.0, 0.0}), 0.5);
    EXPECT_LT(max_entry_diff(v, 3.0 * identity(2)), 1e-13);
    WeightSpec s = WeightSpec::sharpness(0.5, 1.0, 1);
    const double direct = std::pow(0.5, -0.5) * std::log(4.0) / (std::pow(0.5, -1.0) * std::log(4.0));
    EXPECT_NEAR(s.evaluate(make_point({0.5}), 1)(0, 0).real(), direct, 1e-13);
    EXPECT_NEAR(direct, std::sqrt(0.5), 1e-12);
}

TEST(Weights, SingularPoints) {
    auto p = WeightSpec::power(1).singular_points();
    ASSERT_EQ(p.size(), 1u);
    EXPECT_EQ(p[0](0), 0.0);
    auto t = WeightSpec::translated(WeightSpec::power(1, 2), make_point({2.0, 0.0})).singular_points();
    ASSERT_EQ(t.size(), 1u);
    EXPECT_EQ(t[0](0), 2.0);
    EXPECT_EQ(t[0](1), 0.0);
    auto s = WeightSpec::sharpness(0.5, 1, 1).singular_points();
    ASSERT_EQ(s.size(), 2u);
    EXPECT_EQ(s[0](0), 0.0);
    EXPECT_EQ(s[1](0), 1.0);
}

TEST(Weights, SingularityError) {
    EXPECT_THROW(WeightSpec::power(-0.5).evaluate(make_point({0.0}), 1.0), SingularityError);
    EXPECT_THROW(WeightSpec::power(0.5).evaluate(make_point({0.0}), -1.0), SingularityError);
    EXPECT_EQ(WeightSpec::power(0.5).evaluate(make_point({0.0}), 1.0)(0, 0).real(), 0.0);
}

TEST(Weights, ParameterValidation) {
    EXPECT_THROW(WeightSpec::power(-1.0), ParameterError);
    EXPECT_THROW(WeightSpec::log_in(-2.5, 1, 2), ParameterError);
    EXPECT_THROW(WeightSpec::sharpness(1.0, 0, 1), ParameterError);
    EXPECT_THROW(WeightSpec::sharpness(0.5, -1, 1), ParameterError);
    Mat notu = diag2(2, 1);
    EXPECT_THROW(WeightSpec::conjugated(notu, WeightSpec::diagonal({WeightSpec::power(1), WeightSpec::power(0)})),
                 ParameterError);
}

TEST(Weights, InversePowersCancel) {
    Mat r = rotation(0.7);
    WeightSpec w = WeightSpec::conjugated(r, WeightSpec::diagonal({WeightSpec::power(1), WeightSpec::log_in(-0.3, 1)}));
    CounterRng rng(5);
    for (int t = 0; t < 50; ++t) {
        Point x = make_point({rng.uniform(-3, 3)});
        const double al = rng.uniform(-2, 2);
        Mat prod = w.evaluate(x, al) * w.evaluate(x, -al);
        EXPECT_LT(max_entry_diff(prod, identity(2)), 1e-9);
        Eigen::SelfAdjointEigenSolver<Mat> es(w.evaluate(x, 1.0));
        EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
    }
}

TEST(Weights, ConjugationCommutes) {
    Mat r = rotation(0.3);
    WeightSpec d = WeightSpec::diagonal({WeightSpec::power(1), WeightSpec::power(-0.5)});
    WeightSpec c = WeightSpec::conjugated(r, d);
    for (double x : {0.1, 0.7, -2.0}) {
        Mat lhs = c.evaluate(make_point({x}), 0.5);
        Mat rhs = r * d.evaluate(make_point({x}), 0.5) * r.adjoint();
        EXPECT_LT(max_entry_diff(lhs, rhs), 1e-10);
        Mat direct = diag2(std::pow(std::abs(x), 0.5), std::pow(std::abs(x), -0.25));
        EXPECT_LT(max_entry_diff(lhs, r * direct * r.transpose()), 1e-12);
    }
}

TEST(Weights, PowerHomogeneity) {
    WeightSpec w = WeightSpec::power(1.7, 2);
    Point x = make_point({0.3, -0.4});
    for (double t : {0.5, 2.0, 10.0}) {
        const double lhs = w.evaluate(t * x, 1)(0, 0).real();
        const double rhs = std::pow(t, 1.7) * w.evaluate(x, 1)(0, 0).real();
        EXPECT_NEAR(lhs, rhs, 1e-14 * rhs);
    }
}

TEST(Weights, LogSpaceAvoidsUnderflow) {
    WeightSpec w = WeightSpec::power(-0.9);
    EXPECT_NEAR(w.log_scalar(make_point({1e-300})), -0.9 * std::log(1e-300), 1e-9);
    WeightSpec li = WeightSpec::log_in(0.0, 2.0);
    EXPECT_NEAR(li.log_scalar(make_point({1e-200})), 2.0 * std::log(std::log(2.0 + 1e200)), 1e-12);
}

TEST(Weights, SampledGrid) {
    Box box{make_point({0.0}), make_point({1.0})};
    WeightSpec w = WeightSpec::sampled(box, 2, {diag2(1, 2), diag2(4, 1)});
    EXPECT_LT(max_entry_diff(w.evaluate(make_point({0.25}), 0.5), diag2(1, std::sqrt(2.0))), 1e-14);
    EXPECT_LT(max_entry_diff(w.evaluate(make_point({0.75}), -1), diag2(0.25, 1)), 1e-14);
    EXPECT_THROW(w.evaluate(make_point({1.5}), 1), ParameterError);
}

TEST(Membership, PaperTable) {
    auto t = membership_truth(WeightSpec::power(-0.5));
    ASSERT_TRUE(t);
    EXPECT_TRUE(*t->a_1);
    EXPECT_TRUE(*membership_truth(WeightSpec::power(1))->a_p(3.0));
    EXPECT_FALSE(*membership_truth(WeightSpec::power(2))->a_p(3.0));
    EXPECT_FALSE(*membership_truth(WeightSpec::power(1))->a_1);
    auto lo = membership_truth(WeightSpec::log_out(-0.5, 1));
    EXPECT_DOUBLE_EQ(lo->d_lower->d, 0.5);
    EXPECT_TRUE(lo->d_lower->attained);
    EXPECT_FALSE(membership_truth(WeightSpec::log_out(-0.5, -1))->d_lower->attained);
    EXPECT_FALSE(membership_truth(WeightSpec::log_in(-0.5, 1))->d_lower->attained);
    EXPECT_FALSE(membership_truth(WeightSpec::log_in(2, -1))->d_upper->attained);
    EXPECT_TRUE(membership_truth(WeightSpec::log_in(2, 1))->d_upper->attained);
    EXPECT_FALSE(membership_truth(WeightSpec::conjugated(
        rotation(0.2), WeightSpec::diagonal({WeightSpec::power(1), WeightSpec::power(0)}))).has_value());
}

TEST(AnalyticAverage, ClosedForms) {
    auto a = analytic_average(WeightSpec::power(1), Cube::interval(0, 1));
    ASSERT_TRUE(a && a->exact);
    EXPECT_DOUBLE_EQ(a->value, 0.5);
    EXPECT_NEAR(analytic_average(WeightSpec::power(-0.5), Cube::interval(0, 1))->value, 2.0, 1e-15);
    EXPECT_NEAR(analytic_average(WeightSpec::power(1), Cube::interval(-1, 1))->value, 0.5, 1e-15);
    auto c = analytic_average(WeightSpec::log_in(-0.5, 1), Cube(make_point({0.5}), 0.25));
    ASSERT_TRUE(c);
    EXPECT_FALSE(c->exact);
    EXPECT_NEAR(c->value, std::pow(0.75, -0.5) * std::log(2 + 1 / 0.75), 1e-14);
}
