#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "mwlab/dimensions.hpp"
#include "mwlab/errors.hpp"
#include "test_support.hpp"

using namespace mwlab;
using namespace mwlab::testing;

namespace {

const QuadratureConfig kCfg{};
using Kind = DimensionEstimate::Kind;

WeightSpec x_rotated() {
    return WeightSpec::conjugated(rotation(0.3), WeightSpec::diagonal({WeightSpec::power(1), WeightSpec::power(1)}));
}

}  // namespace

TEST(Equivalent, IdentityAllOne) {
    const EquivalentQuantities e =
        equivalent_quantities(WeightSpec::identity(2), 2.0, Cube::interval(0, 0.5), Cube::interval(0, 1), kCfg);
    EXPECT_NEAR(e.operator_form, 1.0, 1e-9);
    EXPECT_NEAR(e.avg_of_logavg, 1.0, 1e-9);
    EXPECT_NEAR(e.logavg_of_avg, 1.0, 1e-9);
}

TEST(Equivalent, SameCubeOperatorFormIsOne) {
    const Cube q = Cube::interval(0, 1);
    EXPECT_NEAR(equivalent_quantities(x_rotated(), 1.5, q, q, kCfg).operator_form, 1.0, 1e-9);
}

TEST(Equivalent, ScalarClosedForms) {
    // avg_[0,1/2] x = 1/4, exp(avg_[0,1] log 1/x) = e, avg_[0,1] x = 1/2.
    const EquivalentQuantities e =
        equivalent_quantities(WeightSpec::power(1), 1.0, Cube::interval(0, 0.5), Cube::interval(0, 1), kCfg);
    EXPECT_NEAR(e.avg_of_logavg, std::numbers::e / 4.0, 1e-6);
    EXPECT_NEAR(e.logavg_of_avg, std::numbers::e / 4.0, 1e-6);
    EXPECT_NEAR(e.operator_form, 0.5, 1e-6);
    EXPECT_NEAR(e.band, std::numbers::e / 2.0, 1e-5);
}

TEST(Equivalent, MatrixPathMatchesScalar) {
    const EquivalentQuantities e =
        equivalent_quantities(x_rotated(), 1.0, Cube::interval(0, 0.5), Cube::interval(0, 1), kCfg);
    EXPECT_NEAR(e.avg_of_logavg, std::numbers::e / 4.0, 1e-4);
    EXPECT_NEAR(e.logavg_of_avg, std::numbers::e / 4.0, 1e-4);
    EXPECT_NEAR(e.operator_form, 0.5, 1e-4);
}

TEST(LogPair, ScalarMatchesMatrix) {
    const Cube q = Cube::interval(0.25, 0.5), r = Cube::interval(0, 1);
    const double s = log_pair_value(WeightSpec::power(1), 1.0, q, r, kCfg);
    EXPECT_NEAR(log_pair_value(x_rotated(), 1.0, q, r, kCfg), s, 1e-4);
    EXPECT_NEAR(s, std::log(0.375) + 1.0, 1e-6);
}

TEST(Dimension, IdentityIsZero) {
    for (Kind k : {Kind::Lower, Kind::Upper}) {
        const DimensionEstimate d = estimate_dimension(WeightSpec::identity(1), 2.0, k, kCfg);
        EXPECT_NEAR(d.slope, 0.0, 1e-9);
        EXPECT_NEAR(d.intercept, 0.0, 1e-9);
        EXPECT_TRUE(d.attained);
        EXPECT_TRUE(d.accepted);
    }
}

TEST(Dimension, LogOutLowerHalfAttained) {
    const DimensionEstimate d = estimate_dimension(WeightSpec::log_out(-0.5, 1), 2.0, Kind::Lower, kCfg);
    EXPECT_NEAR(d.d_hat, 0.5, 0.05);
    EXPECT_TRUE(d.attained);
    EXPECT_EQ(d.log_lambda.size(), 10u);
}

TEST(Dimension, LogOutUpperOneAttained) {
    const DimensionEstimate d = estimate_dimension(WeightSpec::log_out(1, 0), 2.0, Kind::Upper, kCfg);
    EXPECT_NEAR(d.d_hat, 1.0, 0.05);
    EXPECT_TRUE(d.attained);
}

TEST(Dimension, NonAttainedCases) {
    const DimensionEstimate lo = estimate_dimension(WeightSpec::log_out(-0.5, -1), 1.0, Kind::Lower, kCfg);
    EXPECT_NEAR(lo.d_hat, 0.5, 0.05);
    EXPECT_FALSE(lo.attained);
    const DimensionEstimate up = estimate_dimension(WeightSpec::log_in(2, -1), 1.0, Kind::Upper, kCfg);
    EXPECT_NEAR(up.d_hat, 2.0, 0.05);
    EXPECT_FALSE(up.attained);
}

TEST(Dimension, MatrixPathAgreesWithScalar) {
    DimensionOptions o;
    o.extreme_exp = 8;
    o.scan_step = 8;
    const WeightSpec w = WeightSpec::conjugated(
        rotation(0.4), WeightSpec::diagonal({WeightSpec::power(-0.5), WeightSpec::power(-0.5)}));
    const DimensionEstimate m = estimate_dimension(w, 1.0, Kind::Lower, kCfg, o);
    const DimensionEstimate s = estimate_dimension(WeightSpec::power(-0.5), 1.0, Kind::Lower, kCfg, o);
    EXPECT_NEAR(m.d_hat, s.d_hat, 1e-3);
    EXPECT_NEAR(s.d_hat, 0.5, 0.02);
}

TEST(Doubling, ConstantAndPowers) {
    EXPECT_NEAR(scalar_dimension_via_doubling(WeightSpec::power(0), Kind::Lower, kCfg).d_hat, 0.0, 1e-9);
    const DimensionEstimate lo = scalar_dimension_via_doubling(WeightSpec::power(-0.5), Kind::Lower, kCfg);
    EXPECT_NEAR(lo.slope, 0.5, 1e-3);
    const DimensionEstimate up = scalar_dimension_via_doubling(WeightSpec::power(1), Kind::Upper, kCfg);
    EXPECT_NEAR(up.slope, 1.0, 1e-3);
}

TEST(Doubling, AgreesWithPairEstimate) {
    for (const WeightSpec& w : {WeightSpec::log_out(-0.5, 1), WeightSpec::log_in(1, 0), WeightSpec::power(0.5)}) {
        for (Kind k : {Kind::Lower, Kind::Upper}) {
            const double a = scalar_dimension_via_doubling(w, k, kCfg).d_hat;
            const double b = estimate_dimension(WeightSpec::scalar_times_identity(w, 2), 2.0, k, kCfg).d_hat;
            EXPECT_NEAR(a, b, 0.1) << w.describe() << " " << to_string(k);
        }
    }
}

TEST(Doubling, RejectsMatrix) {
    EXPECT_THROW(scalar_dimension_via_doubling(x_rotated(), Kind::Lower, kCfg), ParameterError);
}

TEST(Sharp, IdentityRatioOne) {
    const SharpEstimateReport r = verify_sharp_estimate(WeightSpec::identity(2), 2.0, 0.0, 0.0, 16, kCfg);
    EXPECT_NEAR(r.max_ratio, 1.0, 1e-9);
    for (const SharpPair& sp : r.pairs) EXPECT_NEAR(sp.lhs, 1.0, 1e-9);
}

TEST(Sharp, NestedPowerPairsFlat) {
    // A_[0,L] = 2 L^{-1/2}: lhs = 2^{j/2}, rhs = 2^{j/2} (3/2 - 2^{-j-1})^{1/2}.
    const SharpEstimateReport r = verify_sharp_estimate(WeightSpec::power(-0.5), 1.0, 0.5, 0.0, 0, kCfg);
    int seen = 0;
    for (const SharpPair& sp : r.pairs) {
        if (sp.q.lower()(0) != 0.0 || sp.r != Cube::interval(0, 1) || sp.q.edge >= 1.0) continue;
        const double j = -std::log2(sp.q.edge);
        EXPECT_NEAR(sp.lhs, std::pow(2.0, j / 2.0), 1e-5 * sp.lhs);
        EXPECT_NEAR(sp.ratio, 1.0 / std::sqrt(1.5 - std::pow(2.0, -j - 1.0)), 1e-5);
        ++seen;
    }
    EXPECT_EQ(seen, 10);
    EXPECT_TRUE(std::isfinite(r.max_ratio));
}

TEST(Sharp, MonotoneInDimensions) {
    const WeightSpec w = WeightSpec::sharpness(0.5, 1.0, 1);
    const double a = verify_sharp_estimate(w, 1.0, 0.5, 1.0, 8, kCfg).max_ratio;
    const double b = verify_sharp_estimate(w, 1.0, 0.7, 1.0, 8, kCfg).max_ratio;
    const double c = verify_sharp_estimate(w, 1.0, 0.7, 1.3, 8, kCfg).max_ratio;
    EXPECT_GE(a, b);
    EXPECT_GE(b, c);
}

TEST(Sharp, DyadicVariantsFinite) {
    const WeightSpec w = WeightSpec::sharpness(0.5, 1.0, 1);
    for (auto v : {SharpEstimateReport::Variant::DyadicCorners, SharpEstimateReport::Variant::DyadicLevel,
                   SharpEstimateReport::Variant::Intersecting}) {
        const SharpEstimateReport r = verify_sharp_estimate(w, 1.0, 0.5, 1.0, 16, kCfg, v);
        EXPECT_TRUE(std::isfinite(r.max_ratio)) << to_string(v);
        EXPECT_FALSE(r.pairs.empty());
        if (v == SharpEstimateReport::Variant::Intersecting)
            for (const SharpPair& sp : r.pairs) EXPECT_TRUE(sp.q.intersects(sp.r));
    }
}

TEST(Sharpness, HalfZero) {
    const SharpnessFit f = sharpness_experiment(0.5, 0.0, 1, 1, 1.0, kCfg);
    EXPECT_GE(f.a_fit, 0.4);
    EXPECT_TRUE(f.pass);
}

TEST(Sharpness, HalfOneSeparated) {
    const SharpnessFit f = sharpness_experiment(0.5, 1.0, 1, 1, 1.0, kCfg);
    EXPECT_GE(f.c_fit, 1.35);
    EXPECT_TRUE(f.pass);
}

TEST(Sharpness, DegenerateNearZero) {
    const SharpnessFit f = sharpness_experiment(0.0, 0.0, 1, 1, 1.0, kCfg, 30);
    // Only log factors: one for a and b, two for c, so slopes decay like 1/log and 2/log.
    EXPECT_NEAR(f.a_fit, 0.0, 0.15);
    EXPECT_NEAR(f.b_fit, 0.0, 0.15);
    EXPECT_NEAR(f.c_fit, 0.0, 0.25);
}

TEST(DimensionClass, IdentityWitnessesOne) {
    const DimensionClassRecord r = dimension_class_properties(WeightSpec::identity(2), 2.0, kCfg);
    EXPECT_NEAR(r.max_value, 1.0, 1e-9);
    EXPECT_NEAR(r.max_witness_n, 0.5, 1e-9);
    EXPECT_TRUE(r.witness_n_ok);
    EXPECT_TRUE(r.witness_n_over_r_ok);
    EXPECT_TRUE(r.monotone);
}

TEST(DimensionClass, PowerWeightBounds) {
    const DimensionClassRecord r = dimension_class_properties(WeightSpec::power(1), 1.0, kCfg);
    EXPECT_TRUE(r.witness_n_ok) << r.max_witness_n;
    EXPECT_TRUE(r.witness_n_over_r_ok) << r.max_witness_n_over_r;
    EXPECT_TRUE(r.monotone);
    EXPECT_LE(r.apinf, std::numbers::e / 2.0 + 1e-5);
    EXPECT_GT(r.r, 1.0);
}
