#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mwlab/geometry.hpp"
#include "mwlab/quadrature.hpp"
#include "mwlab/weights.hpp"

namespace mwlab {

struct EquivalentQuantities {
    double operator_form = 1.0;   // |A_Q A_R^{-1}|^p
    double avg_of_logavg = 1.0;   // avg_Q exp(avg_R log |W^{1/p}(x) W^{-1/p}(y)|^p dy) dx
    double logavg_of_avg = 1.0;   // exp(avg_R log avg_Q |W^{1/p}(x) W^{-1/p}(y)|^p dx dy)
    double band = 1.0;            // largest pairwise ratio
};

EquivalentQuantities equivalent_quantities(const WeightSpec& w, double p, const Cube& q, const Cube& r,
                                           const QuadratureConfig& cfg);

// log of exp(avg_{y in outer} log avg_{x in inner} |W^{1/p}(x) W^{-1/p}(y)|^p).
double log_pair_value(const WeightSpec& w, double p, const Cube& inner, const Cube& outer, const QuadratureConfig& cfg);

struct DimensionOptions {
    int fit_min = 5;          // slope fitted over lambda = 2^fit_min .. 2^fit_max
    int fit_max = 10;
    int extreme_exp = 120;    // base cube sizes 2^{-e} and 2^{e} for the slope
    int scan_step = 4;        // attainment scan over base sizes 2^{-e}, 2^{-e+step}, ..., 2^{e}
    double attain_threshold = 0.25;
    std::vector<Point> anchors;  // empty: singular points of the weight and the origin
};

struct DimensionEstimate {
    enum class Kind { Lower, Upper };

    Kind kind = Kind::Lower;
    double d_hat = 0.0;        // slope clamped at 0
    double slope = 0.0;
    double intercept = 0.0;
    double residual_max = 0.0;
    bool accepted = true;      // residual_max <= 0.2
    double lambda_min = 2.0;
    double lambda_max = 1024.0;
    std::vector<double> log_lambda;
    std::vector<double> log_value;      // max over base configurations at the extreme sizes
    std::vector<double> log_value_all;  // max over the scanned sizes, at fit_min and fit_max only
    double growth = 0.0;                // drift of log value - d_hat log lambda across the fit range
    bool attained = true;
    std::vector<std::string> warnings;
};

std::string to_string(DimensionEstimate::Kind k);

DimensionEstimate estimate_dimension(const WeightSpec& w, double p, DimensionEstimate::Kind kind,
                                     const QuadratureConfig& cfg, const DimensionOptions& opts = {});

// Mass-ratio route for scalar weights: w(Q)/w(lambda Q) <= C lambda^{d-n}, w(lambda Q)/w(Q) <= C lambda^{d+n}.
DimensionEstimate scalar_dimension_via_doubling(const WeightSpec& w, DimensionEstimate::Kind kind,
                                                const QuadratureConfig& cfg, const DimensionOptions& opts = {});

struct SharpPair {
    Cube q;
    Cube r;
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
};

struct SharpEstimateReport {
    enum class Variant { Centers, DyadicCorners, DyadicLevel, Intersecting };

    Variant variant = Variant::Centers;
    double d1 = 0.0;
    double d2 = 0.0;
    std::vector<SharpPair> pairs;
    double max_ratio = 0.0;
    std::size_t argmax = 0;
};

std::string to_string(SharpEstimateReport::Variant v);

// Structured pairs around the anchors at levels -levels..levels plus random_pairs seeded pairs.
SharpEstimateReport verify_sharp_estimate(const WeightSpec& w, double p, double d1, double d2, int random_pairs,
                                          const QuadratureConfig& cfg,
                                          SharpEstimateReport::Variant variant = SharpEstimateReport::Variant::Centers,
                                          int levels = 10, std::uint64_t seed = 0x5a);

struct SharpnessFit {
    double a_fit = 0.0;
    double b_fit = 0.0;
    double c_fit = 0.0;
    bool pass = true;  // a >= d1 - 0.1, b >= d2 - 0.1, c >= d1 + d2 - 0.15
};

SharpnessFit sharpness_experiment(double d1, double d2, int n, int m, double p, const QuadratureConfig& cfg,
                                  int levels = 12);

struct DimensionClassRecord {
    int pairs = 0;
    double max_value = 0.0;            // d = 0 witness: max V(Q, R)
    double max_witness_n = 0.0;        // max V / (l(R)/l(Q))^n / apinf(R)
    double max_witness_n_over_r = 0.0; // max V / (l(R)/l(Q))^{n/r} / (2^{1/r} [W])
    double r = 1.0;
    double apinf = 1.0;                // max per-cube value over the outer cubes
    bool witness_n_ok = true;
    bool witness_n_over_r_ok = true;
    bool monotone = true;
};

// sc_value <= 0 computes the Fujii-Wilson sup over the outer cubes first.
DimensionClassRecord dimension_class_properties(const WeightSpec& w, double p, const QuadratureConfig& cfg,
                                                int levels = 6, double sc_value = 0.0);

}  // namespace mwlab
