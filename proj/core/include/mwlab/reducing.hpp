#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "mwlab/geometry.hpp"
#include "mwlab/linalg.hpp"
#include "mwlab/quadrature.hpp"
#include "mwlab/weights.hpp"

namespace mwlab {

struct ReducingOperator {
    enum class Method { ExactP2, Ellipsoid, Scalar };

    Cube cube;
    double p = 2.0;
    SPDMatrix matrix;
    Method method = Method::ExactP2;
    // Certified on the direction sample: c_low |A z| <= rho(z) <= c_high |A z|.
    double c_low = 1.0;
    double c_high = 1.0;
    int directions = 0;
};

std::string to_string(ReducingOperator::Method m);

struct ReduceOptions {
    int directions = 0;  // fitted directions; 0 means max(2 m^2, 64). The same count is held out.
    std::uint64_t seed = 0x7ed0c3;
    double mvee_tol = 1e-8;
};

// A_Q = (avg_Q W)^{1/2}.
ReducingOperator reduce_exact_p2(const WeightSpec& w, const Cube& q, const QuadratureConfig& cfg);

// Ellipsoid fit to the unit sphere of rho(z) = (avg_Q |W^{1/p} z|^p)^{1/p}.
ReducingOperator reduce_general(const WeightSpec& w, const Cube& q, double p, const QuadratureConfig& cfg,
                                const ReduceOptions& opts = {});

// Scalar weights: (avg_Q w)^{1/p} I exactly; p = 2: spectral route; otherwise the ellipsoid fit.
ReducingOperator reduce(const WeightSpec& w, const Cube& q, double p, const QuadratureConfig& cfg,
                        const ReduceOptions& opts = {});

// (|A M| / rhs, rhs / |A M|) with rhs = (avg_Q |W^{1/p} M|^p)^{1/p}.
std::pair<double, double> certify_matrix_equivalence(const ReducingOperator& a, const WeightSpec& w, const Mat& m,
                                                     const QuadratureConfig& cfg);

// |A^{-1} M|^p / exp(avg_Q log |W^{-1/p} M|^p).
double inverse_logavg_identity(const ReducingOperator& a, const WeightSpec& w, const Mat& m,
                               const QuadratureConfig& cfg);

// Unit directions: coordinate axes and pairwise diagonals, then seeded Gaussian samples.
std::vector<Vec> sample_directions(int m, int count, bool complex_phases, std::uint64_t seed, std::uint64_t stream);

}  // namespace mwlab
