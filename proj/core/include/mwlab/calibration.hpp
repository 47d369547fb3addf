#pragma once

#include <string>
#include <vector>

#include "mwlab/geometry.hpp"
#include "mwlab/quadrature.hpp"
#include "mwlab/weights.hpp"

namespace mwlab {

struct NamedWeight {
    std::string name;
    WeightSpec weight;
};

// Built-in A_{p,infty} examples on the line with m x m values: identity, power and log families times I,
// and for m >= 2 a rotated diagonal of unequal powers.
std::vector<NamedWeight> builtin_weights(int m);

// Constants the theory proves to exist but does not quantify.
struct CalibratedConstants {
    double distributional = 1.0;  // |{|A_Q W^{-1/p}|^p >= e^M}| <= log(C [W]) / M |Q|
    double stopping = 1.0;        // selected dyadic mass bound, same form
    double cor8 = 1.0;            // sup_Q (avg |W^{1/p} A_Q^{-1}|^{pr})^{1/r} <= C
};

// Frozen table for m in {1, 2, 3}, p in {1/2, 1, 2, 3}; other (m, p) take the largest entry.
CalibratedConstants frozen_constants(int m, double p);

struct CalibrationRun {
    CalibratedConstants constants;
    CalibratedConstants needed;  // raw requirement before rounding up to a power of 2
};

// Smallest powers of 2 under which every built-in weight passes, over Q in {[0,1], [-1,1], [0,4]} and M = 1..10.
CalibrationRun calibrate_constants(int m, double p, const QuadratureConfig& cfg);

}  // namespace mwlab
