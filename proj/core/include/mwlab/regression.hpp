#pragma once

#include <span>

namespace mwlab {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual_max = 0.0;
};

// Ordinary least squares y = intercept + slope * x.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace mwlab
