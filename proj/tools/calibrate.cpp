#include <cstdio>

#include "mwlab/calibration.hpp"
#include "mwlab/parallel.hpp"

// Prints the frozen-constant table rows consumed by calibration.cpp.
int main() {
    using namespace mwlab;
    const QuadratureConfig cfg{};
    for (int m = 1; m <= 3; ++m)
        for (double p : {0.5, 1.0, 2.0, 3.0}) {
            const CalibrationRun r = calibrate_constants(m, p, cfg);
            std::printf("    {%d, %.1f, {%.1f, %.1f, %.1f}},  // needed %.4f %.4f %.4f\n", m, p,
                        r.constants.distributional, r.constants.stopping, r.constants.cor8, r.needed.distributional,
                        r.needed.stopping, r.needed.cor8);
            std::fflush(stdout);
        }
}
