#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "mwlab/geometry.hpp"

namespace mwlab {

struct QuadratureConfig {
    int base_subdivisions = 8;
    int max_refine_depth = 12;
    double rel_tol = 1e-6;
    std::vector<Point> singular_points;
    int max_adaptive_passes = 8;

    void validate() const;
};

struct AverageResult {
    double value = 0.0;
    double error_estimate = 0.0;
    long nodes_used = 0;
    std::vector<Point> refined_near;
    bool converged = true;
    bool diverged = false;
};

using ScalarField = std::function<double(const Point&)>;
using PairField = std::function<double(const Point& x, const Point& y)>;

// Node set on one cube. Cells carry tensor Gauss-Kronrod rules (G7K15 in 1D, G3K7 per axis otherwise).
// Singular points inside the closed cube become box corners; each corner is resolved by dyadic rings
// down to max_refine_depth and the innermost core is extrapolated from the ring sums.
class CubeRule {
public:
    CubeRule(const Cube& q, const QuadratureConfig& cfg);

    struct Estimate {
        double value = 0.0;
        double error = 0.0;
        bool diverged = false;
    };

    struct SupEstimate {
        double value = 0.0;
        std::size_t argmax = 0;
        bool diverged = false;
    };

    const Cube& cube() const { return cube_; }
    std::size_t size() const { return nodes_.size(); }
    const std::vector<Point>& nodes() const { return nodes_; }
    const Point& node(std::size_t i) const { return nodes_[i]; }
    // Kronrod weight of node i as a fraction of |Q|.
    double weight(std::size_t i) const { return wk_[i]; }
    const std::vector<Point>& refined_near() const { return corners_; }

    Estimate average(std::span<const double> f) const;
    // log of the average of exp(logf), evaluated with a max shift; error is relative.
    Estimate log_average_exp(std::span<const double> logf) const;
    // Max over nodes; diverged when ring maxima keep growing toward a singular corner.
    SupEstimate sup(std::span<const double> f) const;

    // Split cells whose Kronrod/Gauss discrepancy exceeds target / cells.
    CubeRule refined(std::span<const double> f, double target) const;
    bool can_refine() const;

    // Measure of {f >= t} / |Q| with bisection of cells on which the indicator is not constant.
    double superlevel_fraction(const ScalarField& f, double t, int max_extra_depth = 24) const;

private:
    struct Cell {
        Point lo;
        Point size;
        int corner = -1;
        int ring = -1;
        int depth = 0;
        std::size_t first = 0;
        std::size_t count = 0;
    };

    CubeRule() = default;
    void add_cell(const Point& lo, const Point& size, int corner, int ring, int depth);
    void finalize();

    Cube cube_;
    int n_ = 1;
    int depth_ = 12;
    std::vector<Point> near_;
    std::vector<Cell> cells_;
    std::vector<Point> nodes_;
    std::vector<double> wk_;
    std::vector<double> wg_;
    std::vector<Point> corners_;
    std::vector<double> core_volume_;
};

using VectorField = std::function<void(const Point&, std::span<double>)>;

AverageResult cube_average(const ScalarField& f, const Cube& q, const QuadratureConfig& cfg);

// Averages of count fields sharing one adaptively refined rule. Each converges to rel_tol relative to its own
// magnitude, or to the largest magnitude when joint_scale is set (matrix entries).
std::vector<AverageResult> cube_average_many(const VectorField& f, std::size_t count, const Cube& q,
                                             const QuadratureConfig& cfg, bool joint_scale = false);

// log of the average of exp(logf); error_estimate is relative to the average.
AverageResult cube_log_mean_exp(const ScalarField& logf, const Cube& q, const QuadratureConfig& cfg);

// exp of the average of log f.
AverageResult cube_log_average(const ScalarField& f, const Cube& q, const QuadratureConfig& cfg);

// Same, with log f supplied directly (avoids overflow for integrands spanning many decades).
AverageResult cube_log_average_of_log(const ScalarField& logf, const Cube& q, const QuadratureConfig& cfg);

// exp( avg_{y in R} log( avg_{x in Q} inner(x, y) ) ).
AverageResult nested_logavg_of_avg(const PairField& inner, const Cube& q, const Cube& r, const QuadratureConfig& cfg);

}  // namespace mwlab
