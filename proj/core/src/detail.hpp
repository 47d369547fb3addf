#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "mwlab/characteristics.hpp"
#include "mwlab/quadrature.hpp"
#include "mwlab/weights.hpp"

namespace mwlab::detail {

inline QuadratureConfig with_singular(const QuadratureConfig& cfg, const WeightSpec& w) {
    QuadratureConfig out = cfg;
    for (const Point& s : w.singular_points()) {
        bool seen = false;
        for (const Point& t : out.singular_points) seen = seen || (t.size() == s.size() && (t - s).norm() == 0.0);
        if (!seen) out.singular_points.push_back(s);
    }
    return out;
}

inline std::vector<Mat> powers_at(const WeightSpec& w, const std::vector<Point>& nodes, double alpha) {
    std::vector<Mat> out;
    out.reserve(nodes.size());
    for (const Point& x : nodes) out.push_back(w.evaluate(x, alpha));
    return out;
}

// p-th power of the operator norm, computed from the squared norm to keep one sqrt.
inline double norm_pow(const Mat& a, double p) {
    const double s = operator_norm(a);
    return p == 1.0 ? s : std::pow(s, p);
}

struct PairPass {
    double value = 0.0;
    double error = 0.0;
    double target = 0.0;
    bool diverged = false;
    std::vector<double> refine_on;
};

// Runs pass on rule, refining on the returned integrand until the error target is met or the node cap is hit.
template <class Pass>
PairPass refine_pairs(CubeRule rule, const QuadratureConfig& cfg, Pass&& pass) {
    const std::size_t cap = rule.cube().dim() == 1 ? 1500 : 5000;
    const int passes = std::min(cfg.max_adaptive_passes, 3);
    for (int k = 0;; ++k) {
        PairPass r = pass(rule);
        if (r.diverged || r.error <= r.target || k >= passes || !rule.can_refine()) return r;
        CubeRule next = rule.refined(r.refine_on, 0.5 * r.target);
        if (next.size() > cap || next.size() == rule.size()) return r;
        rule = std::move(next);
    }
}

// Uniform grid of 2^depth cells per axis over q, each with its own node rule (lexicographic, axis 0 fastest).
struct CellGrid {
    Cube cube;
    int n = 1;
    int depth = 0;
    std::vector<CubeRule> cells;
    std::vector<Point> nodes;
    std::vector<std::size_t> offsets;
};

CellGrid make_cell_grid(const Cube& q, const QuadratureConfig& cfg, int depth);

// log of each cell average of exp(logf); +inf marks a divergent cell.
std::vector<double> cell_log_averages(const CellGrid& g, std::span<const double> logf);

FujiiWilsonValue fujii_wilson_grid(std::span<const double> cell_log_avg, int n, int depth);

}  // namespace mwlab::detail
