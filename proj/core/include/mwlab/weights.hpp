#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mwlab/geometry.hpp"
#include "mwlab/linalg.hpp"

namespace mwlab {

// Declarative matrix weight. Scalar families are m = 1; combinators build matrix weights.
class WeightSpec {
public:
    enum class Kind { Power, LogOut, LogIn, ScalarTimesIdentity, Diagonal, Conjugated, Translated, Sharpness, Sampled, Powered };

    static WeightSpec power(double a, int n = 1);
    static WeightSpec log_out(double a, double b, int n = 1);
    static WeightSpec log_in(double a, double b, int n = 1);
    static WeightSpec scalar_times_identity(const WeightSpec& scalar, int m);
    static WeightSpec diagonal(const std::vector<WeightSpec>& entries);
    static WeightSpec conjugated(const Mat& u, const WeightSpec& inner);
    static WeightSpec translated(const WeightSpec& inner, const Point& shift);
    static WeightSpec sharpness(double d1, double d2, int m, int n = 1);
    // Piecewise-constant samples on a uniform grid over box; values in lexicographic cell order (axis 0 fastest).
    static WeightSpec sampled(const Box& box, int cells_per_axis, const std::vector<Mat>& values);
    static WeightSpec identity(int m, int n = 1);
    // W^t, e.g. the dual weight W^{-p'/p}.
    static WeightSpec powered(const WeightSpec& inner, double t);

    Kind kind() const;
    int m() const;
    int n() const;

    // True when W = w I_m for a scalar w (every m = 1 weight qualifies).
    bool is_scalar() const;
    bool is_real() const;

    // log w(x) for scalar weights; -inf where w vanishes, +inf where it blows up.
    double log_scalar(const Point& x) const;
    double scalar(const Point& x) const;

    // W^alpha(x). Throws SingularityError if an entry is infinite at x.
    Mat evaluate(const Point& x, double alpha) const;

    std::vector<Point> singular_points() const;

    std::string describe() const;

    // Family parameters (meaningful for the matching kind only).
    double a() const;
    double b() const;
    double d1() const;
    double d2() const;
    const std::vector<WeightSpec>& children() const;
    const Mat& unitary() const;
    const Point& shift() const;
    double exponent() const;

    struct Node;

private:
    explicit WeightSpec(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const Node> node_;
};

struct DimensionTruth {
    double d = 0.0;
    bool attained = true;
};

struct MembershipTruth {
    int n = 1;
    std::optional<bool> a_infty;
    std::optional<bool> a_1;
    std::optional<double> power_exponent;
    std::optional<DimensionTruth> d_lower;
    std::optional<DimensionTruth> d_upper;

    // Scalar A_p membership of the power weight (p > 1), or A_1 for p <= 1 (matrix A_p of w I_m).
    std::optional<bool> a_p(double p) const;
};

std::optional<MembershipTruth> membership_truth(const WeightSpec& w);

struct AnalyticAverage {
    double value = 0.0;
    bool exact = false;
};

// Test oracle only: exact average for power weights in n = 1, comparability value otherwise.
std::optional<AnalyticAverage> analytic_average(const WeightSpec& w, const Cube& q);

}  // namespace mwlab
