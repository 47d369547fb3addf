#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#ifndef MWLAB_MAX_SPACE_DIM
#define MWLAB_MAX_SPACE_DIM 4
#endif

namespace mwlab {

inline constexpr int kMaxSpaceDim = MWLAB_MAX_SPACE_DIM;

using Point = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxSpaceDim, 1>;

Point make_point(std::initializer_list<double> xs);
Point zero_point(int n);

// Half-open cube prod [c_i - l/2, c_i + l/2).
struct Cube {
    Point center;
    double edge = 1.0;

    Cube() = default;
    Cube(Point c, double l);

    static Cube from_corner(const Point& lower, double l);
    static Cube interval(double a, double b);

    int dim() const { return static_cast<int>(center.size()); }
    Point lower() const;
    Point upper() const;
    double volume() const;
    bool contains(const Point& x) const;
    bool contains(const Cube& inner, double tol = 1e-12) const;
    bool intersects(const Cube& other) const;
    std::vector<Cube> children() const;

    bool operator==(const Cube& o) const { return edge == o.edge && center == o.center; }
};

std::string to_string(const Cube& q);

struct DyadicIndex {
    int level = 0;
    std::vector<std::int64_t> k;

    Cube cube() const;
    static DyadicIndex containing(const Point& x, int level);
};

struct Box {
    Point lower;
    Point upper;

    int dim() const { return static_cast<int>(lower.size()); }
    bool contains(const Cube& q, double tol = 1e-12) const;
    static Box cube(const Cube& q) { return {q.lower(), q.upper()}; }
};

struct ProbeFamily {
    std::vector<Cube> cubes;
    Box box;
    int j_min = 0;
    int j_max = 0;
    std::vector<Point> singular_points;
    int off_lattice_count = 0;
    std::uint64_t seed = 0;

    std::size_t size() const { return cubes.size(); }
    std::string description() const;
};

Cube dilate(const Cube& q, double lambda);

double separation_factor(const Cube& q, const Cube& r);

// Dyadic-corner variant 1 + |x_Q - x_R| / max(l(Q), l(R)) with x = lower-left corner.
double corner_separation_factor(const Cube& q, const Cube& r);

std::vector<Cube> dyadic_cubes_in(const Box& box, int level);

ProbeFamily probe_family(const Box& box, int j_min, int j_max, const std::vector<Point>& singular_points,
                         int off_lattice_count, std::uint64_t seed = 0x5eed);

}  // namespace mwlab
