#include "mwlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mwlab/errors.hpp"
#include "mwlab/rng.hpp"

namespace mwlab {

Point make_point(std::initializer_list<double> xs) {
    Point p(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) p(i++) = x;
    return p;
}

Point zero_point(int n) { return Point::Zero(n); }

Cube::Cube(Point c, double l) : center(std::move(c)), edge(l) {
    if (!(edge > 0.0) || !std::isfinite(edge)) throw ParameterError("Cube: edge must be positive and finite");
    if (center.size() < 1 || center.size() > kMaxSpaceDim) throw DimensionError("Cube: unsupported space dimension");
}

Cube Cube::from_corner(const Point& lower, double l) {
    return Cube((lower.array() + 0.5 * l).matrix(), l);
}

Cube Cube::interval(double a, double b) { return Cube(make_point({0.5 * (a + b)}), b - a); }

Point Cube::lower() const { return (center.array() - 0.5 * edge).matrix(); }
Point Cube::upper() const { return (center.array() + 0.5 * edge).matrix(); }

double Cube::volume() const { return std::pow(edge, dim()); }

bool Cube::contains(const Point& x) const {
    const Point lo = lower(), hi = upper();
    for (int i = 0; i < dim(); ++i)
        if (x(i) < lo(i) || x(i) >= hi(i)) return false;
    return true;
}

bool Cube::contains(const Cube& inner, double tol) const {
    const double slack = tol * edge;
    const Point lo = lower(), hi = upper(), ilo = inner.lower(), ihi = inner.upper();
    for (int i = 0; i < dim(); ++i)
        if (ilo(i) < lo(i) - slack || ihi(i) > hi(i) + slack) return false;
    return true;
}

bool Cube::intersects(const Cube& other) const {
    const Point lo = lower(), hi = upper(), olo = other.lower(), ohi = other.upper();
    for (int i = 0; i < dim(); ++i)
        if (ohi(i) <= lo(i) || olo(i) >= hi(i)) return false;
    return true;
}

std::vector<Cube> Cube::children() const {
    const int n = dim();
    std::vector<Cube> out;
    out.reserve(std::size_t{1} << n);
    const double h = 0.5 * edge;
    for (int mask = 0; mask < (1 << n); ++mask) {
        Point c = center;
        for (int i = 0; i < n; ++i) c(i) += ((mask >> i) & 1) ? 0.5 * h : -0.5 * h;
        out.emplace_back(c, h);
    }
    return out;
}

std::string to_string(const Cube& q) {
    std::ostringstream os;
    os.precision(17);
    os << "[";
    const Point lo = q.lower();
    for (int i = 0; i < q.dim(); ++i) {
        if (i) os << " x ";
        os << "[" << lo(i) << ", " << lo(i) + q.edge << ")";
    }
    os << "]";
    return os.str();
}

Cube DyadicIndex::cube() const {
    const double h = std::ldexp(1.0, -level);
    Point lo(static_cast<Eigen::Index>(k.size()));
    for (std::size_t i = 0; i < k.size(); ++i) lo(static_cast<Eigen::Index>(i)) = h * static_cast<double>(k[i]);
    return Cube::from_corner(lo, h);
}

DyadicIndex DyadicIndex::containing(const Point& x, int level) {
    DyadicIndex d;
    d.level = level;
    const double s = std::ldexp(1.0, level);
    for (int i = 0; i < x.size(); ++i) d.k.push_back(static_cast<std::int64_t>(std::floor(x(i) * s)));
    return d;
}

bool Box::contains(const Cube& q, double tol) const {
    const Point lo = q.lower(), hi = q.upper();
    for (int i = 0; i < dim(); ++i) {
        const double slack = tol * std::max(1.0, upper(i) - lower(i));
        if (lo(i) < lower(i) - slack || hi(i) > upper(i) + slack) return false;
    }
    return true;
}

std::string ProbeFamily::description() const {
    std::ostringstream os;
    os << "dyadic levels " << j_min << ".." << j_max << " in box [";
    for (int i = 0; i < box.dim(); ++i) os << (i ? ", " : "") << box.lower(i) << ":" << box.upper(i);
    os << "], " << singular_points.size() << " singular anchors, " << off_lattice_count
       << " off-lattice cubes (seed " << seed << "), " << cubes.size() << " cubes";
    return os.str();
}

Cube dilate(const Cube& q, double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ParameterError("dilate: lambda must be positive");
    return Cube(q.center, q.edge * lambda);
}

double separation_factor(const Cube& q, const Cube& r) {
    return 1.0 + (q.center - r.center).norm() / std::max(q.edge, r.edge);
}

double corner_separation_factor(const Cube& q, const Cube& r) {
    return 1.0 + (q.lower() - r.lower()).norm() / std::max(q.edge, r.edge);
}

std::vector<Cube> dyadic_cubes_in(const Box& box, int level) {
    const int n = box.dim();
    const double h = std::ldexp(1.0, -level);
    std::vector<std::int64_t> lo(n), hi(n);
    double count = 1.0;
    for (int i = 0; i < n; ++i) {
        lo[i] = static_cast<std::int64_t>(std::ceil(box.lower(i) / h - 1e-9));
        hi[i] = static_cast<std::int64_t>(std::floor(box.upper(i) / h + 1e-9));
        if (hi[i] <= lo[i]) return {};
        count *= static_cast<double>(hi[i] - lo[i]);
    }
    if (count > 4e6) throw ConfigurationError("probe family: level " + std::to_string(level) + " yields too many cubes");
    std::vector<Cube> out;
    out.reserve(static_cast<std::size_t>(count));
    std::vector<std::int64_t> k(lo);
    while (true) {
        DyadicIndex d{level, k};
        out.push_back(d.cube());
        int i = 0;
        for (; i < n; ++i) {
            if (++k[i] < hi[i]) break;
            k[i] = lo[i];
        }
        if (i == n) break;
    }
    return out;
}

namespace {

void push_unique(std::vector<Cube>& cubes, const Cube& q) {
    for (const Cube& c : cubes)
        if (std::abs(c.edge - q.edge) <= 1e-12 * q.edge && (c.center - q.center).norm() <= 1e-12 * q.edge) return;
    cubes.push_back(q);
}

}  // namespace

ProbeFamily probe_family(const Box& box, int j_min, int j_max, const std::vector<Point>& singular_points,
                         int off_lattice_count, std::uint64_t seed) {
    if (j_min > j_max) throw ConfigurationError("probe_family: j_min > j_max");
    if (box.lower.size() != box.upper.size() || box.lower.size() < 1) throw DimensionError("probe_family: bad box");
    const int n = box.dim();
    ProbeFamily fam;
    fam.box = box;
    fam.j_min = j_min;
    fam.j_max = j_max;
    fam.singular_points = singular_points;
    fam.off_lattice_count = off_lattice_count;
    fam.seed = seed;

    for (int j = j_min; j <= j_max; ++j) {
        auto level = dyadic_cubes_in(box, j);
        fam.cubes.insert(fam.cubes.end(), level.begin(), level.end());
    }
    std::vector<Cube> extra;
    for (const Point& s : singular_points) {
        if (s.size() != n) throw DimensionError("probe_family: singular point dimension mismatch");
        for (int j = j_min; j <= j_max; ++j) {
            const double h = std::ldexp(1.0, -j);
            Cube centered(s, h);
            if (box.contains(centered)) extra.push_back(centered);
            for (int mask = 0; mask < (1 << n); ++mask) {
                Point lo = s;
                for (int i = 0; i < n; ++i)
                    if (!((mask >> i) & 1)) lo(i) -= h;
                Cube corner = Cube::from_corner(lo, h);
                if (box.contains(corner)) extra.push_back(corner);
            }
        }
    }
    for (const Cube& q : extra) push_unique(fam.cubes, q);

    CounterRng rng(seed, 0x0ff1a77ceULL);
    for (int t = 0; t < off_lattice_count; ++t) {
        const int j = j_min + static_cast<int>(rng.below(static_cast<std::uint64_t>(j_max - j_min + 1)));
        double h = std::ldexp(1.0, -j);
        for (int i = 0; i < n; ++i) h = std::min(h, box.upper(i) - box.lower(i));
        Point lo(n);
        for (int i = 0; i < n; ++i) lo(i) = rng.uniform(box.lower(i), box.upper(i) - h);
        fam.cubes.push_back(Cube::from_corner(lo, h));
    }
    if (fam.cubes.empty()) throw ConfigurationError("probe_family: empty family");
    return fam;
}

}  // namespace mwlab
