#include "mwlab/reducing.hpp"

#include <algorithm>
#include <cmath>

#include "detail.hpp"
#include "mwlab/errors.hpp"
#include "mwlab/mvee.hpp"
#include "mwlab/rng.hpp"

namespace mwlab {

std::string to_string(ReducingOperator::Method m) {
    switch (m) {
    case ReducingOperator::Method::ExactP2: return "exact_p2";
    case ReducingOperator::Method::Ellipsoid: return "ellipsoid";
    case ReducingOperator::Method::Scalar: return "scalar";
    }
    return "unknown";
}

std::vector<Vec> sample_directions(int m, int count, bool complex_phases, std::uint64_t seed, std::uint64_t stream) {
    std::vector<Vec> out;
    auto push = [&](Vec z) {
        if (static_cast<int>(out.size()) < count) out.push_back(z / z.norm());
    };
    if (stream == 0) {
        for (int i = 0; i < m; ++i) push(Vec::Unit(m, i));
        for (int i = 0; i < m; ++i)
            for (int j = i + 1; j < m; ++j) {
                push(Vec::Unit(m, i) + Vec::Unit(m, j));
                push(Vec::Unit(m, i) - Vec::Unit(m, j));
                if (complex_phases) {
                    push(Vec::Unit(m, i) + Complex(0, 1) * Vec::Unit(m, j));
                    push(Vec::Unit(m, i) - Complex(0, 1) * Vec::Unit(m, j));
                }
            }
    }
    CounterRng rng(seed, stream);
    while (static_cast<int>(out.size()) < count) {
        Vec z(m);
        for (int i = 0; i < m; ++i) z(i) = Complex(rng.normal(), complex_phases ? rng.normal() : 0.0);
        if (z.norm() > 1e-12) push(z);
    }
    return out;
}

ReducingOperator reduce_exact_p2(const WeightSpec& w, const Cube& q, const QuadratureConfig& cfg) {
    const int m = w.m();
    const QuadratureConfig c = detail::with_singular(cfg, w);
    const std::size_t count = static_cast<std::size_t>(m * m);
    auto field = [&](const Point& x, std::span<double> out) {
        const Mat v = w.evaluate(x, 1.0);
        std::size_t k = 0;
        for (int i = 0; i < m; ++i) {
            out[k++] = v(i, i).real();
            for (int j = i + 1; j < m; ++j) {
                out[k++] = v(i, j).real();
                out[k++] = v(i, j).imag();
            }
        }
    };
    const auto avg = cube_average_many(field, count, q, c, true);
    Mat a = Mat::Zero(m, m);
    std::size_t k = 0;
    for (int i = 0; i < m; ++i) {
        if (avg[k].diverged) throw ConstructionError("reduce_exact_p2: average of W diverges on " + to_string(q));
        a(i, i) = avg[k++].value;
        for (int j = i + 1; j < m; ++j) {
            a(i, j) = Complex(avg[k].value, avg[k + 1].value);
            a(j, i) = std::conj(a(i, j));
            k += 2;
        }
    }
    ReducingOperator r;
    r.cube = q;
    r.p = 2.0;
    r.method = ReducingOperator::Method::ExactP2;
    try {
        r.matrix = SPDMatrix(a).power(0.5);
    } catch (const NumericError& e) {
        throw ConstructionError(std::string("reduce_exact_p2: averaged weight not positive definite: ") + e.what());
    }
    return r;
}

ReducingOperator reduce_general(const WeightSpec& w, const Cube& q, double p, const QuadratureConfig& cfg,
                                const ReduceOptions& opts) {
    if (!(p > 0.0) || !std::isfinite(p)) throw ParameterError("reduce_general: p must be positive");
    const int m = w.m();
    const int fitted = opts.directions > 0 ? opts.directions : std::max(2 * m * m, 64);
    if (fitted < 2 * m * m) throw ParameterError("reduce_general: need at least 2 m^2 directions");
    const bool cplx = !w.is_real();
    std::vector<Vec> dirs;
    if (m == 1) {
        dirs = {Vec::Ones(1)};
    } else {
        dirs = sample_directions(m, fitted, cplx, opts.seed, 0);
        const auto held = sample_directions(m, fitted, cplx, opts.seed, 1);
        dirs.insert(dirs.end(), held.begin(), held.end());
    }
    const QuadratureConfig c = detail::with_singular(cfg, w);
    const double ip = 1.0 / p;
    auto field = [&](const Point& x, std::span<double> out) {
        const Mat v = w.evaluate(x, ip);
        for (std::size_t k = 0; k < dirs.size(); ++k) out[k] = std::pow((v * dirs[k]).norm(), p);
    };
    const auto avg = cube_average_many(field, dirs.size(), q, c);
    std::vector<double> rho(dirs.size());
    for (std::size_t k = 0; k < dirs.size(); ++k) {
        if (avg[k].diverged) throw ConstructionError("reduce_general: rho diverges on " + to_string(q));
        if (!(avg[k].value > 0.0)) throw ConstructionError("reduce_general: degenerate direction (rho = 0)");
        rho[k] = std::pow(avg[k].value, ip);
    }
    ReducingOperator r;
    r.cube = q;
    r.p = p;
    r.method = ReducingOperator::Method::Ellipsoid;
    r.directions = static_cast<int>(dirs.size());
    if (m == 1) {
        Mat a(1, 1);
        a(0, 0) = rho[0];
        r.matrix = SPDMatrix(a);
        return r;
    }
    std::vector<Vec> pts;
    const std::size_t nfit = static_cast<std::size_t>(fitted);
    for (std::size_t k = 0; k < nfit; ++k) pts.push_back(dirs[k] / rho[k]);
    const EllipsoidFit fit = mvee_centered(pts, opts.mvee_tol);
    Mat a0;
    try {
        a0 = psd_power(fit.shape, 0.5);
    } catch (const NumericError& e) {
        throw ConstructionError(std::string("reduce_general: ellipsoid shape degenerate: ") + e.what());
    }
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (std::size_t k = 0; k < dirs.size(); ++k) {
        const double t = rho[k] / (a0 * dirs[k]).norm();
        lo = std::min(lo, t);
        hi = std::max(hi, t);
    }
    try {
        r.matrix = SPDMatrix(Mat(a0 * Complex(std::sqrt(lo * hi), 0.0)));
    } catch (const NumericError& e) {
        throw ConstructionError(std::string("reduce_general: fitted operator not positive definite: ") + e.what());
    }
    r.c_low = std::sqrt(lo / hi);
    r.c_high = std::sqrt(hi / lo);
    return r;
}

ReducingOperator reduce(const WeightSpec& w, const Cube& q, double p, const QuadratureConfig& cfg,
                        const ReduceOptions& opts) {
    if (!(p > 0.0) || !std::isfinite(p)) throw ParameterError("reduce: p must be positive");
    if (w.is_scalar()) {
        const QuadratureConfig c = detail::with_singular(cfg, w);
        const WeightSpec& s = w;
        const AverageResult lm = cube_log_mean_exp([&](const Point& x) { return s.log_scalar(x); }, q, c);
        if (lm.diverged) throw ConstructionError("reduce: average of w diverges on " + to_string(q));
        ReducingOperator r;
        r.cube = q;
        r.p = p;
        r.method = ReducingOperator::Method::Scalar;
        r.matrix = SPDMatrix(Mat(identity(w.m()) * Complex(std::exp(lm.value / p), 0.0)));
        return r;
    }
    if (p == 2.0) return reduce_exact_p2(w, q, cfg);
    return reduce_general(w, q, p, cfg, opts);
}

std::pair<double, double> certify_matrix_equivalence(const ReducingOperator& a, const WeightSpec& w, const Mat& m,
                                                     const QuadratureConfig& cfg) {
    const double p = a.p;
    const QuadratureConfig c = detail::with_singular(cfg, w);
    const AverageResult rhs = cube_average(
        [&](const Point& x) { return detail::norm_pow(w.evaluate(x, 1.0 / p) * m, p); }, a.cube, c);
    if (rhs.diverged) throw ConvergenceError("certify_matrix_equivalence: average diverges");
    const double r = std::pow(rhs.value, 1.0 / p);
    const double l = operator_norm(a.matrix.matrix() * m);
    return {l / r, r / l};
}

double inverse_logavg_identity(const ReducingOperator& a, const WeightSpec& w, const Mat& m,
                               const QuadratureConfig& cfg) {
    if (m.cwiseAbs().maxCoeff() == 0.0) throw ParameterError("inverse_logavg_identity: M must be nonzero");
    const double p = a.p;
    const QuadratureConfig c = detail::with_singular(cfg, w);
    const AverageResult rhs = cube_log_average_of_log(
        [&](const Point& x) { return p * std::log(operator_norm(w.evaluate(x, -1.0 / p) * m)); }, a.cube, c);
    if (rhs.diverged) throw ConvergenceError("inverse_logavg_identity: log average diverges");
    const double lhs = std::pow(operator_norm(a.matrix.power_matrix(-1.0) * m), p);
    return lhs / rhs.value;
}

}  // namespace mwlab
