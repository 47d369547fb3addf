#include "mwlab/characteristics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "detail.hpp"
#include "mwlab/errors.hpp"
#include "mwlab/parallel.hpp"
#include "mwlab/rng.hpp"

namespace mwlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

CubeValue divergent(const Cube& q) {
    CubeValue v;
    v.cube = q;
    v.value = kInf;
    v.diverged = true;
    return v;
}

void check_p(double p, const char* where) {
    if (!(p > 0.0) || !std::isfinite(p)) throw ParameterError(std::string(where) + ": p must be positive and finite");
}

std::vector<double> logs_at(const WeightSpec& w, const CubeRule& rule) {
    std::vector<double> v(rule.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = w.log_scalar(rule.node(i));
    return v;
}

std::vector<Point> vertices(const Cube& q) {
    const int n = q.dim();
    std::vector<Point> out;
    const Point lo = q.lower();
    for (int mask = 0; mask < (1 << n); ++mask) {
        Point v = lo;
        for (int i = 0; i < n; ++i)
            if ((mask >> i) & 1) v(i) += q.edge;
        out.push_back(v);
    }
    return out;
}

// The ess sup of a weight continuous up to the boundary can sit on a vertex, which no interior node reaches.
std::vector<Point> regular_vertices(const WeightSpec& w, const Cube& q) {
    std::vector<Point> out;
    for (const Point& v : vertices(q)) {
        try {
            const Mat a = w.evaluate(v, 1.0);
            const Mat b = w.evaluate(v, -1.0);
            if (a.allFinite() && b.allFinite()) out.push_back(v);
        } catch (const NumericError&) {
        }
    }
    return out;
}

double log_norm(const Mat& a) {
    const double s = operator_norm(a);
    return s > 0.0 ? std::log(s) : -kInf;
}

CubeValue scalar_ap_cube(const WeightSpec& w, double p, const Cube& q, const QuadratureConfig& c) {
    const ScalarField lw = [&](const Point& x) { return w.log_scalar(x); };
    const AverageResult l1 = cube_log_mean_exp(lw, q, c);
    if (l1.diverged) return divergent(q);
    CubeValue out;
    out.cube = q;
    if (p <= 1.0) {
        CubeRule rule(q, c);
        std::vector<double> neg = logs_at(w, rule);
        double top = -kInf;
        for (double& v : neg) {
            v = -v;
            if (std::isnan(v) || v == kInf) return divergent(q);
            top = std::max(top, v);
        }
        std::vector<double> lin(neg.size());
        for (std::size_t i = 0; i < lin.size(); ++i) lin[i] = std::exp(neg[i] - top);
        const CubeRule::SupEstimate s = rule.sup(lin);
        if (s.diverged) return divergent(q);
        for (const Point& v : regular_vertices(w, q)) top = std::max(top, -w.log_scalar(v));
        out.value = std::exp(l1.value + top);
        out.error = l1.error_estimate * out.value;
        return out;
    }
    const double t = 1.0 / (p - 1.0);
    const AverageResult l2 = cube_log_mean_exp([&](const Point& x) { return -t * w.log_scalar(x); }, q, c);
    if (l2.diverged) return divergent(q);
    out.value = std::exp(l1.value + (p - 1.0) * l2.value);
    out.error = (l1.error_estimate + (p - 1.0) * l2.error_estimate) * out.value;
    return out;
}

CubeValue matrix_ap_cube(const WeightSpec& w, double p, const Cube& q, const QuadratureConfig& c) {
    detail::PairPass r = detail::refine_pairs(CubeRule(q, c), c, [&](const CubeRule& rule) {
        detail::PairPass pp;
        const std::size_t n = rule.size();
        const std::vector<Mat> up = detail::powers_at(w, rule.nodes(), 1.0 / p);
        const std::vector<Mat> down = detail::powers_at(w, rule.nodes(), -1.0 / p);
        std::vector<double> vals(n), g(n);
        if (p <= 1.0) {
            std::vector<double> err(n);
            for (std::size_t j = 0; j < n; ++j) {
                for (std::size_t i = 0; i < n; ++i) vals[i] = detail::norm_pow(up[i] * down[j], p);
                const CubeRule::Estimate e = rule.average(vals);
                if (e.diverged) {
                    pp.diverged = true;
                    return pp;
                }
                g[j] = e.value;
                err[j] = e.error;
            }
            const CubeRule::SupEstimate s = rule.sup(g);
            if (s.diverged) {
                pp.diverged = true;
                return pp;
            }
            pp.value = s.value;
            for (const Point& v : regular_vertices(w, q)) {
                const Mat dv = w.evaluate(v, -1.0 / p);
                for (std::size_t i = 0; i < n; ++i) vals[i] = detail::norm_pow(up[i] * dv, p);
                const CubeRule::Estimate e = rule.average(vals);
                if (!e.diverged) pp.value = std::max(pp.value, e.value);
            }
            pp.error = err[s.argmax];
            pp.target = c.rel_tol * s.value;
            pp.refine_on.resize(n);
            for (std::size_t i = 0; i < n; ++i) pp.refine_on[i] = detail::norm_pow(up[i] * down[s.argmax], p);
            return pp;
        }
        const double pd = p / (p - 1.0);
        double inner_rel = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) vals[j] = detail::norm_pow(up[i] * down[j], pd);
            const CubeRule::Estimate e = rule.average(vals);
            if (e.diverged) {
                pp.diverged = true;
                return pp;
            }
            g[i] = std::pow(e.value, p / pd);
            inner_rel = std::max(inner_rel, e.error / e.value);
        }
        const CubeRule::Estimate o = rule.average(g);
        pp.diverged = o.diverged;
        pp.value = o.value;
        pp.error = o.error + (p / pd) * inner_rel * o.value;
        pp.target = c.rel_tol * o.value;
        pp.refine_on = std::move(g);
        return pp;
    });
    if (r.diverged) return divergent(q);
    return {q, r.value, r.error, false};
}

CubeValue matrix_apinf_cube(const WeightSpec& w, double p, const Cube& q, const QuadratureConfig& c) {
    detail::PairPass r = detail::refine_pairs(CubeRule(q, c), c, [&](const CubeRule& rule) {
        detail::PairPass pp;
        const std::size_t n = rule.size();
        const std::vector<Mat> up = detail::powers_at(w, rule.nodes(), 1.0 / p);
        const std::vector<Mat> down = detail::powers_at(w, rule.nodes(), -1.0 / p);
        std::vector<double> l(n), inner(n);
        double inner_rel = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t i = 0; i < n; ++i) l[i] = p * log_norm(up[i] * down[j]);
            const CubeRule::Estimate e = rule.log_average_exp(l);
            if (e.diverged) {
                pp.diverged = true;
                return pp;
            }
            inner[j] = e.value;
            inner_rel = std::max(inner_rel, e.error);
        }
        const CubeRule::Estimate o = rule.average(inner);
        pp.diverged = o.diverged;
        pp.value = o.value;
        pp.error = o.error + inner_rel;
        pp.target = c.rel_tol;
        pp.refine_on = std::move(inner);
        return pp;
    });
    if (r.diverged) return divergent(q);
    const double v = std::exp(r.value);
    return {q, v, r.error * v, false};
}

CharacteristicReport run_family(CharacteristicReport::Kind kind, double p, const ProbeFamily& family,
                                const std::function<CubeValue(const Cube&)>& per_cube) {
    CharacteristicReport rep;
    rep.kind = kind;
    rep.p = p;
    rep.family = family.description();
    rep.per_cube.resize(family.size());
    parallel_for(family.size(), [&](std::size_t i) { rep.per_cube[i] = per_cube(family.cubes[i]); });
    rep.value = -kInf;
    for (const CubeValue& v : rep.per_cube) {
        if (v.diverged && !rep.witness) rep.witness = v.cube;
        rep.diverged = rep.diverged || v.diverged;
        if (v.value > rep.value) {
            rep.value = v.value;
            rep.argmax_cube = v.cube;
        }
    }
    if (family.size() == 0) {
        rep.value = 1.0;
        rep.warnings.push_back("empty probe family");
    }
    if (rep.diverged) {
        rep.value = kInf;
        rep.argmax_cube = *rep.witness;
    }
    return rep;
}

}  // namespace

std::string to_string(CharacteristicReport::Kind k) {
    switch (k) {
    case CharacteristicReport::Kind::Ap: return "A_p";
    case CharacteristicReport::Kind::ApInfty: return "A_p_infty";
    case CharacteristicReport::Kind::ScalarAInfty: return "scalar_A_infty";
    case CharacteristicReport::Kind::FujiiWilson: return "fujii_wilson";
    case CharacteristicReport::Kind::Sc: return "sc";
    }
    return "unknown";
}

CubeValue ap_cube(const WeightSpec& w, double p, const Cube& q, const QuadratureConfig& cfg) {
    check_p(p, "ap_cube");
    const QuadratureConfig c = detail::with_singular(cfg, w);
    return w.is_scalar() ? scalar_ap_cube(w, p, q, c) : matrix_ap_cube(w, p, q, c);
}

CubeValue scalar_ainfty_cube(const WeightSpec& w, const Cube& q, const QuadratureConfig& cfg) {
    if (!w.is_scalar()) throw ParameterError("scalar_ainfty_cube: weight is not scalar");
    const QuadratureConfig c = detail::with_singular(cfg, w);
    const ScalarField lw = [&](const Point& x) { return w.log_scalar(x); };
    const AverageResult l1 = cube_log_mean_exp(lw, q, c);
    if (l1.diverged) return divergent(q);
    const AverageResult la = cube_log_average_of_log(lw, q, c);
    if (la.diverged) return divergent(q);
    CubeValue out;
    out.cube = q;
    out.value = std::exp(l1.value) / la.value;
    out.error = (l1.error_estimate + la.error_estimate / la.value) * out.value;
    return out;
}

CubeValue apinf_cube(const WeightSpec& w, double p, const Cube& q, const QuadratureConfig& cfg) {
    check_p(p, "apinf_cube");
    if (w.is_scalar()) return scalar_ainfty_cube(w, q, cfg);
    return matrix_apinf_cube(w, p, q, detail::with_singular(cfg, w));
}

CharacteristicReport ap_characteristic(const WeightSpec& w, double p, const ProbeFamily& family,
                                       const QuadratureConfig& cfg) {
    check_p(p, "ap_characteristic");
    CharacteristicReport r = run_family(CharacteristicReport::Kind::Ap, p, family,
                                        [&](const Cube& q) { return ap_cube(w, p, q, cfg); });
    if (p <= 1.0 && !w.is_scalar() && w.kind() == WeightSpec::Kind::Sampled)
        r.warnings.push_back("ess-sup approximated by the maximum over quadrature nodes");
    return r;
}

CharacteristicReport apinf_characteristic(const WeightSpec& w, double p, const ProbeFamily& family,
                                          const QuadratureConfig& cfg) {
    check_p(p, "apinf_characteristic");
    return run_family(CharacteristicReport::Kind::ApInfty, p, family,
                      [&](const Cube& q) { return apinf_cube(w, p, q, cfg); });
}

CharacteristicReport scalar_ainfty_characteristic(const WeightSpec& w, const ProbeFamily& family,
                                                  const QuadratureConfig& cfg) {
    return run_family(CharacteristicReport::Kind::ScalarAInfty, 1.0, family,
                      [&](const Cube& q) { return scalar_ainfty_cube(w, q, cfg); });
}

CharacteristicReport scalar_fujii_wilson(const WeightSpec& w, const ProbeFamily& family, int grid_depth,
                                         const QuadratureConfig& cfg) {
    if (!w.is_scalar()) throw ParameterError("scalar_fujii_wilson: weight is not scalar");
    const QuadratureConfig c = detail::with_singular(cfg, w);
    std::vector<char> stable(family.size(), 1);
    CharacteristicReport r = run_family(CharacteristicReport::Kind::FujiiWilson, 1.0, family, [&](const Cube& q) {
        const FujiiWilsonValue f = fujii_wilson_cube([&](const Point& x) { return w.log_scalar(x); }, q, c, grid_depth);
        const std::size_t i = static_cast<std::size_t>(&q - family.cubes.data());
        stable[i] = f.stable;
        CubeValue v;
        v.cube = q;
        v.value = f.value;
        v.error = std::abs(f.value - f.coarse);
        v.diverged = !std::isfinite(f.value);
        return v;
    });
    for (std::size_t i = 0; i < stable.size(); ++i)
        if (!stable[i]) r.warnings.push_back("grid not stabilized on " + to_string(family.cubes[i]));
    return r;
}

std::vector<Mat> sample_matrices(int m, int count, bool complex_entries, std::uint64_t seed) {
    if (m < 1 || count < 0) throw ParameterError("sample_matrices: invalid size");
    std::vector<Mat> out;
    if (count == 0) return out;
    out.push_back(identity(m));
    const std::vector<Vec> z = sample_directions(m, count, complex_entries, seed, 7);
    const std::vector<Vec> u = sample_directions(m, count, complex_entries, seed, 8);
    CounterRng rng(seed, 9);
    for (int k = 1; k < count; ++k) {
        Mat a(m, m);
        if (k % 2 == 1) {
            a = z[static_cast<std::size_t>(k)] * u[static_cast<std::size_t>(k)].adjoint();
        } else {
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j)
                    a(i, j) = complex_entries ? Complex(rng.normal(), rng.normal()) : Complex(rng.normal(), 0.0);
        }
        out.push_back(a / operator_norm(a));
    }
    return out;
}

ScReport sc_characteristic(const WeightSpec& w, double p, const ProbeFamily& family, int matrix_samples,
                           int vector_samples, const QuadratureConfig& cfg, int grid_depth, std::uint64_t seed) {
    check_p(p, "sc_characteristic");
    const int n = w.n();
    const int depth = grid_depth > 0 ? grid_depth : default_grid_depth(n);
    const QuadratureConfig c = detail::with_singular(cfg, w);
    const std::vector<Mat> mats = sample_matrices(w.m(), std::max(matrix_samples, 1), !w.is_real(), seed);
    const std::vector<Vec> vecs = sample_directions(w.m(), std::max(vector_samples, 1), !w.is_real(), seed, 7);
    const std::size_t nm = mats.size(), nv = vecs.size();

    // per cube: values for each matrix, then each vector
    std::vector<std::vector<double>> table(family.size());
    std::vector<char> stable(family.size(), 1);
    parallel_for(family.size(), [&](std::size_t ci) {
        const Cube& q = family.cubes[ci];
        const detail::CellGrid grid = detail::make_cell_grid(q, c, depth);
        std::vector<double>& row = table[ci];
        row.assign(nm + nv, 0.0);
        if (w.is_scalar()) {
            std::vector<double> l(grid.nodes.size());
            for (std::size_t i = 0; i < l.size(); ++i) l[i] = w.log_scalar(grid.nodes[i]);
            const FujiiWilsonValue f = detail::fujii_wilson_grid(detail::cell_log_averages(grid, l), n, depth);
            stable[ci] = f.stable;
            std::fill(row.begin(), row.end(), f.value);
            return;
        }
        const std::vector<Mat> up = detail::powers_at(w, grid.nodes, 1.0 / p);
        std::vector<double> l(grid.nodes.size());
        for (std::size_t k = 0; k < nm + nv; ++k) {
            for (std::size_t i = 0; i < l.size(); ++i) {
                const double s = k < nm ? operator_norm(up[i] * mats[k]) : vector_norm(up[i] * vecs[k - nm]);
                l[i] = s > 0.0 ? p * std::log(s) : -kInf;
            }
            const FujiiWilsonValue f = detail::fujii_wilson_grid(detail::cell_log_averages(grid, l), n, depth);
            stable[ci] = stable[ci] && f.stable;
            row[k] = f.value;
        }
    });

    ScReport out;
    CharacteristicReport& r = out.matrix;
    r.kind = CharacteristicReport::Kind::Sc;
    r.p = p;
    r.family = family.description();
    r.value = 1.0;
    out.per_matrix.assign(nm, 1.0);
    out.per_vector.assign(nv, 1.0);
    for (std::size_t ci = 0; ci < family.size(); ++ci) {
        const std::vector<double>& row = table[ci];
        CubeValue v;
        v.cube = family.cubes[ci];
        // rank-one matrices z e^* give w_M = w_z, so the vector sample also belongs to the matrix sample
        for (double x : row) v.value = std::max(v.value, x);
        v.diverged = !std::isfinite(v.value);
        r.per_cube.push_back(v);
        if (ci == 0 || v.value > r.value) {
            r.value = v.value;
            r.argmax_cube = v.cube;
        }
        if (v.diverged) {
            r.diverged = true;
            if (!r.witness) r.witness = v.cube;
        }
        for (std::size_t k = 0; k < nm; ++k) out.per_matrix[k] = std::max(out.per_matrix[k], row[k]);
        for (std::size_t k = 0; k < nv; ++k) out.per_vector[k] = std::max(out.per_vector[k], row[nm + k]);
        if (!stable[ci]) r.warnings.push_back("grid not stabilized on " + to_string(v.cube));
    }
    out.vector_value = *std::max_element(out.per_vector.begin(), out.per_vector.end());
    if (n >= 2) r.warnings.push_back("maximal function over cubes; ball factor " + std::to_string(ball_cube_factor(n)));
    return out;
}

}  // namespace mwlab
