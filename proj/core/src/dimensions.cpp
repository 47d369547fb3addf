#include "mwlab/dimensions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "detail.hpp"
#include "mwlab/characteristics.hpp"
#include "mwlab/errors.hpp"
#include "mwlab/parallel.hpp"
#include "mwlab/reducing.hpp"
#include "mwlab/regression.hpp"
#include "mwlab/rng.hpp"

namespace mwlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
using Kind = DimensionEstimate::Kind;
using Variant = SharpEstimateReport::Variant;

void check_p(double p, const char* where) {
    if (!(p > 0.0) || !std::isfinite(p)) throw ParameterError(std::string(where) + ": p must be positive and finite");
}

std::vector<double> cube_key(const Cube& q) {
    std::vector<double> k(q.center.data(), q.center.data() + q.center.size());
    k.push_back(q.edge);
    return k;
}

double log_norm_pow(const Mat& a, double p) {
    const double s = operator_norm(a);
    return s > 0.0 ? p * std::log(s) : -kInf;
}

// log avg_Q w and avg_Q log w for scalar weights.
double scalar_lme(const WeightSpec& w, const Cube& q, const QuadratureConfig& c) {
    const AverageResult r = cube_log_mean_exp([&](const Point& x) { return w.log_scalar(x); }, q, c);
    return r.diverged ? kInf : r.value;
}

double scalar_avg_log(const WeightSpec& w, const Cube& q, const QuadratureConfig& c) {
    detail::PairPass r = detail::refine_pairs(CubeRule(q, c), c, [&](const CubeRule& ru) {
        detail::PairPass pp;
        std::vector<double> v(ru.size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = w.log_scalar(ru.node(i));
        const CubeRule::Estimate e = ru.average(v);
        pp.value = e.value;
        pp.error = e.error;
        pp.diverged = e.diverged;
        pp.target = c.rel_tol * std::max(1.0, std::abs(e.value));
        pp.refine_on = std::move(v);
        return pp;
    });
    if (r.diverged) return r.value < 0.0 ? -kInf : kInf;
    return r.value;
}

double matrix_log_pair(const WeightSpec& w, double p, const Cube& inner, const Cube& outer,
                       const QuadratureConfig& c) {
    const CubeRule in(inner, c);
    const std::vector<Mat> up = detail::powers_at(w, in.nodes(), 1.0 / p);
    detail::PairPass r = detail::refine_pairs(CubeRule(outer, c), c, [&](const CubeRule& rule) {
        detail::PairPass pp;
        const std::vector<Mat> down = detail::powers_at(w, rule.nodes(), -1.0 / p);
        std::vector<double> l(in.size()), lv(rule.size());
        double inner_rel = 0.0;
        for (std::size_t j = 0; j < rule.size(); ++j) {
            for (std::size_t i = 0; i < in.size(); ++i) l[i] = log_norm_pow(up[i] * down[j], p);
            const CubeRule::Estimate e = in.log_average_exp(l);
            if (e.diverged) {
                pp.diverged = true;
                return pp;
            }
            lv[j] = e.value;
            inner_rel = std::max(inner_rel, e.error);
        }
        const CubeRule::Estimate o = rule.average(lv);
        pp.diverged = o.diverged;
        pp.value = o.value;
        pp.error = o.error + inner_rel;
        pp.target = c.rel_tol * std::max(1.0, std::abs(o.value));
        pp.refine_on = std::move(lv);
        return pp;
    });
    return r.diverged ? kInf : r.value;
}

Point offset(const Point& s, double t) {
    Point x = s;
    x(0) += t;
    return x;
}

Cube cube_at(const Point& lower, double l) { return Cube::from_corner(lower, l); }

// (inner, outer) pairs realizing scale lambda at base size l around anchor s.
std::vector<std::pair<Cube, Cube>> configurations(Kind kind, const Point& s, double l, double lambda) {
    std::vector<std::pair<Cube, Cube>> out;
    if (kind == Kind::Lower) {
        const double L = lambda * l;
        out.emplace_back(cube_at(s, l), cube_at(s, L));
        out.emplace_back(Cube(s, l), Cube(s, L));
        out.emplace_back(cube_at(offset(s, L - l), l), cube_at(s, L));
        const Point far = offset(s, 4.0 * L);
        out.emplace_back(cube_at(far, l), cube_at(far, L));
    } else {
        for (const Cube& q : {cube_at(s, l), Cube(s, l), cube_at(offset(s, l), l), cube_at(offset(s, 4.0 * l), l)})
            out.emplace_back(dilate(q, lambda), q);
    }
    return out;
}

std::vector<Point> anchors_for(const WeightSpec& w, const DimensionOptions& o) {
    std::vector<Point> a = o.anchors;
    if (a.empty()) {
        a = w.singular_points();
        const Point z = zero_point(w.n());
        bool seen = false;
        for (const Point& s : a) seen = seen || (s - z).norm() == 0.0;
        if (!seen) a.push_back(z);
    }
    for (const Point& s : a)
        if (s.size() != w.n()) throw DimensionError("estimate_dimension: anchor dimension mismatch");
    return a;
}

struct Job {
    Cube inner;
    Cube outer;
    std::size_t slot;
};

// Evaluates the max of value(inner, outer) per slot. Scalar weights share per-cube terms through a cache.
template <class Scalar, class Matrix>
std::vector<double> max_per_slot(const std::vector<Job>& jobs, std::size_t slots, bool scalar, Scalar&& scalar_terms,
                                 Matrix&& matrix_value) {
    std::vector<double> best(slots, -kInf);
    if (scalar) {
        std::map<std::vector<double>, std::size_t> in_idx, out_idx;
        std::vector<Cube> ins, outs;
        for (const Job& j : jobs) {
            if (in_idx.emplace(cube_key(j.inner), ins.size()).second) ins.push_back(j.inner);
            if (out_idx.emplace(cube_key(j.outer), outs.size()).second) outs.push_back(j.outer);
        }
        std::vector<double> tin(ins.size()), tout(outs.size());
        parallel_for(ins.size() + outs.size(), [&](std::size_t i) {
            if (i < ins.size())
                tin[i] = scalar_terms(ins[i], true);
            else
                tout[i - ins.size()] = scalar_terms(outs[i - ins.size()], false);
        });
        for (const Job& j : jobs) {
            const double v = tin[in_idx[cube_key(j.inner)]] - tout[out_idx[cube_key(j.outer)]];
            best[j.slot] = std::max(best[j.slot], std::isnan(v) ? kInf : v);
        }
    } else {
        std::vector<double> v(jobs.size());
        parallel_for(jobs.size(), [&](std::size_t i) { v[i] = matrix_value(jobs[i].inner, jobs[i].outer); });
        for (std::size_t i = 0; i < jobs.size(); ++i) best[jobs[i].slot] = std::max(best[jobs[i].slot], v[i]);
    }
    return best;
}

struct Ladder {
    std::vector<double> log_lambda;
    std::vector<double> extreme;
    std::vector<double> scan;  // at fit_min and fit_max
};

template <class Scalar, class Matrix>
Ladder run_ladder(Kind kind, const std::vector<Point>& anchors, const DimensionOptions& o, bool scalar,
                  Scalar&& scalar_terms, Matrix&& matrix_value) {
    if (o.fit_min < 1 || o.fit_max <= o.fit_min || o.fit_max > 30)
        throw ParameterError("estimate_dimension: need 1 <= fit_min < fit_max <= 30");
    if (o.extreme_exp < 0 || o.extreme_exp > 400 || o.scan_step < 1)
        throw ParameterError("estimate_dimension: invalid scale options");
    Ladder lad;
    std::vector<Job> jobs;
    for (int k = 1; k <= o.fit_max; ++k) {
        const double lambda = std::ldexp(1.0, k);
        lad.log_lambda.push_back(std::log(lambda));
        for (int e : {-o.extreme_exp, o.extreme_exp})
            for (const Point& s : anchors)
                for (const auto& [a, b] : configurations(kind, s, std::ldexp(1.0, e), lambda))
                    jobs.push_back({a, b, static_cast<std::size_t>(k - 1)});
    }
    const std::size_t rows = static_cast<std::size_t>(o.fit_max);
    for (int t = 0; t < 2; ++t) {
        const double lambda = std::ldexp(1.0, t == 0 ? o.fit_min : o.fit_max);
        for (int e = -o.extreme_exp; e <= o.extreme_exp; e += o.scan_step)
            for (const Point& s : anchors)
                for (const auto& [a, b] : configurations(kind, s, std::ldexp(1.0, e), lambda))
                    jobs.push_back({a, b, rows + static_cast<std::size_t>(t)});
    }
    std::vector<double> best = max_per_slot(jobs, rows + 2, scalar, scalar_terms, matrix_value);
    lad.extreme.assign(best.begin(), best.begin() + static_cast<std::ptrdiff_t>(rows));
    lad.scan.assign(best.begin() + static_cast<std::ptrdiff_t>(rows), best.end());
    return lad;
}

DimensionEstimate finish(Kind kind, const Ladder& lad, const DimensionOptions& o, double shift) {
    DimensionEstimate d;
    d.kind = kind;
    d.log_lambda = lad.log_lambda;
    d.log_value = lad.extreme;
    d.log_value_all = lad.scan;
    d.lambda_min = std::ldexp(1.0, o.fit_min);
    d.lambda_max = std::ldexp(1.0, o.fit_max);
    for (double v : lad.extreme)
        if (!std::isfinite(v)) {
            d.d_hat = d.slope = kInf;
            d.accepted = false;
            d.attained = false;
            d.warnings.push_back("non-finite pair value; dimension not finite on this ladder");
            return d;
        }
    const std::size_t first = static_cast<std::size_t>(o.fit_min - 1);
    const std::span<const double> x(lad.log_lambda.data() + first, lad.log_lambda.size() - first);
    const std::span<const double> y(lad.extreme.data() + first, lad.extreme.size() - first);
    const LineFit f = fit_line(x, y);
    d.slope = f.slope + shift;
    d.intercept = f.intercept;
    d.residual_max = f.residual_max;
    d.accepted = f.residual_max <= 0.2;
    d.d_hat = std::max(d.slope, 0.0);
    if (!d.accepted) d.warnings.push_back("regression residual above 0.2");
    for (std::size_t i = 1; i < lad.extreme.size(); ++i)
        if (lad.extreme[i] < lad.extreme[i - 1] - 0.05) {
            d.warnings.push_back("non-monotone scale table");
            break;
        }
    const double fit_slope = d.d_hat - shift;
    const double g0 = lad.scan[0] - fit_slope * std::log(d.lambda_min);
    const double g1 = lad.scan[1] - fit_slope * std::log(d.lambda_max);
    d.growth = std::isfinite(g0) && std::isfinite(g1) ? g1 - g0 : kInf;
    d.attained = d.growth <= o.attain_threshold;
    return d;
}

}  // namespace

std::string to_string(DimensionEstimate::Kind k) { return k == Kind::Lower ? "lower" : "upper"; }

std::string to_string(SharpEstimateReport::Variant v) {
    switch (v) {
    case Variant::Centers: return "centers";
    case Variant::DyadicCorners: return "dyadic-corners";
    case Variant::DyadicLevel: return "dyadic-level";
    case Variant::Intersecting: return "intersecting";
    }
    return "?";
}

double log_pair_value(const WeightSpec& w, double p, const Cube& inner, const Cube& outer,
                      const QuadratureConfig& cfg) {
    check_p(p, "log_pair_value");
    if (inner.dim() != w.n() || outer.dim() != w.n()) throw DimensionError("log_pair_value: cube dimension mismatch");
    const QuadratureConfig c = detail::with_singular(cfg, w);
    if (w.is_scalar()) {
        const WeightSpec& s = w.kind() == WeightSpec::Kind::ScalarTimesIdentity ? w.children().front() : w;
        if (s.m() == 1) {
            const double v = scalar_lme(s, inner, c) - scalar_avg_log(s, outer, c);
            return std::isnan(v) ? kInf : v;
        }
    }
    return matrix_log_pair(w, p, inner, outer, c);
}

EquivalentQuantities equivalent_quantities(const WeightSpec& w, double p, const Cube& q, const Cube& r,
                                           const QuadratureConfig& cfg) {
    check_p(p, "equivalent_quantities");
    const QuadratureConfig c = detail::with_singular(cfg, w);
    EquivalentQuantities e;
    const ReducingOperator aq = reduce(w, q, p, c);
    const ReducingOperator ar = reduce(w, r, p, c);
    const double s = operator_norm(aq.matrix.matrix() * ar.matrix.power_matrix(-1.0));
    e.operator_form = std::pow(s, p);
    e.logavg_of_avg = std::exp(log_pair_value(w, p, q, r, c));
    if (w.m() == 1 || (w.is_scalar() && w.kind() == WeightSpec::Kind::ScalarTimesIdentity)) {
        e.avg_of_logavg = e.logavg_of_avg;
    } else {
        const CubeRule ry(r, c);
        const std::vector<Mat> down = detail::powers_at(w, ry.nodes(), -1.0 / p);
        detail::PairPass pr = detail::refine_pairs(CubeRule(q, c), c, [&](const CubeRule& rx) {
            detail::PairPass pp;
            std::vector<double> l(ry.size()), v(rx.size());
            for (std::size_t i = 0; i < rx.size(); ++i) {
                const Mat up = w.evaluate(rx.node(i), 1.0 / p);
                for (std::size_t j = 0; j < ry.size(); ++j) l[j] = log_norm_pow(up * down[j], p);
                const CubeRule::Estimate a = ry.average(l);
                v[i] = std::exp(a.value);
            }
            const CubeRule::Estimate o = rx.average(v);
            pp.value = o.value;
            pp.error = o.error;
            pp.diverged = o.diverged;
            pp.target = c.rel_tol * std::abs(o.value);
            pp.refine_on = std::move(v);
            return pp;
        });
        e.avg_of_logavg = pr.diverged ? kInf : pr.value;
    }
    const double v[3] = {e.operator_form, e.avg_of_logavg, e.logavg_of_avg};
    e.band = *std::max_element(v, v + 3) / *std::min_element(v, v + 3);
    return e;
}

DimensionEstimate estimate_dimension(const WeightSpec& w, double p, DimensionEstimate::Kind kind,
                                     const QuadratureConfig& cfg, const DimensionOptions& opts) {
    check_p(p, "estimate_dimension");
    const QuadratureConfig c = detail::with_singular(cfg, w);
    const std::vector<Point> anchors = anchors_for(w, opts);
    const WeightSpec* s = nullptr;
    if (w.m() == 1)
        s = &w;
    else if (w.kind() == WeightSpec::Kind::ScalarTimesIdentity)
        s = &w.children().front();
    const Ladder lad = run_ladder(
        kind, anchors, opts, s != nullptr,
        [&](const Cube& q, bool inner) { return inner ? scalar_lme(*s, q, c) : scalar_avg_log(*s, q, c); },
        [&](const Cube& a, const Cube& b) { return matrix_log_pair(w, p, a, b, c); });
    return finish(kind, lad, opts, 0.0);
}

DimensionEstimate scalar_dimension_via_doubling(const WeightSpec& w, DimensionEstimate::Kind kind,
                                                const QuadratureConfig& cfg, const DimensionOptions& opts) {
    if (w.m() != 1) throw ParameterError("scalar_dimension_via_doubling: scalar weight required");
    const QuadratureConfig c = detail::with_singular(cfg, w);
    const std::vector<Point> anchors = anchors_for(w, opts);
    const int n = w.n();
    // log w(inner) - log w(outer); for the lower kind the small cube is the numerator.
    const Ladder lad = run_ladder(
        kind, anchors, opts, true,
        [&](const Cube& q, bool inner) {
            (void)inner;
            return std::log(q.volume()) + scalar_lme(w, q, c);
        },
        [](const Cube&, const Cube&) { return kInf; });
    return finish(kind, lad, opts, kind == Kind::Lower ? n : -n);
}

SharpEstimateReport verify_sharp_estimate(const WeightSpec& w, double p, double d1, double d2, int random_pairs,
                                          const QuadratureConfig& cfg, SharpEstimateReport::Variant variant,
                                          int levels, std::uint64_t seed) {
    check_p(p, "verify_sharp_estimate");
    if (!(d1 >= 0.0) || !(d2 >= 0.0)) throw ParameterError("verify_sharp_estimate: dimensions must be nonnegative");
    if (random_pairs < 0 || levels < 1 || levels > 40) throw ParameterError("verify_sharp_estimate: invalid sample");
    const QuadratureConfig c = detail::with_singular(cfg, w);
    const int n = w.n();
    std::vector<Point> anchors = anchors_for(w, {});
    const bool dyadic = variant == Variant::DyadicCorners || variant == Variant::DyadicLevel;
    const Point e1 = offset(zero_point(n), 1.0);

    std::vector<std::pair<Cube, Cube>> pairs;
    auto dyadic_at = [&](const Point& x, int level) { return DyadicIndex::containing(x, level).cube(); };
    for (const Point& s : anchors) {
        for (int j = 0; j <= levels; ++j) {
            const double l = std::ldexp(1.0, -j);
            if (dyadic) {
                const Cube q = dyadic_at(s, j);
                if (variant == Variant::DyadicCorners) {
                    pairs.emplace_back(q, dyadic_at(s, 0));
                    pairs.emplace_back(dyadic_at(s, 0), q);
                }
                pairs.emplace_back(q, Cube(q.center + q.edge * e1, q.edge));
                pairs.emplace_back(q, Cube(q.center + 4.0 * q.edge * e1, q.edge));
                for (const Point& t : anchors)
                    if ((t - s).norm() > 0.0) pairs.emplace_back(q, dyadic_at(t, j));
            } else {
                pairs.emplace_back(cube_at(s, l), cube_at(s, 1.0));
                pairs.emplace_back(cube_at(s, 1.0), cube_at(s, l));
                pairs.emplace_back(Cube(s, l), Cube(s, 1.0));
                pairs.emplace_back(Cube(s, 1.0), Cube(s, l));
                if (variant == Variant::Centers) {
                    pairs.emplace_back(Cube(s, l), Cube(offset(s, 2.0 * l), l));
                    pairs.emplace_back(Cube(s, l), Cube(offset(s, 1.0 + l), 1.0));
                    for (const Point& t : anchors)
                        if ((t - s).norm() > 0.0) pairs.emplace_back(Cube(s, l), Cube(t, l));
                } else {
                    pairs.emplace_back(Cube(s, l), Cube(offset(s, 0.5 * l), l));
                    pairs.emplace_back(Cube(s, 1.0), Cube(offset(s, 0.5), l));
                }
            }
        }
    }
    CounterRng rng(seed, 3);
    Point lo = anchors.front(), hi = anchors.front();
    for (const Point& s : anchors) {
        lo = lo.cwiseMin(s);
        hi = hi.cwiseMax(s);
    }
    lo.array() -= 1.0;
    hi.array() += 1.0;
    auto random_point = [&]() {
        Point x(n);
        for (int i = 0; i < n; ++i) x(i) = rng.uniform(lo(i), hi(i));
        return x;
    };
    for (int k = 0; k < random_pairs; ++k) {
        const int jq = static_cast<int>(rng.below(static_cast<std::uint64_t>(levels) + 1));
        const int jr = variant == Variant::DyadicLevel ? jq : static_cast<int>(rng.below(static_cast<std::uint64_t>(levels) + 1));
        const Point x = random_point();
        if (dyadic) {
            pairs.emplace_back(dyadic_at(x, jq), dyadic_at(random_point(), jr));
        } else if (variant == Variant::Intersecting) {
            const Cube q(x, std::ldexp(1.0, -jq));
            Point y = x;
            for (int i = 0; i < n; ++i) y(i) += rng.uniform(-0.49, 0.49) * (q.edge + std::ldexp(1.0, -jr));
            pairs.emplace_back(q, Cube(y, std::ldexp(1.0, -jr)));
        } else {
            pairs.emplace_back(Cube(x, std::ldexp(1.0, -jq)), Cube(random_point(), std::ldexp(1.0, -jr)));
        }
    }

    std::map<std::vector<double>, std::size_t> index;
    std::vector<Cube> cubes;
    for (const auto& [q, r] : pairs)
        for (const Cube* k : {&q, &r})
            if (index.emplace(cube_key(*k), cubes.size()).second) cubes.push_back(*k);
    std::vector<ReducingOperator> ops(cubes.size());
    parallel_for(cubes.size(), [&](std::size_t i) { ops[i] = reduce(w, cubes[i], p, c); });

    SharpEstimateReport rep;
    rep.variant = variant;
    rep.d1 = d1;
    rep.d2 = d2;
    for (const auto& [q, r] : pairs) {
        if (variant == Variant::Intersecting && !q.intersects(r)) continue;
        const ReducingOperator& aq = ops[index[cube_key(q)]];
        const ReducingOperator& ar = ops[index[cube_key(r)]];
        SharpPair sp{q, r, 0.0, 0.0, 0.0};
        sp.lhs = std::pow(operator_norm(aq.matrix.matrix() * ar.matrix.power_matrix(-1.0)), p);
        const double scale = std::max(std::pow(r.edge / q.edge, d1), std::pow(q.edge / r.edge, d2));
        double sep = 1.0;
        if (variant == Variant::Centers)
            sep = separation_factor(q, r);
        else if (variant == Variant::DyadicCorners)
            sep = corner_separation_factor(q, r);
        else if (variant == Variant::DyadicLevel)
            sep = 1.0 + (q.lower() - r.lower()).norm() / q.edge;
        sp.rhs = scale * std::pow(sep, d1 + d2);
        sp.ratio = sp.lhs / sp.rhs;
        if (sp.ratio > rep.max_ratio || rep.pairs.empty()) {
            rep.max_ratio = sp.ratio;
            rep.argmax = rep.pairs.size();
        }
        rep.pairs.push_back(std::move(sp));
    }
    return rep;
}

SharpnessFit sharpness_experiment(double d1, double d2, int n, int m, double p, const QuadratureConfig& cfg,
                                  int levels) {
    check_p(p, "sharpness_experiment");
    if (levels < 3 || levels > 40) throw ParameterError("sharpness_experiment: levels must be in [3, 40]");
    const WeightSpec w = WeightSpec::sharpness(d1, d2, m, n);
    const QuadratureConfig c = detail::with_singular(cfg, w);
    const Point o = zero_point(n);
    const Point x0 = offset(o, 1.0);
    const double big = 0.5;

    std::vector<std::pair<Cube, Cube>> pairs;
    std::vector<double> xa, xb, xc;
    for (int j = 1; j <= levels; ++j) {
        const double l = big * std::ldexp(1.0, -j);
        pairs.emplace_back(Cube(o, l), Cube(o, big));
        xa.push_back(std::log(big / l));
    }
    for (int j = 1; j <= levels; ++j) {
        const double l = big * std::ldexp(1.0, -j);
        pairs.emplace_back(Cube(x0, big), Cube(x0, l));
        xb.push_back(std::log(big / l));
    }
    for (int j = 1; j <= levels; ++j) {
        const double l = big * std::ldexp(1.0, -j);
        const Cube q(o, l), r(x0, l);
        pairs.emplace_back(q, r);
        xc.push_back(std::log(separation_factor(q, r)));
    }
    std::vector<double> y(pairs.size());
    parallel_for(pairs.size(), [&](std::size_t i) {
        const ReducingOperator aq = reduce(w, pairs[i].first, p, c);
        const ReducingOperator ar = reduce(w, pairs[i].second, p, c);
        y[i] = p * std::log(operator_norm(aq.matrix.matrix() * ar.matrix.power_matrix(-1.0)));
    });
    const std::size_t k = static_cast<std::size_t>(levels);
    const std::span<const double> ys(y);
    SharpnessFit f;
    f.a_fit = fit_line(xa, ys.subspan(0, k)).slope;
    f.b_fit = fit_line(xb, ys.subspan(k, k)).slope;
    f.c_fit = fit_line(xc, ys.subspan(2 * k, k)).slope;
    f.pass = f.a_fit >= d1 - 0.1 && f.b_fit >= d2 - 0.1 && f.c_fit >= d1 + d2 - 0.15;
    return f;
}

DimensionClassRecord dimension_class_properties(const WeightSpec& w, double p, const QuadratureConfig& cfg,
                                                int levels, double sc_value) {
    check_p(p, "dimension_class_properties");
    if (levels < 1 || levels > 30) throw ParameterError("dimension_class_properties: levels must be in [1, 30]");
    const QuadratureConfig c = detail::with_singular(cfg, w);
    const int n = w.n();
    const std::vector<Point> anchors = anchors_for(w, {});
    std::vector<Cube> outers;
    for (const Point& s : anchors) {
        outers.push_back(cube_at(s, 1.0));
        outers.push_back(Cube(s, 1.0));
        outers.push_back(cube_at(offset(s, -1.0), 1.0));
    }
    struct Nested {
        Cube q;
        std::size_t r;
        double ratio;
    };
    std::vector<Nested> nested;
    for (std::size_t i = 0; i < outers.size(); ++i) {
        const Cube& r = outers[i];
        for (int j = 1; j <= levels; ++j) {
            const double l = r.edge * std::ldexp(1.0, -j);
            const double ratio = r.edge / l;
            nested.push_back({cube_at(r.lower(), l), i, ratio});
            nested.push_back({Cube(r.center, l), i, ratio});
            nested.push_back({cube_at(r.upper() - Point::Constant(n, l), l), i, ratio});
            for (const Point& s : anchors)
                if (r.contains(s) && r.contains(Cube(s, l))) nested.push_back({Cube(s, l), i, ratio});
        }
    }

    DimensionClassRecord rec;
    std::vector<double> apinf_r(outers.size());
    parallel_for(outers.size(), [&](std::size_t i) { apinf_r[i] = apinf_cube(w, p, outers[i], c).value; });
    rec.apinf = *std::max_element(apinf_r.begin(), apinf_r.end());
    double sc = sc_value;
    if (!(sc > 0.0)) {
        ProbeFamily fam;
        fam.cubes = outers;
        fam.box = Box::cube(outers.front());
        sc = sc_characteristic(w, p, fam, 4, 4, c).matrix.value;
    }
    rec.r = 1.0 + 1.0 / (std::ldexp(1.0, n + 1) * sc - 1.0);

    std::vector<double> lv(nested.size());
    parallel_for(nested.size(),
                 [&](std::size_t i) { lv[i] = log_pair_value(w, p, nested[i].q, outers[nested[i].r], c); });
    const double tol = 1.0 + 10.0 * c.rel_tol + 1e-6;
    rec.pairs = static_cast<int>(nested.size());
    const double bound_r = std::pow(2.0, 1.0 / rec.r) * rec.apinf;
    for (std::size_t i = 0; i < nested.size(); ++i) {
        const double lr = std::log(nested[i].ratio);
        const double wn = std::exp(lv[i] - n * lr) / apinf_r[nested[i].r];
        const double wr = std::exp(lv[i] - (n / rec.r) * lr) / bound_r;
        rec.max_value = std::max(rec.max_value, std::exp(lv[i]));
        rec.max_witness_n = std::max(rec.max_witness_n, wn);
        rec.max_witness_n_over_r = std::max(rec.max_witness_n_over_r, wr);
        double prev = kInf;
        for (int k = 0; k <= 8; ++k) {
            const double cur = lv[i] - (n * k / 8.0) * lr;
            rec.monotone = rec.monotone && cur <= prev + 1e-12;
            prev = cur;
        }
    }
    rec.witness_n_ok = rec.max_witness_n <= tol;
    rec.witness_n_over_r_ok = rec.max_witness_n_over_r <= tol;
    return rec;
}

}  // namespace mwlab
