#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "detail.hpp"
#include "mwlab/characteristics.hpp"
#include "mwlab/errors.hpp"
#include "mwlab/parallel.hpp"
#include "mwlab/regression.hpp"
#include "mwlab/rng.hpp"

namespace mwlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_norm(const Mat& a) {
    const double s = operator_norm(a);
    return s > 0.0 ? std::log(s) : -kInf;
}

double log_vnorm(const Vec& v) {
    const double s = vector_norm(v);
    return s > 0.0 ? std::log(s) : -kInf;
}

double pos(double t) { return std::max(t, 0.0); }

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

// (vi) as a single value: exp(avg_y log_+ avg_x |W^{1/p}(x) W^{-1/p}(y)|^p).
ConditionValue condition_vi(const WeightSpec& w, double p, const Cube& q, const QuadratureConfig& c) {
    ConditionValue out{"vi", 1.0, false};
    if (w.is_scalar()) {
        const AverageResult l = cube_log_mean_exp([&](const Point& x) { return w.log_scalar(x); }, q, c);
        if (l.diverged) return {"vi", kInf, true};
        const AverageResult r =
            cube_log_average_of_log([&](const Point& y) { return pos(l.value - w.log_scalar(y)); }, q, c);
        if (r.diverged) return {"vi", kInf, true};
        out.constant = r.value;
        return out;
    }
    detail::PairPass r = detail::refine_pairs(CubeRule(q, c), c, [&](const CubeRule& rule) {
        detail::PairPass pp;
        const std::size_t n = rule.size();
        const std::vector<Mat> up = detail::powers_at(w, rule.nodes(), 1.0 / p);
        const std::vector<Mat> down = detail::powers_at(w, rule.nodes(), -1.0 / p);
        std::vector<double> vals(n), g(n);
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t i = 0; i < n; ++i) vals[i] = detail::norm_pow(up[i] * down[j], p);
            const CubeRule::Estimate e = rule.average(vals);
            if (e.diverged) {
                pp.diverged = true;
                return pp;
            }
            g[j] = pos(std::log(e.value));
        }
        const CubeRule::Estimate o = rule.average(g);
        pp.diverged = o.diverged;
        pp.value = o.value;
        pp.error = o.error;
        pp.target = c.rel_tol;
        pp.refine_on = std::move(g);
        return pp;
    });
    if (r.diverged) return {"vi", kInf, true};
    out.constant = std::exp(r.value);
    return out;
}

double log_sum_exp(const std::vector<double>& l) {
    double top = -kInf;
    for (double v : l) top = std::max(top, v);
    if (!std::isfinite(top)) return top;
    double s = 0.0;
    for (double v : l) s += std::exp(v - top);
    return top + std::log(s);
}

}  // namespace

EquivalenceReport compare_conditions(const WeightSpec& w, double p, const Cube& q, const QuadratureConfig& cfg,
                                     int samples, std::uint64_t seed) {
    if (samples < 1) throw ParameterError("compare_conditions: samples must be positive");
    const QuadratureConfig c = detail::with_singular(cfg, w);
    const ReducingOperator red = reduce(w, q, p, cfg);
    const Mat a = red.matrix.matrix();
    const Mat ainv = red.matrix.power_matrix(-1.0);
    const int m = w.m();
    const bool cx = !w.is_real();
    const std::vector<Vec> zs = sample_directions(m, samples, cx, seed, 3);
    const std::vector<Mat> us = sample_matrices(m, samples, cx, seed);
    const std::size_t s = zs.size(), t = us.size();

    std::vector<Vec> az(s);
    for (std::size_t k = 0; k < s; ++k) az[k] = a * zs[k];
    std::vector<Mat> au(t);
    for (std::size_t k = 0; k < t; ++k) au[k] = a * us[k];
    // fields: log|D z|, log+|D A v|, log+|D A U|, log+|D A|, log|D M|, constant scale
    const std::size_t count = 2 * s + 2 * t + 2;
    const std::vector<AverageResult> avg = cube_average_many(
        [&](const Point& x, std::span<double> out) {
            const Mat d = w.evaluate(x, -1.0 / p);
            std::size_t k = 0;
            for (std::size_t i = 0; i < s; ++i) out[k++] = log_vnorm(d * zs[i]);
            for (std::size_t i = 0; i < s; ++i) out[k++] = pos(log_vnorm(d * az[i]));
            for (std::size_t i = 0; i < t; ++i) out[k++] = pos(log_norm(d * au[i]));
            out[k++] = pos(log_norm(d * a));
            for (std::size_t i = 0; i < t; ++i) out[k++] = log_norm(d * us[i]);
            out[k++] = 1.0;
        },
        count, q, c, true);

    EquivalenceReport rep;
    rep.cube = q;
    rep.p = p;
    const char* names[] = {"ii", "iii", "iv", "v", "vi", "vii", "viii"};
    for (int i = 0; i < 7; ++i) rep.conditions[static_cast<std::size_t>(i)] = {names[i], 0.0, false};
    auto take = [&](int cond, std::size_t field, double denom) {
        ConditionValue& cv = rep.conditions[static_cast<std::size_t>(cond)];
        if (avg[field].diverged) {
            cv.diverged = true;
            cv.constant = kInf;
            return;
        }
        if (!cv.diverged) cv.constant = std::max(cv.constant, std::exp(avg[field].value) / denom);
    };
    std::size_t k = 0;
    for (std::size_t i = 0; i < s; ++i) take(0, k++, vector_norm(ainv * zs[i]));
    for (std::size_t i = 0; i < s; ++i) take(1, k++, 1.0);
    for (std::size_t i = 0; i < t; ++i) take(2, k++, 1.0);
    take(3, k++, 1.0);
    for (std::size_t i = 0; i < t; ++i) take(6, k++, operator_norm(ainv * us[i]));

    rep.conditions[4] = condition_vi(w, p, q, c);
    const CubeValue vii = apinf_cube(w, p, q, cfg);
    rep.conditions[5] = {"vii", vii.value, vii.diverged};

    double lo = kInf, hi = 0.0;
    for (const ConditionValue& cv : rep.conditions) {
        rep.finite = rep.finite && !cv.diverged && std::isfinite(cv.constant);
        lo = std::min(lo, cv.constant);
        hi = std::max(hi, cv.constant);
    }
    rep.cross_ratio = rep.finite ? hi / lo : kInf;
    return rep;
}

std::vector<FunctionalCandidate> builtin_candidates(const WeightSpec& w, const ReducingOperator& a,
                                                    std::vector<double> thresholds) {
    const double p = a.p;
    const Mat am = a.matrix.matrix();
    const Mat ainv = a.matrix.power_matrix(-1.0);
    std::vector<FunctionalCandidate> out;
    out.push_back({"W^{-1/p}", [w, p](const Point& y) { return w.evaluate(y, -1.0 / p); }});
    out.push_back({"A_Q^{-1}", [ainv](const Point&) { return ainv; }});
    for (double t : thresholds) {
        out.push_back({"mixture M=" + fmt(t), [w, p, am, ainv, t](const Point& y) {
                           const Mat d = w.evaluate(y, -1.0 / p);
                           return p * log_norm(am * d) >= t ? d : ainv;
                       }});
    }
    return out;
}

FunctionalReport functional_characteristic(const WeightSpec& w, double p, const Cube& q,
                                           const std::vector<FunctionalCandidate>& candidates,
                                           const QuadratureConfig& cfg) {
    const QuadratureConfig c = detail::with_singular(cfg, w);
    FunctionalReport rep;
    rep.apinf_value = apinf_cube(w, p, q, cfg).value;
    rep.value = 0.0;
    for (const FunctionalCandidate& cand : candidates) {
        FunctionalValue fv;
        fv.name = cand.name;
        double denom = 0.0;
        detail::PairPass r = detail::refine_pairs(CubeRule(q, c), c, [&](const CubeRule& rule) {
            detail::PairPass pp;
            const std::size_t n = rule.size();
            const std::vector<Mat> up = detail::powers_at(w, rule.nodes(), 1.0 / p);
            std::vector<Mat> h(n);
            for (std::size_t j = 0; j < n; ++j) h[j] = cand.h(rule.node(j));
            std::vector<double> l(n), inner(n), diag(n);
            for (std::size_t j = 0; j < n; ++j) {
                for (std::size_t i = 0; i < n; ++i) l[i] = p * log_norm(up[i] * h[j]);
                const CubeRule::Estimate e = rule.log_average_exp(l);
                if (e.diverged) {
                    pp.diverged = true;
                    return pp;
                }
                inner[j] = e.value;
                diag[j] = detail::norm_pow(up[j] * h[j], p);
            }
            const CubeRule::Estimate o = rule.average(inner);
            const CubeRule::Estimate d = rule.average(diag);
            pp.diverged = o.diverged || d.diverged;
            pp.value = o.value;
            pp.error = o.error;
            pp.target = c.rel_tol;
            pp.refine_on = std::move(inner);
            denom = d.value;
            return pp;
        });
        if (r.diverged) {
            fv.excluded = true;
            fv.note = "divergent average";
        } else if (!(denom > 0.0) || !std::isfinite(denom)) {
            fv.excluded = true;
            fv.note = "zero denominator";
        } else {
            fv.value = std::exp(r.value) / denom;
            rep.value = std::max(rep.value, fv.value);
        }
        rep.candidates.push_back(fv);
    }
    return rep;
}

DistributionalReport distributional_check(const WeightSpec& w, double p, const Cube& q,
                                          const std::vector<double>& m_values, double apinf_value, double c,
                                          const QuadratureConfig& cfg) {
    const QuadratureConfig qc = detail::with_singular(cfg, w);
    const ReducingOperator red = reduce(w, q, p, cfg);
    const Mat a = red.matrix.matrix();
    const CubeRule rule(q, qc);
    const ScalarField f = [&](const Point& y) { return p * log_norm(a * w.evaluate(y, -1.0 / p)); };
    const double logc = std::log(c * apinf_value);
    DistributionalReport rep;
    std::vector<double> lx, ly;
    for (double m : m_values) {
        if (!(m > 0.0)) throw ParameterError("distributional_check: M must be positive");
        DistributionalRow row;
        row.m = m;
        row.fraction = rule.superlevel_fraction(f, m);
        row.bound = logc / m;
        row.ratio = logc > 0.0 ? row.fraction * m / logc : (row.fraction > 0.0 ? kInf : 0.0);
        row.pass = row.fraction <= row.bound + 1e-12;
        rep.pass = rep.pass && row.pass;
        if (row.fraction > 0.0) {
            lx.push_back(std::log(m));
            ly.push_back(std::log(row.fraction));
        }
        rep.rows.push_back(row);
    }
    if (lx.size() >= 2) rep.decay_slope = fit_line(lx, ly).slope;
    return rep;
}

StoppingReport stopping_time_check(const WeightSpec& w, double p, const Cube& q, double m, int max_depth,
                                   double apinf_value, double c, const QuadratureConfig& cfg) {
    if (!(m > 0.0)) throw ParameterError("stopping_time_check: M must be positive");
    if (max_depth < 1) throw ParameterError("stopping_time_check: max_depth must be positive");
    StoppingReport rep;
    rep.m = m;
    const Mat aq = reduce(w, q, p, cfg).matrix.matrix();
    struct Item {
        Cube cube;
        int depth;
    };
    std::vector<Item> frontier;
    for (const Cube& ch : q.children()) frontier.push_back({ch, 1});
    double selected = 0.0;
    while (!frontier.empty()) {
        std::vector<Item> next;
        for (const Item& it : frontier) {
            bool hit = false, failed = false;
            try {
                const Mat rinv = reduce(w, it.cube, p, cfg).matrix.power_matrix(-1.0);
                hit = p * log_norm(aq * rinv) >= m;
            } catch (const NumericError&) {
                failed = true;
                ++rep.failed_branches;
            }
            if (hit) {
                rep.selected.push_back(it.cube);
                selected += it.cube.volume();
            } else if (it.depth < max_depth) {
                for (const Cube& ch : it.cube.children()) next.push_back({ch, it.depth + 1});
            }
            (void)failed;
        }
        frontier.swap(next);
    }
    rep.ratio = selected / q.volume();
    rep.bound = std::log(c * apinf_value) / m;
    rep.pass = rep.ratio <= rep.bound + 1e-12;
    return rep;
}

IntegrabilityReport integrability_exponent(const WeightSpec& w, double p, const ProbeFamily& family,
                                           const std::vector<double>& u_grid, const QuadratureConfig& cfg) {
    if (family.size() == 0) throw ParameterError("integrability_exponent: empty family");
    const QuadratureConfig c = detail::with_singular(cfg, w);
    IntegrabilityReport rep;
    rep.u_grid = u_grid;
    std::sort(rep.u_grid.begin(), rep.u_grid.end());
    const std::size_t nc = family.size(), nu = rep.u_grid.size();
    std::vector<double> table(nc * nu, kInf);
    double finest = kInf;
    for (const Cube& q : family.cubes) finest = std::min(finest, q.edge);
    parallel_for(nc, [&](std::size_t i) {
        const Cube& q = family.cubes[i];
        Mat a;
        try {
            a = reduce(w, q, p, cfg).matrix.matrix();
        } catch (const NumericError&) {
            return;
        }
        for (std::size_t k = 0; k < nu; ++k) {
            const double u = rep.u_grid[k];
            const AverageResult r =
                cube_log_mean_exp([&](const Point& x) { return u * log_norm(w.evaluate(x, -1.0 / p) * a); }, q, c);
            table[i * nu + k] = r.diverged ? kInf : std::exp(r.value);
            if (r.diverged) break;
        }
    });
    rep.sup_all.assign(nu, 0.0);
    rep.sup_coarse.assign(nu, 0.0);
    for (std::size_t i = 0; i < nc; ++i) {
        const bool coarse = family.cubes[i].edge > finest * (1.0 + 1e-9);
        for (std::size_t k = 0; k < nu; ++k) {
            rep.sup_all[k] = std::max(rep.sup_all[k], table[i * nu + k]);
            if (coarse) rep.sup_coarse[k] = std::max(rep.sup_coarse[k], table[i * nu + k]);
        }
    }
    rep.stable.assign(nu, false);
    for (std::size_t k = 0; k < nu; ++k) {
        const double ref = rep.sup_coarse[k] > 0.0 ? rep.sup_coarse[k] : rep.sup_all[k];
        rep.stable[k] = std::isfinite(rep.sup_all[k]) && rep.sup_all[k] <= 1.1 * ref;
        if (rep.stable[k]) rep.u_star = rep.u_grid[k];
    }
    return rep;
}

InclusionReport inclusion_checks(const WeightSpec& w, double p, double q, const ProbeFamily& family,
                                 const QuadratureConfig& cfg) {
    if (!(p > 0.0) || !(q > p)) throw ParameterError("inclusion_checks: need 0 < p < q");
    InclusionReport rep;
    const CharacteristicReport ip = apinf_characteristic(w, p, family, cfg);
    const CharacteristicReport iq = apinf_characteristic(w, q, family, cfg);
    rep.apinf_p = ip.value;
    rep.apinf_q = iq.value;
    rep.constant_pq = iq.value / ip.value;
    const CharacteristicReport ap = ap_characteristic(w, p, family, cfg);
    rep.ap_p_diverged = ap.diverged;
    if (!ap.diverged) rep.ap_p = ap.value;
    if (p <= 1.0) {
        for (std::size_t i = 0; i < family.size(); ++i) {
            const CubeValue& a = ap.per_cube[i];
            if (!a.diverged && ip.per_cube[i].value > a.value * (1.0 + 1e-6)) rep.ap_dominates = false;
        }
    }
    std::vector<double> grid;
    for (int k = 1; k <= 40; ++k) grid.push_back(0.1 * k);
    const IntegrabilityReport ie = integrability_exponent(w, p, family, grid, cfg);
    rep.u_star = ie.u_star;
    if (ie.u_star > 0.0) {
        rep.union_q = std::max(1.0 + p / ie.u_star, p + 0.25);
        rep.union_finite = !ap_characteristic(w, rep.union_q, family, cfg).diverged;
    } else {
        rep.union_q = kInf;
    }
    return rep;
}

ReverseHolderReport reverse_holder_check(const WeightSpec& w, double p, int matrix_samples, const ProbeFamily& family,
                                         int case_limit, const QuadratureConfig& cfg, double sc_value,
                                         int maximal_depth, std::uint64_t seed) {
    if (family.size() == 0) throw ParameterError("reverse_holder_check: empty family");
    if (!(sc_value >= 1.0 - 1e-6)) throw ParameterError("reverse_holder_check: sc value below 1");
    const QuadratureConfig c = detail::with_singular(cfg, w);
    const int n = w.n();
    ReverseHolderReport rep;
    rep.sc = sc_value;
    rep.r_max = 1.0 + 1.0 / (std::pow(2.0, n + 1) * sc_value - 1.0);
    const std::vector<double> rs = {1.0, 0.5 * (1.0 + rep.r_max), rep.r_max};
    const std::vector<Mat> ms = sample_matrices(w.m(), std::max(matrix_samples, 1), !w.is_real(), seed);

    CounterRng rng(seed, 1);
    std::vector<std::pair<std::size_t, std::size_t>> picks;
    for (int t = 0; t < case_limit; ++t) picks.emplace_back(rng.below(family.size()), rng.below(ms.size()));
    std::vector<std::vector<ReverseHolderCase>> per(picks.size());
    parallel_for(picks.size(), [&](std::size_t t) {
        const Cube& q = family.cubes[picks[t].first];
        const Mat& mm = ms[picks[t].second];
        const ScalarField l = [&](const Point& x) { return p * log_norm(w.evaluate(x, 1.0 / p) * mm); };
        const AverageResult base = cube_log_mean_exp(l, q, c);
        for (double r : rs) {
            ReverseHolderCase rc;
            rc.cube = q;
            rc.matrix_index = static_cast<int>(picks[t].second);
            rc.r = r;
            const AverageResult lr = cube_log_mean_exp([&](const Point& x) { return r * l(x); }, q, c);
            if (base.diverged || lr.diverged) {
                rc.lhs = kInf;
                rc.rhs = base.diverged ? kInf : 2.0 * std::exp(r * base.value);
                rc.pass = false;
            } else {
                rc.lhs = std::exp(lr.value);
                rc.rhs = 2.0 * std::exp(r * base.value);
                rc.pass = lr.value <= std::log(2.0) + r * base.value + 1e-9;
            }
            per[t].push_back(rc);
        }
    });
    for (auto& v : per)
        for (auto& rc : v) {
            rep.pass = rep.pass && rc.pass;
            rep.diverged = rep.diverged || !std::isfinite(rc.lhs);
            rep.cases.push_back(rc);
        }

    const double r = rep.r_max;
    const int depth = std::max(0, n == 1 ? maximal_depth : std::min(maximal_depth, 3));
    std::vector<double> plain(family.size(), 0.0), maximal(family.size(), 0.0);
    parallel_for(family.size(), [&](std::size_t i) {
        const Cube& q = family.cubes[i];
        const Mat ainv = reduce(w, q, p, cfg).matrix.power_matrix(-1.0);
        const AverageResult a = cube_log_mean_exp(
            [&](const Point& x) { return r * p * log_norm(w.evaluate(x, 1.0 / p) * ainv); }, q, c);
        plain[i] = a.diverged ? kInf : std::exp(a.value / r);

        // levels[k] holds the dyadic subcubes of q at depth k, children in Cube::children order
        std::vector<std::vector<Cube>> levels{{q}};
        std::vector<std::vector<Mat>> inv{{ainv}};
        for (int k = 1; k <= depth; ++k) {
            std::vector<Cube> cubes;
            std::vector<Mat> mats;
            for (const Cube& parent : levels.back())
                for (const Cube& ch : parent.children()) {
                    cubes.push_back(ch);
                    mats.push_back(reduce(w, ch, p, cfg).matrix.power_matrix(-1.0));
                }
            levels.push_back(std::move(cubes));
            inv.push_back(std::move(mats));
        }
        const std::size_t kids = std::size_t{1} << n;
        std::vector<double> cell_logs;
        bool div = false;
        for (std::size_t f = 0; f < levels.back().size(); ++f) {
            std::vector<const Mat*> chain(static_cast<std::size_t>(depth) + 1);
            std::size_t idx = f;
            for (int k = depth; k >= 0; --k) {
                chain[static_cast<std::size_t>(k)] = &inv[static_cast<std::size_t>(k)][idx];
                idx /= kids;
            }
            const AverageResult e = cube_log_mean_exp(
                [&](const Point& x) {
                    const Mat u = w.evaluate(x, 1.0 / p);
                    double best = -kInf;
                    for (const Mat* m : chain) best = std::max(best, log_norm(u * *m));
                    return r * p * best;
                },
                levels.back()[f], c);
            if (e.diverged) {
                div = true;
                break;
            }
            cell_logs.push_back(e.value);
        }
        maximal[i] = div ? kInf
                         : std::exp((log_sum_exp(cell_logs) - std::log(static_cast<double>(cell_logs.size()))) / r);
    });
    for (std::size_t i = 0; i < family.size(); ++i) {
        rep.cor8_sup = std::max(rep.cor8_sup, plain[i]);
        rep.cor8_maximal_sup = std::max(rep.cor8_maximal_sup, maximal[i]);
    }
    if (!std::isfinite(rep.cor8_sup) || !std::isfinite(rep.cor8_maximal_sup)) rep.diverged = true;
    return rep;
}

MultiplierReport multiplier_bound_check(const WeightSpec& w, double p, double q_exp, int levels, int trials,
                                        const QuadratureConfig& cfg, std::uint64_t seed) {
    if (levels < 0 || trials < 1) throw ParameterError("multiplier_bound_check: invalid levels or trials");
    if (!(q_exp > 0.0)) throw ParameterError("multiplier_bound_check: q must be positive");
    const int n = w.n();
    const int grid = std::min(levels + (n == 1 ? 4 : 2), n == 1 ? 16 : 16 / n);
    if (grid < levels) throw ParameterError("multiplier_bound_check: too many levels for this dimension");
    const std::size_t per = std::size_t{1} << grid;
    std::size_t cells = 1;
    for (int i = 0; i < n; ++i) cells *= per;
    const double h = 1.0 / static_cast<double>(per);

    // level index of a fine cell: coordinates shifted down by (grid - j) bits
    auto coarse_index = [&](std::size_t cell, int j) {
        const std::size_t pj = std::size_t{1} << j;
        std::size_t r = cell, out = 0, st = 1;
        for (int a = 0; a < n; ++a) {
            out += ((r % per) >> (grid - j)) * st;
            r /= per;
            st *= pj;
        }
        return out;
    };

    std::vector<std::vector<Mat>> ainv(static_cast<std::size_t>(levels) + 1);
    for (int j = 0; j <= levels; ++j) {
        const std::vector<Cube> cubes = dyadic_cubes_in(Box{zero_point(n), Point::Ones(n)}, j);
        // dyadic_cubes_in order may differ from ours; index by lower corner
        const std::size_t pj = std::size_t{1} << j;
        ainv[static_cast<std::size_t>(j)].resize(cubes.size());
        for (const Cube& cube : cubes) {
            const Point lo = cube.lower();
            std::size_t idx = 0, st = 1;
            for (int a = 0; a < n; ++a) {
                idx += static_cast<std::size_t>(std::llround(lo(a) * static_cast<double>(pj))) * st;
                st *= pj;
            }
            ainv[static_cast<std::size_t>(j)][idx] = reduce(w, cube, p, cfg).matrix.power_matrix(-1.0);
        }
    }
    std::vector<double> gamma((static_cast<std::size_t>(levels) + 1) * cells);
    parallel_for(cells, [&](std::size_t c) {
        Point x(n);
        std::size_t r = c;
        for (int a = 0; a < n; ++a) {
            x(a) = (static_cast<double>(r % per) + 0.5) * h;
            r /= per;
        }
        const Mat u = w.evaluate(x, 1.0 / p);
        for (int j = 0; j <= levels; ++j)
            gamma[static_cast<std::size_t>(j) * cells + c] =
                operator_norm(u * ainv[static_cast<std::size_t>(j)][coarse_index(c, j)]);
    });

    const bool sup_norm = std::isinf(q_exp);
    MultiplierReport rep;
    rep.depth_ratio.assign(static_cast<std::size_t>(levels) + 1, 0.0);
    const std::size_t fcells = [&] {
        std::size_t t = 1;
        for (int a = 0; a < n; ++a) t *= std::size_t{1} << levels;
        return t;
    }();
    std::vector<double> f(fcells), ef(cells), num(cells), den(cells);
    for (int trial = 0; trial < trials; ++trial) {
        CounterRng rng(seed, static_cast<std::uint64_t>(trial));
        std::fill(num.begin(), num.end(), 0.0);
        std::fill(den.begin(), den.end(), 0.0);
        for (int j = 0; j <= levels; ++j) {
            for (double& v : f) v = trial == 0 ? 1.0 : std::exp(rng.normal());
            // E_j f_j on level-j cubes, spread to fine cells
            const std::size_t pj = std::size_t{1} << j;
            std::size_t nj = 1;
            for (int a = 0; a < n; ++a) nj *= pj;
            std::vector<double> sums(nj, 0.0);
            const std::size_t pl = std::size_t{1} << levels;
            for (std::size_t k = 0; k < fcells; ++k) {
                std::size_t r = k, out = 0, st = 1;
                for (int a = 0; a < n; ++a) {
                    out += ((r % pl) >> (levels - j)) * st;
                    r /= pl;
                    st *= pj;
                }
                sums[out] += f[k];
            }
            const double share = static_cast<double>(nj) / static_cast<double>(fcells);
            for (std::size_t c = 0; c < cells; ++c) {
                const double e = sums[coarse_index(c, j)] * share;
                const double g = gamma[static_cast<std::size_t>(j) * cells + c] * e;
                if (sup_norm) {
                    num[c] = std::max(num[c], g);
                    den[c] = std::max(den[c], e);
                } else {
                    num[c] += std::pow(g, q_exp);
                    den[c] += std::pow(e, q_exp);
                }
            }
            double a = 0.0, b = 0.0;
            const double power = sup_norm ? p : p / q_exp;
            for (std::size_t c = 0; c < cells; ++c) {
                a += std::pow(num[c], power);
                b += std::pow(den[c], power);
            }
            const double ratio = std::pow(a / b, 1.0 / p);
            rep.depth_ratio[static_cast<std::size_t>(j)] = std::max(rep.depth_ratio[static_cast<std::size_t>(j)], ratio);
        }
    }
    rep.max_ratio = *std::max_element(rep.depth_ratio.begin(), rep.depth_ratio.end());
    if (levels >= 1) {
        std::vector<double> lx, ly;
        for (int j = 0; j <= levels; ++j) {
            lx.push_back(j * std::log(2.0));
            ly.push_back(std::log(rep.depth_ratio[static_cast<std::size_t>(j)]));
        }
        rep.depth_slope = fit_line(lx, ly).slope;
    }
    return rep;
}

DualReport dual_weight_check(const WeightSpec& w, double p, const ProbeFamily& family, const QuadratureConfig& cfg,
                             int matrix_samples, std::uint64_t seed) {
    if (!(p > 1.0) || !std::isfinite(p)) throw ParameterError("dual_weight_check: p must exceed 1");
    const double pd = p / (p - 1.0);
    DualReport rep;
    const CharacteristicReport a = ap_characteristic(w, p, family, cfg);
    const WeightSpec dual = WeightSpec::powered(w, -pd / p);
    const CharacteristicReport d = ap_characteristic(dual, pd, family, cfg);
    rep.ap = a.value;
    rep.dual_ap_pow = std::pow(d.value, p / pd);
    rep.diverged = a.diverged || d.diverged;
    rep.ratio = rep.diverged ? kInf : rep.ap / rep.dual_ap_pow;
    if (rep.diverged) return rep;
    const QuadratureConfig c = detail::with_singular(cfg, w);
    const std::vector<Mat> ms = sample_matrices(w.m(), std::max(matrix_samples, 1), !w.is_real(), seed);
    for (const Cube& q : family.cubes) {
        const Mat ainv = reduce(w, q, p, cfg).matrix.power_matrix(-1.0);
        for (const Mat& mm : ms) {
            const AverageResult r = cube_log_mean_exp(
                [&](const Point& x) { return pd * log_norm(w.evaluate(x, -1.0 / p) * mm); }, q, c);
            rep.inverse_ratios.push_back(r.diverged ? 0.0 : operator_norm(ainv * mm) / std::exp(r.value / pd));
        }
    }
    return rep;
}

}  // namespace mwlab
