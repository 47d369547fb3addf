#include "mwlab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mwlab/errors.hpp"

namespace mwlab {

namespace {

struct Rule1D {
    std::vector<double> x;   // nodes on [0, 1]
    std::vector<double> wk;  // Kronrod weights, sum 1
    std::vector<double> wg;  // embedded Gauss weights, sum 1 (zero off the Gauss subset)
};

Rule1D make_rule(const double* xs, const double* k, const double* g, int half) {
    Rule1D r;
    for (int i = 0; i < half; ++i) {
        r.x.push_back(0.5 * (1.0 - xs[i]));
        r.wk.push_back(0.5 * k[i]);
        r.wg.push_back(0.5 * g[i]);
    }
    r.x.push_back(0.5);
    r.wk.push_back(0.5 * k[half]);
    r.wg.push_back(0.5 * g[half]);
    for (int i = half - 1; i >= 0; --i) {
        r.x.push_back(0.5 * (1.0 + xs[i]));
        r.wk.push_back(0.5 * k[i]);
        r.wg.push_back(0.5 * g[i]);
    }
    return r;
}

const Rule1D& gk15() {
    static const Rule1D r = [] {
        const double xs[] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                             0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                             0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                             0.207784955007898467600689403773245};
        const double k[] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
        const double g[] = {0.0, 0.129484966168869693270611432679082, 0.0, 0.279705391489276667901467771423780,
                            0.0, 0.381830050505118944950369775488975, 0.0, 0.417959183673469387755102040816327};
        return make_rule(xs, k, g, 7);
    }();
    return r;
}

const Rule1D& gk7() {
    static const Rule1D r = [] {
        const double xs[] = {0.9604912687080202, 0.7745966692414834, 0.4342437493468026};
        const double k[] = {0.1046562260264672, 0.2684880898683334, 0.4013974147759622, 0.4509165386584741};
        const double g[] = {0.0, 5.0 / 9.0, 0.0, 8.0 / 9.0};
        return make_rule(xs, k, g, 3);
    }();
    return r;
}

const Rule1D& rule_for(int n) { return n == 1 ? gk15() : gk7(); }

double dist_to_box(const Point& p, const Point& lo, const Point& size) {
    double s = 0.0;
    for (int i = 0; i < p.size(); ++i) {
        const double a = lo(i), b = lo(i) + size(i);
        const double d = p(i) < a ? a - p(i) : (p(i) > b ? p(i) - b : 0.0);
        s += d * d;
    }
    return std::sqrt(s);
}

struct Tail {
    double sum = 0.0;
    double tail = 0.0;
    double error = 0.0;
    bool diverged = false;
};

constexpr double kDivergent = 1.0 - 1e-9;

bool geometric_tail(const std::vector<double>& l, int m, double& out) {
    if (m < 1) return false;
    if (l[m] == 0.0 && l[m - 1] == 0.0) {
        out = 0.0;
        return true;
    }
    if (l[m - 1] == 0.0) return false;
    const double r = l[m] / l[m - 1];
    if (!std::isfinite(r) || r <= 0.0 || r >= kDivergent) return false;
    out = l[m] * r / (1.0 - r);
    return true;
}

// Fit L_{k+2} = c1 L_{k+1} + c0 L_k on the four rings ending at m; sum the continuation.
bool recurrence_tail(const std::vector<double>& l, int m, double& out) {
    if (m < 3) return false;
    const double a = l[m - 2], b = l[m - 3], c = l[m - 1], d = l[m - 2];
    const double det = a * d - b * c;
    const double scale = std::max({a * a, b * b, c * c});
    if (!(scale > 0.0) || std::abs(det) <= 1e-10 * scale) return false;
    const double c1 = (l[m - 1] * d - b * l[m]) / det;
    const double c0 = (a * l[m] - c * l[m - 1]) / det;
    const double disc = c1 * c1 + 4.0 * c0;
    const double radius = disc >= 0.0 ? 0.5 * (std::abs(c1) + std::sqrt(disc)) : std::sqrt(-c0);
    if (radius >= kDivergent) return false;
    if (std::abs(1.0 - c1 - c0) < 1e-12) return false;
    const double ld = c1 * l[m] + c0 * l[m - 1];
    const double ld1 = c1 * ld + c0 * l[m];
    out = (ld1 + (1.0 - c1) * ld) / (1.0 - c1 - c0);
    return std::isfinite(out);
}

Tail extrapolate(const std::vector<double>& l) {
    Tail t;
    const int d = static_cast<int>(l.size());
    for (double v : l) t.sum += v;
    if (d < 2) return t;
    if (d >= 3) {
        const double r1 = l[d - 1] / l[d - 2], r0 = l[d - 2] / l[d - 3];
        if (std::isfinite(r1) && std::isfinite(r0) && r1 >= kDivergent && r0 >= kDivergent && l[d - 1] != 0.0) {
            t.diverged = true;
            t.tail = std::numeric_limits<double>::infinity();
            return t;
        }
    }
    const double before = t.sum - l[d - 1];
    double best_err = std::numeric_limits<double>::infinity();
    double best_tail = 0.0;
    auto consider = [&](bool ok_now, double tail_now, bool ok_prev, double tail_prev) {
        if (!ok_now) return;
        const double err = ok_prev ? std::abs((t.sum + tail_now) - (before + tail_prev)) : 2.0 * std::abs(tail_now);
        if (err < best_err) {
            best_err = err;
            best_tail = tail_now;
        }
    };
    double g1 = 0, g0 = 0, q1 = 0, q0 = 0;
    const bool okg1 = geometric_tail(l, d - 1, g1), okg0 = geometric_tail(l, d - 2, g0);
    const bool okq1 = recurrence_tail(l, d - 1, q1), okq0 = recurrence_tail(l, d - 2, q0);
    consider(okg1, g1, okg0, g0);
    consider(okq1, q1, okq0, q0);
    if (!std::isfinite(best_err)) {
        t.tail = 0.0;
        t.error = 2.0 * std::abs(l[d - 1]) + std::abs(l[d - 2]);
        return t;
    }
    t.tail = best_tail;
    t.error = best_err;
    return t;
}

}  // namespace

void QuadratureConfig::validate() const {
    if (base_subdivisions < 2) throw ConfigurationError("quadrature: base_subdivisions must be at least 2");
    if (max_refine_depth < 5 || max_refine_depth > 60) throw ConfigurationError("quadrature: max_refine_depth must be in [5, 60]");
    if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw ConfigurationError("quadrature: rel_tol must lie in (0, 1)");
    if (max_adaptive_passes < 0) throw ConfigurationError("quadrature: max_adaptive_passes must be nonnegative");
}

CubeRule::CubeRule(const Cube& q, const QuadratureConfig& cfg) : cube_(q), n_(q.dim()), depth_(cfg.max_refine_depth) {
    cfg.validate();
    const Point lo = q.lower(), hi = q.upper();
    const double tol = 1e-12 * q.edge;
    std::vector<Point> inside;
    for (const Point& s : cfg.singular_points) {
        if (s.size() != n_) throw DimensionError("quadrature: singular point dimension mismatch");
        bool in = true;
        for (int i = 0; i < n_; ++i) in = in && s(i) >= lo(i) - tol && s(i) <= hi(i) + tol;
        if (in) {
            Point c = s;
            for (int i = 0; i < n_; ++i) c(i) = std::clamp(c(i), lo(i), hi(i));
            inside.push_back(c);
        } else {
            near_.push_back(s);
        }
    }

    std::vector<std::vector<double>> breaks(n_);
    for (int i = 0; i < n_; ++i) {
        breaks[i] = {lo(i), hi(i)};
        for (const Point& s : inside)
            if (s(i) > lo(i) + tol && s(i) < hi(i) - tol) breaks[i].push_back(s(i));
        std::sort(breaks[i].begin(), breaks[i].end());
        breaks[i].erase(std::unique(breaks[i].begin(), breaks[i].end(),
                                    [tol](double a, double b) { return std::abs(a - b) <= tol; }),
                        breaks[i].end());
    }

    std::vector<Point> grading = near_;
    grading.insert(grading.end(), inside.begin(), inside.end());

    const int sub = cfg.base_subdivisions;
    std::vector<int> bidx(n_, 0);
    while (true) {
        Point blo(n_), bsize(n_);
        for (int i = 0; i < n_; ++i) {
            blo(i) = breaks[i][bidx[i]];
            bsize(i) = breaks[i][bidx[i] + 1] - blo(i);
        }
        struct Anchor {
            int id;
            std::vector<int> side;  // 0: low end, 1: high end
        };
        std::vector<Anchor> anchors;
        for (const Point& s : inside) {
            std::vector<int> side(n_);
            bool corner = true;
            for (int i = 0; i < n_ && corner; ++i) {
                if (std::abs(s(i) - blo(i)) <= tol) side[i] = 0;
                else if (std::abs(s(i) - (blo(i) + bsize(i))) <= tol) side[i] = 1;
                else corner = false;
            }
            if (!corner) continue;
            anchors.push_back({static_cast<int>(corners_.size()), side});
            corners_.push_back(s);
            core_volume_.push_back(0.0);
        }

        Point csize = bsize / sub;
        std::vector<int> cidx(n_, 0);
        while (true) {
            Point clo(n_);
            for (int i = 0; i < n_; ++i) clo(i) = blo(i) + cidx[i] * csize(i);
            const Anchor* hit = nullptr;
            for (const Anchor& a : anchors) {
                bool touches = true;
                for (int i = 0; i < n_; ++i) touches = touches && cidx[i] == (a.side[i] == 0 ? 0 : sub - 1);
                if (touches) hit = &a;
            }
            if (hit) {
                Point rlo = clo, rsize = csize;
                for (int k = 0; k < depth_; ++k) {
                    Point half = rsize / 2.0;
                    int corner_mask = 0;
                    for (int i = 0; i < n_; ++i) corner_mask |= hit->side[i] << i;
                    for (int mask = 0; mask < (1 << n_); ++mask) {
                        if (mask == corner_mask) continue;
                        Point chlo = rlo;
                        for (int i = 0; i < n_; ++i)
                            if ((mask >> i) & 1) chlo(i) += half(i);
                        if (n_ == 1) {
                            add_cell(chlo, half, hit->id, k, k + 1);
                        } else {
                            Point quarter = half / 2.0;
                            for (int sm = 0; sm < (1 << n_); ++sm) {
                                Point slo = chlo;
                                for (int i = 0; i < n_; ++i)
                                    if ((sm >> i) & 1) slo(i) += quarter(i);
                                add_cell(slo, quarter, hit->id, k, k + 2);
                            }
                        }
                    }
                    for (int i = 0; i < n_; ++i)
                        if (hit->side[i] == 1) rlo(i) += half(i);
                    rsize = half;
                }
                core_volume_[hit->id] += rsize.prod() / q.volume();
            } else {
                std::function<void(const Point&, const Point&, int)> graded = [&](const Point& glo, const Point& gsize,
                                                                                  int depth) {
                    const double diam = gsize.norm();
                    bool split = false;
                    if (depth < depth_)
                        for (const Point& s : grading) {
                            const double dd = dist_to_box(s, glo, gsize);
                            if (dd > 0.0 && dd < diam) split = true;
                        }
                    if (!split) {
                        add_cell(glo, gsize, -1, -1, depth);
                        return;
                    }
                    Point half = gsize / 2.0;
                    for (int mask = 0; mask < (1 << n_); ++mask) {
                        Point chlo = glo;
                        for (int i = 0; i < n_; ++i)
                            if ((mask >> i) & 1) chlo(i) += half(i);
                        graded(chlo, half, depth + 1);
                    }
                };
                graded(clo, csize, 0);
            }
            int i = 0;
            for (; i < n_; ++i) {
                if (++cidx[i] < sub) break;
                cidx[i] = 0;
            }
            if (i == n_) break;
        }

        int i = 0;
        for (; i < n_; ++i) {
            if (++bidx[i] + 1 < static_cast<int>(breaks[i].size())) break;
            bidx[i] = 0;
        }
        if (i == n_) break;
    }
}

void CubeRule::add_cell(const Point& lo, const Point& size, int corner, int ring, int depth) {
    const Rule1D& r = rule_for(n_);
    const int k = static_cast<int>(r.x.size());
    Cell c{lo, size, corner, ring, depth, nodes_.size(), 0};
    const double frac = size.prod() / cube_.volume();
    std::vector<int> idx(n_, 0);
    while (true) {
        Point x(n_);
        double wk = frac, wg = frac;
        for (int i = 0; i < n_; ++i) {
            x(i) = lo(i) + size(i) * r.x[idx[i]];
            wk *= r.wk[idx[i]];
            wg *= r.wg[idx[i]];
        }
        nodes_.push_back(x);
        wk_.push_back(wk);
        wg_.push_back(wg);
        ++c.count;
        int i = 0;
        for (; i < n_; ++i) {
            if (++idx[i] < k) break;
            idx[i] = 0;
        }
        if (i == n_) break;
    }
    cells_.push_back(c);
}

CubeRule::Estimate CubeRule::average(std::span<const double> f) const {
    if (f.size() != nodes_.size()) throw DimensionError("CubeRule::average: value count mismatch");
    Estimate e;
    std::vector<std::vector<double>> rings(corners_.size(), std::vector<double>(depth_, 0.0));
    for (const Cell& c : cells_) {
        double k = 0.0, g = 0.0;
        for (std::size_t i = c.first; i < c.first + c.count; ++i) {
            k += wk_[i] * f[i];
            g += wg_[i] * f[i];
        }
        e.error += std::abs(k - g);
        if (c.corner >= 0) rings[c.corner][c.ring] += k;
        else e.value += k;
    }
    for (const auto& l : rings) {
        Tail t = extrapolate(l);
        if (t.diverged) {
            e.diverged = true;
            e.value = std::numeric_limits<double>::infinity();
            return e;
        }
        e.value += t.sum + t.tail;
        e.error += t.error;
    }
    return e;
}

CubeRule::Estimate CubeRule::log_average_exp(std::span<const double> logf) const {
    double shift = -std::numeric_limits<double>::infinity();
    for (double v : logf) {
        if (std::isnan(v) || v == std::numeric_limits<double>::infinity())
            throw NumericError("log_average_exp: non-finite log value at a node");
        shift = std::max(shift, v);
    }
    if (shift == -std::numeric_limits<double>::infinity()) return {-std::numeric_limits<double>::infinity(), 0.0, false};
    std::vector<double> v(logf.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::exp(logf[i] - shift);
    Estimate e = average(v);
    if (e.diverged) return e;
    return {shift + std::log(e.value), e.error / e.value, false};
}

CubeRule::SupEstimate CubeRule::sup(std::span<const double> f) const {
    if (f.size() != nodes_.size()) throw DimensionError("CubeRule::sup: value count mismatch");
    SupEstimate s;
    s.value = -std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> ringmax(corners_.size(),
                                             std::vector<double>(depth_, -std::numeric_limits<double>::infinity()));
    int arg_corner = -1, arg_ring = -1;
    for (const Cell& c : cells_) {
        for (std::size_t i = c.first; i < c.first + c.count; ++i) {
            if (c.corner >= 0) ringmax[c.corner][c.ring] = std::max(ringmax[c.corner][c.ring], f[i]);
            if (f[i] > s.value) {
                s.value = f[i];
                s.argmax = i;
                arg_corner = c.corner;
                arg_ring = c.ring;
            }
        }
    }
    if (arg_corner >= 0 && arg_ring >= depth_ - 2 && depth_ >= 3) {
        const auto& m = ringmax[arg_corner];
        const double g1 = m[depth_ - 1] / m[depth_ - 2], g0 = m[depth_ - 2] / m[depth_ - 3];
        if (g1 > 1.0 + 1e-3 && g0 > 1.0 + 1e-3) {
            s.diverged = true;
            s.value = std::numeric_limits<double>::infinity();
        }
    }
    return s;
}

bool CubeRule::can_refine() const {
    for (const Cell& c : cells_)
        if (c.depth < depth_ + 16) return true;
    return false;
}

CubeRule CubeRule::refined(std::span<const double> f, double target) const {
    if (f.size() != nodes_.size()) throw DimensionError("CubeRule::refined: value count mismatch");
    CubeRule out;
    out.cube_ = cube_;
    out.n_ = n_;
    out.depth_ = depth_;
    out.near_ = near_;
    out.corners_ = corners_;
    out.core_volume_ = core_volume_;
    const double share = target / static_cast<double>(cells_.size());
    for (const Cell& c : cells_) {
        double k = 0.0, g = 0.0;
        for (std::size_t i = c.first; i < c.first + c.count; ++i) {
            k += wk_[i] * f[i];
            g += wg_[i] * f[i];
        }
        if (std::abs(k - g) > share && c.depth < depth_ + 16) {
            Point half = c.size / 2.0;
            for (int mask = 0; mask < (1 << n_); ++mask) {
                Point lo = c.lo;
                for (int i = 0; i < n_; ++i)
                    if ((mask >> i) & 1) lo(i) += half(i);
                out.add_cell(lo, half, c.corner, c.ring, c.depth + 1);
            }
        } else {
            out.add_cell(c.lo, c.size, c.corner, c.ring, c.depth);
        }
    }
    return out;
}

double CubeRule::superlevel_fraction(const ScalarField& f, double t, int max_extra_depth) const {
    const Rule1D& r = rule_for(n_);
    const int k = static_cast<int>(r.x.size());
    const int limit = n_ == 1 ? max_extra_depth : std::min(max_extra_depth, 8);
    std::function<double(const Point&, const Point&, int)> frac = [&](const Point& lo, const Point& size, int d) -> double {
        double above = 0.0;
        bool any_above = false, any_below = false;
        std::vector<int> idx(n_, 0);
        while (true) {
            Point x(n_);
            double w = 1.0;
            for (int i = 0; i < n_; ++i) {
                x(i) = lo(i) + size(i) * r.x[idx[i]];
                w *= r.wk[idx[i]];
            }
            if (f(x) >= t) {
                above += w;
                any_above = true;
            } else {
                any_below = true;
            }
            int i = 0;
            for (; i < n_; ++i) {
                if (++idx[i] < k) break;
                idx[i] = 0;
            }
            if (i == n_) break;
        }
        if (!(any_above && any_below) || d >= limit) return above;
        Point half = size / 2.0;
        double sum = 0.0;
        for (int mask = 0; mask < (1 << n_); ++mask) {
            Point clo = lo;
            for (int i = 0; i < n_; ++i)
                if ((mask >> i) & 1) clo(i) += half(i);
            sum += frac(clo, half, d + 1);
        }
        return sum / static_cast<double>(1 << n_);
    };
    double total = 0.0;
    for (const Cell& c : cells_) total += (c.size.prod() / cube_.volume()) * frac(c.lo, c.size, 0);
    for (std::size_t c = 0; c < corners_.size(); ++c) {
        if (core_volume_[c] <= 0.0) continue;
        const double h = std::pow(core_volume_[c] * cube_.volume(), 1.0 / n_);
        Point probe = corners_[c];
        for (int i = 0; i < n_; ++i) {
            const double mid = cube_.center(i);
            probe(i) += (mid >= corners_[c](i) ? 0.5 : -0.5) * h;
        }
        total += core_volume_[c] * (f(probe) >= t ? 1.0 : 0.0);
    }
    return total;
}

namespace {

enum class Mode { Relative, AbsoluteLog };

std::vector<double> eval_nodes(const ScalarField& f, const CubeRule& rule, bool take_log) {
    std::vector<double> v(rule.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double y = f(rule.node(i));
        double val = take_log ? std::log(y) : y;
        if (take_log && !(y > 0.0)) {
            std::ostringstream os;
            os << "cube_log_average: integrand not positive at node (";
            for (int j = 0; j < rule.node(i).size(); ++j) os << (j ? ", " : "") << rule.node(i)(j);
            os << ")";
            throw NumericError(os.str());
        }
        if (!std::isfinite(val)) {
            std::ostringstream os;
            os << "quadrature: non-finite integrand at node (";
            for (int j = 0; j < rule.node(i).size(); ++j) os << (j ? ", " : "") << rule.node(i)(j);
            os << ")";
            throw NumericError(os.str());
        }
        v[i] = val;
    }
    return v;
}

AverageResult adaptive(const ScalarField& f, const Cube& q, const QuadratureConfig& cfg, Mode mode, bool take_log) {
    CubeRule rule(q, cfg);
    AverageResult res;
    long used = 0;
    for (int pass = 0;; ++pass) {
        std::vector<double> v = eval_nodes(f, rule, take_log);
        used += static_cast<long>(v.size());
        CubeRule::Estimate e = rule.average(v);
        res.value = e.value;
        res.error_estimate = e.error;
        res.diverged = e.diverged;
        if (e.diverged) {
            res.converged = false;
            break;
        }
        const double target = mode == Mode::Relative ? cfg.rel_tol * std::max(std::abs(e.value), 1e-300) : cfg.rel_tol;
        res.converged = e.error <= target;
        if (res.converged || pass >= cfg.max_adaptive_passes || !rule.can_refine()) break;
        rule = rule.refined(v, 0.5 * target);
    }
    res.nodes_used = used;
    res.refined_near = rule.refined_near();
    return res;
}

}  // namespace

AverageResult cube_average(const ScalarField& f, const Cube& q, const QuadratureConfig& cfg) {
    return adaptive(f, q, cfg, Mode::Relative, false);
}

std::vector<AverageResult> cube_average_many(const VectorField& f, std::size_t count, const Cube& q,
                                             const QuadratureConfig& cfg, bool joint_scale) {
    CubeRule rule(q, cfg);
    std::vector<AverageResult> res(count);
    long used = 0;
    for (int pass = 0;; ++pass) {
        const std::size_t size = rule.size();
        std::vector<double> vals(count * size), row(count), combined(size, 0.0), col(size);
        for (std::size_t i = 0; i < size; ++i) {
            f(rule.node(i), row);
            for (std::size_t c = 0; c < count; ++c) {
                if (!std::isfinite(row[c])) throw NumericError("cube_average_many: non-finite integrand");
                vals[c * size + i] = row[c];
            }
        }
        used += static_cast<long>(size);
        for (std::size_t c = 0; c < count; ++c) {
            std::copy_n(vals.begin() + static_cast<std::ptrdiff_t>(c * size), size, col.begin());
            CubeRule::Estimate e = rule.average(col);
            res[c].value = e.value;
            res[c].error_estimate = e.error;
            res[c].diverged = e.diverged;
        }
        double top = 1e-300;
        for (const auto& r : res) top = std::max(top, std::abs(r.value));
        bool done = true;
        for (std::size_t c = 0; c < count; ++c) {
            const double scale = joint_scale ? top : std::max(std::abs(res[c].value), 1e-300);
            res[c].converged = !res[c].diverged && res[c].error_estimate <= cfg.rel_tol * scale;
            done = done && res[c].converged;
            for (std::size_t i = 0; i < size; ++i) combined[i] += std::abs(vals[c * size + i]) / scale;
        }
        bool any_diverged = false;
        for (const auto& r : res) any_diverged = any_diverged || r.diverged;
        if (done || any_diverged || pass >= cfg.max_adaptive_passes || !rule.can_refine()) break;
        rule = rule.refined(combined, 0.5 * cfg.rel_tol);
    }
    for (auto& r : res) {
        r.nodes_used = used;
        r.refined_near = rule.refined_near();
    }
    return res;
}

AverageResult cube_log_mean_exp(const ScalarField& logf, const Cube& q, const QuadratureConfig& cfg) {
    CubeRule rule(q, cfg);
    AverageResult res;
    long used = 0;
    for (int pass = 0;; ++pass) {
        std::vector<double> v = eval_nodes(logf, rule, false);
        used += static_cast<long>(v.size());
        CubeRule::Estimate e = rule.log_average_exp(v);
        res.value = e.value;
        res.error_estimate = e.error;
        res.diverged = e.diverged;
        if (e.diverged) {
            res.converged = false;
            break;
        }
        res.converged = e.error <= cfg.rel_tol;
        if (res.converged || pass >= cfg.max_adaptive_passes || !rule.can_refine()) break;
        std::vector<double> ev(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) ev[i] = std::exp(v[i] - e.value);
        rule = rule.refined(ev, 0.5 * cfg.rel_tol);
    }
    res.nodes_used = used;
    res.refined_near = rule.refined_near();
    return res;
}

AverageResult cube_log_average_of_log(const ScalarField& logf, const Cube& q, const QuadratureConfig& cfg) {
    AverageResult r = adaptive(logf, q, cfg, Mode::AbsoluteLog, false);
    if (!r.diverged) {
        r.error_estimate = std::exp(r.value) * r.error_estimate;
        r.value = std::exp(r.value);
    }
    return r;
}

AverageResult cube_log_average(const ScalarField& f, const Cube& q, const QuadratureConfig& cfg) {
    AverageResult r = adaptive(f, q, cfg, Mode::AbsoluteLog, true);
    if (!r.diverged) {
        r.error_estimate = std::exp(r.value) * r.error_estimate;
        r.value = std::exp(r.value);
    }
    return r;
}

AverageResult nested_logavg_of_avg(const PairField& inner, const Cube& q, const Cube& r, const QuadratureConfig& cfg) {
    QuadratureConfig half = cfg;
    half.rel_tol = cfg.rel_tol / 2.0;
    CubeRule rq(q, half), rr(r, half);
    std::vector<double> logg(rr.size());
    std::vector<double> xs(rq.size());
    double inner_err = 0.0;
    AverageResult res;
    for (std::size_t j = 0; j < rr.size(); ++j) {
        const Point& y = rr.node(j);
        for (std::size_t i = 0; i < rq.size(); ++i) {
            xs[i] = inner(rq.node(i), y);
            if (!std::isfinite(xs[i])) {
                std::ostringstream os;
                os << "nested_logavg_of_avg: non-finite inner integrand at outer node (";
                for (int k = 0; k < y.size(); ++k) os << (k ? ", " : "") << y(k);
                os << ")";
                throw NumericError(os.str());
            }
        }
        CubeRule::Estimate g = rq.average(xs);
        if (g.diverged) {
            res.diverged = true;
            res.converged = false;
            res.value = std::numeric_limits<double>::infinity();
            return res;
        }
        if (!(g.value > 0.0)) throw NumericError("nested_logavg_of_avg: inner average not positive");
        logg[j] = std::log(g.value);
        inner_err = std::max(inner_err, g.error / g.value);
    }
    CubeRule::Estimate o = rr.average(logg);
    res.nodes_used = static_cast<long>(rq.size() * rr.size() + rr.size());
    res.refined_near = rq.refined_near();
    res.refined_near.insert(res.refined_near.end(), rr.refined_near().begin(), rr.refined_near().end());
    if (o.diverged) {
        res.diverged = true;
        res.converged = false;
        res.value = std::numeric_limits<double>::infinity();
        return res;
    }
    res.value = std::exp(o.value);
    res.error_estimate = res.value * (o.error + inner_err);
    res.converged = o.error + inner_err <= cfg.rel_tol;
    return res;
}

}  // namespace mwlab
