#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "detail.hpp"
#include "mwlab/characteristics.hpp"
#include "mwlab/errors.hpp"

namespace mwlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::size_t ipow(std::size_t b, int e) {
    std::size_t r = 1;
    for (int i = 0; i < e; ++i) r *= b;
    return r;
}

// Sliding maximum along one axis: out[c] = max over s in [c-k+1, c] clipped to [0, len-1] of in[s].
// in has extent len on that axis, out has extent len + k - 1. Entries are nonnegative, so zero padding is neutral.
// Block prefix/suffix maxima (van Herk, Gil-Werman) keep this linear in len for every k.
void spread_axis(const std::vector<double>& in, std::vector<std::size_t> dims, int axis, std::size_t k,
                 std::vector<double>& out, std::vector<std::size_t>& out_dims) {
    const std::size_t len = dims[static_cast<std::size_t>(axis)];
    const std::size_t olen = len + k - 1;
    out_dims = dims;
    out_dims[static_cast<std::size_t>(axis)] = olen;
    std::size_t stride = 1;
    for (int a = 0; a < axis; ++a) stride *= dims[static_cast<std::size_t>(a)];
    std::size_t outer = 1;
    for (std::size_t a = static_cast<std::size_t>(axis) + 1; a < dims.size(); ++a) outer *= dims[a];
    out.assign(stride * olen * outer, 0.0);
    // padded[i] = in[i - (k - 1)], out[c] = max padded[c .. c + k - 1]
    const std::size_t plen = ((olen + k - 1 + k - 1) / k) * k;
    std::vector<double> pad(plen), pre(plen), suf(plen);
    for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t s = 0; s < stride; ++s) {
            const std::size_t ib = o * len * stride + s;
            const std::size_t ob = o * olen * stride + s;
            std::fill(pad.begin(), pad.end(), 0.0);
            for (std::size_t c = 0; c < len; ++c) pad[c + k - 1] = in[ib + c * stride];
            for (std::size_t b = 0; b < plen; b += k) {
                pre[b] = pad[b];
                for (std::size_t i = b + 1; i < b + k; ++i) pre[i] = std::max(pre[i - 1], pad[i]);
                suf[b + k - 1] = pad[b + k - 1];
                for (std::size_t i = b + k - 1; i-- > b;) suf[i] = std::max(suf[i + 1], pad[i]);
            }
            for (std::size_t c = 0; c < olen; ++c) out[ob + c * stride] = std::max(suf[c], pre[c + k - 1]);
        }
    }
}

// sum_c M(c) / sum_c v(c), M the grid cube-maximal function of the cell averages v.
double grid_ratio_1d(const std::vector<double>& v) {
    const std::size_t cells = v.size();
    std::vector<double> pre(cells + 1, 0.0);
    for (std::size_t i = 0; i < cells; ++i) pre[i + 1] = pre[i] + v[i];
    // window [s, s + k) raises every cell it covers; apply it to two power-of-two blocks, then push down
    int levels = 1;
    while ((std::size_t{1} << levels) <= cells) ++levels;
    std::vector<std::vector<double>> up(static_cast<std::size_t>(levels), std::vector<double>(cells, 0.0));
    for (std::size_t k = 1; k <= cells; ++k) {
        int lev = 0;
        while ((std::size_t{2} << lev) <= k) ++lev;
        const std::size_t span = std::size_t{1} << lev;
        std::vector<double>& row = up[static_cast<std::size_t>(lev)];
        const double inv = 1.0 / static_cast<double>(k);
        for (std::size_t s = 0; s + k <= cells; ++s) {
            const double a = (pre[s + k] - pre[s]) * inv;
            row[s] = std::max(row[s], a);
            row[s + k - span] = std::max(row[s + k - span], a);
        }
    }
    for (int lev = levels - 1; lev > 0; --lev) {
        const std::size_t half = std::size_t{1} << (lev - 1);
        const std::vector<double>& hi = up[static_cast<std::size_t>(lev)];
        std::vector<double>& lo = up[static_cast<std::size_t>(lev - 1)];
        for (std::size_t s = 0; s + 2 * half <= cells; ++s) {
            lo[s] = std::max(lo[s], hi[s]);
            lo[s + half] = std::max(lo[s + half], hi[s]);
        }
    }
    double num = 0.0;
    for (double b : up[0]) num += b;
    return num / pre[cells];
}

double grid_ratio(const std::vector<double>& v, int n, std::size_t cells) {
    if (n == 1) return grid_ratio_1d(v);
    const std::size_t total = v.size();
    const std::size_t side = cells + 1;
    std::vector<double> pre(ipow(side, n), 0.0);
    std::vector<std::size_t> pstride(static_cast<std::size_t>(n));
    pstride[0] = 1;
    for (int a = 1; a < n; ++a) pstride[static_cast<std::size_t>(a)] = pstride[static_cast<std::size_t>(a - 1)] * side;
    std::vector<std::size_t> idx(static_cast<std::size_t>(n));
    for (std::size_t c = 0; c < total; ++c) {
        std::size_t r = c, off = 0;
        for (int a = 0; a < n; ++a) {
            idx[static_cast<std::size_t>(a)] = r % cells;
            r /= cells;
            off += (idx[static_cast<std::size_t>(a)] + 1) * pstride[static_cast<std::size_t>(a)];
        }
        pre[off] = v[c];
    }
    for (int a = 0; a < n; ++a) {
        const std::size_t st = pstride[static_cast<std::size_t>(a)];
        for (std::size_t i = 0; i < pre.size(); ++i)
            if ((i / st) % side > 0) pre[i] += pre[i - st];
    }

    std::vector<double> best(total, 0.0);
    std::vector<double> avg, tmp;
    std::vector<std::size_t> dims, tdims;
    for (std::size_t k = 1; k <= cells; ++k) {
        const std::size_t pos = cells - k + 1;
        const double vol = std::pow(static_cast<double>(k), n);
        avg.assign(ipow(pos, n), 0.0);
        for (std::size_t s = 0; s < avg.size(); ++s) {
            std::size_t r = s;
            for (int a = 0; a < n; ++a) {
                idx[static_cast<std::size_t>(a)] = r % pos;
                r /= pos;
            }
            double sum = 0.0;
            for (int mask = 0; mask < (1 << n); ++mask) {
                std::size_t off = 0;
                int sign = 1;
                for (int a = 0; a < n; ++a) {
                    const bool hi = (mask >> a) & 1;
                    off += (idx[static_cast<std::size_t>(a)] + (hi ? k : 0)) * pstride[static_cast<std::size_t>(a)];
                    if (!hi) sign = -sign;
                }
                sum += sign * pre[off];
            }
            avg[s] = sum / vol;
        }
        dims.assign(static_cast<std::size_t>(n), pos);
        for (int a = 0; a < n; ++a) {
            spread_axis(avg, dims, a, k, tmp, tdims);
            avg.swap(tmp);
            dims.swap(tdims);
        }
        for (std::size_t c = 0; c < total; ++c) best[c] = std::max(best[c], avg[c]);
    }
    double num = 0.0, den = 0.0;
    for (std::size_t c = 0; c < total; ++c) {
        num += best[c];
        den += v[c];
    }
    return num / den;
}

}  // namespace

int default_grid_depth(int n) { return n == 1 ? 10 : n == 2 ? 5 : 3; }

double ball_cube_factor(int n) {
    if (n < 1) throw DimensionError("ball_cube_factor: n must be positive");
    const double unit_ball = std::pow(std::numbers::pi, n / 2.0) / std::tgamma(n / 2.0 + 1.0);
    return std::pow(2.0, n) / unit_ball;
}

namespace detail {

CellGrid make_cell_grid(const Cube& q, const QuadratureConfig& cfg, int depth) {
    if (depth < 1 || depth > 14) throw ParameterError("fujii_wilson: grid depth must be in [1, 14]");
    CellGrid g;
    g.cube = q;
    g.n = q.dim();
    g.depth = depth;
    const std::size_t per = std::size_t{1} << depth;
    const std::size_t total = ipow(per, g.n);
    if (total > (std::size_t{1} << 20)) throw ParameterError("fujii_wilson: grid too large for this dimension");
    QuadratureConfig c = cfg;
    c.base_subdivisions = 2;
    const double h = q.edge / static_cast<double>(per);
    const Point lo = q.lower();
    g.cells.reserve(total);
    g.offsets.reserve(total + 1);
    for (std::size_t i = 0; i < total; ++i) {
        Point corner = lo;
        std::size_t r = i;
        for (int a = 0; a < g.n; ++a) {
            corner(a) += h * static_cast<double>(r % per);
            r /= per;
        }
        g.offsets.push_back(g.nodes.size());
        g.cells.emplace_back(Cube::from_corner(corner, h), c);
        const CubeRule& rule = g.cells.back();
        g.nodes.insert(g.nodes.end(), rule.nodes().begin(), rule.nodes().end());
    }
    g.offsets.push_back(g.nodes.size());
    return g;
}

std::vector<double> cell_log_averages(const CellGrid& g, std::span<const double> logf) {
    if (logf.size() != g.nodes.size()) throw DimensionError("cell_log_averages: value count mismatch");
    std::vector<double> out(g.cells.size());
    for (std::size_t i = 0; i < g.cells.size(); ++i) {
        const CubeRule::Estimate e =
            g.cells[i].log_average_exp(logf.subspan(g.offsets[i], g.offsets[i + 1] - g.offsets[i]));
        out[i] = e.diverged ? kInf : e.value;
    }
    return out;
}

FujiiWilsonValue fujii_wilson_grid(std::span<const double> cell_log_avg, int n, int depth) {
    FujiiWilsonValue out;
    double shift = -kInf;
    for (double l : cell_log_avg) {
        if (std::isnan(l)) throw NumericError("fujii_wilson: NaN cell average");
        shift = std::max(shift, l);
    }
    if (shift == kInf) {
        out.value = out.coarse = kInf;
        return out;
    }
    if (shift == -kInf) throw NumericError("fujii_wilson: weight vanishes on the cube");
    const std::size_t per = std::size_t{1} << depth;
    std::vector<double> v(cell_log_avg.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::exp(cell_log_avg[i] - shift);
    out.value = grid_ratio(v, n, per);
    if (depth >= 2) {
        const std::size_t half = per / 2;
        std::vector<double> c(ipow(half, n), 0.0);
        for (std::size_t i = 0; i < v.size(); ++i) {
            std::size_t r = i, off = 0, st = 1;
            for (int a = 0; a < n; ++a) {
                off += ((r % per) / 2) * st;
                r /= per;
                st *= half;
            }
            c[off] += v[i];
        }
        out.coarse = grid_ratio(c, n, half);
    } else {
        out.coarse = out.value;
    }
    out.stable = std::abs(out.value - out.coarse) <= 0.02 * out.value;
    return out;
}

}  // namespace detail

FujiiWilsonValue fujii_wilson_cube(const ScalarField& logf, const Cube& q, const QuadratureConfig& cfg,
                                   int grid_depth) {
    const int depth = grid_depth > 0 ? grid_depth : default_grid_depth(q.dim());
    const detail::CellGrid g = detail::make_cell_grid(q, cfg, depth);
    std::vector<double> l(g.nodes.size());
    for (std::size_t i = 0; i < l.size(); ++i) l[i] = logf(g.nodes[i]);
    return detail::fujii_wilson_grid(detail::cell_log_averages(g, l), q.dim(), depth);
}

}  // namespace mwlab
