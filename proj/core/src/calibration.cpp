#include "mwlab/calibration.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "mwlab/characteristics.hpp"
#include "mwlab/errors.hpp"

namespace mwlab {

namespace {

Mat plane_rotation(int m, int i, int j, double theta) {
    Mat r = Mat::Identity(m, m);
    r(i, i) = r(j, j) = std::cos(theta);
    r(i, j) = -std::sin(theta);
    r(j, i) = std::sin(theta);
    return r;
}

double pow2_ceil(double x) { return x <= 1.0 ? 1.0 : std::exp2(std::ceil(std::log2(x) - 1e-12)); }

WeightSpec times_identity(const WeightSpec& s, int m) { return m == 1 ? s : WeightSpec::scalar_times_identity(s, m); }

struct Row {
    int m;
    double p;
    CalibratedConstants c;
};

// Output of calibrate_constants with the default quadrature configuration.
const std::array<Row, 12> kTable = {{
    {1, 0.5, {1.0, 1.0, 2.0}},
    {1, 1.0, {1.0, 1.0, 2.0}},
    {1, 2.0, {1.0, 1.0, 2.0}},
    {1, 3.0, {1.0, 1.0, 2.0}},
    {2, 0.5, {1.0, 1.0, 2.0}},
    {2, 1.0, {1.0, 1.0, 2.0}},
    {2, 2.0, {1.0, 1.0, 2.0}},
    {2, 3.0, {1.0, 1.0, 2.0}},
    {3, 0.5, {1.0, 1.0, 2.0}},
    {3, 1.0, {1.0, 1.0, 2.0}},
    {3, 2.0, {1.0, 1.0, 2.0}},
    {3, 3.0, {1.0, 1.0, 2.0}},
}};

}  // namespace

std::vector<NamedWeight> builtin_weights(int m) {
    if (m < 1 || m > kMaxDim) throw DimensionError("builtin_weights: m out of range");
    std::vector<NamedWeight> out;
    out.push_back({"identity", WeightSpec::identity(m)});
    out.push_back({"|x|", times_identity(WeightSpec::power(1.0), m)});
    out.push_back({"|x|^-1/2", times_identity(WeightSpec::power(-0.5), m)});
    out.push_back({"log_out(-1/2,1)", times_identity(WeightSpec::log_out(-0.5, 1.0), m)});
    out.push_back({"log_in(1,-1)", times_identity(WeightSpec::log_in(1.0, -1.0), m)});
    if (m >= 2) {
        std::vector<WeightSpec> d;
        const double a[] = {1.0, -0.5, 0.5};
        for (int i = 0; i < m; ++i) d.push_back(WeightSpec::power(a[i % 3]));
        Mat u = plane_rotation(m, 0, 1, 0.3);
        if (m >= 3) u = u * plane_rotation(m, 1, 2, 0.7);
        out.push_back({"rotated diag powers", WeightSpec::conjugated(u, WeightSpec::diagonal(d))});
    }
    return out;
}

CalibratedConstants frozen_constants(int m, double p) {
    for (const Row& r : kTable)
        if (r.m == m && r.p == p) return r.c;
    CalibratedConstants c{0.0, 0.0, 0.0};
    for (const Row& r : kTable) {
        c.distributional = std::max(c.distributional, r.c.distributional);
        c.stopping = std::max(c.stopping, r.c.stopping);
        c.cor8 = std::max(c.cor8, r.c.cor8);
    }
    return c;
}

CalibrationRun calibrate_constants(int m, double p, const QuadratureConfig& cfg) {
    CalibrationRun run;
    run.needed = {1.0, 1.0, 1.0};
    const std::vector<Cube> cubes = {Cube::interval(0, 1), Cube::interval(-1, 1), Cube::interval(0, 4)};
    std::vector<double> ms;
    for (int k = 1; k <= 10; ++k) ms.push_back(k);
    for (const NamedWeight& nw : builtin_weights(m)) {
        const WeightSpec& w = nw.weight;
        const ProbeFamily fam = probe_family(Box{make_point({-1.0}), make_point({4.0})}, 0, 3, w.singular_points(), 0);
        const double apinf = apinf_characteristic(w, p, fam, cfg).value;
        for (const Cube& q : cubes) {
            const DistributionalReport d = distributional_check(w, p, q, ms, apinf, 1.0, cfg);
            for (const DistributionalRow& r : d.rows)
                run.needed.distributional = std::max(run.needed.distributional, std::exp(r.fraction * r.m) / apinf);
            for (double mm : {1.0, 2.0, 4.0}) {
                const StoppingReport s = stopping_time_check(w, p, q, mm, 5, apinf, 1.0, cfg);
                run.needed.stopping = std::max(run.needed.stopping, std::exp(s.ratio * mm) / apinf);
            }
        }
        const double sc = sc_characteristic(w, p, fam, 4, 4, cfg).matrix.value;
        const ReverseHolderReport rh = reverse_holder_check(w, p, 1, fam, 0, cfg, std::max(sc, 1.0), 0);
        run.needed.cor8 = std::max(run.needed.cor8, rh.cor8_sup);
    }
    run.constants = {pow2_ceil(run.needed.distributional), pow2_ceil(run.needed.stopping), pow2_ceil(run.needed.cor8)};
    return run;
}

}  // namespace mwlab
