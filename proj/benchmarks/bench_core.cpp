#include <benchmark/benchmark.h>

#include "mwlab/calibration.hpp"
#include "mwlab/characteristics.hpp"
#include "mwlab/dimensions.hpp"
#include "mwlab/linalg.hpp"
#include "mwlab/quadrature.hpp"
#include "mwlab/reducing.hpp"

using namespace mwlab;

namespace {

const QuadratureConfig kCfg{};

WeightSpec rotated(int m) { return builtin_weights(m).back().weight; }

void BM_MatrixPower(benchmark::State& st) {
    const int m = static_cast<int>(st.range(0));
    Mat a = Mat::Random(m, m);
    const SPDMatrix s(a * a.adjoint() + Mat::Identity(m, m));
    for (auto _ : st) benchmark::DoNotOptimize(matrix_power(s, -0.37));
}
BENCHMARK(BM_MatrixPower)->Arg(2)->Arg(3)->Arg(8);

void BM_OperatorNorm(benchmark::State& st) {
    const int m = static_cast<int>(st.range(0));
    const Mat a = Mat::Random(m, m);
    for (auto _ : st) benchmark::DoNotOptimize(operator_norm(a));
}
BENCHMARK(BM_OperatorNorm)->Arg(2)->Arg(3)->Arg(8);

void BM_SingularAverage(benchmark::State& st) {
    QuadratureConfig c = kCfg;
    c.singular_points = {zero_point(1)};
    const Cube q = Cube::interval(0, 1);
    for (auto _ : st)
        benchmark::DoNotOptimize(cube_average([](const Point& x) { return std::pow(std::abs(x(0)), -0.9); }, q, c));
}
BENCHMARK(BM_SingularAverage);

void BM_ReduceExactP2(benchmark::State& st) {
    const WeightSpec w = rotated(static_cast<int>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(reduce_exact_p2(w, Cube::interval(0, 1), kCfg));
}
BENCHMARK(BM_ReduceExactP2)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_ReduceEllipsoid(benchmark::State& st) {
    const WeightSpec w = rotated(static_cast<int>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(reduce_general(w, Cube::interval(0, 1), 1.0, kCfg));
}
BENCHMARK(BM_ReduceEllipsoid)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_ApinfCube(benchmark::State& st) {
    const WeightSpec w = rotated(static_cast<int>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(apinf_cube(w, 2.0, Cube::interval(-1, 1), kCfg));
}
BENCHMARK(BM_ApinfCube)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_ApinfFamily(benchmark::State& st) {
    const WeightSpec w = WeightSpec::log_out(-0.5, 1.0);
    const ProbeFamily fam = probe_family(Box{make_point({-1.0}), make_point({4.0})}, 0, 4, w.singular_points(), 0);
    for (auto _ : st) benchmark::DoNotOptimize(apinf_characteristic(w, 2.0, fam, kCfg));
}
BENCHMARK(BM_ApinfFamily)->Unit(benchmark::kMillisecond);

void BM_DimensionEstimate(benchmark::State& st) {
    const WeightSpec w = WeightSpec::log_in(2.0, -1.0);
    for (auto _ : st) benchmark::DoNotOptimize(estimate_dimension(w, 2.0, DimensionEstimate::Kind::Upper, kCfg));
}
BENCHMARK(BM_DimensionEstimate)->Unit(benchmark::kMillisecond);

void BM_SharpEstimate(benchmark::State& st) {
    const WeightSpec w = WeightSpec::sharpness(0.5, 1.0, 1);
    for (auto _ : st) benchmark::DoNotOptimize(verify_sharp_estimate(w, 1.0, 0.5, 1.0, 16, kCfg));
}
BENCHMARK(BM_SharpEstimate)->Unit(benchmark::kMillisecond);

void BM_Multiplier(benchmark::State& st) {
    const WeightSpec w = WeightSpec::power(1.0);
    for (auto _ : st) benchmark::DoNotOptimize(multiplier_bound_check(w, 2.0, 2.0, 6, 20, kCfg));
}
BENCHMARK(BM_Multiplier)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
