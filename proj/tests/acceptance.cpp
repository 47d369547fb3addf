// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "mwlab/calibration.hpp"
#include "mwlab/characteristics.hpp"
#include "mwlab/dimensions.hpp"
#include "mwlab/reducing.hpp"

using namespace mwlab;

namespace {

const QuadratureConfig kCfg{};
constexpr double kE = std::numbers::e;

struct Outcome {
    bool pass = true;
    std::ostringstream detail;
    int failures = 0;

    void check(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (failures++ < 4) detail << " [" << what << "]";
        }
    }
};

std::string g(double x) {
    std::ostringstream s;
    s.precision(6);
    s << x;
    return s.str();
}

WeightSpec times_identity(const WeightSpec& s, int m) { return m == 1 ? s : WeightSpec::scalar_times_identity(s, m); }

// avg over [lo, hi] of |x|^a
double power_average(double a, double lo, double hi) {
    auto f = [a](double x) { return std::copysign(std::pow(std::abs(x), a + 1.0) / (a + 1.0), x); };
    return (f(hi) - f(lo)) / (hi - lo);
}

const std::vector<Cube>& test_cubes() {
    static const std::vector<Cube> c{Cube::interval(0, 1), Cube::interval(-1, 1), Cube::interval(0, 4),
                                     Cube::interval(0.25, 0.5)};
    return c;
}

ProbeFamily builtin_family(const WeightSpec& w) {
    return probe_family(Box{make_point({-1.0}), make_point({4.0})}, 0, 3, w.singular_points(), 0);
}

void identity_calibration(Outcome& o) {
    for (int m = 1; m <= 3; ++m) {
        for (double p : {0.5, 1.0, 2.0, 3.0}) {
            const std::string text = R"({"weight": {"kind": "identity", "m": )" + std::to_string(m) + R"(}, "p": )" +
                                     g(p) + R"(, "kinds": ["ap", "apinf", "scalar", "fujii_wilson", "sc"]})";
            const mwcli::ExperimentConfig c = mwcli::parse_config_text(text);
            const std::string tag = "m=" + std::to_string(m) + " p=" + g(p);
            const mwcli::CommandResult ch = mwcli::cmd_characteristic(c);
            for (const auto& r : ch.report.at("results").at("characteristics")) {
                o.check(std::abs(mwcli::from_num(r.at("value")) - 1.0) <= 1e-6,
                        tag + " " + r.at("kind").get<std::string>() + " = " + r.at("value").dump());
                if (r.contains("vector_value"))
                    o.check(std::abs(mwcli::from_num(r.at("vector_value")) - 1.0) <= 1e-6, tag + " sc vector");
            }
            const ReducingOperator a = reduce(WeightSpec::identity(m), Cube::interval(0, 1), p, kCfg);
            const ReducingOperator b = reduce_general(WeightSpec::identity(m), Cube::interval(-1, 3), p, kCfg);
            o.check((a.matrix.matrix() - Mat::Identity(m, m)).norm() <= 1e-8, tag + " reduce");
            o.check((b.matrix.matrix() - Mat::Identity(m, m)).norm() <= 1e-8, tag + " reduce_general");
            const mwcli::CommandResult v = mwcli::cmd_verify(c);
            o.check(v.exit_code == 0, tag + " verify exit " + std::to_string(v.exit_code));
        }
    }
    o.detail << " 12 (m, p) combinations, 5 characteristics, 2 reduce routes, 9 suites";
}

void scalar_bridge(Outcome& o) {
    double worst = 0.0;
    for (int m = 1; m <= 3; ++m)
        for (double l : {0.25, 1.0, 4.0})
            for (double p : {0.5, 1.0, 2.0}) {
                const double oracle = power_average(1.0, 0.0, l) * std::exp(1.0 - std::log(l));
                const CubeValue v = apinf_cube(times_identity(WeightSpec::power(1.0), m), p, Cube::interval(0, l), kCfg);
                worst = std::max(worst, std::abs(v.value - oracle));
                o.check(std::abs(v.value - oracle) <= 1e-3 && std::abs(oracle - kE / 2.0) <= 1e-12,
                        "m=" + std::to_string(m) + " L=" + g(l) + " p=" + g(p) + " value " + g(v.value));
            }
    o.detail << " 27 cases, max |value - e/2| = " << g(worst);
}

void membership_table(Outcome& o) {
    int mismatches = 0;
    const ProbeFamily fam = probe_family(Box{make_point({-1.0}), make_point({1.0})}, 0, 3, {zero_point(1)}, 0);
    for (double a : {-0.9, -0.5, 0.0, 1.0, 1.9, 2.1, 3.0})
        for (double p : {1.0, 1.5, 3.0}) {
            const bool member = p > 1.0 ? (a > -1.0 && a < p - 1.0) : (a > -1.0 && a <= 0.0);
            const CharacteristicReport r = ap_characteristic(WeightSpec::power(a), p, fam, kCfg);
            if (r.diverged == member) {
                ++mismatches;
                o.check(false, "a=" + g(a) + " p=" + g(p) + " diverged=" + (r.diverged ? "yes" : "no"));
            }
        }
    o.detail << " 21 cells, " << mismatches << " mismatches";
}

void dimension_recovery(Outcome& o) {
    int cases = 0;
    double worst = 0.0;
    for (auto [a, b] : {std::pair{1.0, 0.0}, {-0.5, 1.0}, {2.0, -1.0}, {-0.5, -1.0}})
        for (bool tilde : {false, true}) {
            const WeightSpec w = tilde ? WeightSpec::log_in(a, b) : WeightSpec::log_out(a, b);
            // w = |x|^a log(e + |x|^{-1})^b or its inverted-logarithm twin
            const double lo = std::max(-a, 0.0), hi = std::max(a, 0.0);
            const bool lo_att = tilde ? (a > 0 || b <= 0) : (a > 0 || b >= 0);
            const bool hi_att = tilde ? (a < 0 || b >= 0) : (a < 0 || b <= 0);
            const std::string tag = std::string(tilde ? "log_in(" : "log_out(") + g(a) + "," + g(b) + ")";
            const DimensionEstimate dl = estimate_dimension(w, 2.0, DimensionEstimate::Kind::Lower, kCfg);
            const DimensionEstimate du = estimate_dimension(w, 2.0, DimensionEstimate::Kind::Upper, kCfg);
            worst = std::max({worst, std::abs(dl.d_hat - lo), std::abs(du.d_hat - hi)});
            o.check(std::abs(dl.d_hat - lo) <= 0.05, tag + " lower " + g(dl.d_hat));
            o.check(std::abs(du.d_hat - hi) <= 0.05, tag + " upper " + g(du.d_hat));
            o.check(dl.attained == lo_att, tag + " lower attainment");
            o.check(du.attained == hi_att, tag + " upper attainment");
            cases += 2;
        }
    o.detail << " " << cases << " estimates, max |d_hat - d| = " << g(worst);
}

void reducing_sandwich(Outcome& o) {
    double worst_band = 0.0, worst_p2 = 0.0;
    int count = 0;
    for (int m = 1; m <= 3; ++m)
        for (const NamedWeight& nw : builtin_weights(m))
            for (const Cube& q : test_cubes())
                for (double p : {0.5, 1.0, 2.0, 3.0}) {
                    const ReducingOperator a = reduce_general(nw.weight, q, p, kCfg);
                    const double band = a.c_high / a.c_low;
                    worst_band = std::max(worst_band, band / std::sqrt(m));
                    o.check(band <= 2.0 * std::sqrt(m), nw.name + " m=" + std::to_string(m) + " " + to_string(q) +
                                                            " p=" + g(p) + " band " + g(band));
                    ++count;
                    if (p == 2.0) {
                        const Mat e = reduce_exact_p2(nw.weight, q, kCfg).matrix.matrix();
                        const double rel = operator_norm(a.matrix.matrix() - e) / operator_norm(e);
                        worst_p2 = std::max(worst_p2, rel);
                        o.check(rel <= 0.05, nw.name + " p=2 rel " + g(rel));
                    }
                }
    o.detail << " " << count << " operators, max band/sqrt(m) = " << g(worst_band)
             << ", max p=2 relative error = " << g(worst_p2);
}

void reverse_holder(Outcome& o) {
    double worst = 0.0;
    int cases = 0;
    for (int m = 1; m <= 3; ++m)
        for (const NamedWeight& nw : builtin_weights(m))
            for (double p : {0.5, 1.0, 2.0, 3.0}) {
                const ProbeFamily fam = builtin_family(nw.weight);
                const double sc = sc_characteristic(nw.weight, p, fam, 4, 4, kCfg).matrix.value;
                const ReverseHolderReport r = reverse_holder_check(nw.weight, p, 8, fam, 50, kCfg, std::max(sc, 1.0), 0);
                const double c8 = frozen_constants(m, p).cor8;
                const std::string tag = nw.name + " m=" + std::to_string(m) + " p=" + g(p);
                o.check(std::isfinite(sc), tag + " sc diverged");
                // each (M, Q) pick is tested at r = 1, the midpoint and the endpoint
                o.check(r.cases.size() == 3 * 50, tag + " cases " + std::to_string(r.cases.size()));
                o.check(r.pass, tag + " factor-2 inequality");
                o.check(r.cor8_sup <= c8, tag + " sup " + g(r.cor8_sup) + " > " + g(c8));
                worst = std::max(worst, r.cor8_sup / c8);
                cases += static_cast<int>(r.cases.size()) / 3;
            }
    o.detail << " " << cases << " (M, Q) cases, max sup / frozen C = " << g(worst);
}

void equivalence(Outcome& o) {
    double worst = 0.0;
    int count = 0;
    for (int m = 1; m <= 3; ++m)
        for (const NamedWeight& nw : builtin_weights(m))
            for (const Cube& q : test_cubes())
                for (double p : {0.5, 1.0, 2.0, 3.0}) {
                    const EquivalenceReport e = compare_conditions(nw.weight, p, q, kCfg, 8);
                    o.check(e.finite && e.cross_ratio <= 100.0, nw.name + " m=" + std::to_string(m) + " " +
                                                                   to_string(q) + " p=" + g(p) + " cross " +
                                                                   g(e.cross_ratio));
                    worst = std::max(worst, e.cross_ratio);
                    ++count;
                }
    for (int m = 1; m <= 3; ++m) {
        const EquivalenceReport e =
            compare_conditions(times_identity(WeightSpec::power(1.0), m), 1.0, Cube::interval(0, 1), kCfg, 8);
        const double oracle = power_average(1.0, 0.0, 1.0) * kE;
        o.check(e.conditions[5].name == "vii" && std::abs(e.conditions[5].constant - oracle) <= 1e-3,
                "(vii) = " + g(e.conditions[5].constant));
    }
    o.detail << " " << count << " reports, max cross-ratio = " << g(worst);
}

void distributional(Outcome& o) {
    std::vector<double> ms;
    for (int k = 1; k <= 10; ++k) ms.push_back(k);
    const Cube q = Cube::interval(0, 1);
    for (int m : {1, 2}) {
        const WeightSpec w = times_identity(WeightSpec::power(1.0), m);
        const double apinf = apinf_cube(w, 1.0, q, kCfg).value;
        const CalibratedConstants c = frozen_constants(m, 1.0);
        const DistributionalReport d = distributional_check(w, 1.0, q, ms, apinf, c.distributional, kCfg);
        // A_Q = 1/2, so the superlevel set {y : 1/(2y) >= e^M} is [0, e^{-M}/2]
        const double at3 = d.rows.at(2).fraction;
        o.check(std::abs(at3 - std::exp(-3.0) / 2.0) <= 1e-3, "fraction at M=3 " + g(at3));
        o.check(d.pass, "distributional bound");
        o.check(d.decay_slope <= -0.9, "slope " + g(d.decay_slope));
        for (double mm : {1.0, 2.0, 4.0}) {
            const StoppingReport s = stopping_time_check(w, 1.0, q, mm, 5, apinf, c.stopping, kCfg);
            o.check(s.pass, "stopping M=" + g(mm) + " ratio " + g(s.ratio) + " > " + g(s.bound));
        }
        if (m == 1) o.detail << " fraction(M=3) = " << g(at3) << ", decay slope = " << g(d.decay_slope);
    }
}

void sharpness(Outcome& o) {
    for (auto [d1, d2] : {std::pair{0.5, 0.0}, {0.0, 1.0}, {0.5, 1.0}}) {
        const WeightSpec w = WeightSpec::sharpness(d1, d2, 1);
        const std::string tag = "(" + g(d1) + "," + g(d2) + ")";
        const double r1 = verify_sharp_estimate(w, 1.0, d1, d2, 16, kCfg).max_ratio;
        const double r4 = verify_sharp_estimate(w, 1.0, d1, d2, 64, kCfg).max_ratio;
        o.check(std::isfinite(r1) && std::isfinite(r4), tag + " max ratio finite");
        o.check(r4 / r1 < 2.0 && r1 / r4 < 2.0, tag + " pair-count stability " + g(r4 / r1));
        const SharpnessFit f = sharpness_experiment(d1, d2, 1, 1, 1.0, kCfg);
        o.check(f.a_fit >= d1 - 0.1, tag + " a " + g(f.a_fit));
        o.check(f.b_fit >= d2 - 0.1, tag + " b " + g(f.b_fit));
        o.check(f.c_fit >= d1 + d2 - 0.15, tag + " c " + g(f.c_fit));
        o.detail << " " << tag << ": ratio " << g(r1) << ", fits " << g(f.a_fit) << "/" << g(f.b_fit) << "/"
                 << g(f.c_fit);
    }
}

void multiplier(Outcome& o) {
    const double inf = std::numeric_limits<double>::infinity();
    double worst_slope = -inf, worst_id = 0.0;
    for (double q : {1.0, 2.0, inf}) {
        for (int m : {1, 2}) {
            const MultiplierReport r =
                multiplier_bound_check(times_identity(WeightSpec::power(1.0), m), 2.0, q, 6, 100, kCfg);
            o.check(std::isfinite(r.max_ratio), "q=" + g(q) + " ratio");
            o.check(r.depth_slope < 0.05, "q=" + g(q) + " slope " + g(r.depth_slope));
            worst_slope = std::max(worst_slope, r.depth_slope);
            const MultiplierReport id = multiplier_bound_check(WeightSpec::identity(m), 2.0, q, 6, 100, kCfg);
            o.check(id.max_ratio <= 1.0 + 1e-3, "identity ratio " + g(id.max_ratio));
            worst_id = std::max(worst_id, id.max_ratio);
        }
    }
    o.detail << " max depth slope = " << g(worst_slope) << ", identity max ratio = " << g(worst_id);
}

// max |A v| over the unit sphere by grid search with successive zooms
double sphere_max(const Mat& a) {
    const int m = static_cast<int>(a.cols());
    auto value = [&](double t, double phi) {
        Vec v(m);
        v(0) = std::cos(t);
        v(1) = std::polar(std::sin(t), phi);
        return (a * v).norm();
    };
    double bt = 0, bp = 0, best = -1, wt = std::numbers::pi / 2, wp = std::numbers::pi;
    double ct = wt / 2, cp = 0;
    for (int pass = 0; pass < 6; ++pass) {
        const int k = 200;
        for (int i = 0; i <= k; ++i)
            for (int j = 0; j <= k; ++j) {
                const double t = ct - wt + 2 * wt * i / k, phi = cp - wp + 2 * wp * j / k;
                const double v = value(t, phi);
                if (v > best) best = v, bt = t, bp = phi;
            }
        ct = bt, cp = bp, wt *= 0.05, wp *= 0.05;
    }
    return best;
}

void brute_force(Outcome& o) {
    double worst = 0.0;
    for (double a : {1.0, -0.5, 0.5, 2.0})
        for (const Cube& q : test_cubes())
            for (double p : {0.5, 1.0, 2.0, 3.0}) {
                const double oracle = std::pow(power_average(a, q.lower()(0), q.upper()(0)), 1.0 / p);
                const double fast = reduce(WeightSpec::power(a), q, p, kCfg).matrix.matrix()(0, 0).real();
                const double fit = reduce_general(WeightSpec::power(a), q, p, kCfg).matrix.matrix()(0, 0).real();
                worst = std::max({worst, std::abs(fast - oracle) / oracle, std::abs(fit - oracle) / oracle});
                o.check(std::abs(fast - oracle) <= 1e-5 * oracle && std::abs(fit - oracle) <= 1e-5 * oracle,
                        "power " + g(a) + " " + to_string(q) + " p=" + g(p));
            }
    std::mt19937_64 gen(20261016);
    std::normal_distribution<double> nd;
    double gap = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        Mat a(2, 2);
        for (int i = 0; i < 2; ++i)
            for (int k = 0; k < 2; ++k) a(i, k) = trial % 2 ? std::complex<double>(nd(gen), nd(gen)) : nd(gen);
        const double s = sphere_max(a), n = operator_norm(a);
        o.check(s <= n * (1 + 1e-12) && n - s <= 1e-6 * n, "operator norm " + g(n) + " vs " + g(s));
        gap = std::max(gap, (n - s) / n);
    }
    const auto x = [](const Point& p) { return std::abs(p(0)); };
    const double e_inv = cube_log_average(x, Cube::interval(0, 1), kCfg).value;
    const double half_e = apinf_cube(WeightSpec::power(1.0), 1.0, Cube::interval(0, 1), kCfg).value;
    const WeightSpec w2 = WeightSpec::scalar_times_identity(WeightSpec::power(1.0), 2);
    const ReducingOperator r = reduce_general(w2, Cube::interval(0, 1), 1.0, kCfg);
    const double two_e = inverse_logavg_identity(r, w2, Mat::Identity(2, 2), kCfg);
    o.check(std::abs(e_inv - 1.0 / kE) <= 1e-3, "exp avg log x = " + g(e_inv));
    o.check(std::abs(half_e - kE / 2.0) <= 1e-3, "e/2 form = " + g(half_e));
    o.check(std::abs(two_e - 2.0 / kE) <= 1e-3, "2/e form = " + g(two_e));
    o.detail << " reduce rel err " << g(worst) << ", norm gap " << g(gap) << ", log-averages " << g(e_inv) << " "
             << g(half_e) << " " << g(two_e);
}

struct Criterion {
    int id;
    const char* name;
    std::function<void(Outcome&)> run;
};

}  // namespace

int main() {
    const std::vector<Criterion> all{
        {1, "identity-weight calibration", identity_calibration},
        {2, "scalar bridge e/2", scalar_bridge},
        {3, "A_p membership table", membership_table},
        {4, "dimension recovery", dimension_recovery},
        {5, "reducing-operator sandwich", reducing_sandwich},
        {6, "reverse Holder with frozen constant", reverse_holder},
        {7, "equivalent conditions", equivalence},
        {8, "distributional and stopping-time bounds", distributional},
        {9, "sharpness squeeze", sharpness},
        {10, "multiplier bound", multiplier},
        {11, "brute-force oracles", brute_force},
    };
    int failed = 0;
    for (const Criterion& c : all) {
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            c.run(o);
        } catch (const std::exception& e) {
            o.check(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (o.failures > 4) o.detail << " [+" << o.failures - 4 << " more]";
        std::printf("%s %2d %s:%s (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.str().c_str(), secs);
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}
