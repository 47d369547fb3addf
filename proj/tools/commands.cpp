#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "mwlab/calibration.hpp"
#include "mwlab/characteristics.hpp"
#include "mwlab/dimensions.hpp"
#include "mwlab/errors.hpp"
#include "mwlab/reducing.hpp"
#include "mwlab/rng.hpp"

namespace mwcli {

using namespace mwlab;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const char* quantity(CharacteristicReport::Kind k, double p) {
    switch (k) {
    case CharacteristicReport::Kind::Ap:
        return p <= 1.0 ? "ess sup_y avg_x |W^{1/p}(x) W^{-1/p}(y)|^p"
                        : "avg_x (avg_y |W^{1/p}(x) W^{-1/p}(y)|^{p'})^{p/p'}";
    case CharacteristicReport::Kind::ApInfty: return "exp avg_y log avg_x |W^{1/p}(x) W^{-1/p}(y)|^p";
    case CharacteristicReport::Kind::ScalarAInfty: return "avg w * exp avg log w^{-1}";
    case CharacteristicReport::Kind::FujiiWilson: return "avg_Q M(w 1_Q) / avg_Q w";
    case CharacteristicReport::Kind::Sc: return "sup_M [ |W^{1/p} M|^p ]_FW";
    }
    return "";
}

json characteristic_json(const CharacteristicReport& r) {
    json j;
    j["kind"] = to_string(r.kind);
    j["p"] = r.p;
    j["quantity"] = quantity(r.kind, r.p);
    j["value"] = num(r.value);
    j["diverged"] = r.diverged;
    j["argmax_cube"] = cube_to_json(r.argmax_cube);
    j["witness"] = r.witness ? cube_to_json(*r.witness) : json(nullptr);
    j["family"] = r.family;
    json pc = json::array();
    for (const CubeValue& v : r.per_cube)
        pc.push_back({{"cube", cube_to_json(v.cube)}, {"value", num(v.value)}, {"error", num(v.error)},
                      {"diverged", v.diverged}});
    j["per_cube"] = pc;
    j["warnings"] = r.warnings;
    return j;
}

json dimension_json(const DimensionEstimate& d, double p, const char* route) {
    json j;
    j["kind"] = to_string(d.kind);
    j["p"] = p;
    j["route"] = route;
    j["d_hat"] = num(d.d_hat);
    j["slope"] = num(d.slope);
    j["intercept"] = num(d.intercept);
    j["residual_max"] = num(d.residual_max);
    j["accepted"] = d.accepted;
    j["scale_range"] = {d.lambda_min, d.lambda_max};
    json ps = json::array();
    for (std::size_t i = 0; i < d.log_lambda.size(); ++i) ps.push_back({num(d.log_lambda[i]), num(d.log_value[i])});
    j["per_scale"] = ps;
    j["growth"] = num(d.growth);
    j["attained"] = d.attained;
    j["warnings"] = d.warnings;
    return j;
}

json sharp_json(const SharpEstimateReport& r, int random_pairs, int levels) {
    json j;
    j["variant"] = to_string(r.variant);
    j["d1"] = r.d1;
    j["d2"] = r.d2;
    j["random_pairs"] = random_pairs;
    j["levels"] = levels;
    j["max_ratio"] = num(r.max_ratio);
    json pairs = json::array();
    for (const SharpPair& sp : r.pairs)
        pairs.push_back({{"q", cube_to_json(sp.q)},
                         {"r", cube_to_json(sp.r)},
                         {"lhs", num(sp.lhs)},
                         {"rhs", num(sp.rhs)},
                         {"ratio", num(sp.ratio)}});
    j["pairs"] = pairs;
    return j;
}

class Assertions {
public:
    void add(const std::string& suite, const std::string& name, double p, bool pass, double value, double bound,
             const std::string& detail = "") {
        json a{{"suite", suite}, {"name", name}, {"p", p}, {"pass", pass}, {"value", num(value)}, {"bound", num(bound)}};
        if (!detail.empty()) a["detail"] = detail;
        all_ = all_ && pass;
        list_.push_back(std::move(a));
    }
    void numeric_failure(const std::string& suite, double p, const std::string& what) {
        numeric_ = true;
        add(suite, "numerical evaluation", p, false, kInf, 0.0, what);
    }
    bool all() const { return all_; }
    bool numeric() const { return numeric_; }
    const json& list() const { return list_; }

private:
    json list_ = json::array();
    bool all_ = true;
    bool numeric_ = false;
};

json skeleton(const char* command, json config) {
    json r;
    r["schema"] = kSchema;
    r["command"] = command;
    r["config"] = std::move(config);
    r["results"] = json::object();
    r["assertions"] = json::array();
    return r;
}

std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t k) { return mix64(seed ^ mix64(k)); }

double param(const ExperimentConfig& c, const char* suite, const char* key, double dflt) {
    if (!c.params.contains(suite)) return dflt;
    const json& s = c.params.at(suite);
    if (!s.contains(key)) return dflt;
    if (!s.at(key).is_number()) throw ConfigError(std::string(suite) + "." + key, "expected a number");
    return s.at(key).get<double>();
}

const WeightSpec* scalar_part(const WeightSpec& w) {
    if (w.m() == 1) return &w;
    if (w.kind() == WeightSpec::Kind::ScalarTimesIdentity) return &w.children().front();
    return nullptr;
}

std::vector<Cube> strided(const ProbeFamily& f, std::size_t limit) {
    std::vector<Cube> out;
    if (f.size() <= limit) return f.cubes;
    for (std::size_t i = 0; i < limit; ++i) out.push_back(f.cubes[i * f.size() / limit]);
    return out;
}

std::string fmt(double x) {
    std::ostringstream s;
    s.precision(6);
    s << x;
    return s.str();
}

// Suites -----------------------------------------------------------------------------------------------------

void suite_compare(const ExperimentConfig& c, double p, json& out, Assertions& as) {
    const ProbeFamily fam = c.family();
    const auto cubes = strided(fam, static_cast<std::size_t>(param(c, "compare", "max_cubes", 6)));
    const int samples = static_cast<int>(param(c, "compare", "samples", 8));
    for (const Cube& q : cubes) {
        const EquivalenceReport e = compare_conditions(c.weight, p, q, c.quadrature, samples, sub_seed(c.seed, 1));
        json row{{"p", p}, {"cube", cube_to_json(q)}, {"cross_ratio", num(e.cross_ratio)}, {"finite", e.finite}};
        json conds = json::array();
        for (const ConditionValue& cv : e.conditions)
            conds.push_back({{"name", cv.name}, {"constant", num(cv.constant)}, {"diverged", cv.diverged}});
        row["conditions"] = conds;
        out.push_back(row);
        as.add("compare", "conditions finite, cross-ratio <= 100 on " + to_string(q), p,
               e.finite && e.cross_ratio <= 100.0, e.cross_ratio, 100.0);
    }
}

void suite_rhi(const ExperimentConfig& c, double p, json& out, Assertions& as) {
    const ProbeFamily fam = c.family();
    const ScReport sc = sc_characteristic(c.weight, p, fam, 4, 4, c.quadrature, 0, sub_seed(c.seed, 2));
    if (sc.matrix.diverged || !std::isfinite(sc.matrix.value)) {
        as.add("rhi", "Fujii-Wilson constant finite", p, false, sc.matrix.value, kInf);
        return;
    }
    const int cases = static_cast<int>(param(c, "reverse_holder", "cases", 50));
    const ReverseHolderReport rh = reverse_holder_check(c.weight, p, 8, fam, cases, c.quadrature,
                                                        std::max(sc.matrix.value, 1.0), 3, sub_seed(c.seed, 3));
    const double cor8 = frozen_constants(c.weight.m(), p).cor8;
    json row{{"p", p},
             {"sc", num(rh.sc)},
             {"r_max", num(rh.r_max)},
             {"cor8_sup", num(rh.cor8_sup)},
             {"cor8_maximal_sup", num(rh.cor8_maximal_sup)},
             {"frozen_constant", cor8}};
    json cs = json::array();
    int passed = 0;
    double worst = 0.0;
    for (const ReverseHolderCase& rc : rh.cases) {
        cs.push_back({{"cube", cube_to_json(rc.cube)},
                      {"matrix", rc.matrix_index},
                      {"r", rc.r},
                      {"lhs", num(rc.lhs)},
                      {"rhs", num(rc.rhs)},
                      {"pass", rc.pass}});
        passed += rc.pass ? 1 : 0;
        worst = std::max(worst, rc.lhs / rc.rhs);
    }
    row["cases"] = cs;
    out.push_back(row);
    as.add("rhi", "factor-2 reverse Holder on " + std::to_string(rh.cases.size()) + " cases", p, rh.pass, worst, 1.0);
    as.add("rhi", "sup_Q (avg |W^{1/p} A_Q^{-1}|^{pr})^{1/r} <= frozen C", p, rh.cor8_sup <= cor8, rh.cor8_sup, cor8);
    as.add("rhi", "dyadic maximal variant finite", p, std::isfinite(rh.cor8_maximal_sup), rh.cor8_maximal_sup, kInf);
}

void suite_distributional(const ExperimentConfig& c, double p, json& out, Assertions& as) {
    const Cube q = c.main_cube();
    const double apinf = apinf_characteristic(c.weight, p, c.family(), c.quadrature).value;
    const double cc = frozen_constants(c.weight.m(), p).distributional;
    std::vector<double> ms;
    for (int k = 1; k <= 10; ++k) ms.push_back(k);
    const DistributionalReport d = distributional_check(c.weight, p, q, ms, apinf, cc, c.quadrature);
    json rows = json::array();
    int positive = 0;
    for (const DistributionalRow& r : d.rows) {
        rows.push_back({{"m", r.m}, {"fraction", num(r.fraction)}, {"bound", num(r.bound)}, {"pass", r.pass}});
        positive += r.fraction > 0.0 ? 1 : 0;
    }
    out.push_back({{"p", p},
                   {"cube", cube_to_json(q)},
                   {"apinf", num(apinf)},
                   {"frozen_constant", cc},
                   {"rows", rows},
                   {"decay_slope", num(d.decay_slope)}});
    as.add("distributional", "fraction <= log(C [W]) / M for M = 1..10", p, d.pass && std::isfinite(apinf),
           d.rows.empty() ? 0.0 : d.rows.front().fraction, d.rows.empty() ? 0.0 : d.rows.front().bound);
    if (positive >= 3)
        as.add("distributional", "log-log decay slope <= -0.9", p, d.decay_slope <= -0.9, d.decay_slope, -0.9);
}

void suite_stopping(const ExperimentConfig& c, double p, json& out, Assertions& as) {
    const Cube q = c.main_cube();
    const double apinf = apinf_characteristic(c.weight, p, c.family(), c.quadrature).value;
    const double cc = frozen_constants(c.weight.m(), p).stopping;
    const int depth = static_cast<int>(param(c, "stopping", "depth", c.weight.n() == 1 ? 5 : 3));
    for (double m : {1.0, 2.0, 4.0}) {
        const StoppingReport s = stopping_time_check(c.weight, p, q, m, depth, apinf, cc, c.quadrature);
        json sel = json::array();
        for (const Cube& k : s.selected) sel.push_back(cube_to_json(k));
        out.push_back({{"p", p},
                       {"m", m},
                       {"ratio", num(s.ratio)},
                       {"bound", num(s.bound)},
                       {"selected", sel},
                       {"failed_branches", s.failed_branches},
                       {"frozen_constant", cc}});
        as.add("stopping", "selected mass <= log(C [W]) / M at M = " + fmt(m), p, s.pass, s.ratio, s.bound);
    }
}

void suite_inclusion(const ExperimentConfig& c, double p, json& out, Assertions& as) {
    const double q = param(c, "inclusion", "q", p + 1.0);
    if (!(q > p)) throw ConfigError("inclusion.q", "must exceed every p");
    const InclusionReport r = inclusion_checks(c.weight, p, q, c.family(), c.quadrature);
    out.push_back({{"p", p},
                   {"q", q},
                   {"apinf_p", num(r.apinf_p)},
                   {"apinf_q", num(r.apinf_q)},
                   {"constant_pq", num(r.constant_pq)},
                   {"ap_p", r.ap_p ? num(*r.ap_p) : json(nullptr)},
                   {"ap_p_diverged", r.ap_p_diverged},
                   {"ap_dominates", r.ap_dominates},
                   {"union_q", num(r.union_q)},
                   {"union_finite", r.union_finite},
                   {"u_star", num(r.u_star)}});
    as.add("inclusion", "A_{q,inf} characteristic finite", p, std::isfinite(r.apinf_q), r.constant_pq, kInf);
    if (p <= 1.0)
        as.add("inclusion", "A_{p,inf} <= A_p with constant 1", p, r.ap_dominates, r.apinf_p,
               r.ap_p ? *r.ap_p : kInf);
    as.add("inclusion", "A_q finite for q'/q <= u*", p, r.union_finite, r.union_q, kInf);
}

void suite_dual(const ExperimentConfig& c, double p, json& out, Assertions& as) {
    if (p <= 1.0) {
        out.push_back({{"p", p}, {"skipped", "requires p > 1"}});
        return;
    }
    const DualReport d = dual_weight_check(c.weight, p, c.family(), c.quadrature, 8, sub_seed(c.seed, 4));
    json inv = json::array();
    for (double r : d.inverse_ratios) inv.push_back(num(r));
    out.push_back({{"p", p},
                   {"ap", num(d.ap)},
                   {"dual_ap_pow", num(d.dual_ap_pow)},
                   {"ratio", num(d.ratio)},
                   {"diverged", d.diverged},
                   {"inverse_ratios", inv}});
    if (d.diverged) {
        const auto truth = membership_truth(c.weight);
        const std::optional<bool> in_ap = truth ? truth->a_p(p) : std::nullopt;
        as.add("dual", "divergence matches A_p membership", p, in_ap.has_value() && !*in_ap, d.ap, kInf,
               in_ap ? "" : "no membership oracle for this weight");
        return;
    }
    const double band = 4.0 * c.weight.m();
    as.add("dual", "[W^{-p'/p}]_{A_p'}^{p/p'} comparable to [W]_{A_p}", p,
           d.ratio <= band && d.ratio >= 1.0 / band, d.ratio, band);
    bool finite = true;
    for (double r : d.inverse_ratios) finite = finite && std::isfinite(r) && r > 0.0;
    as.add("dual", "|A_Q^{-1} M| comparable to the dual average", p, finite, d.inverse_ratios.size(), kInf);
}

void suite_multiplier(const ExperimentConfig& c, double p, json& out, Assertions& as) {
    const int levels = static_cast<int>(param(c, "multiplier", "levels", 6));
    const int trials = static_cast<int>(param(c, "multiplier", "trials", 20));
    for (double q : {1.0, 2.0, kInf}) {
        const MultiplierReport r =
            multiplier_bound_check(c.weight, p, q, levels, trials, c.quadrature, sub_seed(c.seed, 5));
        json dr = json::array();
        for (double v : r.depth_ratio) dr.push_back(num(v));
        out.push_back({{"p", p},
                       {"q_exp", num(q)},
                       {"levels", levels},
                       {"trials", trials},
                       {"depth_ratio", dr},
                       {"max_ratio", num(r.max_ratio)},
                       {"depth_slope", num(r.depth_slope)}});
        const std::string tag = std::isinf(q) ? "q = max" : "q = " + fmt(q);
        as.add("multiplier", "ratio finite, " + tag, p, std::isfinite(r.max_ratio), r.max_ratio, kInf);
        as.add("multiplier", "depth slope < 0.05, " + tag, p, r.depth_slope < 0.05, r.depth_slope, 0.05);
    }
}

void suite_sharp(const ExperimentConfig& c, double p, json& out, Assertions& as) {
    double d1 = param(c, "sharp", "d1", -1.0), d2 = param(c, "sharp", "d2", -1.0);
    if (d1 < 0.0 || d2 < 0.0) {
        const auto truth = membership_truth(c.weight);
        if (!truth || !truth->d_lower || !truth->d_upper)
            throw ConfigError("sharp", "d1 and d2 are required for weights without a dimension oracle");
        if (d1 < 0.0) d1 = truth->d_lower->d;
        if (d2 < 0.0) d2 = truth->d_upper->d;
    }
    const int pairs = static_cast<int>(param(c, "sharp", "pairs", 16));
    const int levels = static_cast<int>(param(c, "sharp", "levels", 10));
    const std::uint64_t seed = sub_seed(c.seed, 6);
    const auto variant = SharpEstimateReport::Variant::Centers;
    const SharpEstimateReport base = verify_sharp_estimate(c.weight, p, d1, d2, pairs, c.quadrature, variant, levels, seed);
    const SharpEstimateReport more =
        verify_sharp_estimate(c.weight, p, d1, d2, 4 * pairs, c.quadrature, variant, levels, seed);
    const SharpEstimateReport deep =
        verify_sharp_estimate(c.weight, p, d1, d2, pairs, c.quadrature, variant, 2 * levels, seed);
    json row{{"p", p}, {"base", sharp_json(base, pairs, levels)}};
    row["quadrupled_max_ratio"] = num(more.max_ratio);
    row["deep_max_ratio"] = num(deep.max_ratio);
    for (auto v : {SharpEstimateReport::Variant::DyadicCorners, SharpEstimateReport::Variant::DyadicLevel,
                   SharpEstimateReport::Variant::Intersecting}) {
        const SharpEstimateReport r = verify_sharp_estimate(c.weight, p, d1, d2, pairs, c.quadrature, v, levels, seed);
        row[to_string(v)] = num(r.max_ratio);
        as.add("sharp", "max ratio finite (" + to_string(v) + ")", p, std::isfinite(r.max_ratio), r.max_ratio, kInf);
    }
    const double stab = more.max_ratio / base.max_ratio;
    const double growth = deep.max_ratio / base.max_ratio;
    as.add("sharp", "max ratio finite", p, std::isfinite(base.max_ratio), base.max_ratio, kInf);
    as.add("sharp", "stable as the pair count quadruples", p, stab < 2.0 && stab > 0.5, stab, 2.0);
    as.add("sharp", "no power growth when the levels double", p, growth < 8.0, growth, 8.0);
    if (c.weight.kind() == WeightSpec::Kind::Sharpness) {
        const SharpnessFit f = sharpness_experiment(c.weight.d1(), c.weight.d2(), c.weight.n(), c.weight.m(), p,
                                                    c.quadrature);
        row["fit"] = {{"a_fit", num(f.a_fit)}, {"b_fit", num(f.b_fit)}, {"c_fit", num(f.c_fit)}};
        as.add("sharp", "fitted a >= d1 - 0.1", p, f.a_fit >= c.weight.d1() - 0.1, f.a_fit, c.weight.d1() - 0.1);
        as.add("sharp", "fitted b >= d2 - 0.1", p, f.b_fit >= c.weight.d2() - 0.1, f.b_fit, c.weight.d2() - 0.1);
        as.add("sharp", "fitted c >= d1 + d2 - 0.15", p, f.c_fit >= c.weight.d1() + c.weight.d2() - 0.15, f.c_fit,
               c.weight.d1() + c.weight.d2() - 0.15);
    }
    out.push_back(row);
}

void suite_dimension(const ExperimentConfig& c, double p, json& dims, Assertions& as) {
    DimensionOptions o;
    o.fit_min = static_cast<int>(param(c, "dimension", "fit_min", o.fit_min));
    o.fit_max = static_cast<int>(param(c, "dimension", "fit_max", o.fit_max));
    o.extreme_exp = static_cast<int>(param(c, "dimension", "extreme_exp", o.extreme_exp));
    o.scan_step = static_cast<int>(param(c, "dimension", "scan_step", o.scan_step));
    const auto truth = membership_truth(c.weight);
    const WeightSpec* s = scalar_part(c.weight);
    for (auto kind : {DimensionEstimate::Kind::Lower, DimensionEstimate::Kind::Upper}) {
        const DimensionEstimate d = estimate_dimension(c.weight, p, kind, c.quadrature, o);
        dims.push_back(dimension_json(d, p, "pairs"));
        const std::string k = to_string(kind);
        as.add("dimension", k + " fit residual <= 0.2", p, d.accepted, d.residual_max, 0.2);
        const auto& t = kind == DimensionEstimate::Kind::Lower ? (truth ? truth->d_lower : std::nullopt)
                                                               : (truth ? truth->d_upper : std::nullopt);
        if (t) {
            as.add("dimension", k + " dimension matches the closed form", p, std::abs(d.d_hat - t->d) <= 0.05, d.d_hat,
                   t->d);
            as.add("dimension", k + " attainment matches", p, d.attained == t->attained, d.growth, o.attain_threshold,
                   t->attained ? "attained" : "not attained");
        } else {
            as.add("dimension", k + " estimate >= -0.1", p, d.slope >= -0.1, d.slope, -0.1);
        }
        if (s) {
            const DimensionEstimate m = scalar_dimension_via_doubling(*s, kind, c.quadrature, o);
            dims.push_back(dimension_json(m, p, "doubling"));
            as.add("dimension", k + " doubling route agrees within 0.1", p, std::abs(m.d_hat - d.d_hat) <= 0.1, m.d_hat,
                   d.d_hat);
        }
    }
}

// Report merge -------------------------------------------------------------------------------------------------

std::string cube_key(const json& c) { return c.dump(); }

json merge_characteristics(const std::vector<json>& groups) {
    if (groups.size() == 1) return groups.front();
    json out = groups.front();
    std::map<std::string, std::size_t> seen;
    json pc = json::array();
    std::set<std::string> warn;
    std::vector<std::string> fams;
    bool diverged = false;
    json witness = nullptr;
    for (const json& g : groups) {
        for (const json& v : g.at("per_cube")) {
            const std::string k = cube_key(v.at("cube"));
            auto it = seen.find(k);
            if (it == seen.end()) {
                seen.emplace(k, pc.size());
                pc.push_back(v);
            } else if (from_num(v.at("value")) > from_num(pc[it->second].at("value"))) {
                pc[it->second] = v;
            }
        }
        diverged = diverged || g.at("diverged").get<bool>();
        if (witness.is_null() && !g.at("witness").is_null()) witness = g.at("witness");
        fams.push_back(g.at("family").get<std::string>());
        for (const json& w : g.at("warnings")) warn.insert(w.get<std::string>());
    }
    double best = -kInf;
    json arg = out.at("argmax_cube");
    for (const json& v : pc) {
        const double x = from_num(v.at("value"));
        if (x > best) {
            best = x;
            arg = v.at("cube");
        }
    }
    if (diverged) {
        best = kInf;
        arg = witness;
    }
    std::string fam;
    for (std::size_t i = 0; i < fams.size(); ++i) fam += (i ? " + " : "") + fams[i];
    out["value"] = num(best);
    out["diverged"] = diverged;
    out["argmax_cube"] = arg;
    out["witness"] = witness;
    out["family"] = fam;
    out["per_cube"] = pc;
    out["warnings"] = json(std::vector<std::string>(warn.begin(), warn.end()));
    return out;
}

void merge_into(json& dst, const json& src) {
    for (const auto& [k, v] : src.items()) {
        if (!dst.contains(k)) {
            dst[k] = v;
        } else if (dst[k].is_array() && v.is_array()) {
            for (const json& e : v) dst[k].push_back(e);
        } else if (dst[k].is_object() && v.is_object()) {
            merge_into(dst[k], v);
        }
    }
}

std::string csv_cell(const json& j) {
    if (j.is_string()) {
        std::string s = j.get<std::string>();
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
        return q + "\"";
    }
    if (j.is_null()) return "";
    return j.dump();
}

std::string csv_center(const json& cube) {
    std::string s;
    const json& c = cube.at("center");
    for (std::size_t i = 0; i < c.size(); ++i) s += (i ? ";" : "") + c[i].dump();
    return s;
}

}  // namespace

const std::vector<std::string>& all_suites() {
    static const std::vector<std::string> s{"compare",  "rhi",       "distributional", "stopping", "inclusion",
                                            "dual",     "multiplier", "sharp",          "dimension"};
    return s;
}

CommandResult cmd_characteristic(const ExperimentConfig& c) {
    CommandResult res;
    res.report = skeleton("characteristic", c.echo());
    const ProbeFamily fam = c.family();
    json list = json::array();
    bool diverged = false;
    auto push = [&](const CharacteristicReport& r) {
        diverged = diverged || r.diverged;
        list.push_back(characteristic_json(r));
    };
    for (const std::string& kind : c.kinds) {
        if (kind == "scalar") {
            push(scalar_ainfty_characteristic(c.weight, fam, c.quadrature));
            continue;
        }
        if (kind == "fujii_wilson") {
            push(scalar_fujii_wilson(c.weight, fam, 0, c.quadrature));
            continue;
        }
        for (double p : c.ps) {
            if (kind == "ap") {
                push(ap_characteristic(c.weight, p, fam, c.quadrature));
            } else if (kind == "apinf") {
                push(apinf_characteristic(c.weight, p, fam, c.quadrature));
            } else if (kind == "sc") {
                const ScReport sc = sc_characteristic(c.weight, p, fam, 8, 8, c.quadrature, 0, sub_seed(c.seed, 7));
                push(sc.matrix);
                list.back()["vector_value"] = num(sc.vector_value);
            }
        }
    }
    res.report["results"]["characteristics"] = list;
    res.exit_code = diverged ? kAssertionFailure : kPass;
    return res;
}

CommandResult cmd_reduce(const ExperimentConfig& c) {
    CommandResult res;
    res.report = skeleton("reduce", c.echo());
    const Cube q = c.main_cube();
    json list = json::array();
    for (double p : c.ps) {
        const ReducingOperator a = reduce(c.weight, q, p, c.quadrature);
        list.push_back({{"p", p},
                        {"cube", cube_to_json(q)},
                        {"matrix", mat_to_json(a.matrix.matrix())},
                        {"method", to_string(a.method)},
                        {"c_low", num(a.c_low)},
                        {"c_high", num(a.c_high)},
                        {"directions", a.directions}});
    }
    res.report["results"]["reducing_operators"] = list;
    return res;
}

CommandResult cmd_verify(const ExperimentConfig& c, std::vector<std::string> suites) {
    if (suites.empty()) suites = c.suites;
    if (suites.empty() || (suites.size() == 1 && suites.front() == "all")) suites = all_suites();
    for (const std::string& s : suites)
        if (std::find(all_suites().begin(), all_suites().end(), s) == all_suites().end())
            throw ConfigError("suites", "unknown suite '" + s + "'");
    CommandResult res;
    json echo = c.echo();
    echo["suites"] = suites;
    res.report = skeleton("verify", echo);
    Assertions as;
    json per = json::object();
    json dims = json::array();
    for (const std::string& s : suites) {
        json out = json::array();
        for (double p : c.ps) {
            try {
                if (s == "compare") suite_compare(c, p, out, as);
                if (s == "rhi") suite_rhi(c, p, out, as);
                if (s == "distributional") suite_distributional(c, p, out, as);
                if (s == "stopping") suite_stopping(c, p, out, as);
                if (s == "inclusion") suite_inclusion(c, p, out, as);
                if (s == "dual") suite_dual(c, p, out, as);
                if (s == "multiplier") suite_multiplier(c, p, out, as);
                if (s == "sharp") suite_sharp(c, p, out, as);
                if (s == "dimension") suite_dimension(c, p, dims, as);
            } catch (const NumericError& e) {
                as.numeric_failure(s, p, e.what());
            }
        }
        if (s != "dimension") per[s] = out;
    }
    res.report["results"]["suites"] = per;
    if (!dims.empty()) res.report["results"]["dimensions"] = dims;
    res.report["assertions"] = as.list();
    res.exit_code = as.all() ? kPass : (as.numeric() ? kNumericFailure : kAssertionFailure);
    return res;
}

CommandResult cmd_report(const std::vector<json>& inputs, const std::vector<std::string>& names) {
    if (inputs.empty()) throw ConfigError("inputs", "no reports given");
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        const json& in = inputs[i];
        const std::string v = in.is_object() && in.contains("schema") && in.at("schema").is_string()
                                  ? in.at("schema").get<std::string>()
                                  : std::string("<none>");
        if (v != kSchema)
            throw ConfigError("schema", "input '" + names[i] + "' has schema " + v + ", expected " + kSchema);
    }
    CommandResult res;
    json cfgs = json::array();
    for (const json& in : inputs) cfgs.push_back(in.at("config"));
    res.report = skeleton("report", json{{"inputs", names}, {"configs", cfgs}});

    // characteristics grouped by (kind, p); everything else concatenated
    std::vector<std::string> order;
    std::map<std::string, std::vector<json>> groups;
    json rest = json::object();
    json assertions = json::array();
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        const json& r = inputs[i].at("results");
        for (const auto& [k, v] : r.items()) {
            if (k == "characteristics") {
                for (const json& ch : v) {
                    const std::string key = ch.at("kind").dump() + "|" + ch.at("p").dump();
                    if (!groups.count(key)) order.push_back(key);
                    groups[key].push_back(ch);
                }
            } else if (k == "dimensions" && inputs.size() > 1) {
                json tagged = v;
                for (json& d : tagged) d["source"] = names[i];
                merge_into(rest, json{{k, tagged}});
            } else {
                merge_into(rest, json{{k, v}});
            }
        }
        for (const json& a : inputs[i].at("assertions")) assertions.push_back(a);
    }
    json results = json::object();
    bool chars_first = false;
    for (const json& in : inputs)
        if (in.at("results").contains("characteristics")) {
            chars_first = in.at("results").begin().key() == "characteristics";
            break;
        }
    if (!order.empty()) {
        json list = json::array();
        for (const std::string& k : order) list.push_back(merge_characteristics(groups[k]));
        if (chars_first) results["characteristics"] = list;
        for (const auto& [k, v] : rest.items()) results[k] = v;
        if (!chars_first) results["characteristics"] = list;
    } else {
        results = rest;
    }
    res.report["results"] = results;
    res.report["assertions"] = assertions;
    bool pass = true;
    for (const json& a : assertions) pass = pass && a.at("pass").get<bool>();
    res.exit_code = pass ? kPass : kAssertionFailure;
    return res;
}

std::string to_csv(const json& report) {
    std::ostringstream out;
    bool first = true;
    auto section = [&](const std::string& header) {
        if (!first) out << "\n";
        first = false;
        out << header << "\n";
    };
    const json& r = report.at("results");
    if (r.contains("characteristics")) {
        section("kind,p,center,edge,value,error,diverged");
        for (const json& ch : r.at("characteristics"))
            for (const json& v : ch.at("per_cube"))
                out << csv_cell(ch.at("kind")) << "," << csv_cell(ch.at("p")) << "," << csv_center(v.at("cube")) << ","
                    << csv_cell(v.at("cube").at("edge")) << "," << csv_cell(v.at("value")) << ","
                    << csv_cell(v.at("error")) << "," << csv_cell(v.at("diverged")) << "\n";
    }
    if (r.contains("reducing_operators")) {
        section("p,center,edge,method,c_low,c_high,directions,matrix");
        for (const json& a : r.at("reducing_operators"))
            out << csv_cell(a.at("p")) << "," << csv_center(a.at("cube")) << "," << csv_cell(a.at("cube").at("edge"))
                << "," << csv_cell(a.at("method")) << "," << csv_cell(a.at("c_low")) << "," << csv_cell(a.at("c_high"))
                << "," << csv_cell(a.at("directions")) << "," << csv_cell(json(a.at("matrix").dump())) << "\n";
    }
    if (r.contains("dimensions")) {
        section("source,route,kind,p,d_hat,slope,intercept,residual_max,accepted,attained,growth");
        for (const json& d : r.at("dimensions"))
            out << csv_cell(d.value("source", json(""))) << "," << csv_cell(d.at("route")) << ","
                << csv_cell(d.at("kind")) << "," << csv_cell(d.at("p")) << "," << csv_cell(d.at("d_hat")) << ","
                << csv_cell(d.at("slope")) << "," << csv_cell(d.at("intercept")) << ","
                << csv_cell(d.at("residual_max")) << "," << csv_cell(d.at("accepted")) << ","
                << csv_cell(d.at("attained")) << "," << csv_cell(d.at("growth")) << "\n";
        section("source,route,kind,p,log_lambda,log_value");
        for (const json& d : r.at("dimensions"))
            for (const json& row : d.at("per_scale"))
                out << csv_cell(d.value("source", json(""))) << "," << csv_cell(d.at("route")) << ","
                    << csv_cell(d.at("kind")) << "," << csv_cell(d.at("p")) << "," << csv_cell(row[0]) << ","
                    << csv_cell(row[1]) << "\n";
    }
    if (!report.at("assertions").empty()) {
        section("suite,name,p,pass,value,bound");
        for (const json& a : report.at("assertions"))
            out << csv_cell(a.at("suite")) << "," << csv_cell(a.at("name")) << "," << csv_cell(a.at("p")) << ","
                << csv_cell(a.at("pass")) << "," << csv_cell(a.at("value")) << "," << csv_cell(a.at("bound")) << "\n";
    }
    return out.str();
}

}  // namespace mwcli
