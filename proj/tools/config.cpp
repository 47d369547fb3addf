#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "mwlab/errors.hpp"

namespace mwcli {

using namespace mwlab;

std::string ConfigError::format(const std::string& field, const std::string& msg, int line) {
    std::string s = "config";
    if (line > 0) s += " line " + std::to_string(line);
    if (!field.empty()) s += " field '" + field + "'";
    return s + ": " + msg;
}

namespace {

const json& need(const json& doc, const std::string& key, const std::string& path) {
    if (!doc.is_object() || !doc.contains(key)) throw ConfigError(path + "." + key, "missing");
    return doc.at(key);
}

void allow_keys(const json& doc, std::initializer_list<const char*> keys, const std::string& path) {
    if (!doc.is_object()) throw ConfigError(path, "expected an object");
    for (const auto& [k, v] : doc.items()) {
        if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; }))
            throw ConfigError(path.empty() ? k : path + "." + k, "unknown key");
    }
}

double get_num(const json& j, const std::string& path) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
    }
    throw ConfigError(path, "expected a number");
}

int get_int(const json& j, const std::string& path) {
    if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
    return j.get<int>();
}

double num_or(const json& doc, const char* key, double dflt, const std::string& path) {
    return doc.contains(key) ? get_num(doc.at(key), path + "." + key) : dflt;
}

int int_or(const json& doc, const char* key, int dflt, const std::string& path) {
    return doc.contains(key) ? get_int(doc.at(key), path + "." + key) : dflt;
}

Point get_point(const json& j, const std::string& path) {
    if (j.is_number()) return make_point({j.get<double>()});
    if (!j.is_array() || j.empty() || j.size() > static_cast<std::size_t>(kMaxSpaceDim))
        throw ConfigError(path, "expected a coordinate array of length 1.." + std::to_string(kMaxSpaceDim));
    Point x(static_cast<int>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) x(static_cast<int>(i)) = get_num(j[i], path);
    return x;
}

Mat get_real_rows(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) throw ConfigError(path, "expected a matrix as an array of rows");
    const int r = static_cast<int>(j.size());
    if (r > kMaxDim) throw ConfigError(path, "matrix too large");
    Mat a(r, r);
    for (int i = 0; i < r; ++i) {
        const json& row = j[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<int>(row.size()) != r) throw ConfigError(path, "matrix must be square");
        for (int k = 0; k < r; ++k) a(i, k) = get_num(row[static_cast<std::size_t>(k)], path);
    }
    return a;
}

Mat get_matrix(const json& j, const std::string& path) {
    if (j.is_number()) {
        Mat a(1, 1);
        a(0, 0) = j.get<double>();
        return a;
    }
    if (j.is_object()) {
        if (j.contains("rotation")) {
            allow_keys(j, {"rotation"}, path);
            const double t = get_num(j.at("rotation"), path + ".rotation");
            Mat r(2, 2);
            r << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
            return r;
        }
        allow_keys(j, {"re", "im"}, path);
        Mat a = get_real_rows(need(j, "re", path), path + ".re");
        if (j.contains("im")) {
            const Mat b = get_real_rows(j.at("im"), path + ".im");
            if (b.rows() != a.rows()) throw ConfigError(path + ".im", "shape differs from re");
            a += Complex(0, 1) * b;
        }
        return a;
    }
    return get_real_rows(j, path);
}

Box get_box(const json& j, const std::string& path) {
    Box b;
    if (j.is_array() && j.size() == 2) {
        b.lower = get_point(j[0], path + "[0]");
        b.upper = get_point(j[1], path + "[1]");
    } else {
        allow_keys(j, {"lower", "upper"}, path);
        b.lower = get_point(need(j, "lower", path), path + ".lower");
        b.upper = get_point(need(j, "upper", path), path + ".upper");
    }
    if (b.lower.size() != b.upper.size()) throw ConfigError(path, "lower and upper differ in dimension");
    if (!(b.upper.array() > b.lower.array()).all()) throw ConfigError(path, "upper must exceed lower");
    return b;
}

WeightSpec with_m(const WeightSpec& s, const json& doc, const std::string& path) {
    const int m = int_or(doc, "m", 1, path);
    return m == 1 ? s : WeightSpec::scalar_times_identity(s, m);
}

std::vector<std::string> string_list(const json& j, const std::string& path) {
    std::vector<std::string> out;
    if (j.is_string()) return {j.get<std::string>()};
    if (!j.is_array()) throw ConfigError(path, "expected a string or a list of strings");
    for (const json& e : j) {
        if (!e.is_string()) throw ConfigError(path, "expected strings");
        out.push_back(e.get<std::string>());
    }
    return out;
}

int line_of(const std::string& text, std::size_t byte) {
    byte = std::min(byte, text.size());
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

}  // namespace

json num(double x) {
    if (std::isfinite(x)) return x;
    if (std::isnan(x)) return "nan";
    return x > 0 ? "inf" : "-inf";
}

double from_num(const json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    }
    throw ConfigError("", "expected a number");
}

json cube_to_json(const Cube& q) {
    json c = json::array();
    for (int i = 0; i < q.dim(); ++i) c.push_back(q.center(i));
    return json{{"center", c}, {"edge", q.edge}};
}

json mat_to_json(const Mat& a) {
    json re = json::array(), im = json::array();
    bool complex = false;
    for (int i = 0; i < a.rows(); ++i) {
        json r = json::array(), s = json::array();
        for (int k = 0; k < a.cols(); ++k) {
            r.push_back(num(a(i, k).real()));
            s.push_back(num(a(i, k).imag()));
            complex = complex || a(i, k).imag() != 0.0;
        }
        re.push_back(r);
        im.push_back(s);
    }
    json out{{"re", re}};
    if (complex) out["im"] = im;
    return out;
}

Cube parse_cube(const json& doc, const std::string& path) {
    if (doc.is_array() && doc.size() == 2 && doc[0].is_number() && doc[1].is_number()) {
        const double a = doc[0].get<double>(), b = doc[1].get<double>();
        if (!(b > a)) throw ConfigError(path, "interval must have b > a");
        return Cube::interval(a, b);
    }
    if (doc.is_object() && doc.contains("lower")) {
        allow_keys(doc, {"lower", "edge"}, path);
        const double l = get_num(need(doc, "edge", path), path + ".edge");
        if (!(l > 0.0)) throw ConfigError(path + ".edge", "must be positive");
        return Cube::from_corner(get_point(doc.at("lower"), path + ".lower"), l);
    }
    allow_keys(doc, {"center", "edge"}, path);
    const double l = get_num(need(doc, "edge", path), path + ".edge");
    if (!(l > 0.0)) throw ConfigError(path + ".edge", "must be positive");
    return Cube(get_point(need(doc, "center", path), path + ".center"), l);
}

WeightSpec parse_weight(const json& doc, const std::string& path) {
    if (!doc.is_object()) throw ConfigError(path, "expected an object with a 'kind'");
    const json& kj = need(doc, "kind", path);
    if (!kj.is_string()) throw ConfigError(path + ".kind", "expected a string");
    const std::string kind = kj.get<std::string>();
    try {
        if (kind == "identity") {
            allow_keys(doc, {"kind", "m", "n"}, path);
            return WeightSpec::identity(int_or(doc, "m", 1, path), int_or(doc, "n", 1, path));
        }
        if (kind == "power") {
            allow_keys(doc, {"kind", "a", "n", "m"}, path);
            return with_m(WeightSpec::power(get_num(need(doc, "a", path), path + ".a"), int_or(doc, "n", 1, path)),
                          doc, path);
        }
        if (kind == "log_out" || kind == "log_in") {
            allow_keys(doc, {"kind", "a", "b", "n", "m"}, path);
            const double a = get_num(need(doc, "a", path), path + ".a");
            const double b = get_num(need(doc, "b", path), path + ".b");
            const int n = int_or(doc, "n", 1, path);
            return with_m(kind == "log_out" ? WeightSpec::log_out(a, b, n) : WeightSpec::log_in(a, b, n), doc, path);
        }
        if (kind == "scalar_times_identity") {
            allow_keys(doc, {"kind", "scalar", "m"}, path);
            return WeightSpec::scalar_times_identity(parse_weight(need(doc, "scalar", path), path + ".scalar"),
                                                     get_int(need(doc, "m", path), path + ".m"));
        }
        if (kind == "diagonal") {
            allow_keys(doc, {"kind", "entries"}, path);
            const json& e = need(doc, "entries", path);
            if (!e.is_array() || e.empty()) throw ConfigError(path + ".entries", "expected a non-empty list");
            std::vector<WeightSpec> ws;
            for (std::size_t i = 0; i < e.size(); ++i)
                ws.push_back(parse_weight(e[i], path + ".entries[" + std::to_string(i) + "]"));
            return WeightSpec::diagonal(ws);
        }
        if (kind == "conjugated") {
            allow_keys(doc, {"kind", "unitary", "inner"}, path);
            return WeightSpec::conjugated(get_matrix(need(doc, "unitary", path), path + ".unitary"),
                                          parse_weight(need(doc, "inner", path), path + ".inner"));
        }
        if (kind == "translated") {
            allow_keys(doc, {"kind", "inner", "shift"}, path);
            return WeightSpec::translated(parse_weight(need(doc, "inner", path), path + ".inner"),
                                          get_point(need(doc, "shift", path), path + ".shift"));
        }
        if (kind == "sharpness") {
            allow_keys(doc, {"kind", "d1", "d2", "m", "n"}, path);
            return WeightSpec::sharpness(get_num(need(doc, "d1", path), path + ".d1"),
                                         get_num(need(doc, "d2", path), path + ".d2"), int_or(doc, "m", 1, path),
                                         int_or(doc, "n", 1, path));
        }
        if (kind == "sampled") {
            allow_keys(doc, {"kind", "box", "cells", "values"}, path);
            const json& v = need(doc, "values", path);
            if (!v.is_array()) throw ConfigError(path + ".values", "expected a list of matrices");
            std::vector<Mat> vals;
            for (std::size_t i = 0; i < v.size(); ++i)
                vals.push_back(get_matrix(v[i], path + ".values[" + std::to_string(i) + "]"));
            return WeightSpec::sampled(get_box(need(doc, "box", path), path + ".box"),
                                       get_int(need(doc, "cells", path), path + ".cells"), vals);
        }
        if (kind == "powered") {
            allow_keys(doc, {"kind", "inner", "t"}, path);
            return WeightSpec::powered(parse_weight(need(doc, "inner", path), path + ".inner"),
                                       get_num(need(doc, "t", path), path + ".t"));
        }
    } catch (const mwlab::Error& e) {
        throw ConfigError(path, e.what());
    }
    throw ConfigError(path + ".kind", "unknown weight kind '" + kind + "'");
}

ExperimentConfig parse_config(const json& doc) {
    allow_keys(doc, {"weight", "p", "family", "quadrature", "seed", "cube", "kinds", "suites", "sharp", "multiplier",
                     "dimension", "inclusion", "reverse_holder", "compare", "stopping"},
               "");
    ExperimentConfig c;
    c.weight_doc = need(doc, "weight", "");
    c.weight = parse_weight(c.weight_doc);
    const int n = c.weight.n();

    if (doc.contains("p")) {
        const json& p = doc.at("p");
        c.ps.clear();
        if (p.is_array()) {
            for (std::size_t i = 0; i < p.size(); ++i) c.ps.push_back(get_num(p[i], "p[" + std::to_string(i) + "]"));
        } else {
            c.ps.push_back(get_num(p, "p"));
        }
        if (c.ps.empty()) throw ConfigError("p", "empty list");
        for (double v : c.ps)
            if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("p", "must be positive and finite");
    }

    c.box = Box{Point::Zero(n), Point::Ones(n)};
    if (doc.contains("family")) {
        const json& f = doc.at("family");
        allow_keys(f, {"box", "jmin", "jmax", "extras"}, "family");
        if (f.contains("box")) c.box = get_box(f.at("box"), "family.box");
        c.jmin = int_or(f, "jmin", c.jmin, "family");
        c.jmax = int_or(f, "jmax", c.jmax, "family");
        c.extras = int_or(f, "extras", c.extras, "family");
        if (c.jmax < c.jmin) throw ConfigError("family.jmax", "must be >= jmin");
        if (c.jmax > 16 || c.jmin < -16) throw ConfigError("family", "levels must lie in [-16, 16]");
        if (c.extras < 0) throw ConfigError("family.extras", "must be nonnegative");
    }
    if (c.box.dim() != n) throw ConfigError("family.box", "dimension differs from the weight's n");

    if (doc.contains("quadrature")) {
        const json& q = doc.at("quadrature");
        allow_keys(q, {"subdiv", "depth", "tol", "passes"}, "quadrature");
        c.quadrature.base_subdivisions = int_or(q, "subdiv", c.quadrature.base_subdivisions, "quadrature");
        c.quadrature.max_refine_depth = int_or(q, "depth", c.quadrature.max_refine_depth, "quadrature");
        c.quadrature.rel_tol = num_or(q, "tol", c.quadrature.rel_tol, "quadrature");
        c.quadrature.max_adaptive_passes = int_or(q, "passes", c.quadrature.max_adaptive_passes, "quadrature");
    }
    try {
        c.quadrature.validate();
    } catch (const mwlab::Error& e) {
        throw ConfigError("quadrature", e.what());
    }

    if (doc.contains("seed")) {
        const json& s = doc.at("seed");
        if (!s.is_number_unsigned() && !s.is_number_integer()) throw ConfigError("seed", "expected an integer");
        c.seed = s.get<std::uint64_t>();
    }
    if (doc.contains("cube")) {
        c.cube = parse_cube(doc.at("cube"), "cube");
        if (c.cube->dim() != n) throw ConfigError("cube", "dimension differs from the weight's n");
    }
    if (doc.contains("kinds")) {
        c.kinds = string_list(doc.at("kinds"), "kinds");
        static const std::set<std::string> ok{"ap", "apinf", "scalar", "fujii_wilson", "sc"};
        for (const std::string& k : c.kinds)
            if (!ok.count(k)) throw ConfigError("kinds", "unknown kind '" + k + "'");
    }
    if (doc.contains("suites")) c.suites = string_list(doc.at("suites"), "suites");
    for (const char* k : {"sharp", "multiplier", "dimension", "inclusion", "reverse_holder", "compare", "stopping"})
        if (doc.contains(k)) {
            if (!doc.at(k).is_object()) throw ConfigError(k, "expected an object");
            c.params[k] = doc.at(k);
        }
    return c;
}

ExperimentConfig parse_config_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("", e.what(), line_of(text, e.byte > 0 ? e.byte - 1 : 0));
    }
    try {
        return parse_config(doc);
    } catch (const json::exception& e) {
        throw ConfigError("", e.what());
    }
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot read '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

ProbeFamily ExperimentConfig::family() const {
    try {
        return probe_family(box, jmin, jmax, weight.singular_points(), extras, seed);
    } catch (const mwlab::Error& e) {
        throw ConfigError("family", e.what());
    }
}

Cube ExperimentConfig::main_cube() const {
    if (cube) return *cube;
    const Point side = box.upper - box.lower;
    if ((side.array() == side(0)).all()) return Cube::from_corner(box.lower, side(0));
    return Cube::from_corner(Point::Zero(weight.n()), 1.0);
}

json ExperimentConfig::echo() const {
    json j;
    j["weight"] = weight_doc;
    j["weight_description"] = weight.describe();
    json p = json::array();
    for (double v : ps) p.push_back(v);
    j["p"] = p;
    json lo = json::array(), hi = json::array();
    for (int i = 0; i < box.dim(); ++i) {
        lo.push_back(box.lower(i));
        hi.push_back(box.upper(i));
    }
    j["family"] = {{"box", {{"lower", lo}, {"upper", hi}}}, {"jmin", jmin}, {"jmax", jmax}, {"extras", extras}};
    j["quadrature"] = {{"subdiv", quadrature.base_subdivisions},
                       {"depth", quadrature.max_refine_depth},
                       {"tol", quadrature.rel_tol},
                       {"passes", quadrature.max_adaptive_passes}};
    j["seed"] = seed;
    if (cube) j["cube"] = cube_to_json(*cube);
    j["kinds"] = kinds;
    if (!suites.empty()) j["suites"] = suites;
    for (const auto& [k, v] : params.items()) j[k] = v;
    return j;
}

}  // namespace mwcli
