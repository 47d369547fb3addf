#include "mwlab/weights.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "mwlab/errors.hpp"

namespace mwlab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

struct WeightSpec::Node {
    Kind kind = Kind::Power;
    int n = 1;
    int m = 1;
    double a = 0.0;
    double b = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
    std::vector<WeightSpec> children;
    Mat u;
    Point shift;
    Box box;
    int cells = 0;
    std::vector<SPDMatrix> samples;
    bool scalar = true;
    bool real = true;
};

namespace {

void check_n(int n) {
    if (n < 1 || n > kMaxSpaceDim) throw DimensionError("weight: space dimension must be in [1, " + std::to_string(kMaxSpaceDim) + "]");
}

void check_a(double a, int n) {
    if (!(a > -n) || !std::isfinite(a)) throw ParameterError("weight: exponent a must exceed -n");
}

// a log r + b log log(2 + t) with t = r or 1/r, resolving the r = 0 limits.
double log_family(double r, double a, double b, bool inner) {
    if (r > 0.0 && std::isfinite(r)) {
        double v = a * std::log(r);
        if (b != 0.0) v += b * std::log(inner ? std::log(2.0 + 1.0 / r) : std::log(2.0 + r));
        return v;
    }
    if (r == 0.0) {
        if (a != 0.0) return a > 0 ? -kInf : kInf;
        if (!inner || b == 0.0) return b * std::log(std::log(2.0));
        return b > 0 ? kInf : -kInf;
    }
    throw NumericError("weight: non-finite point");
}

Mat scalar_matrix(double logw, double alpha, int m) {
    const double e = alpha * logw;
    if (std::isnan(e)) return identity(m);
    if (e == kInf || e > 709.0) throw SingularityError("weight: evaluation at a singular point with negative effective exponent");
    return identity(m) * Complex(std::exp(e), 0.0);
}

}  // namespace

WeightSpec WeightSpec::power(double a, int n) {
    check_n(n);
    check_a(a, n);
    auto node = std::make_shared<Node>();
    node->kind = Kind::Power;
    node->n = n;
    node->a = a;
    return WeightSpec(node);
}

WeightSpec WeightSpec::log_out(double a, double b, int n) {
    check_n(n);
    check_a(a, n);
    auto node = std::make_shared<Node>();
    node->kind = Kind::LogOut;
    node->n = n;
    node->a = a;
    node->b = b;
    return WeightSpec(node);
}

WeightSpec WeightSpec::log_in(double a, double b, int n) {
    check_n(n);
    check_a(a, n);
    auto node = std::make_shared<Node>();
    node->kind = Kind::LogIn;
    node->n = n;
    node->a = a;
    node->b = b;
    return WeightSpec(node);
}

WeightSpec WeightSpec::scalar_times_identity(const WeightSpec& scalar, int m) {
    if (m < 1 || m > kMaxDim) throw DimensionError("ScalarTimesIdentity: m out of range");
    if (scalar.m() != 1 || !scalar.is_scalar()) throw ParameterError("ScalarTimesIdentity: inner weight must be scalar");
    auto node = std::make_shared<Node>();
    node->kind = Kind::ScalarTimesIdentity;
    node->n = scalar.n();
    node->m = m;
    node->children = {scalar};
    return WeightSpec(node);
}

WeightSpec WeightSpec::diagonal(const std::vector<WeightSpec>& entries) {
    if (entries.empty() || static_cast<int>(entries.size()) > kMaxDim) throw DimensionError("Diagonal: bad entry count");
    auto node = std::make_shared<Node>();
    node->kind = Kind::Diagonal;
    node->n = entries.front().n();
    node->m = static_cast<int>(entries.size());
    for (const auto& e : entries) {
        if (e.m() != 1) throw ParameterError("Diagonal: entries must be scalar weights");
        if (e.n() != node->n) throw DimensionError("Diagonal: entries disagree on n");
    }
    node->children = entries;
    node->scalar = node->m == 1;
    return WeightSpec(node);
}

WeightSpec WeightSpec::conjugated(const Mat& u, const WeightSpec& inner) {
    if (u.rows() != inner.m() || u.cols() != inner.m()) throw DimensionError("Conjugated: U must be m x m");
    if (((u.adjoint() * u) - mwlab::identity(inner.m())).cwiseAbs().maxCoeff() > 1e-12)
        throw ParameterError("Conjugated: U is not unitary");
    auto node = std::make_shared<Node>();
    node->kind = Kind::Conjugated;
    node->n = inner.n();
    node->m = inner.m();
    node->u = u;
    node->children = {inner};
    node->scalar = inner.is_scalar();
    node->real = inner.is_real() && u.imag().cwiseAbs().maxCoeff() == 0.0;
    return WeightSpec(node);
}

WeightSpec WeightSpec::translated(const WeightSpec& inner, const Point& shift) {
    if (shift.size() != inner.n()) throw DimensionError("Translated: shift dimension mismatch");
    auto node = std::make_shared<Node>();
    node->kind = Kind::Translated;
    node->n = inner.n();
    node->m = inner.m();
    node->shift = shift;
    node->children = {inner};
    node->scalar = inner.is_scalar();
    node->real = inner.is_real();
    return WeightSpec(node);
}

WeightSpec WeightSpec::sharpness(double d1, double d2, int m, int n) {
    check_n(n);
    if (!(d1 >= 0.0 && d1 < n)) throw ParameterError("SharpnessExample: d1 must lie in [0, n)");
    if (!(d2 >= 0.0) || !std::isfinite(d2)) throw ParameterError("SharpnessExample: d2 must be nonnegative");
    if (m < 1 || m > kMaxDim) throw DimensionError("SharpnessExample: m out of range");
    auto node = std::make_shared<Node>();
    node->kind = Kind::Sharpness;
    node->n = n;
    node->m = m;
    node->d1 = d1;
    node->d2 = d2;
    return WeightSpec(node);
}

WeightSpec WeightSpec::sampled(const Box& box, int cells_per_axis, const std::vector<Mat>& values) {
    const int n = box.dim();
    check_n(n);
    if (cells_per_axis < 1) throw ParameterError("Sampled: cells_per_axis must be positive");
    std::size_t expect = 1;
    for (int i = 0; i < n; ++i) {
        expect *= static_cast<std::size_t>(cells_per_axis);
        if (!(box.upper(i) > box.lower(i))) throw ParameterError("Sampled: degenerate box");
    }
    if (values.size() != expect) throw ParameterError("Sampled: expected " + std::to_string(expect) + " values");
    auto node = std::make_shared<Node>();
    node->kind = Kind::Sampled;
    node->n = n;
    node->m = static_cast<int>(values.front().rows());
    node->box = box;
    node->cells = cells_per_axis;
    node->scalar = node->m == 1;
    for (const Mat& v : values) {
        if (v.rows() != node->m) throw DimensionError("Sampled: inconsistent matrix sizes");
        node->samples.emplace_back(v);
        if (v.imag().cwiseAbs().maxCoeff() != 0.0) node->real = false;
    }
    return WeightSpec(node);
}

WeightSpec WeightSpec::identity(int m, int n) { return scalar_times_identity(power(0.0, n), m); }

WeightSpec WeightSpec::powered(const WeightSpec& inner, double t) {
    if (!std::isfinite(t) || t == 0.0) throw ParameterError("Powered: exponent must be finite and nonzero");
    auto node = std::make_shared<Node>();
    node->kind = Kind::Powered;
    node->n = inner.n();
    node->m = inner.m();
    node->a = t;
    node->children = {inner};
    node->scalar = inner.is_scalar();
    node->real = inner.is_real();
    return WeightSpec(node);
}

WeightSpec::Kind WeightSpec::kind() const { return node_->kind; }
int WeightSpec::m() const { return node_->m; }
int WeightSpec::n() const { return node_->n; }
bool WeightSpec::is_scalar() const { return node_->scalar; }
bool WeightSpec::is_real() const { return node_->real; }
double WeightSpec::a() const { return node_->a; }
double WeightSpec::b() const { return node_->b; }
double WeightSpec::d1() const { return node_->d1; }
double WeightSpec::d2() const { return node_->d2; }
const std::vector<WeightSpec>& WeightSpec::children() const { return node_->children; }
const Mat& WeightSpec::unitary() const { return node_->u; }
const Point& WeightSpec::shift() const { return node_->shift; }
double WeightSpec::exponent() const { return node_->a; }

double WeightSpec::log_scalar(const Point& x) const {
    const Node& nd = *node_;
    if (x.size() != nd.n) throw DimensionError("weight: point dimension mismatch");
    switch (nd.kind) {
    case Kind::Power:
        return log_family(x.stableNorm(), nd.a, 0.0, false);
    case Kind::LogOut:
        return log_family(x.stableNorm(), nd.a, nd.b, false);
    case Kind::LogIn:
        return log_family(x.stableNorm(), nd.a, nd.b, true);
    case Kind::ScalarTimesIdentity:
    case Kind::Conjugated:
        return nd.children.front().log_scalar(x);
    case Kind::Diagonal:
        if (nd.m != 1) break;
        return nd.children.front().log_scalar(x);
    case Kind::Translated:
        return nd.children.front().log_scalar(x - nd.shift);
    case Kind::Powered: {
        const double l = nd.children.front().log_scalar(x);
        return std::isinf(l) ? (nd.a > 0 ? l : -l) : nd.a * l;
    }
    case Kind::Sharpness: {
        Point y = x;
        y(0) -= 1.0;
        const double l1 = log_family(x.stableNorm(), -nd.d1, 1.0, true);
        const double l2 = log_family(y.stableNorm(), -nd.d2, 1.0, true);
        return l1 - l2;
    }
    case Kind::Sampled:
        if (nd.m != 1) break;
        return std::log(evaluate(x, 1.0)(0, 0).real());
    }
    throw ParameterError("log_scalar: weight is not scalar");
}

double WeightSpec::scalar(const Point& x) const { return std::exp(log_scalar(x)); }

Mat WeightSpec::evaluate(const Point& x, double alpha) const {
    const Node& nd = *node_;
    if (x.size() != nd.n) throw DimensionError("weight: point dimension mismatch");
    switch (nd.kind) {
    case Kind::Power:
    case Kind::LogOut:
    case Kind::LogIn:
    case Kind::Sharpness:
        return scalar_matrix(log_scalar(x), alpha, 1);
    case Kind::ScalarTimesIdentity:
        return scalar_matrix(nd.children.front().log_scalar(x), alpha, nd.m);
    case Kind::Diagonal: {
        Mat d = Mat::Zero(nd.m, nd.m);
        for (int i = 0; i < nd.m; ++i) d(i, i) = scalar_matrix(nd.children[i].log_scalar(x), alpha, 1)(0, 0);
        return d;
    }
    case Kind::Conjugated: {
        Mat inner = nd.children.front().evaluate(x, alpha);
        return nd.u * inner * nd.u.adjoint();
    }
    case Kind::Translated:
        return nd.children.front().evaluate(x - nd.shift, alpha);
    case Kind::Powered:
        return nd.children.front().evaluate(x, alpha * nd.a);
    case Kind::Sampled: {
        std::size_t idx = 0, stride = 1;
        for (int i = 0; i < nd.n; ++i) {
            const double t = (x(i) - nd.box.lower(i)) / (nd.box.upper(i) - nd.box.lower(i));
            if (!(t >= 0.0 && t <= 1.0)) throw ParameterError("Sampled: point outside the sampled box");
            const int c = std::min(nd.cells - 1, static_cast<int>(t * nd.cells));
            idx += stride * static_cast<std::size_t>(c);
            stride *= static_cast<std::size_t>(nd.cells);
        }
        return nd.samples[idx].power_matrix(alpha);
    }
    }
    throw ParameterError("evaluate: unknown weight kind");
}

std::vector<Point> WeightSpec::singular_points() const {
    const Node& nd = *node_;
    switch (nd.kind) {
    case Kind::Power:
        if (nd.a == 0.0) return {};
        return {zero_point(nd.n)};
    case Kind::LogOut:
        if (nd.a == 0.0) return {};
        return {zero_point(nd.n)};
    case Kind::LogIn:
        if (nd.a == 0.0 && nd.b == 0.0) return {};
        return {zero_point(nd.n)};
    case Kind::Sharpness: {
        Point x0 = zero_point(nd.n);
        x0(0) = 1.0;
        return {zero_point(nd.n), x0};
    }
    case Kind::ScalarTimesIdentity:
    case Kind::Conjugated:
        return nd.children.front().singular_points();
    case Kind::Diagonal: {
        std::vector<Point> out;
        for (const auto& c : nd.children)
            for (const Point& s : c.singular_points()) {
                bool seen = false;
                for (const Point& t : out) seen = seen || (t - s).norm() == 0.0;
                if (!seen) out.push_back(s);
            }
        return out;
    }
    case Kind::Translated: {
        auto pts = nd.children.front().singular_points();
        for (Point& s : pts) s += nd.shift;
        return pts;
    }
    case Kind::Sampled:
        return {};
    case Kind::Powered:
        return nd.children.front().singular_points();
    }
    return {};
}

std::string WeightSpec::describe() const {
    const Node& nd = *node_;
    std::ostringstream os;
    switch (nd.kind) {
    case Kind::Power: os << "power(a=" << nd.a << ")"; break;
    case Kind::LogOut: os << "log_out(a=" << nd.a << ", b=" << nd.b << ")"; break;
    case Kind::LogIn: os << "log_in(a=" << nd.a << ", b=" << nd.b << ")"; break;
    case Kind::ScalarTimesIdentity: os << nd.children.front().describe() << " * I_" << nd.m; break;
    case Kind::Diagonal:
        os << "diag(";
        for (std::size_t i = 0; i < nd.children.size(); ++i) os << (i ? ", " : "") << nd.children[i].describe();
        os << ")";
        break;
    case Kind::Conjugated: os << "U " << nd.children.front().describe() << " U*"; break;
    case Kind::Translated: {
        os << nd.children.front().describe() << " shifted by (";
        for (int i = 0; i < nd.shift.size(); ++i) os << (i ? ", " : "") << nd.shift(i);
        os << ")";
        break;
    }
    case Kind::Sharpness: os << "sharpness(d1=" << nd.d1 << ", d2=" << nd.d2 << ") * I_" << nd.m; break;
    case Kind::Sampled: os << "sampled(" << nd.cells << " cells per axis, m=" << nd.m << ")"; break;
    case Kind::Powered: os << "(" << nd.children.front().describe() << ")^" << nd.a; break;
    }
    if (nd.kind != Kind::ScalarTimesIdentity && nd.kind != Kind::Translated && nd.kind != Kind::Powered) os << " on R^" << nd.n;
    return os.str();
}

std::optional<bool> MembershipTruth::a_p(double p) const {
    if (!power_exponent) return std::nullopt;
    const double a = *power_exponent;
    if (p <= 1.0) return a > -n && a <= 0.0;
    return a > -n && a < n * (p - 1.0);
}

std::optional<MembershipTruth> membership_truth(const WeightSpec& w) {
    using K = WeightSpec::Kind;
    switch (w.kind()) {
    case K::ScalarTimesIdentity:
    case K::Translated:
        return membership_truth(w.children().front());
    case K::Power:
    case K::LogOut:
    case K::LogIn: {
        MembershipTruth t;
        t.n = w.n();
        const double a = w.a();
        const double b = w.kind() == K::Power ? 0.0 : w.b();
        t.a_infty = a > -w.n();
        if (w.kind() == K::Power) {
            t.a_1 = a > -w.n() && a <= 0.0;
            t.power_exponent = a;
        }
        const double aminus = std::max(-a, 0.0), aplus = std::max(a, 0.0);
        if (w.kind() == K::LogIn) {
            t.d_lower = DimensionTruth{aminus, a > 0 || b <= 0};
            t.d_upper = DimensionTruth{aplus, a < 0 || b >= 0};
        } else {
            t.d_lower = DimensionTruth{aminus, a > 0 || b >= 0};
            t.d_upper = DimensionTruth{aplus, a < 0 || b <= 0};
        }
        return t;
    }
    case K::Powered: {
        auto inner = membership_truth(w.children().front());
        if (!inner || !inner->power_exponent) return std::nullopt;
        const double a = *inner->power_exponent * w.exponent();
        MembershipTruth t;
        t.n = inner->n;
        t.a_infty = a > -t.n;
        t.a_1 = a > -t.n && a <= 0.0;
        t.power_exponent = a;
        t.d_lower = DimensionTruth{std::max(-a, 0.0), true};
        t.d_upper = DimensionTruth{std::max(a, 0.0), true};
        return t;
    }
    case K::Sharpness: {
        MembershipTruth t;
        t.n = w.n();
        t.a_infty = true;
        t.d_lower = DimensionTruth{w.d1(), false};
        t.d_upper = DimensionTruth{w.d2(), false};
        return t;
    }
    default:
        return std::nullopt;
    }
}

namespace {

double power_integral_1d(double a, double lo, double hi) {
    auto f = [a](double x) {
        const double r = std::pow(std::abs(x), a + 1.0) / (a + 1.0);
        return x < 0 ? -r : r;
    };
    return f(hi) - f(lo);
}

}  // namespace

std::optional<AnalyticAverage> analytic_average(const WeightSpec& w, const Cube& q) {
    using K = WeightSpec::Kind;
    switch (w.kind()) {
    case K::ScalarTimesIdentity:
        return analytic_average(w.children().front(), q);
    case K::Translated:
        return analytic_average(w.children().front(), Cube(q.center - w.shift(), q.edge));
    case K::Power: {
        if (w.n() == 1) {
            const double lo = q.lower()(0), hi = q.upper()(0);
            return AnalyticAverage{power_integral_1d(w.a(), lo, hi) / (hi - lo), true};
        }
        const double t = q.center.norm() + q.edge;
        return AnalyticAverage{std::pow(t, w.a()), false};
    }
    case K::LogOut: {
        const double t = q.center.norm() + q.edge;
        return AnalyticAverage{std::pow(t, w.a()) * std::pow(std::log(2.0 + t), w.b()), false};
    }
    case K::LogIn: {
        const double t = q.center.norm() + q.edge;
        return AnalyticAverage{std::pow(t, w.a()) * std::pow(std::log(2.0 + 1.0 / t), w.b()), false};
    }
    default:
        return std::nullopt;
    }
}

}  // namespace mwlab
