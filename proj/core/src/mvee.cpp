#include "mwlab/mvee.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mwlab/errors.hpp"

namespace mwlab {

namespace {

using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

struct Basis {
    std::vector<Mat> b;
};

Basis hermitian_basis(int m, bool real_only) {
    Basis out;
    for (int i = 0; i < m; ++i) {
        Mat e = Mat::Zero(m, m);
        e(i, i) = 1.0;
        out.b.push_back(e);
    }
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) {
            Mat e = Mat::Zero(m, m);
            e(i, j) = e(j, i) = 1.0;
            out.b.push_back(e);
            if (!real_only) {
                Mat f = Mat::Zero(m, m);
                f(i, j) = Complex(0, 1);
                f(j, i) = Complex(0, -1);
                out.b.push_back(f);
            }
        }
    return out;
}

}  // namespace

EllipsoidFit mvee_centered(const std::vector<Vec>& points, double tol, int max_iter) {
    if (points.empty()) throw ParameterError("mvee: empty point set");
    const int m = static_cast<int>(points.front().size());
    double scale = 0.0;
    bool real_only = true;
    for (const Vec& z : points) {
        if (z.size() != m) throw DimensionError("mvee: inconsistent point dimensions");
        if (!z.allFinite()) throw NumericError("mvee: non-finite point");
        scale = std::max(scale, z.norm());
        real_only = real_only && z.imag().cwiseAbs().maxCoeff() == 0.0;
    }
    if (!(scale > 0.0)) throw ConstructionError("mvee: all points are zero");
    std::vector<Vec> y;
    for (const Vec& z : points) y.push_back(z / scale);
    const int k = static_cast<int>(y.size());

    // Whitening by the second moment keeps the barrier well conditioned; the fit is mapped back at the end.
    Mat whiten;
    {
        Mat x = Mat::Zero(m, m);
        for (const Vec& z : y) x += z * z.adjoint();
        x /= static_cast<double>(k);
        Eigen::SelfAdjointEigenSolver<Mat> es(x);
        const RealVec ev = es.eigenvalues();
        if (!(ev.minCoeff() > 1e-24 * ev.maxCoeff()))
            throw ConstructionError("mvee: point cloud does not span the space");
        whiten = es.eigenvectors() * ev.cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().adjoint();
        if (real_only) whiten = whiten.real().cast<Complex>();
        double top = 0.0;
        for (Vec& z : y) {
            z = whiten * z;
            top = std::max(top, z.norm());
        }
        for (Vec& z : y) z /= top;
        whiten /= top;
    }

    const Basis basis = hermitian_basis(m, real_only);
    const int np = static_cast<int>(basis.b.size());
    RMat a(k, np);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < np; ++j) a(i, j) = y[i].dot(basis.b[j] * y[i]).real();

    RVec theta = RVec::Zero(np);
    for (int i = 0; i < m; ++i) theta(i) = 1.0 / 1.1;
    auto build = [&](const RVec& t) {
        Mat h = Mat::Zero(m, m);
        for (int j = 0; j < np; ++j) h += t(j) * basis.b[j];
        return h;
    };
    auto objective = [&](const RVec& t, double mu, double& out) {
        const RVec s = RVec::Ones(k) - a * t;
        if (s.minCoeff() <= 0.0) return false;
        Eigen::LLT<Mat> llt(build(t));
        if (llt.info() != Eigen::Success) return false;
        double logdet = 0.0;
        for (int i = 0; i < m; ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i).real());
        if (!std::isfinite(logdet)) return false;
        out = -logdet - mu * s.array().log().sum();
        return true;
    };

    EllipsoidFit fit;
    double mu = 1.0;
    int it = 0;
    while (true) {
        double f = 0.0;
        if (!objective(theta, mu, f)) throw FittingError("mvee: lost feasibility");
        for (;; ++it) {
            if (it >= max_iter) throw FittingError("mvee: Newton iteration limit reached");
            const RVec s = RVec::Ones(k) - a * theta;
            const Mat hinv = build(theta).inverse();
            std::vector<Mat> g(np);
            for (int j = 0; j < np; ++j) g[j] = hinv * basis.b[j];
            RVec grad(np);
            RMat hess(np, np);
            const RVec w1 = s.cwiseInverse(), w2 = w1.cwiseAbs2();
            for (int i = 0; i < np; ++i) {
                grad(i) = -g[i].trace().real() + mu * a.col(i).dot(w1);
                for (int j = i; j < np; ++j) {
                    double tr = 0.0;
                    for (int r = 0; r < m; ++r)
                        for (int c = 0; c < m; ++c) tr += (g[i](r, c) * g[j](c, r)).real();
                    hess(i, j) = hess(j, i) = tr + mu * (a.col(i).array() * a.col(j).array() * w2.array()).sum();
                }
            }
            const RVec d = hess.ldlt().solve(-grad);
            const double dec = -grad.dot(d);
            if (!(dec >= 0.0) || !d.allFinite()) throw FittingError("mvee: Newton direction failed");
            if (dec < 1e-12) break;
            double step = 1.0, fn = 0.0;
            while (!objective(theta + step * d, mu, fn) || fn > f - 0.25 * step * dec) {
                step *= 0.5;
                if (step < 1e-14) break;
            }
            if (step < 1e-14) break;
            theta += step * d;
            f = fn;
        }
        const double gap = k * mu / m;
        if (gap <= tol) {
            fit.gap = gap;
            break;
        }
        mu *= 0.1;
    }
    fit.iterations = it;
    Mat h = build(theta);
    const RVec s = RVec::Ones(k) - a * theta;
    const double worst = 1.0 - s.minCoeff();
    fit.shape = whiten.adjoint() * (h / std::max(worst, 1e-300)) * whiten / (scale * scale);
    fit.shape = (0.5 * (fit.shape + fit.shape.adjoint())).eval();
    return fit;
}

}  // namespace mwlab
