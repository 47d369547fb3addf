#include "mwlab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mwlab/errors.hpp"

namespace mwlab {

namespace {

void require_square(const Mat& a, const char* what) {
    if (a.rows() != a.cols() || a.rows() == 0)
        throw DimensionError(std::string(what) + ": expected a non-empty square matrix, got " +
                             std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
}

void require_finite(const Mat& a, const char* what) {
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        const Complex z = a.data()[i];
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
            throw NumericError(std::string(what) + ": non-finite entry");
    }
}

double max_abs(const Mat& a) {
    double m = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i]));
    return m;
}

Mat hermitian_part(const Mat& a) { return (a + a.adjoint()) * 0.5; }

}  // namespace

Mat identity(int m) { return Mat::Identity(m, m); }

bool is_hermitian(const Mat& a, double tol) {
    if (a.rows() != a.cols()) return false;
    const double scale = std::max(max_abs(a), 1e-300);
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = i; j < a.cols(); ++j)
            if (std::abs(a(i, j) - std::conj(a(j, i))) > tol * scale) return false;
    return true;
}

bool is_positive_definite(const Mat& a) {
    if (!is_hermitian(a, 1e-10)) return false;
    Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(a), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) return false;
    return es.eigenvalues().minCoeff() > 0.0;
}

HermitianMatrix::HermitianMatrix(const Mat& a, double tol) {
    require_square(a, "HermitianMatrix");
    if (a.rows() > kMaxDim)
        throw DimensionError("HermitianMatrix: dimension " + std::to_string(a.rows()) +
                             " exceeds limit " + std::to_string(kMaxDim));
    require_finite(a, "HermitianMatrix");
    if (!is_hermitian(a, tol)) throw NumericError("HermitianMatrix: input is not Hermitian");
    a_ = hermitian_part(a);
}

SPDMatrix::SPDMatrix(const HermitianMatrix& h) : a_(h.matrix()) {
    Eigen::SelfAdjointEigenSolver<Mat> es(a_);
    if (es.info() != Eigen::Success) throw NumericError("SPDMatrix: eigensolver failed");
    evals_ = es.eigenvalues();
    evecs_ = es.eigenvectors();
    const double top = evals_.maxCoeff();
    const double bottom = evals_.minCoeff();
    if (!(top > 0.0) || bottom < 1e-14 * top)
        throw ConditioningError("SPDMatrix: eigenvalue " + std::to_string(bottom) +
                                " below 1e-14 of the largest " + std::to_string(top));
}

SPDMatrix::SPDMatrix(Mat a, RealVec evals, Mat evecs)
    : a_(std::move(a)), evals_(std::move(evals)), evecs_(std::move(evecs)) {}

Mat SPDMatrix::power_matrix(double alpha) const {
    if (alpha == 1.0) return a_;
    const int m = dim();
    if (alpha == 0.0) return identity(m);
    RealVec d(m);
    for (int i = 0; i < m; ++i) d(i) = std::pow(evals_(i), alpha);
    Mat r = evecs_ * d.cast<Complex>().asDiagonal() * evecs_.adjoint();
    return hermitian_part(r);
}

SPDMatrix SPDMatrix::power(double alpha) const {
    if (alpha == 1.0) return *this;
    const int m = dim();
    RealVec d(m);
    for (int i = 0; i < m; ++i) d(i) = std::pow(evals_(i), alpha);
    if (alpha == 0.0) return SPDMatrix(identity(m), RealVec::Ones(m), identity(m));
    Mat r = hermitian_part(evecs_ * d.cast<Complex>().asDiagonal() * evecs_.adjoint());
    return SPDMatrix(std::move(r), std::move(d), evecs_);
}

double operator_norm(const Mat& a) {
    if (a.rows() == 0 || a.cols() == 0) throw DimensionError("operator_norm: empty matrix");
    if (a.rows() != a.cols()) throw DimensionError("operator_norm: non-square input");
    require_finite(a, "operator_norm");
    if (a.rows() == 1) return std::abs(a(0, 0));
    Mat g = a.adjoint() * a;
    if (a.rows() == 2) {
        const double x = g(0, 0).real(), y = g(1, 1).real();
        const double h = 0.5 * (x - y);
        return std::sqrt(std::max(0.0, 0.5 * (x + y) + std::sqrt(h * h + std::norm(g(0, 1)))));
    }
    if (a.rows() == 3) {
        // largest root of the characteristic polynomial, trigonometric form
        const double q = (g(0, 0).real() + g(1, 1).real() + g(2, 2).real()) / 3.0;
        const double off = std::norm(g(0, 1)) + std::norm(g(0, 2)) + std::norm(g(1, 2));
        const double d0 = g(0, 0).real() - q, d1 = g(1, 1).real() - q, d2 = g(2, 2).real() - q;
        const double s = std::sqrt((d0 * d0 + d1 * d1 + d2 * d2 + 2.0 * off) / 6.0);
        if (s <= 1e-300) return std::sqrt(std::max(0.0, q));
        const Mat b = (g - std::complex<double>(q) * Mat::Identity(3, 3)) / s;
        const double r = std::clamp(0.5 * b.determinant().real(), -1.0, 1.0);
        const double top = q + 2.0 * s * std::cos(std::acos(r) / 3.0);
        return std::sqrt(std::max(0.0, top));
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(g), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericError("operator_norm: eigensolver failed");
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

double vector_norm(const Vec& v) { return v.norm(); }

SPDMatrix matrix_power(const SPDMatrix& a, double alpha) { return a.power(alpha); }

Mat psd_power(const Mat& a, double alpha) {
    require_square(a, "psd_power");
    Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(a));
    if (es.info() != Eigen::Success) throw NumericError("psd_power: eigensolver failed");
    RealVec d = es.eigenvalues();
    const double top = std::max(d.maxCoeff(), 0.0);
    for (Eigen::Index i = 0; i < d.size(); ++i) {
        double l = d(i) <= 1e-15 * top ? 0.0 : d(i);
        if (l == 0.0 && alpha < 0) throw ConditioningError("psd_power: singular input with negative exponent");
        d(i) = l == 0.0 ? (alpha == 0.0 ? 1.0 : 0.0) : std::pow(l, alpha);
    }
    return hermitian_part(es.eigenvectors() * d.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint());
}

double norm_commutation_defect(const Mat& a, const Mat& b) {
    const double ab = operator_norm(a * b);
    const double ba = operator_norm(b * a);
    return std::abs(ab - ba) / std::max({ab, ba, 1.0});
}

}  // namespace mwlab
