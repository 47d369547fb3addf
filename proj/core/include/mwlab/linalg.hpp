#pragma once

#include <complex>

#include <Eigen/Dense>

#ifndef MWLAB_MAX_DIM
#define MWLAB_MAX_DIM 8
#endif

namespace mwlab {

inline constexpr int kMaxDim = MWLAB_MAX_DIM;

using Complex = std::complex<double>;
using Mat = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxDim, kMaxDim>;
using Vec = Eigen::Matrix<Complex, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;
using RealVec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;

Mat identity(int m);

// Validated Hermitian matrix. Input is re-symmetrized as (A + A*)/2 after the check.
class HermitianMatrix {
public:
    explicit HermitianMatrix(const Mat& a, double tol = 1e-12);

    int dim() const { return static_cast<int>(a_.rows()); }
    const Mat& matrix() const { return a_; }

private:
    Mat a_;
};

// Positive definite matrix with cached eigendecomposition U diag(lambda) U*.
class SPDMatrix {
public:
    SPDMatrix() : SPDMatrix(Mat(Mat::Identity(1, 1))) {}
    explicit SPDMatrix(const HermitianMatrix& h);
    explicit SPDMatrix(const Mat& a) : SPDMatrix(HermitianMatrix(a)) {}

    int dim() const { return static_cast<int>(a_.rows()); }
    const Mat& matrix() const { return a_; }
    const RealVec& eigenvalues() const { return evals_; }
    const Mat& eigenvectors() const { return evecs_; }
    double condition() const { return evals_.maxCoeff() / evals_.minCoeff(); }

    SPDMatrix power(double alpha) const;
    Mat power_matrix(double alpha) const;
    SPDMatrix inverse() const { return power(-1.0); }

private:
    SPDMatrix(Mat a, RealVec evals, Mat evecs);

    Mat a_;
    RealVec evals_;
    Mat evecs_;
};

// Largest singular value. Throws DimensionError / NumericError.
double operator_norm(const Mat& a);

// Euclidean norm of a vector.
double vector_norm(const Vec& v);

SPDMatrix matrix_power(const SPDMatrix& a, double alpha);

// Hermitian power for a positive semidefinite input; zero eigenvalues stay zero for alpha > 0.
Mat psd_power(const Mat& a, double alpha);

// | ||AB|| - ||BA|| | / max(||AB||, ||BA||, 1)
double norm_commutation_defect(const Mat& a, const Mat& b);

bool is_hermitian(const Mat& a, double tol = 1e-12);
bool is_positive_definite(const Mat& a);

}  // namespace mwlab
