#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstddef>
#include <optional>

#include "parseries/errors.hpp"

namespace parseries {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Relative threshold (times the largest eigen/singular value) used for every
/// rank and pseudo-determinant decision in the library.
inline constexpr double kRankTolerance = 1e-10;

namespace linalg {

inline Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

inline double max_abs(const Matrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

/// 1-based order of the first leading principal minor that is not positive
/// definite, or nullopt when the whole matrix is PD.
inline std::optional<std::size_t> first_failing_leading_minor(const Matrix& a) {
    const auto k = static_cast<std::size_t>(a.rows());
    for (std::size_t j = 1; j <= k; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        Eigen::LLT<Matrix> llt(a.topLeftCorner(jj, jj));
        if (llt.info() != Eigen::Success) return j;
        const Matrix& l = llt.matrixLLT();
        // LLT does not flag a zero pivot; treat tiny pivots as failure.
        const double pivot = l(jj - 1, jj - 1);
        if (!(pivot > 0.0) || !std::isfinite(pivot)) return j;
        if (pivot * pivot <= 1e-14 * std::abs(a(jj - 1, jj - 1)) + 1e-300) return j;
    }
    return std::nullopt;
}

inline bool is_positive_definite(const Matrix& a) {
    return a.rows() == a.cols() && !first_failing_leading_minor(a).has_value();
}

struct PseudoLogDet {
    double log_det;
    std::size_t rank;
};

/// Log of the product of the eigenvalues above kRankTolerance * max eigenvalue
/// of a symmetric positive semi-definite matrix.
inline PseudoLogDet pseudo_log_det(const Matrix& a) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(a), Eigen::EigenvaluesOnly);
    const Vector& ev = es.eigenvalues();
    if (ev.size() == 0) return {0.0, 0};
    const double top = ev.maxCoeff();
    if (!(top > 0.0)) return {0.0, 0};
    PseudoLogDet out{0.0, 0};
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev(i) > kRankTolerance * top) {
            out.log_det += std::log(ev(i));
            ++out.rank;
        }
    }
    return out;
}

/// Numerical column rank from the singular values, same relative threshold.
inline std::size_t column_rank(const Matrix& x) {
    if (x.cols() == 0 || x.rows() == 0) return 0;
    Eigen::JacobiSVD<Matrix> svd(x);
    const Vector& sv = svd.singularValues();
    const double top = sv(0);
    if (!(top > 0.0)) return 0;
    std::size_t r = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > kRankTolerance * top) ++r;
    return r;
}

/// Symmetric square root of a symmetric PSD matrix.
inline Matrix symmetric_sqrt(const Matrix& a) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(a));
    const Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

/// log|A| for a symmetric positive definite matrix; nullopt if Cholesky fails.
inline std::optional<double> log_det_pd(const Matrix& a) {
    Eigen::LLT<Matrix> llt(a);
    if (llt.info() != Eigen::Success) return std::nullopt;
    const Vector diag = llt.matrixLLT().diagonal();
    double s = 0.0;
    for (Eigen::Index i = 0; i < diag.size(); ++i) {
        if (!(diag(i) > 0.0)) return std::nullopt;
        s += std::log(diag(i));
    }
    return 2.0 * s;
}

}  // namespace linalg
}  // namespace parseries
