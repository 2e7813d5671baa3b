#pragma once

// Residual (REML) projections Q = I - X (X'WX)^{-1} X'W and the kernels WQ
// they induce, sequential projectors for the triangular and Markov marginal
// likelihoods, and the inner-product / squared-distance pair of a data matrix.

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "parseries/errors.hpp"
#include "parseries/linalg.hpp"

namespace parseries {

/// An n x p model matrix of full column rank (p may be zero).
class DesignMatrix {
public:
    explicit DesignMatrix(Matrix x) : x_(std::move(x)) {
        if (x_.cols() > x_.rows())
            throw domain_error("DesignMatrix: more columns than rows");
        if (x_.cols() > 0 && linalg::column_rank(x_) != static_cast<std::size_t>(x_.cols()))
            throw domain_error("DesignMatrix: model matrix is rank deficient");
    }

    static DesignMatrix none(std::size_t n) {
        return DesignMatrix(Matrix(static_cast<Eigen::Index>(n), 0));
    }
    static DesignMatrix intercept(std::size_t n) {
        return DesignMatrix(Matrix::Ones(static_cast<Eigen::Index>(n), 1));
    }
    /// Columns 1, t, t^2, ... (p columns) on points rescaled to [-1, 1].
    static DesignMatrix polynomial(std::span<const double> points, std::size_t p) {
        const auto n = static_cast<Eigen::Index>(points.size());
        Matrix x(n, static_cast<Eigen::Index>(p));
        const double lo = points.front();
        const double hi = points.back();
        for (Eigen::Index i = 0; i < n; ++i) {
            const double t = hi > lo ? 2.0 * (points[static_cast<std::size_t>(i)] - lo) / (hi - lo) - 1.0 : 0.0;
            double v = 1.0;
            for (Eigen::Index j = 0; j < x.cols(); ++j) {
                x(i, j) = v;
                v *= t;
            }
        }
        return DesignMatrix(std::move(x));
    }

    std::size_t rows() const noexcept { return static_cast<std::size_t>(x_.rows()); }
    std::size_t rank() const noexcept { return static_cast<std::size_t>(x_.cols()); }
    const Matrix& matrix() const noexcept { return x_; }

private:
    Matrix x_;
};

struct Projector {
    Matrix q;
    Matrix wq;
    std::size_t rank = 0;
    double log_pdet_wq = 0.0;
};

namespace detail {

inline void require_pd(const Matrix& w) {
    if (w.rows() != w.cols() || !linalg::log_det_pd(w))
        throw domain_error("projector: inner-product matrix W is not positive definite");
}

// WQ = W - WX (X'WX)^{-1} X'W for a span of full column rank.
inline Matrix residual_kernel(const Matrix& w, const Matrix& span) {
    if (span.cols() == 0) return w;
    const Matrix wx = w * span;
    Eigen::LLT<Matrix> llt(span.transpose() * wx);
    if (llt.info() != Eigen::Success)
        throw domain_error("projector: X'WX is singular");
    return linalg::symmetrized(w - wx * llt.solve(wx.transpose()));
}

inline Projector projector_for_span(const Matrix& w, const Matrix& span) {
    const auto n = w.rows();
    Projector out;
    if (span.cols() == 0) {
        out.q = Matrix::Identity(n, n);
        out.wq = w;
    } else {
        const Matrix wx = w * span;
        Eigen::LLT<Matrix> llt(span.transpose() * wx);
        if (llt.info() != Eigen::Success)
            throw domain_error("projector: X'WX is singular");
        out.q = Matrix::Identity(n, n) - span * llt.solve(wx.transpose());
        out.wq = linalg::symmetrized(w * out.q);
    }
    const auto pl = linalg::pseudo_log_det(out.wq);
    out.rank = pl.rank;
    out.log_pdet_wq = pl.log_det;
    return out;
}

inline std::vector<std::size_t> checked_order(std::span<const std::size_t> order, std::size_t k) {
    std::vector<std::size_t> out(k);
    if (order.empty()) {
        std::iota(out.begin(), out.end(), std::size_t{0});
        return out;
    }
    if (order.size() != k) throw domain_error("series order must list every series exactly once");
    out.assign(order.begin(), order.end());
    std::vector<std::size_t> sorted = out;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < k; ++i)
        if (sorted[i] != i) throw domain_error("series order is not a permutation");
    return out;
}

}  // namespace detail

inline Projector make_projector(const Matrix& w, const DesignMatrix& x) {
    detail::require_pd(w);
    if (x.rows() != static_cast<std::size_t>(w.rows()))
        throw domain_error("make_projector: design and W have different row counts");
    return detail::projector_for_span(w, x.matrix());
}

enum class SequentialMode {
    ut_full,  ///< kernel span(X, Y_1, ..., Y_{r-1})
    markov,   ///< kernel span(X, Y_{r-1})
};

/// Column span used for the r-th (0-based) series taken in `order`.
inline Matrix sequential_span(const DesignMatrix& x, const Matrix& y, SequentialMode mode,
                              const std::vector<std::size_t>& order, std::size_t r) {
    const auto n = y.rows();
    const auto p = static_cast<Eigen::Index>(x.rank());
    Eigen::Index extra = 0;
    if (mode == SequentialMode::ut_full) extra = static_cast<Eigen::Index>(r);
    else extra = r > 0 ? 1 : 0;
    Matrix span(n, p + extra);
    span.leftCols(p) = x.matrix();
    if (mode == SequentialMode::ut_full) {
        for (std::size_t j = 0; j < r; ++j)
            span.col(p + static_cast<Eigen::Index>(j)) = y.col(static_cast<Eigen::Index>(order[j]));
    } else if (r > 0) {
        span.col(p) = y.col(static_cast<Eigen::Index>(order[r - 1]));
    }
    if (linalg::column_rank(span) != static_cast<std::size_t>(span.cols()))
        throw domain_error("sequential projector: span is degenerate for series r = " + std::to_string(r + 1));
    return span;
}

/// Number of series that receive a projector of rank >= 1.
inline std::size_t sequential_term_count(std::size_t n, std::size_t p, std::size_t k, SequentialMode mode) {
    if (p >= n) return 0;
    const std::size_t m = n - p;
    if (mode == SequentialMode::ut_full) return std::min(k, m);
    if (k == 0) return 0;
    return m >= 2 ? k : 1;
}

/// One projector per series, in the given order (empty order = 0..k-1).
/// ut_full stops once the projector rank would reach zero.
inline std::vector<Projector> sequential_projectors(const Matrix& w, const DesignMatrix& x, const Matrix& y,
                                                    SequentialMode mode,
                                                    std::span<const std::size_t> order = {}) {
    detail::require_pd(w);
    if (x.rows() != static_cast<std::size_t>(y.rows()) || y.rows() != w.rows())
        throw domain_error("sequential_projectors: dimension mismatch");
    const auto k = static_cast<std::size_t>(y.cols());
    const auto ord = detail::checked_order(order, k);
    const std::size_t terms = sequential_term_count(static_cast<std::size_t>(y.rows()), x.rank(), k, mode);
    std::vector<Projector> out;
    out.reserve(terms);
    for (std::size_t r = 0; r < terms; ++r)
        out.push_back(detail::projector_for_span(w, sequential_span(x, y, mode, ord, r)));
    return out;
}

/// S = YY' and the squared distances D_ij = S_ii + S_jj - 2 S_ij between rows.
struct DistancePair {
    Matrix s;
    Matrix dsq;
};

inline DistancePair distance_pair(const Matrix& y) {
    DistancePair out;
    out.s = y * y.transpose();
    const auto n = out.s.rows();
    out.dsq.resize(n, n);
    // Row differences rather than S_ii + S_jj - 2 S_ij: same value, no cancellation.
    for (Eigen::Index i = 0; i < n; ++i) {
        out.dsq(i, i) = 0.0;
        for (Eigen::Index j = 0; j < i; ++j)
            out.dsq(i, j) = out.dsq(j, i) = (y.row(i) - y.row(j)).squaredNorm();
    }
    return out;
}

/// Per-series squared distances (Y_ir - Y_jr)^2, one matrix per column.
inline std::vector<Matrix> per_series_distances(const Matrix& y) {
    std::vector<Matrix> out;
    out.reserve(static_cast<std::size_t>(y.cols()));
    const auto n = y.rows();
    for (Eigen::Index r = 0; r < y.cols(); ++r) {
        Matrix d(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) {
                const double diff = y(i, r) - y(j, r);
                d(i, j) = diff * diff;
            }
        out.push_back(std::move(d));
    }
    return out;
}

}  // namespace parseries
