#pragma once

// Autocorrelation model Gamma(beta) for the rows (points) and the cross-series
// covariance Sigma for the columns of a separable Gamma (x) Sigma model.

#include <cmath>
#include <cstddef>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "parseries/errors.hpp"
#include "parseries/linalg.hpp"

namespace parseries {

/// Stationary exponential / AR(1) correlation on a grid of points:
/// Gamma_ij = beta^{|x_i - x_j|}.
class Ar1Model {
public:
    /// Integer grid 1..n.
    explicit Ar1Model(std::size_t n) : points_(n) {
        if (n < 2) throw domain_error("Ar1Model: need at least two points");
        for (std::size_t i = 0; i < n; ++i) points_[i] = static_cast<double>(i + 1);
        integer_lags_ = true;
    }

    explicit Ar1Model(std::vector<double> points) : points_(std::move(points)) {
        if (points_.size() < 2) throw domain_error("Ar1Model: need at least two points");
        integer_lags_ = true;
        for (std::size_t i = 1; i < points_.size(); ++i) {
            const double lag = points_[i] - points_[i - 1];
            if (!(lag > 0.0)) throw domain_error("Ar1Model: points must be strictly increasing");
            if (lag != std::round(lag)) integer_lags_ = false;
        }
    }

    std::size_t size() const noexcept { return points_.size(); }
    const std::vector<double>& points() const noexcept { return points_; }
    bool integer_lags() const noexcept { return integer_lags_; }

private:
    std::vector<double> points_;
    bool integer_lags_ = true;
};

/// Gamma(beta), its inverse W and its derivative D = dGamma/dbeta.
struct CovBundle {
    double beta = 0.0;
    Matrix gamma;
    Matrix w;
    Matrix d;
    double log_det_gamma = 0.0;

    std::size_t size() const noexcept { return static_cast<std::size_t>(gamma.rows()); }
};

namespace detail {

// beta^lag with 0^0 := 1.
inline double lag_power(double beta, double lag) {
    if (lag == 0.0) return 1.0;
    return std::pow(beta, lag);
}

// d/dbeta beta^lag = lag * beta^(lag-1), with the same 0^0 convention.
inline double lag_power_derivative(double beta, double lag) {
    if (lag == 0.0) return 0.0;
    if (lag == 1.0) return 1.0;
    return lag * std::pow(beta, lag - 1.0);
}

}  // namespace detail

/// Builds the bundle for one beta. The inverse uses the Markov structure of
/// the exponential correlation: W is tri-diagonal with entries determined by
/// the neighbour correlations rho_i = beta^{x_{i+1} - x_i}.
inline CovBundle gamma_of(const Ar1Model& model, double beta) {
    if (!(std::abs(beta) < 1.0))
        throw domain_error("autocorrelation outside open unit interval");
    if (beta < 0.0 && !model.integer_lags())
        throw domain_error("negative autocorrelation requires integer lags between points");

    const auto& x = model.points();
    const auto n = static_cast<Eigen::Index>(x.size());
    CovBundle b;
    b.beta = beta;
    b.gamma.resize(n, n);
    b.d.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            const double lag = std::abs(x[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(j)]);
            const double g = detail::lag_power(beta, lag);
            const double dg = detail::lag_power_derivative(beta, lag);
            b.gamma(i, j) = b.gamma(j, i) = g;
            b.d(i, j) = b.d(j, i) = dg;
        }
    }
    if (!b.d.allFinite())
        throw domain_error("derivative of the correlation is not finite at this beta");

    b.w = Matrix::Zero(n, n);
    b.log_det_gamma = 0.0;
    std::vector<double> inv_one_minus(static_cast<std::size_t>(n - 1));
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
        const double rho = b.gamma(i + 1, i);
        const double c = 1.0 - rho * rho;
        inv_one_minus[static_cast<std::size_t>(i)] = 1.0 / c;
        b.log_det_gamma += std::log(c);
        b.w(i, i + 1) = b.w(i + 1, i) = -rho / c;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        double v = 0.0;
        if (i > 0) v += inv_one_minus[static_cast<std::size_t>(i - 1)];
        if (i + 1 < n) v += inv_one_minus[static_cast<std::size_t>(i)];
        if (i > 0 && i + 1 < n) v -= 1.0;
        b.w(i, i) = v;
    }
    return b;
}

/// n tr(WDWD) - tr^2(WD) for a kernel P (W or WQ) of residual dimension m.
inline double v_factor(const Matrix& p, const Matrix& d, std::size_t m) {
    const Matrix pd = p * d;
    const double tr = pd.trace();
    // tr(PDPD) = sum_ij (PD)_ij (PD)_ji
    const double tr2 = pd.cwiseProduct(pd.transpose()).sum();
    return static_cast<double>(m) * tr2 - tr * tr;
}

inline double v_factor(const CovBundle& bundle) {
    return v_factor(bundle.w, bundle.d, bundle.size());
}

// ---------------------------------------------------------------------------
// Cross-series covariance

struct ScalarVar {
    double variance = 1.0;
};
struct DiagonalVar {
    std::vector<double> variances;
};
struct FullPd {
    Matrix sigma;
};
/// Sigma_rs = a_r b_s for r <= s (symmetric); its inverse is tri-diagonal.
struct Green {
    std::vector<double> a;
    std::vector<double> b;
};

using SigmaSpec = std::variant<ScalarVar, DiagonalVar, FullPd, Green>;

inline Matrix build_sigma(const SigmaSpec& spec, std::size_t k) {
    if (k == 0) throw domain_error("build_sigma: k must be positive");
    const auto kk = static_cast<Eigen::Index>(k);
    Matrix sigma = std::visit(
        [&](const auto& s) -> Matrix {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, ScalarVar>) {
                return s.variance * Matrix::Identity(kk, kk);
            } else if constexpr (std::is_same_v<T, DiagonalVar>) {
                if (s.variances.size() != k)
                    throw domain_error("build_sigma: diagonal has " + std::to_string(s.variances.size()) +
                                       " entries, expected " + std::to_string(k));
                Matrix m = Matrix::Zero(kk, kk);
                for (Eigen::Index r = 0; r < kk; ++r) m(r, r) = s.variances[static_cast<std::size_t>(r)];
                return m;
            } else if constexpr (std::is_same_v<T, FullPd>) {
                if (s.sigma.rows() != kk || s.sigma.cols() != kk)
                    throw domain_error("build_sigma: full Sigma has wrong dimensions");
                if (linalg::max_abs(s.sigma - s.sigma.transpose()) > 1e-12 * (1.0 + linalg::max_abs(s.sigma)))
                    throw domain_error("build_sigma: full Sigma is not symmetric");
                return linalg::symmetrized(s.sigma);
            } else {
                if (s.a.size() != k || s.b.size() != k)
                    throw domain_error("build_sigma: Green vectors must have length " + std::to_string(k));
                Matrix m(kk, kk);
                for (Eigen::Index r = 0; r < kk; ++r)
                    for (Eigen::Index c = r; c < kk; ++c)
                        m(r, c) = m(c, r) = s.a[static_cast<std::size_t>(r)] * s.b[static_cast<std::size_t>(c)];
                return m;
            }
        },
        spec);
    if (auto bad = linalg::first_failing_leading_minor(sigma))
        throw domain_error("build_sigma: Sigma is not positive definite (leading minor of order " +
                           std::to_string(*bad) + " fails)");
    return sigma;
}

}  // namespace parseries
