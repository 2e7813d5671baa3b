#pragma once

// Profile and marginal log likelihoods for beta in the separable model
// cov(Y_ir, Y_js) = Gamma_ij(beta) Sigma_rs, their analytic scores, the
// closed-form Fisher information for the three Sigma models, and a 1-D
// maximiser.
//
// Every likelihood is written in terms of a kernel P and a residual dimension
// m: without a design P = W = Gamma^{-1} and m = n; with a design X of rank p,
// P = WQ and m = n - p. The derivative of P is -P D P in both cases, and the
// derivative of log Det(P) is -tr(PD).

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "parseries/covariance_models.hpp"
#include "parseries/errors.hpp"
#include "parseries/linalg.hpp"
#include "parseries/projection_kernels.hpp"

namespace parseries {

enum class ModelKind { I, II, III };

inline std::string_view to_string(ModelKind m) {
    switch (m) {
        case ModelKind::I: return "I";
        case ModelKind::II: return "II";
        case ModelKind::III: return "III";
    }
    return "?";
}

inline ModelKind parse_model_kind(std::string_view s) {
    if (s == "I" || s == "1") return ModelKind::I;
    if (s == "II" || s == "2") return ModelKind::II;
    if (s == "III" || s == "3") return ModelKind::III;
    throw domain_error("unknown model '" + std::string(s) + "' (expected I, II or III)");
}

struct LikelihoodEval {
    double loglik = 0.0;
    double score = 0.0;
    double expected_info = 0.0;
    double observed_info = 0.0;
};

struct FitResult {
    double beta_hat = 0.0;
    double se = 0.0;
    double loglik_at_max = 0.0;
    std::size_t evaluations = 0;
    bool boundary = false;
};

/// Per-beta quantities shared by every likelihood: the kernel P (W or WQ),
/// P D P, tr(PD) and log Det(P).
class ResidualKernel {
public:
    ResidualKernel(const Ar1Model& model, double beta, const std::optional<DesignMatrix>& x = std::nullopt)
        : ResidualKernel(gamma_of(model, beta), x) {}

    ResidualKernel(CovBundle bundle, const std::optional<DesignMatrix>& x = std::nullopt)
        : bundle_(std::move(bundle)) {
        const std::size_t n = bundle_.size();
        if (x && x->rank() > 0) {
            if (x->rows() != n) throw domain_error("design has " + std::to_string(x->rows()) +
                                                   " rows but the series have " + std::to_string(n));
            auto proj = make_projector(bundle_.w, *x);
            p_ = std::move(proj.wq);
            log_det_ = proj.log_pdet_wq;
            m_ = n - x->rank();
            if (proj.rank != m_)
                throw degenerate_likelihood("residual kernel has rank " + std::to_string(proj.rank) +
                                            ", expected " + std::to_string(m_));
        } else {
            p_ = bundle_.w;
            log_det_ = -bundle_.log_det_gamma;
            m_ = n;
        }
        pd_ = p_ * bundle_.d;
        pdp_ = linalg::symmetrized(pd_ * p_);
        trace_pd_ = pd_.trace();
    }

    const CovBundle& bundle() const noexcept { return bundle_; }
    double beta() const noexcept { return bundle_.beta; }
    std::size_t n() const noexcept { return bundle_.size(); }
    std::size_t residual_dim() const noexcept { return m_; }
    const Matrix& kernel() const noexcept { return p_; }
    const Matrix& kernel_d_kernel() const noexcept { return pdp_; }
    double trace_pd() const noexcept { return trace_pd_; }
    double log_det() const noexcept { return log_det_; }
    double v_factor() const { return parseries::v_factor(p_, bundle_.d, m_); }

private:
    CovBundle bundle_;
    Matrix p_;
    Matrix pd_;
    Matrix pdp_;
    double trace_pd_ = 0.0;
    double log_det_ = 0.0;
    std::size_t m_ = 0;
};

/// Model III with k >= m: the likelihood no longer depends on beta.
inline bool is_degenerate(ModelKind model, std::size_t k, std::size_t m) {
    return model == ModelKind::III && k >= m;
}

namespace detail {

inline double positive_form(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v))
        throw degenerate_likelihood(std::string("non-positive quadratic form ") + what);
    return v;
}

inline double column_form(const Matrix& p, const Matrix& y, Eigen::Index r) {
    return y.col(r).dot(p * y.col(r));
}

}  // namespace detail

inline double profile_loglik(const ResidualKernel& kern, const Matrix& y, ModelKind model) {
    if (static_cast<std::size_t>(y.rows()) != kern.n())
        throw domain_error("data has " + std::to_string(y.rows()) + " rows, expected " + std::to_string(kern.n()));
    const auto k = static_cast<double>(y.cols());
    const auto m = static_cast<double>(kern.residual_dim());
    const Matrix& p = kern.kernel();
    const double head = 0.5 * k * kern.log_det();
    switch (model) {
        case ModelKind::I: {
            const double q = detail::positive_form((y.transpose() * p * y).trace(), "tr(Y'WY)");
            return head - 0.5 * m * k * std::log(q);
        }
        case ModelKind::II: {
            double s = 0.0;
            for (Eigen::Index r = 0; r < y.cols(); ++r)
                s += std::log(detail::positive_form(detail::column_form(p, y, r), "Y_r'WY_r"));
            return head - 0.5 * m * s;
        }
        case ModelKind::III: {
            const Matrix g = linalg::symmetrized(y.transpose() * p * y);
            if (y.cols() <= static_cast<Eigen::Index>(kern.residual_dim())) {
                auto ld = linalg::log_det_pd(g);
                if (!ld) throw degenerate_likelihood("Y'WY is singular");
                return head - 0.5 * m * *ld;
            }
            // k > m: pseudo-determinant with exponent max(k, m) = k.
            return head - 0.5 * k * linalg::pseudo_log_det(g).log_det;
        }
    }
    return 0.0;
}

/// Exact derivative of profile_loglik in beta.
inline double profile_score(const ResidualKernel& kern, const Matrix& y, ModelKind model) {
    if (static_cast<std::size_t>(y.rows()) != kern.n())
        throw domain_error("data has " + std::to_string(y.rows()) + " rows, expected " + std::to_string(kern.n()));
    const auto kz = static_cast<std::size_t>(y.cols());
    const auto k = static_cast<double>(kz);
    const auto m = static_cast<double>(kern.residual_dim());
    if (is_degenerate(model, kz, kern.residual_dim())) return 0.0;
    const Matrix& p = kern.kernel();
    const Matrix& a = kern.kernel_d_kernel();
    const double head = -0.5 * k * kern.trace_pd();
    switch (model) {
        case ModelKind::I: {
            const Matrix py = p * y;
            const Matrix ay = a * y;
            const double q = detail::positive_form(y.cwiseProduct(py).sum(), "tr(Y'WY)");
            return head + 0.5 * m * k * y.cwiseProduct(ay).sum() / q;
        }
        case ModelKind::II: {
            double s = 0.0;
            for (Eigen::Index r = 0; r < y.cols(); ++r) {
                const double q = detail::positive_form(detail::column_form(p, y, r), "Y_r'WY_r");
                s += detail::column_form(a, y, r) / q;
            }
            return head + 0.5 * m * s;
        }
        case ModelKind::III: {
            const Matrix g = linalg::symmetrized(y.transpose() * p * y);
            Eigen::LLT<Matrix> llt(g);
            if (llt.info() != Eigen::Success) throw degenerate_likelihood("Y'WY is singular");
            const Matrix h = y.transpose() * a * y;
            return head + 0.5 * m * llt.solve(h).trace();
        }
    }
    return 0.0;
}

inline double profile_loglik(const Matrix& y, const Ar1Model& ar1, double beta, ModelKind model,
                             const std::optional<DesignMatrix>& x = std::nullopt) {
    return profile_loglik(ResidualKernel(ar1, beta, x), y, model);
}

inline double score(const Matrix& y, const Ar1Model& ar1, double beta, ModelKind model,
                    const std::optional<DesignMatrix>& x = std::nullopt) {
    return profile_score(ResidualKernel(ar1, beta, x), y, model);
}

/// Fisher information from V, the residual dimension m and the series count k.
inline double fisher_info_closed_form(double v, std::size_t m, std::size_t k, ModelKind model) {
    const auto md = static_cast<double>(m);
    const auto kd = static_cast<double>(k);
    switch (model) {
        case ModelKind::I: return v * kd * kd / (2.0 * (md * kd + 2.0));
        case ModelKind::II: return v * kd / (2.0 * (md + 2.0));
        case ModelKind::III:
            if (k > m) throw domain_error("information formula undefined; likelihood degenerate");
            if (m < 2) return 0.0;
            return v * kd * (md - kd) / (2.0 * (md - 1.0) * (md + 2.0));
    }
    return 0.0;
}

inline double expected_info(std::size_t k, const ResidualKernel& kern, ModelKind model) {
    return fisher_info_closed_form(kern.v_factor(), kern.residual_dim(), k, model);
}

inline double expected_info(std::size_t k, const CovBundle& bundle, ModelKind model) {
    return fisher_info_closed_form(v_factor(bundle), bundle.size(), k, model);
}

/// Relative efficiency of model II to model I for i.i.d. series.
inline double efficiency_II_vs_I(std::size_t n, std::size_t k) {
    const auto nd = static_cast<double>(n);
    const auto kd = static_cast<double>(k);
    return (nd * kd + 2.0) / (nd * kd + 2.0 * kd);
}

namespace detail {

inline double second_difference_step(double beta) {
    double h = 1e-5 * std::max(1.0, std::abs(beta));
    const double room = 1.0 - std::abs(beta);
    if (h >= room) h = 0.5 * room;
    return h;
}

}  // namespace detail

/// Value, score, closed-form and observed information at one beta.
inline LikelihoodEval evaluate(const Matrix& y, const Ar1Model& ar1, double beta, ModelKind model,
                               const std::optional<DesignMatrix>& x = std::nullopt) {
    const ResidualKernel kern(ar1, beta, x);
    LikelihoodEval out;
    out.loglik = profile_loglik(kern, y, model);
    out.score = profile_score(kern, y, model);
    const auto k = static_cast<std::size_t>(y.cols());
    out.expected_info = k > kern.residual_dim() && model == ModelKind::III
                            ? 0.0
                            : expected_info(k, kern, model);
    const double h = detail::second_difference_step(beta);
    const double up = profile_loglik(y, ar1, beta + h, model, x);
    const double dn = profile_loglik(y, ar1, beta - h, model, x);
    out.observed_info = -(up - 2.0 * out.loglik + dn) / (h * h);
    return out;
}

struct SearchOptions {
    double lower = -1.0 + 1e-6;
    double upper = 1.0 - 1e-6;
    double tolerance = 1e-8;
};

/// Maximises the profile likelihood over beta. A 33-point scan locates the
/// highest grid cell and Brent's method refines inside the neighbouring cells.
inline FitResult fit_beta(const Matrix& y, const Ar1Model& ar1, ModelKind model,
                          const std::optional<DesignMatrix>& x = std::nullopt, const SearchOptions& opt = {}) {
    if (!(opt.lower < opt.upper) || opt.lower <= -1.0 || opt.upper >= 1.0)
        throw domain_error("fit_beta: search interval must lie inside (-1, 1)");
    std::size_t evals = 0;
    auto loglik = [&](double b) {
        ++evals;
        return profile_loglik(y, ar1, b, model, x);
    };

    if (x && x->rows() != ar1.size()) throw domain_error("fit_beta: design and data have different row counts");
    if (is_degenerate(model, static_cast<std::size_t>(y.cols()), ar1.size() - (x ? x->rank() : 0)))
        throw degenerate_likelihood("uninformative likelihood: model III with k >= n - p does not depend on beta");
    {
        constexpr int kProbe = 9;
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (int i = 0; i < kProbe; ++i) {
            const double b = opt.lower + (opt.upper - opt.lower) * i / (kProbe - 1);
            const double v = loglik(b);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (hi - lo < 1e-8 * (1.0 + std::abs(hi))) throw degenerate_likelihood("uninformative likelihood");
    }

    constexpr int kGrid = 33;
    std::vector<double> grid(kGrid);
    std::vector<double> vals(kGrid);
    int best = 0;
    for (int i = 0; i < kGrid; ++i) {
        grid[static_cast<std::size_t>(i)] = opt.lower + (opt.upper - opt.lower) * i / (kGrid - 1);
        vals[static_cast<std::size_t>(i)] = loglik(grid[static_cast<std::size_t>(i)]);
        if (vals[static_cast<std::size_t>(i)] > vals[static_cast<std::size_t>(best)]) best = i;
    }
    const double a = grid[static_cast<std::size_t>(std::max(best - 1, 0))];
    const double b = grid[static_cast<std::size_t>(std::min(best + 1, kGrid - 1))];

    const int bits = static_cast<int>(std::ceil(1.0 - std::log2(opt.tolerance)));
    std::uintmax_t max_iter = 200;
    const auto [beta_hat, neg] =
        boost::math::tools::brent_find_minima([&](double v) { return -loglik(v); }, a, b, bits, max_iter);

    FitResult out;
    out.beta_hat = beta_hat;
    out.loglik_at_max = -neg;
    if (vals[static_cast<std::size_t>(best)] > out.loglik_at_max) {
        out.beta_hat = grid[static_cast<std::size_t>(best)];
        out.loglik_at_max = vals[static_cast<std::size_t>(best)];
    }
    out.boundary = out.beta_hat - opt.lower < 10.0 * opt.tolerance || opt.upper - out.beta_hat < 10.0 * opt.tolerance;
    const ResidualKernel kern(ar1, out.beta_hat, x);
    const auto k = static_cast<std::size_t>(y.cols());
    const double info = is_degenerate(model, k, kern.residual_dim()) ? 0.0 : expected_info(k, kern, model);
    out.se = info > 0.0 ? 1.0 / std::sqrt(info) : std::numeric_limits<double>::infinity();
    out.evaluations = evals;
    return out;
}

// ---------------------------------------------------------------------------
// Sequential marginal likelihoods (upper-triangular subgroup and Markov Sigma)

namespace detail {

inline std::size_t sequential_rank(std::size_t m, std::size_t r, SequentialMode mode) {
    if (mode == SequentialMode::ut_full) return m - r;
    return r == 0 ? m : m - 1;
}

inline double sequential_loglik(const Matrix& y, const CovBundle& bundle, const DesignMatrix& x,
                                SequentialMode mode, std::span<const std::size_t> order) {
    const std::size_t n = bundle.size();
    if (x.rank() >= n) throw domain_error("design leaves no residual degrees of freedom");
    const std::size_t m = n - x.rank();
    const auto ord = checked_order(order, static_cast<std::size_t>(y.cols()));
    const auto projs = sequential_projectors(bundle.w, x, y, mode, ord);
    double total = 0.0;
    for (std::size_t r = 0; r < projs.size(); ++r) {
        const std::size_t rank = sequential_rank(m, r, mode);
        if (projs[r].rank != rank)
            throw degenerate_likelihood("sequential projector " + std::to_string(r + 1) + " has rank " +
                                        std::to_string(projs[r].rank) + ", expected " + std::to_string(rank));
        const double q = positive_form(column_form(projs[r].wq, y, static_cast<Eigen::Index>(ord[r])), "Y_r'WQ_rY_r");
        total += 0.5 * projs[r].log_pdet_wq - 0.5 * static_cast<double>(rank) * std::log(q);
    }
    return total;
}

inline std::vector<double> sequential_term_scores(const Matrix& y, const CovBundle& bundle, const DesignMatrix& x,
                                                  SequentialMode mode, std::span<const std::size_t> order) {
    const std::size_t n = bundle.size();
    if (x.rank() >= n) throw domain_error("design leaves no residual degrees of freedom");
    const std::size_t m = n - x.rank();
    const auto k = static_cast<std::size_t>(y.cols());
    const auto ord = checked_order(order, k);
    const std::size_t terms = sequential_term_count(n, x.rank(), k, mode);
    std::vector<double> out(terms);
    for (std::size_t r = 0; r < terms; ++r) {
        const std::size_t rank = sequential_rank(m, r, mode);
        // A rank-one kernel is c(beta) v v', and c cancels between the two
        // terms: the contribution is exactly free of beta.
        if (rank == 1) {
            out[r] = 0.0;
            continue;
        }
        const Matrix p = residual_kernel(bundle.w, sequential_span(x, y, mode, ord, r));
        const Matrix pd = p * bundle.d;
        const auto yr = y.col(static_cast<Eigen::Index>(ord[r]));
        const Vector py = p * yr;
        const double q = positive_form(yr.dot(py), "Y_r'WQ_rY_r");
        const double a = py.dot(bundle.d * py);
        out[r] = -0.5 * pd.trace() + 0.5 * static_cast<double>(rank) * a / q;
    }
    return out;
}

}  // namespace detail

/// Marginal log likelihood of the maximal invariant under the upper-triangular
/// subgroup, series taken in `order` (empty = as given).
inline double ut_subgroup_loglik(const Matrix& y, const Ar1Model& ar1, double beta,
                                 const std::optional<DesignMatrix>& x = std::nullopt,
                                 std::span<const std::size_t> order = {}) {
    const auto design = x ? *x : DesignMatrix::none(ar1.size());
    return detail::sequential_loglik(y, gamma_of(ar1, beta), design, SequentialMode::ut_full, order);
}

/// Score contribution of each series in the upper-triangular likelihood.
inline std::vector<double> ut_subgroup_term_scores(const Matrix& y, const CovBundle& bundle, const DesignMatrix& x,
                                                   std::span<const std::size_t> order = {}) {
    return detail::sequential_term_scores(y, bundle, x, SequentialMode::ut_full, order);
}

inline double ut_subgroup_score(const Matrix& y, const Ar1Model& ar1, double beta,
                                const std::optional<DesignMatrix>& x = std::nullopt,
                                std::span<const std::size_t> order = {}) {
    const auto design = x ? *x : DesignMatrix::none(ar1.size());
    const auto terms = ut_subgroup_term_scores(y, gamma_of(ar1, beta), design, order);
    double s = 0.0;
    for (double t : terms) s += t;
    return s;
}

/// Sum of the conditional residual likelihoods of each series given the
/// previous one (Sigma with tri-diagonal inverse).
inline double markov_conditional_loglik(const Matrix& y, const Ar1Model& ar1, double beta, const DesignMatrix& x,
                                        std::span<const std::size_t> order = {}) {
    return detail::sequential_loglik(y, gamma_of(ar1, beta), x, SequentialMode::markov, order);
}

inline std::vector<double> markov_term_scores(const Matrix& y, const CovBundle& bundle, const DesignMatrix& x,
                                              std::span<const std::size_t> order = {}) {
    return detail::sequential_term_scores(y, bundle, x, SequentialMode::markov, order);
}

inline double markov_conditional_score(const Matrix& y, const Ar1Model& ar1, double beta, const DesignMatrix& x,
                                       std::span<const std::size_t> order = {}) {
    const auto terms = markov_term_scores(y, gamma_of(ar1, beta), x, order);
    double s = 0.0;
    for (double t : terms) s += t;
    return s;
}

// ---------------------------------------------------------------------------
// Distance-matrix forms. Since 1'WQ = 0 whenever the constant vector lies in
// span(X), tr(WQ S) = -tr(WQ Dsq)/2 and only the distances are needed.

namespace detail {

inline void require_constant_in_span(const ResidualKernel& kern) {
    const Vector ones = Vector::Ones(static_cast<Eigen::Index>(kern.n()));
    const Vector r = kern.kernel() * ones;
    if (r.cwiseAbs().maxCoeff() > 1e-8 * (1.0 + linalg::max_abs(kern.kernel())))
        throw domain_error("distance likelihood requires the constant vector in span(X)");
}

inline double distance_trace(const Matrix& p, const Matrix& dsq) {
    return positive_form(-0.5 * p.cwiseProduct(dsq).sum(), "tr(WQ S) from distances");
}

}  // namespace detail

inline double distance_loglik_model_I(const DistancePair& dp, std::size_t k, const Ar1Model& ar1, double beta,
                                      const DesignMatrix& x) {
    const ResidualKernel kern(ar1, beta, x);
    detail::require_constant_in_span(kern);
    const auto kd = static_cast<double>(k);
    const auto m = static_cast<double>(kern.residual_dim());
    return 0.5 * kd * kern.log_det() - 0.5 * m * kd * std::log(detail::distance_trace(kern.kernel(), dp.dsq));
}

inline double distance_score_model_I(const DistancePair& dp, std::size_t k, const Ar1Model& ar1, double beta,
                                     const DesignMatrix& x) {
    const ResidualKernel kern(ar1, beta, x);
    detail::require_constant_in_span(kern);
    const auto kd = static_cast<double>(k);
    const auto m = static_cast<double>(kern.residual_dim());
    const double t = detail::distance_trace(kern.kernel(), dp.dsq);
    // d/dbeta of -tr(P Dsq)/2 is tr(PDP Dsq)/2
    const double dt = 0.5 * kern.kernel_d_kernel().cwiseProduct(dp.dsq).sum();
    return -0.5 * kd * kern.trace_pd() - 0.5 * m * kd * dt / t;
}

/// Per-series (locus-specific) distance version of the model II likelihood.
inline double distance_loglik_model_II(std::span<const Matrix> dsq_per_series, const Ar1Model& ar1, double beta,
                                       const DesignMatrix& x) {
    const ResidualKernel kern(ar1, beta, x);
    detail::require_constant_in_span(kern);
    const auto kd = static_cast<double>(dsq_per_series.size());
    const auto m = static_cast<double>(kern.residual_dim());
    double s = 0.0;
    for (const auto& d : dsq_per_series) s += std::log(detail::distance_trace(kern.kernel(), d));
    return 0.5 * kd * kern.log_det() - 0.5 * m * s;
}

inline double distance_score_model_II(std::span<const Matrix> dsq_per_series, const Ar1Model& ar1, double beta,
                                      const DesignMatrix& x) {
    const ResidualKernel kern(ar1, beta, x);
    detail::require_constant_in_span(kern);
    const auto kd = static_cast<double>(dsq_per_series.size());
    const auto m = static_cast<double>(kern.residual_dim());
    double s = 0.0;
    for (const auto& d : dsq_per_series)
        s += 0.5 * kern.kernel_d_kernel().cwiseProduct(d).sum() / detail::distance_trace(kern.kernel(), d);
    return -0.5 * kd * kern.trace_pd() - 0.5 * m * s;
}

}  // namespace parseries
