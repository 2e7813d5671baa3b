#pragma once

// Seeded Monte Carlo studies of the profile and marginal likelihoods.
//
// Every study draws replicate i from its own engine seeded by
// derive_seed(seed, i), and reduces results in replicate order, so output is
// identical for any number of workers.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <variant>
#include <vector>

#include "parseries/covariance_models.hpp"
#include "parseries/errors.hpp"
#include "parseries/haar_moments.hpp"
#include "parseries/likelihoods.hpp"
#include "parseries/linalg.hpp"
#include "parseries/projection_kernels.hpp"
#include "parseries/sampling.hpp"

namespace parseries {

struct McReport {
    double estimate = 0.0;
    double std_error = 0.0;
    std::optional<double> target;
    double z = 0.0;
    std::size_t reps = 0;
    std::uint64_t seed = 0;

    bool passes(double z_max = 3.0) const { return !target || std::abs(z) <= z_max; }
};

namespace mc {

inline double z_score(double estimate, double se, double target) {
    const double diff = estimate - target;
    if (se > 0.0) return diff / se;
    if (diff == 0.0) return 0.0;
    return diff > 0.0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
}

inline McReport finish(double est, double se, std::optional<double> target, std::size_t reps, std::uint64_t seed) {
    McReport r;
    r.estimate = est;
    r.std_error = se;
    r.target = target;
    r.reps = reps;
    r.seed = seed;
    r.z = target ? z_score(est, se, *target) : 0.0;
    return r;
}

inline double mean_of(const std::vector<double>& x) {
    return x.empty() ? 0.0 : std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

/// Sample mean with standard error s / sqrt(R).
inline McReport mean_report(const std::vector<double>& x, std::optional<double> target, std::uint64_t seed) {
    const auto r = static_cast<double>(x.size());
    const double m = mean_of(x);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    const double se = x.size() > 1 ? std::sqrt(ss / (r - 1.0) / r) : 0.0;
    return finish(m, se, target, x.size(), seed);
}

/// Unbiased sample variance; standard error from the fourth central moment,
/// sqrt((m4 - m2^2) / R).
inline McReport variance_report(const std::vector<double>& x, std::optional<double> target, std::uint64_t seed) {
    const auto r = static_cast<double>(x.size());
    const double m = mean_of(x);
    double m2 = 0.0;
    double m4 = 0.0;
    for (double v : x) {
        const double d2 = (v - m) * (v - m);
        m2 += d2;
        m4 += d2 * d2;
    }
    m2 /= r;
    m4 /= r;
    const double var = x.size() > 1 ? m2 * r / (r - 1.0) : 0.0;
    const double se = x.size() > 1 ? std::sqrt(std::max(m4 - m2 * m2, 0.0) / r) : 0.0;
    return finish(var, se, target, x.size(), seed);
}

/// Sample covariance with standard error from the products (a - a_bar)(b - b_bar).
inline McReport covariance_report(const std::vector<double>& a, const std::vector<double>& b,
                                  std::optional<double> target, std::uint64_t seed) {
    const auto r = static_cast<double>(a.size());
    const double ma = mean_of(a);
    const double mb = mean_of(b);
    std::vector<double> u(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) u[i] = (a[i] - ma) * (b[i] - mb);
    const double mu = mean_of(u);
    double ss = 0.0;
    for (double v : u) ss += (v - mu) * (v - mu);
    const double cov = a.size() > 1 ? mu * r / (r - 1.0) : 0.0;
    const double se = a.size() > 1 ? std::sqrt(ss / (r - 1.0) / r) : 0.0;
    return finish(cov, se, target, a.size(), seed);
}

/// Runs f(engine, i) for i in [0, reps) and returns the results in index order.
template <class T, class F>
std::vector<T> run_replicates(std::size_t reps, std::uint64_t seed, F&& f, unsigned workers = 1) {
    std::vector<T> out(reps);
    auto block = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            Engine eng = replicate_engine(seed, i);
            out[i] = f(eng, i);
        }
    };
    if (workers <= 1 || reps < 2) {
        block(0, reps);
        return out;
    }
    const std::size_t w = std::min<std::size_t>(workers, reps);
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(w);
    for (std::size_t t = 0; t < w; ++t) {
        const std::size_t lo = reps * t / w;
        const std::size_t hi = reps * (t + 1) / w;
        pool.emplace_back([&, t, lo, hi] {
            try {
                block(lo, hi);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

}  // namespace mc

inline std::optional<DesignMatrix> polynomial_design(const Ar1Model& ar1, std::size_t p) {
    if (p == 0) return std::nullopt;
    if (p >= ar1.size()) throw domain_error("design rank p must be smaller than n");
    return DesignMatrix::polynomial(ar1.points(), p);
}

// ---------------------------------------------------------------------------
// Bartlett identities

struct BartlettConfig {
    std::size_t n = 8;
    std::size_t k = 1;
    std::size_t p = 0;  ///< rank of a polynomial design (0 = no design)
    double beta = 0.0;
    ModelKind model = ModelKind::III;
    SigmaSpec sigma = ScalarVar{1.0};
    std::size_t reps = 50000;
    std::uint64_t seed = 1;
    unsigned workers = 1;
};

struct BartlettResult {
    McReport mean_score;  ///< target 0
    McReport var_score;   ///< target expected_info
};

namespace detail {

inline void check_sigma_for_model(const SigmaSpec& s, ModelKind model) {
    const bool scalar = std::holds_alternative<ScalarVar>(s);
    const bool diag = std::holds_alternative<DiagonalVar>(s);
    if (model == ModelKind::I && !scalar)
        throw domain_error("model I data must be generated with a scalar Sigma");
    if (model == ModelKind::II && !scalar && !diag)
        throw domain_error("model II data must be generated with a scalar or diagonal Sigma");
}

inline Matrix with_mean(Matrix y, const std::optional<DesignMatrix>& x) {
    // A non-zero regression mean; the residual likelihoods must not see it.
    if (x) y += x->matrix() * Matrix::Ones(x->matrix().cols(), y.cols());
    return y;
}

}  // namespace detail

inline BartlettResult bartlett_check(const BartlettConfig& cfg) {
    detail::check_sigma_for_model(cfg.sigma, cfg.model);
    const Ar1Model ar1(cfg.n);
    const auto x = polynomial_design(ar1, cfg.p);
    const ResidualKernel kern(ar1, cfg.beta, x);
    const std::size_t m = kern.residual_dim();
    if (cfg.model == ModelKind::III && cfg.k > m)
        throw domain_error("model III Bartlett check needs k <= n - p");
    const double info = expected_info(cfg.k, kern, cfg.model);
    const GaussianSampler sampler(kern.bundle().gamma, build_sigma(cfg.sigma, cfg.k));

    auto scores = mc::run_replicates<double>(
        cfg.reps, cfg.seed,
        [&](Engine& eng, std::size_t) { return profile_score(kern, detail::with_mean(sampler(eng), x), cfg.model); },
        cfg.workers);
    return {mc::mean_report(scores, 0.0, cfg.seed), mc::variance_report(scores, info, cfg.seed)};
}

// ---------------------------------------------------------------------------
// Information as a function of k

struct InfoCurveRow {
    std::size_t k = 0;
    double formula_info = 0.0;
    double mc_info = 0.0;
    double mc_se = 0.0;
    double mc_mean_score = 0.0;
    double mc_mean_se = 0.0;
};

struct InfoCurve {
    std::vector<InfoCurveRow> rows;
};

struct InfoCurveConfig {
    std::size_t n = 8;
    std::size_t p = 0;
    double beta = 0.0;
    ModelKind model = ModelKind::III;
    std::size_t reps = 50000;
    std::uint64_t seed = 1;
    unsigned workers = 1;
};

/// Formula and Monte Carlo score variance for k = 1..n (model III: 1..n-p).
/// All k share the same draws: the k-series data are the first k columns.
inline InfoCurve info_curve(const InfoCurveConfig& cfg) {
    const Ar1Model ar1(cfg.n);
    const auto x = polynomial_design(ar1, cfg.p);
    const ResidualKernel kern(ar1, cfg.beta, x);
    const std::size_t kmax = cfg.model == ModelKind::III ? kern.residual_dim() : cfg.n;
    const GaussianSampler sampler(kern.bundle().gamma, Matrix::Identity(static_cast<Eigen::Index>(kmax),
                                                                         static_cast<Eigen::Index>(kmax)));
    auto draws = mc::run_replicates<std::vector<double>>(
        cfg.reps, cfg.seed,
        [&](Engine& eng, std::size_t) {
            const Matrix y = detail::with_mean(sampler(eng), x);
            std::vector<double> s(kmax);
            for (std::size_t k = 1; k <= kmax; ++k)
                s[k - 1] = profile_score(kern, y.leftCols(static_cast<Eigen::Index>(k)), cfg.model);
            return s;
        },
        cfg.workers);

    InfoCurve curve;
    std::vector<double> col(cfg.reps);
    for (std::size_t k = 1; k <= kmax; ++k) {
        for (std::size_t i = 0; i < cfg.reps; ++i) col[i] = draws[i][k - 1];
        const double formula = expected_info(k, kern, cfg.model);
        const auto v = mc::variance_report(col, formula, cfg.seed);
        const auto mean = mc::mean_report(col, 0.0, cfg.seed);
        curve.rows.push_back({k, formula, v.estimate, v.std_error, mean.estimate, mean.std_error});
    }
    return curve;
}

// ---------------------------------------------------------------------------
// Deleting series can increase precision (model III, k > n/2)

struct DeletionConfig {
    std::size_t n = 8;
    std::size_t k_full = 7;
    std::size_t k_sub = 4;
    double beta = 0.4;
    std::size_t reps = 2000;
    std::uint64_t seed = 1;
    std::size_t bootstrap = 200;
    unsigned workers = 1;
};

struct DeletionReport {
    double var_full = 0.0;
    double var_sub = 0.0;
    double var_ratio = 0.0;  ///< var_full / var_sub
    double var_ratio_se = 0.0;
    double mse_full = 0.0;
    double mse_sub = 0.0;
    double mse_ratio = 0.0;
    double predicted_ratio = 0.0;  ///< info(k_sub) / info(k_full)
    std::size_t used = 0;
    std::size_t degenerate_full = 0;
    std::size_t degenerate_sub = 0;
    std::size_t boundary_full = 0;
    std::size_t boundary_sub = 0;
};

inline DeletionReport deletion_experiment(const DeletionConfig& cfg) {
    if (cfg.k_sub < 1 || cfg.k_sub > cfg.k_full || cfg.k_full >= cfg.n)
        throw domain_error("deletion experiment needs 1 <= k_sub <= k_full < n");
    const Ar1Model ar1(cfg.n);
    const auto bundle = gamma_of(ar1, cfg.beta);
    const GaussianSampler sampler(bundle.gamma, Matrix::Identity(static_cast<Eigen::Index>(cfg.k_full),
                                                                 static_cast<Eigen::Index>(cfg.k_full)));
    struct Arm {
        std::optional<double> beta_hat;
        bool boundary = false;
    };
    struct Rep {
        Arm full;
        Arm sub;
    };
    auto fit_arm = [&](const Matrix& y) {
        Arm a;
        try {
            const auto f = fit_beta(y, ar1, ModelKind::III);
            a.beta_hat = f.beta_hat;
            a.boundary = f.boundary;
        } catch (const degenerate_likelihood&) {
        }
        return a;
    };
    auto reps = mc::run_replicates<Rep>(
        cfg.reps, cfg.seed,
        [&](Engine& eng, std::size_t) {
            const Matrix y = sampler(eng);
            std::vector<Eigen::Index> idx(cfg.k_full);
            std::iota(idx.begin(), idx.end(), Eigen::Index{0});
            std::shuffle(idx.begin(), idx.end(), eng);
            Matrix ys(y.rows(), static_cast<Eigen::Index>(cfg.k_sub));
            for (std::size_t j = 0; j < cfg.k_sub; ++j) ys.col(static_cast<Eigen::Index>(j)) = y.col(idx[j]);
            return Rep{fit_arm(y), fit_arm(ys)};
        },
        cfg.workers);

    DeletionReport out;
    std::vector<double> full;
    std::vector<double> sub;
    for (const auto& r : reps) {
        if (!r.full.beta_hat) ++out.degenerate_full;
        if (!r.sub.beta_hat) ++out.degenerate_sub;
        if (r.full.boundary) ++out.boundary_full;
        if (r.sub.boundary) ++out.boundary_sub;
        if (r.full.beta_hat && r.sub.beta_hat) {
            full.push_back(*r.full.beta_hat);
            sub.push_back(*r.sub.beta_hat);
        }
    }
    const double limit = 0.05 * static_cast<double>(cfg.reps);
    if (static_cast<double>(out.degenerate_full) > limit || static_cast<double>(out.degenerate_sub) > limit)
        throw degenerate_likelihood("deletion experiment: more than 5% degenerate fits");
    out.used = full.size();

    auto var = [](const std::vector<double>& v, const std::vector<std::size_t>* pick) {
        const std::size_t r = pick ? pick->size() : v.size();
        double m = 0.0;
        for (std::size_t i = 0; i < r; ++i) m += v[pick ? (*pick)[i] : i];
        m /= static_cast<double>(r);
        double s = 0.0;
        for (std::size_t i = 0; i < r; ++i) {
            const double d = v[pick ? (*pick)[i] : i] - m;
            s += d * d;
        }
        return s / static_cast<double>(r - 1);
    };
    auto mse = [&](const std::vector<double>& v) {
        double s = 0.0;
        for (double b : v) s += (b - cfg.beta) * (b - cfg.beta);
        return s / static_cast<double>(v.size());
    };
    out.var_full = var(full, nullptr);
    out.var_sub = var(sub, nullptr);
    out.var_ratio = out.var_full / out.var_sub;
    out.mse_full = mse(full);
    out.mse_sub = mse(sub);
    out.mse_ratio = out.mse_full / out.mse_sub;
    out.predicted_ratio = expected_info(cfg.k_sub, bundle, ModelKind::III) /
                          expected_info(cfg.k_full, bundle, ModelKind::III);

    Engine boot(derive_seed(cfg.seed, ~std::uint64_t{0}));
    std::uniform_int_distribution<std::size_t> pick_one(0, out.used - 1);
    std::vector<double> ratios(cfg.bootstrap);
    std::vector<std::size_t> pick(out.used);
    for (auto& r : ratios) {
        for (auto& p : pick) p = pick_one(boot);
        r = var(full, &pick) / var(sub, &pick);
    }
    const double rm = mc::mean_of(ratios);
    double ss = 0.0;
    for (double r : ratios) ss += (r - rm) * (r - rm);
    out.var_ratio_se = cfg.bootstrap > 1 ? std::sqrt(ss / static_cast<double>(cfg.bootstrap - 1)) : 0.0;
    return out;
}

// ---------------------------------------------------------------------------
// Constancy of the model III likelihood for k >= n - p

struct DegeneracyConfig {
    std::size_t n = 8;
    std::size_t p = 0;
    double beta = 0.4;  ///< used to generate the data
    std::vector<double> beta_grid{-0.8, -0.6, -0.3, 0.0, 0.2, 0.4, 0.6, 0.8, 0.9};
    SigmaSpec sigma = ScalarVar{1.0};
    std::uint64_t seed = 1;
};

struct DegeneracyReport {
    double spread_at_m = 0.0;  ///< max - min of l_p over the grid at k = n - p
    double scale_at_m = 0.0;   ///< max |l_p| at k = n - p
    bool constant_at_m = false;
    double spread_above = 0.0;  ///< same at k = n - p + 2 (pseudo-determinant form)
    double scale_above = 0.0;
    double spread_single = 0.0;  ///< k = 1, for contrast
};

inline DegeneracyReport degeneracy_check(const DegeneracyConfig& cfg) {
    const Ar1Model ar1(cfg.n);
    const auto x = polynomial_design(ar1, cfg.p);
    const std::size_t m = cfg.n - cfg.p;
    auto sigma_for = [&](std::size_t k) -> Matrix {
        if (std::holds_alternative<ScalarVar>(cfg.sigma)) return build_sigma(cfg.sigma, k);
        const Matrix base = build_sigma(cfg.sigma, m);
        Matrix s = Matrix::Identity(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
        const auto b = std::min<Eigen::Index>(base.rows(), s.rows());
        s.topLeftCorner(b, b) = base.topLeftCorner(b, b);
        return s;
    };
    auto spread = [&](std::size_t k, std::uint64_t stream) {
        Engine eng(derive_seed(cfg.seed, stream));
        const auto truth = gamma_of(ar1, cfg.beta);
        const Matrix y = detail::with_mean(sample_gaussian(truth.gamma, sigma_for(k), eng), x);
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        double scale = 0.0;
        for (double b : cfg.beta_grid) {
            const double v = profile_loglik(y, ar1, b, ModelKind::III, x);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            scale = std::max(scale, std::abs(v));
        }
        return std::pair{hi - lo, scale};
    };
    DegeneracyReport out;
    std::tie(out.spread_at_m, out.scale_at_m) = spread(m, 0);
    out.constant_at_m = out.spread_at_m <= 1e-8 * (1.0 + out.scale_at_m);
    std::tie(out.spread_above, out.scale_above) = spread(m + 2, 1);
    out.spread_single = spread(1, 2).first;
    return out;
}

// ---------------------------------------------------------------------------
// The score distribution under model III does not depend on Sigma

struct SigmaIndependenceConfig {
    std::size_t n = 6;
    std::size_t k = 3;
    double beta = 0.4;
    Matrix sigma_a;
    Matrix sigma_b;
    std::size_t reps = 50000;
    std::uint64_t seed = 1;
    unsigned workers = 1;
};

struct SigmaIndependenceReport {
    McReport var_a;
    McReport var_b;
    double z_diff = 0.0;
    bool passes(double z_max = 3.0) const { return std::abs(z_diff) <= z_max; }
};

inline SigmaIndependenceReport sigma_independence_check(const SigmaIndependenceConfig& cfg) {
    if (cfg.k > cfg.n) throw domain_error("sigma independence check needs k <= n");
    const Ar1Model ar1(cfg.n);
    const ResidualKernel kern(ar1, cfg.beta);
    const double target = expected_info(cfg.k, kern, ModelKind::III);
    auto arm = [&](const Matrix& sigma, std::uint64_t seed) {
        const GaussianSampler sampler(kern.bundle().gamma, sigma);
        auto s = mc::run_replicates<double>(
            cfg.reps, seed, [&](Engine& eng, std::size_t) { return profile_score(kern, sampler(eng), ModelKind::III); },
            cfg.workers);
        return mc::variance_report(s, target, seed);
    };
    SigmaIndependenceReport out;
    out.var_a = arm(cfg.sigma_a, derive_seed(cfg.seed, 0xa));
    out.var_b = arm(cfg.sigma_b, derive_seed(cfg.seed, 0xb));
    const double se = std::hypot(out.var_a.std_error, out.var_b.std_error);
    out.z_diff = mc::z_score(out.var_a.estimate - out.var_b.estimate, se, 0.0);
    return out;
}

// ---------------------------------------------------------------------------
// Information of the upper-triangular subgroup likelihood

struct UtCurveRow {
    std::size_t k = 0;
    double mc_info = 0.0;
    double mc_se = 0.0;
    double increment = 0.0;     ///< mc_info(k) - mc_info(k-1), same draws
    double increment_se = 0.0;
};

struct UtCurve {
    std::vector<UtCurveRow> rows;
    double reml_single_series_info = 0.0;  ///< closed form for k = 1 (model II, REML)
    bool non_decreasing = true;             ///< every increment >= -3 SE
};

struct UtCurveConfig {
    std::size_t n = 8;
    std::size_t p = 1;
    double beta = 0.4;
    std::size_t k_max = 0;  ///< 0 = n - p
    std::size_t reps = 50000;
    std::uint64_t seed = 1;
    unsigned workers = 1;
};

inline UtCurve ut_info_curve(const UtCurveConfig& cfg) {
    const Ar1Model ar1(cfg.n);
    if (cfg.p >= cfg.n) throw domain_error("ut_info_curve needs p < n");
    const auto x = polynomial_design(ar1, cfg.p);
    const DesignMatrix design = x ? *x : DesignMatrix::none(cfg.n);
    const std::size_t m = cfg.n - cfg.p;
    const std::size_t kmax = cfg.k_max == 0 ? m : cfg.k_max;
    const ResidualKernel kern(ar1, cfg.beta, x);
    const auto& bundle = kern.bundle();
    const GaussianSampler sampler(bundle.gamma, Matrix::Identity(static_cast<Eigen::Index>(kmax),
                                                                 static_cast<Eigen::Index>(kmax)));
    auto draws = mc::run_replicates<std::vector<double>>(
        cfg.reps, cfg.seed,
        [&](Engine& eng, std::size_t) {
            const Matrix y = detail::with_mean(sampler(eng), x);
            auto terms = ut_subgroup_term_scores(y, bundle, design);
            terms.resize(kmax, 0.0);  // series beyond rank n - p contribute nothing
            return terms;
        },
        cfg.workers);

    UtCurve out;
    out.reml_single_series_info = expected_info(1, kern, ModelKind::II);
    std::vector<double> cum(cfg.reps, 0.0);
    std::vector<double> inc(cfg.reps);
    double prev = 0.0;
    for (std::size_t k = 1; k <= kmax; ++k) {
        for (std::size_t i = 0; i < cfg.reps; ++i) {
            cum[i] += draws[i][k - 1];
            inc[i] = draws[i][k - 1];
        }
        const auto v = mc::variance_report(cum, std::nullopt, cfg.seed);
        UtCurveRow row;
        row.k = k;
        row.mc_info = v.estimate;
        row.mc_se = v.std_error;
        row.increment = v.estimate - prev;
        // Var(S_k) - Var(S_{k-1}) = Var(t_k) + 2 cov(S_{k-1}, t_k); per-replicate
        // contributions t_k^2 + 2 (S_{k-1} - mean) t_k give its standard error.
        {
            const double mc_cum = mc::mean_of(cum);
            const double mc_inc = mc::mean_of(inc);
            std::vector<double> contrib(cfg.reps);
            for (std::size_t i = 0; i < cfg.reps; ++i) {
                const double prev_c = cum[i] - inc[i] - (mc_cum - mc_inc);
                const double t = inc[i] - mc_inc;
                contrib[i] = t * t + 2.0 * prev_c * t;
            }
            row.increment_se = mc::mean_report(contrib, std::nullopt, cfg.seed).std_error;
        }
        if (row.increment < -3.0 * row.increment_se) out.non_decreasing = false;
        prev = v.estimate;
        out.rows.push_back(row);
    }
    return out;
}

/// Monte Carlo mean and variance of the Markov conditional score under a
/// Green's-matrix Sigma, series taken in `order` (empty = as given).
struct MarkovInfoConfig {
    std::size_t n = 8;
    std::size_t p = 1;
    double beta = 0.4;
    Green sigma;
    std::vector<std::size_t> order;
    std::size_t reps = 20000;
    std::uint64_t seed = 1;
    unsigned workers = 1;
};

inline BartlettResult markov_info(const MarkovInfoConfig& cfg) {
    const Ar1Model ar1(cfg.n);
    const auto x = polynomial_design(ar1, cfg.p);
    const DesignMatrix design = x ? *x : DesignMatrix::none(cfg.n);
    const auto bundle = gamma_of(ar1, cfg.beta);
    const std::size_t k = cfg.sigma.a.size();
    const GaussianSampler sampler(bundle.gamma, build_sigma(cfg.sigma, k));
    auto s = mc::run_replicates<double>(
        cfg.reps, cfg.seed,
        [&](Engine& eng, std::size_t) {
            const Matrix y = detail::with_mean(sampler(eng), x);
            const auto t = markov_term_scores(y, bundle, design, cfg.order);
            return std::accumulate(t.begin(), t.end(), 0.0);
        },
        cfg.workers);
    return {mc::mean_report(s, 0.0, cfg.seed), mc::variance_report(s, std::nullopt, cfg.seed)};
}

// ---------------------------------------------------------------------------
// Efficiency of model II relative to model I

struct EfficiencyRow {
    std::size_t k = 0;
    double efficiency = 0.0;
};

struct EfficiencyTable {
    std::vector<EfficiencyRow> rows;
    double limit = 0.0;  ///< n / (n + 2), the k -> infinity value
};

inline EfficiencyTable efficiency_table(std::size_t n, const std::vector<std::size_t>& ks) {
    EfficiencyTable t;
    for (auto k : ks) t.rows.push_back({k, efficiency_II_vs_I(n, k)});
    t.limit = static_cast<double>(n) / (static_cast<double>(n) + 2.0);
    return t;
}

// ---------------------------------------------------------------------------
// Haar orthogonal matrices

struct HaarTraceReport {
    std::array<const char*, 4> names{"tr(H^2)", "tr^2(H)", "tr(H^4)", "tr^2(H^2)"};
    std::array<McReport, 4> reports;
};

inline HaarTraceReport haar_trace_moments_mc(std::size_t n, std::size_t reps, std::uint64_t seed,
                                             unsigned workers = 1) {
    const auto targets = trace_moment_expectations(n);
    auto draws = mc::run_replicates<std::array<double, 4>>(
        reps, seed,
        [&](Engine& eng, std::size_t) {
            const Matrix h = sample_haar_orthogonal(n, eng);
            const Matrix h2 = h * h;
            const double t1 = h.trace();
            const double t2 = h2.trace();
            return std::array<double, 4>{t2, t1 * t1, h2.cwiseProduct(h2.transpose()).sum(), t2 * t2};
        },
        workers);
    HaarTraceReport out;
    std::vector<double> col(reps);
    for (std::size_t j = 0; j < 4; ++j) {
        for (std::size_t i = 0; i < reps; ++i) col[i] = draws[i][j];
        out.reports[j] = mc::mean_report(col, targets[j], seed);
    }
    return out;
}

struct TrQuadReport {
    McReport mean_a;
    McReport covariance;
};

/// Monte Carlo check of E tr(Z'AZ) and cov(tr(Z'AZ), tr(Z'BZ)).
inline TrQuadReport tr_quad_mc(const Matrix& a, const Matrix& b, std::size_t k, std::size_t reps, std::uint64_t seed,
                               unsigned workers = 1) {
    const auto n = static_cast<std::size_t>(a.rows());
    const auto closed = product_and_cov_tr_quad(a, b, k);
    auto draws = mc::run_replicates<std::array<double, 2>>(
        reps, seed,
        [&](Engine& eng, std::size_t) {
            const Matrix z = sample_haar_columns(n, k, eng);
            return std::array<double, 2>{(z.transpose() * a * z).trace(), (z.transpose() * b * z).trace()};
        },
        workers);
    std::vector<double> ta(reps);
    std::vector<double> tb(reps);
    for (std::size_t i = 0; i < reps; ++i) {
        ta[i] = draws[i][0];
        tb[i] = draws[i][1];
    }
    return {mc::mean_report(ta, expected_tr_quad(a, k), seed), mc::covariance_report(ta, tb, closed.covariance, seed)};
}

}  // namespace parseries
