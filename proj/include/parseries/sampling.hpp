#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>

#include "parseries/errors.hpp"
#include "parseries/linalg.hpp"

namespace parseries {

using Engine = std::mt19937_64;

/// SplitMix64 finaliser (Steele, Lea and Flood 2014).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seed of replicate `index` under `master`. Pure, so replicates can be
/// generated in any order or on any worker.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
    return mix64(mix64(master) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

inline Engine replicate_engine(std::uint64_t master, std::uint64_t index) {
    return Engine(derive_seed(master, index));
}

/// n x k standard normal matrix, filled column by column so that the first
/// k columns of a wider draw from the same engine state coincide.
inline Matrix standard_normal(std::size_t n, std::size_t k, Engine& eng) {
    std::normal_distribution<double> z;
    Matrix g(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
    for (Eigen::Index c = 0; c < g.cols(); ++c)
        for (Eigen::Index r = 0; r < g.rows(); ++r) g(r, c) = z(eng);
    return g;
}

inline Matrix cholesky_factor(const Matrix& a, const char* what) {
    Eigen::LLT<Matrix> llt(a);
    if (a.rows() != a.cols() || llt.info() != Eigen::Success)
        throw domain_error(std::string(what) + " is not positive definite");
    return llt.matrixL();
}

/// Draws Y = L_Gamma G L_Sigma' so that cov(vec Y) = Gamma (x) Sigma, given the
/// Cholesky factors. The factored form is what Monte Carlo loops should use.
class GaussianSampler {
public:
    GaussianSampler(const Matrix& gamma, const Matrix& sigma)
        : lg_(cholesky_factor(gamma, "Gamma")), ls_(cholesky_factor(sigma, "Sigma")) {}

    std::size_t n() const noexcept { return static_cast<std::size_t>(lg_.rows()); }
    std::size_t k() const noexcept { return static_cast<std::size_t>(ls_.rows()); }

    Matrix operator()(Engine& eng) const {
        const Matrix g = standard_normal(n(), k(), eng);
        return lg_.triangularView<Eigen::Lower>() * g * ls_.transpose();
    }

private:
    Matrix lg_;
    Matrix ls_;
};

inline Matrix sample_gaussian(const Matrix& gamma, const Matrix& sigma, Engine& eng) {
    return GaussianSampler(gamma, sigma)(eng);
}

inline Matrix sample_gaussian(const Matrix& gamma, const Matrix& sigma, std::uint64_t seed) {
    Engine eng(seed);
    return sample_gaussian(gamma, sigma, eng);
}

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the
/// columns of Q flipped so that R has a positive diagonal.
inline Matrix sample_haar_orthogonal(std::size_t n, Engine& eng) {
    if (n == 0) throw domain_error("sample_haar_orthogonal: n must be positive");
    const Matrix g = standard_normal(n, n, eng);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    const Matrix& r = qr.matrixQR();
    for (Eigen::Index j = 0; j < q.cols(); ++j)
        if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    return q;
}

inline Matrix sample_haar_orthogonal(std::size_t n, std::uint64_t seed) {
    Engine eng(seed);
    return sample_haar_orthogonal(n, eng);
}

/// First k columns of a Haar orthogonal matrix.
inline Matrix sample_haar_columns(std::size_t n, std::size_t k, Engine& eng) {
    if (k > n) throw domain_error("sample_haar_columns: k exceeds n");
    return sample_haar_orthogonal(n, eng).leftCols(static_cast<Eigen::Index>(k));
}

inline Matrix sample_haar_columns(std::size_t n, std::size_t k, std::uint64_t seed) {
    Engine eng(seed);
    return sample_haar_columns(n, k, eng);
}

}  // namespace parseries
