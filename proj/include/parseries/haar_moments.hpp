#pragma once

// Low-order moments of a Haar orthogonal matrix H of order n, entry H(r, i)
// written H_r^i, and the mean/covariance of tr(Z'AZ) for Z the first k
// columns of H.
//
// A fourth moment E(H_r^i H_s^j H_t^k H_u^l) is a sum over bi-partitions
// (pi, sigma): pairings pi of the row positions and sigma of the column
// positions. The coefficient depends on whether pi == sigma.

#include <array>
#include <cstddef>
#include <map>
#include <numeric>
#include <utility>
#include <vector>

#include "parseries/errors.hpp"
#include "parseries/linalg.hpp"

namespace parseries {

/// Row and column indices (1-based) of up to four entries of H.
struct MomentQuery {
    std::size_t n = 2;
    std::array<std::size_t, 4> rows{};
    std::array<std::size_t, 4> cols{};
};

namespace detail {

using Pairing = std::array<std::pair<int, int>, 2>;

// The three pairings of positions {0, 1, 2, 3}.
inline constexpr std::array<Pairing, 3> kFourPairings{{
    {{{0, 1}, {2, 3}}},
    {{{0, 2}, {1, 3}}},
    {{{0, 3}, {1, 2}}},
}};

inline bool pairing_matches(const Pairing& p, const std::array<std::size_t, 4>& idx) {
    return idx[static_cast<std::size_t>(p[0].first)] == idx[static_cast<std::size_t>(p[0].second)] &&
           idx[static_cast<std::size_t>(p[1].first)] == idx[static_cast<std::size_t>(p[1].second)];
}

inline void check_query(const MomentQuery& q, std::size_t order) {
    if (q.n < 2) throw domain_error("Haar moments need n >= 2");
    for (std::size_t i = 0; i < order; ++i)
        if (q.rows[i] < 1 || q.rows[i] > q.n || q.cols[i] < 1 || q.cols[i] > q.n)
            throw domain_error("Haar moment index outside 1..n");
}

struct BipartitionSums {
    double diagonal = 0.0;      // pi == sigma
    double off_diagonal = 0.0;  // pi != sigma
};

inline BipartitionSums bipartition_sums(const MomentQuery& q) {
    BipartitionSums s;
    for (std::size_t a = 0; a < 3; ++a) {
        if (!pairing_matches(kFourPairings[a], q.rows)) continue;
        for (std::size_t b = 0; b < 3; ++b) {
            if (!pairing_matches(kFourPairings[b], q.cols)) continue;
            (a == b ? s.diagonal : s.off_diagonal) += 1.0;
        }
    }
    return s;
}

}  // namespace detail

/// E(H_r^i H_s^j) = delta_rs delta_ij / n. Uses rows[0..1] and cols[0..1].
inline double haar_second_moment(const MomentQuery& q) {
    detail::check_query(q, 2);
    return q.rows[0] == q.rows[1] && q.cols[0] == q.cols[1] ? 1.0 / static_cast<double>(q.n) : 0.0;
}

inline double haar_fourth_moment(const MomentQuery& q) {
    detail::check_query(q, 4);
    const auto n = static_cast<double>(q.n);
    const auto s = detail::bipartition_sums(q);
    return ((n + 1.0) * s.diagonal - s.off_diagonal) / (n * (n - 1.0) * (n + 2.0));
}

inline double haar_fourth_cumulant(const MomentQuery& q) {
    detail::check_query(q, 4);
    const auto n = static_cast<double>(q.n);
    const auto s = detail::bipartition_sums(q);
    return (2.0 * s.diagonal - n * s.off_diagonal) / (n * n * (n - 1.0) * (n + 2.0));
}

/// E tr(H^2), E tr^2(H), E tr(H^4), E tr^2(H^2), each obtained by summing the
/// second- and fourth-moment formulas over the index pattern of the trace.
inline std::array<double, 4> trace_moment_expectations(std::size_t n) {
    if (n < 2) throw domain_error("trace moments need n >= 2");
    std::array<double, 4> out{};
    MomentQuery q;
    q.n = n;
    for (std::size_t r = 1; r <= n; ++r) {
        for (std::size_t s = 1; s <= n; ++s) {
            // tr(H^2) = H_r^s H_s^r ; tr^2(H) = H_r^r H_s^s
            q.rows = {r, s, 1, 1};
            q.cols = {s, r, 1, 1};
            out[0] += haar_second_moment(q);
            q.rows = {r, s, 1, 1};
            q.cols = {r, s, 1, 1};
            out[1] += haar_second_moment(q);
            for (std::size_t t = 1; t <= n; ++t) {
                for (std::size_t u = 1; u <= n; ++u) {
                    // tr(H^4) = H_r^s H_s^t H_t^u H_u^r
                    q.rows = {r, s, t, u};
                    q.cols = {s, t, u, r};
                    out[2] += haar_fourth_moment(q);
                    // tr^2(H^2) = H_r^s H_s^r H_t^u H_u^t
                    q.cols = {s, r, u, t};
                    out[3] += haar_fourth_moment(q);
                }
            }
        }
    }
    return out;
}

/// E tr(Z'AZ) = k tr(A) / n.
inline double expected_tr_quad(const Matrix& a, std::size_t k) {
    const auto n = static_cast<std::size_t>(a.rows());
    if (k > n) throw domain_error("expected_tr_quad: k exceeds n");
    return static_cast<double>(k) * a.trace() / static_cast<double>(n);
}

struct TrQuadMoments {
    double product_moment = 0.0;  ///< E(tr(Z'AZ) tr(Z'BZ))
    double covariance = 0.0;
};

inline TrQuadMoments product_and_cov_tr_quad(const Matrix& a, const Matrix& b, std::size_t k) {
    const auto nz = static_cast<std::size_t>(a.rows());
    if (nz < 2) throw domain_error("product_and_cov_tr_quad: n must be at least 2");
    if (k > nz) throw domain_error("product_and_cov_tr_quad: k exceeds n");
    if (b.rows() != a.rows()) throw domain_error("product_and_cov_tr_quad: A and B differ in size");
    const auto n = static_cast<double>(nz);
    const auto kd = static_cast<double>(k);
    const double ta = a.trace();
    const double tb = b.trace();
    const double tab = a.cwiseProduct(b.transpose()).sum();
    const double denom = n * (n - 1.0) * (n + 2.0);
    TrQuadMoments out;
    out.product_moment = (kd * (n * kd + kd - 2.0) * ta * tb + 2.0 * kd * (n - kd) * tab) / denom;
    out.covariance = 2.0 * kd * (n - kd) * (tab - ta * tb / n) / denom;
    return out;
}

// ---------------------------------------------------------------------------
// Bi-partition combinatorics

/// All perfect matchings of {0, ..., order-1}; each matching lists partner[i].
inline std::vector<std::vector<int>> perfect_matchings(std::size_t order) {
    if (order % 2 != 0) throw domain_error("perfect matchings need an even number of elements");
    std::vector<std::vector<int>> out;
    std::vector<int> partner(order, -1);
    auto rec = [&](auto&& self) -> void {
        int first = -1;
        for (std::size_t i = 0; i < order; ++i)
            if (partner[i] < 0) {
                first = static_cast<int>(i);
                break;
            }
        if (first < 0) {
            out.push_back(partner);
            return;
        }
        for (std::size_t j = static_cast<std::size_t>(first) + 1; j < order; ++j) {
            if (partner[j] >= 0) continue;
            partner[static_cast<std::size_t>(first)] = static_cast<int>(j);
            partner[j] = first;
            self(self);
            partner[static_cast<std::size_t>(first)] = -1;
            partner[j] = -1;
        }
    };
    rec(rec);
    return out;
}

/// Number of blocks of the least upper bound of two pairings, i.e. the number
/// of connected components (alternating cycles) of their union.
inline std::size_t join_block_count(const std::vector<int>& a, const std::vector<int>& b) {
    std::vector<int> label(a.size());
    std::iota(label.begin(), label.end(), 0);
    auto find = [&](int x) {
        while (label[static_cast<std::size_t>(x)] != x) x = label[static_cast<std::size_t>(x)];
        return x;
    };
    auto unite = [&](int x, int y) { label[static_cast<std::size_t>(find(x))] = find(y); };
    for (std::size_t i = 0; i < a.size(); ++i) {
        unite(static_cast<int>(i), a[i]);
        unite(static_cast<int>(i), b[i]);
    }
    std::size_t blocks = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (find(static_cast<int>(i)) == static_cast<int>(i)) ++blocks;
    return blocks;
}

/// Ordered pairs of pairings of {1..order}, counted by the number of blocks of
/// their least upper bound.
inline std::map<std::size_t, std::size_t> bipartition_pair_counts(std::size_t order) {
    if (order == 0 || order % 2 != 0) throw domain_error("bi-partition order must be a positive even number");
    const auto ms = perfect_matchings(order);
    std::map<std::size_t, std::size_t> counts;
    for (const auto& a : ms)
        for (const auto& b : ms) ++counts[join_block_count(a, b)];
    return counts;
}

}  // namespace parseries
