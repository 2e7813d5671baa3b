#pragma once

// Plain-text interchange: numeric CSV matrices (rows = points, columns =
// series) with shortest round-trip number formatting, and the textual Sigma
// specifications accepted on the command line.

#include <charconv>
#include <cstddef>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "parseries/covariance_models.hpp"
#include "parseries/errors.hpp"
#include "parseries/linalg.hpp"

namespace parseries::io {

/// Shortest decimal string that reads back to the same double.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline bool parse_double(std::string_view s, double& out) {
    s = trim(s);
    if (s.empty()) return false;
    if (s.front() == '+') s.remove_prefix(1);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

inline std::vector<double> parse_double_list(std::string_view s, std::string_view what) {
    std::vector<double> out;
    for (auto tok : split(s, ',')) {
        double v = 0.0;
        if (!parse_double(tok, v))
            throw parse_error(std::string(what) + ": '" + std::string(trim(tok)) + "' is not a number");
        out.push_back(v);
    }
    return out;
}

inline std::vector<std::size_t> parse_count_list(std::string_view s, std::string_view what) {
    std::vector<std::size_t> out;
    for (auto tok : split(s, ',')) {
        tok = trim(tok);
        std::size_t v = 0;
        const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (tok.empty() || res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
            throw parse_error(std::string(what) + ": '" + std::string(tok) + "' is not a non-negative integer");
        out.push_back(v);
    }
    return out;
}

/// Writes one row per matrix row, comma separated, '.' decimal point.
inline void write_csv(std::ostream& os, const Matrix& y, bool header = false) {
    if (header) {
        for (Eigen::Index c = 0; c < y.cols(); ++c) os << (c ? "," : "") << 'y' << (c + 1);
        os << '\n';
    }
    for (Eigen::Index r = 0; r < y.rows(); ++r) {
        for (Eigen::Index c = 0; c < y.cols(); ++c) os << (c ? "," : "") << format_double(y(r, c));
        os << '\n';
    }
}

/// Reads a rectangular numeric CSV. Blank lines and lines starting with '#'
/// are skipped; with `header` the first remaining line is skipped too.
inline Matrix read_csv(std::istream& is, bool header = false) {
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    bool skipped_header = !header;
    while (std::getline(is, line)) {
        ++lineno;
        const auto t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        if (!skipped_header) {
            skipped_header = true;
            continue;
        }
        std::vector<double> row;
        for (auto tok : split(t, ',')) {
            double v = 0.0;
            if (!parse_double(tok, v))
                throw parse_error("malformed CSV at row " + std::to_string(lineno) + ": '" +
                                  std::string(trim(tok)) + "' is not a number");
            row.push_back(v);
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw parse_error("malformed CSV at row " + std::to_string(lineno) + ": expected " +
                              std::to_string(rows.front().size()) + " columns, found " + std::to_string(row.size()));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw parse_error("CSV input contains no data rows");
    Matrix y(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c)
            y(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    return y;
}

/// Parses "scalar:v", "diag:v1,...,vk", "full:s11,s12,...,skk" (row major) or
/// "green:a1,...,ak;b1,...,bk".
inline SigmaSpec parse_sigma_spec(std::string_view text) {
    const auto colon = text.find(':');
    if (colon == std::string_view::npos)
        throw parse_error("sigma spec '" + std::string(text) + "' must look like kind:values");
    const auto kind = trim(text.substr(0, colon));
    const auto body = text.substr(colon + 1);
    if (kind == "scalar") {
        const auto v = parse_double_list(body, "sigma scalar");
        if (v.size() != 1) throw parse_error("sigma scalar takes exactly one value");
        if (!(v[0] > 0.0)) throw domain_error("sigma scalar variance must be positive");
        return ScalarVar{v[0]};
    }
    if (kind == "diag") {
        auto v = parse_double_list(body, "sigma diag");
        for (double d : v)
            if (!(d > 0.0)) throw domain_error("sigma diag variances must be positive");
        return DiagonalVar{std::move(v)};
    }
    if (kind == "full") {
        const auto v = parse_double_list(body, "sigma full");
        std::size_t k = 0;
        while ((k + 1) * (k + 1) <= v.size()) ++k;
        if (k * k != v.size()) throw parse_error("sigma full needs k*k values");
        Matrix s(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j)
                s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v[i * k + j];
        return FullPd{std::move(s)};
    }
    if (kind == "green") {
        const auto parts = split(body, ';');
        if (parts.size() != 2) throw parse_error("sigma green needs 'a-values;b-values'");
        return Green{parse_double_list(parts[0], "sigma green a"), parse_double_list(parts[1], "sigma green b")};
    }
    throw parse_error("unknown sigma kind '" + std::string(kind) + "' (expected scalar, diag, full or green)");
}

}  // namespace parseries::io
