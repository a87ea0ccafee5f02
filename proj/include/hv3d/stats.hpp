#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace hv3d {

namespace detail {

inline void check_paired(const std::vector<double>& x, const std::vector<double>& y,
                         const char* what) {
    if (x.size() != y.size())
        throw std::invalid_argument(std::string(what) + ": length mismatch, " +
                                    std::to_string(x.size()) + " vs " +
                                    std::to_string(y.size()));
    if (x.size() < 3)
        throw std::invalid_argument(std::string(what) + ": need at least 3 points, got " +
                                    std::to_string(x.size()));
}

/// Average ranks (1-based); ties share the mean of their positions.
inline std::vector<double> average_ranks(const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double r = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
        for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
        i = j + 1;
    }
    return ranks;
}

}  // namespace detail

/// Sample Pearson correlation. Zero-variance input is an error naming the
/// offending side.
inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    detail::check_paired(x, y, "pearson");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0) throw std::invalid_argument("pearson: x has zero variance");
    if (syy == 0.0) throw std::invalid_argument("pearson: y has zero variance");
    return sxy / std::sqrt(sxx * syy);
}

/// Spearman rank correlation: Pearson on average ranks.
inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    detail::check_paired(x, y, "spearman");
    const auto rx = detail::average_ranks(x);
    const auto ry = detail::average_ranks(y);
    try {
        return pearson(rx, ry);
    } catch (const std::invalid_argument& e) {
        // rank variance zero means the underlying values were all equal
        throw std::invalid_argument(std::string("spearman: ") +
                                    (std::string(e.what()).find(" x ") != std::string::npos
                                         ? "x values are all equal"
                                         : "y values are all equal"));
    }
}

}  // namespace hv3d
