#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace hv3d {

/// 4-parameter logistic f(x) = a + (b - a) / (1 + exp(-(x - c)/d)).
struct LogisticFit {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double d = 1.0;
    double rmse = 0.0;
    bool converged = false;
    bool degenerate = false;  ///< target values were constant; fit is the flat line
    int n_points = 0;
};

inline double logistic_eval(double a, double b, double c, double d, double x) {
    double z = -(x - c) / d;
    z = std::clamp(z, -700.0, 700.0);
    return a + (b - a) / (1.0 + std::exp(z));
}

inline double logistic_eval(const LogisticFit& fit, double x) {
    return logistic_eval(fit.a, fit.b, fit.c, fit.d, x);
}

namespace detail {

inline double quantile_sorted(const std::vector<double>& sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

inline double logistic_sse(const std::array<double, 4>& p, const std::vector<double>& x,
                           const std::vector<double>& y) {
    double sse = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double r = logistic_eval(p[0], p[1], p[2], p[3], x[k]) - y[k];
        sse += r * r;
    }
    return sse;
}

/// Solves the 4x4 system M δ = rhs in place; false when singular.
inline bool solve4(std::array<std::array<double, 4>, 4>& m, std::array<double, 4>& rhs,
                   std::array<double, 4>& out) {
    std::array<int, 4> piv = {0, 1, 2, 3};
    for (int col = 0; col < 4; ++col) {
        int best = col;
        for (int r = col + 1; r < 4; ++r)
            if (std::abs(m[piv[r]][col]) > std::abs(m[piv[best]][col])) best = r;
        std::swap(piv[col], piv[best]);
        const double pivot = m[piv[col]][col];
        if (std::abs(pivot) < 1e-300) return false;
        for (int r = col + 1; r < 4; ++r) {
            const double f = m[piv[r]][col] / pivot;
            for (int c = col; c < 4; ++c) m[piv[r]][c] -= f * m[piv[col]][c];
            rhs[piv[r]] -= f * rhs[piv[col]];
        }
    }
    for (int col = 3; col >= 0; --col) {
        double acc = rhs[piv[col]];
        for (int c = col + 1; c < 4; ++c) acc -= m[piv[col]][c] * out[c];
        out[col] = acc / m[piv[col]][col];
    }
    return true;
}

struct LmOutcome {
    std::array<double, 4> params;
    double sse = 0.0;
    bool converged = false;
};

inline LmOutcome levenberg_marquardt(std::array<double, 4> p, const std::vector<double>& x,
                                     const std::vector<double>& y) {
    constexpr int kMaxIter = 300;
    double lambda = 1e-3;
    double sse = logistic_sse(p, x, y);
    bool converged = false;

    for (int iter = 0; iter < kMaxIter; ++iter) {
        // accumulate J^T J and J^T r
        std::array<std::array<double, 4>, 4> h{};
        std::array<double, 4> g{};
        for (std::size_t k = 0; k < x.size(); ++k) {
            double z = -(x[k] - p[2]) / p[3];
            z = std::clamp(z, -700.0, 700.0);
            const double s = 1.0 / (1.0 + std::exp(z));
            const double f = p[0] + (p[1] - p[0]) * s;
            const double r = f - y[k];
            const double ds = s * (1.0 - s);
            const std::array<double, 4> j = {1.0 - s, s, -(p[1] - p[0]) * ds / p[3],
                                             -(p[1] - p[0]) * ds * (x[k] - p[2]) / (p[3] * p[3])};
            for (int a = 0; a < 4; ++a) {
                g[a] += j[a] * r;
                for (int b = 0; b < 4; ++b) h[a][b] += j[a] * j[b];
            }
        }

        bool stepped = false;
        for (int attempt = 0; attempt < 20 && !stepped; ++attempt) {
            auto m = h;
            for (int a = 0; a < 4; ++a) m[a][a] += lambda * std::max(h[a][a], 1e-12);
            std::array<double, 4> rhs = {-g[0], -g[1], -g[2], -g[3]};
            std::array<double, 4> delta{};
            if (!solve4(m, rhs, delta)) {
                lambda = std::min(lambda * 10.0, 1e12);
                continue;
            }
            std::array<double, 4> cand = {p[0] + delta[0], p[1] + delta[1], p[2] + delta[2],
                                          p[3] + delta[3]};
            if (std::abs(cand[3]) < 1e-9) cand[3] = cand[3] < 0.0 ? -1e-9 : 1e-9;
            const double cand_sse = logistic_sse(cand, x, y);
            if (std::isfinite(cand_sse) && cand_sse <= sse) {
                const double improvement = sse - cand_sse;
                double step = 0.0;
                for (int a = 0; a < 4; ++a) step = std::max(step, std::abs(delta[a]));
                p = cand;
                sse = cand_sse;
                lambda = std::max(lambda * 0.1, 1e-12);
                stepped = true;
                if (improvement <= 1e-14 * (1.0 + sse) || step <= 1e-12) {
                    converged = true;
                }
            } else {
                lambda = std::min(lambda * 10.0, 1e12);
            }
        }
        if (converged || !stepped) {
            converged = converged || stepped;
            break;
        }
    }
    return {p, sse, converged};
}

}  // namespace detail

/// Least-squares 4-parameter logistic fit via deterministic multi-start
/// Levenberg-Marquardt. Start points are seeded from data quantiles: a, b
/// from the target min/max (both orientations), c from score quantiles, d
/// from the score IQR.
inline LogisticFit logistic_fit(const std::vector<double>& scores,
                                const std::vector<double>& mos) {
    if (scores.size() != mos.size())
        throw std::invalid_argument("logistic_fit: length mismatch, " +
                                    std::to_string(scores.size()) + " vs " +
                                    std::to_string(mos.size()));
    if (scores.size() < 5)
        throw std::invalid_argument("logistic_fit: need at least 5 points, got " +
                                    std::to_string(scores.size()));
    for (std::size_t i = 0; i < scores.size(); ++i)
        if (!std::isfinite(scores[i]))
            throw std::invalid_argument("logistic_fit: non-finite score at index " +
                                        std::to_string(i));

    std::vector<double> sorted = scores;
    std::sort(sorted.begin(), sorted.end());
    const double q25 = detail::quantile_sorted(sorted, 0.25);
    const double q50 = detail::quantile_sorted(sorted, 0.50);
    const double q75 = detail::quantile_sorted(sorted, 0.75);
    double iqr = q75 - q25;
    if (iqr <= 0.0) iqr = std::max(sorted.back() - sorted.front(), 1.0);

    const auto [mos_min_it, mos_max_it] = std::minmax_element(mos.begin(), mos.end());
    const double mos_min = *mos_min_it, mos_max = *mos_max_it;

    LogisticFit fit;
    fit.n_points = static_cast<int>(scores.size());
    if (mos_max - mos_min == 0.0) {
        fit.a = fit.b = mos_min;
        fit.c = q50;
        fit.d = 1.0;
        fit.rmse = 0.0;
        fit.converged = true;
        fit.degenerate = true;
        return fit;
    }

    detail::LmOutcome best;
    best.sse = std::numeric_limits<double>::infinity();
    for (const auto& ab : {std::array<double, 2>{mos_min, mos_max},
                           std::array<double, 2>{mos_max, mos_min}})
        for (double c0 : {q50, q25, q75})
            for (double d0 : {iqr / 4.0, iqr / 1.349, iqr}) {
                const auto out =
                    detail::levenberg_marquardt({ab[0], ab[1], c0, d0}, scores, mos);
                if (out.sse < best.sse ||
                    (out.sse == best.sse && out.converged && !best.converged))
                    best = out;
            }

    fit.a = best.params[0];
    fit.b = best.params[1];
    fit.c = best.params[2];
    fit.d = best.params[3];
    if (std::abs(fit.d) < 1e-9) fit.d = fit.d < 0.0 ? -1e-9 : 1e-9;
    fit.rmse = std::sqrt(best.sse / static_cast<double>(scores.size()));
    fit.converged = best.converged;
    return fit;
}

}  // namespace hv3d
