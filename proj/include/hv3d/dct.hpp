#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "hv3d/plane.hpp"

namespace hv3d {

namespace detail {
inline bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }
}  // namespace detail

/// Orthonormal type-II DCT basis for square power-of-two blocks.
/// Forward: Y = C · X · Cᵀ, inverse: X = Cᵀ · Y · C (C is orthogonal).
class DctPlan {
public:
    explicit DctPlan(int size) : n_(size) {
        if (!detail::is_pow2(size) || size < 2)
            throw std::invalid_argument("DctPlan: size must be a power of two >= 2, got " +
                                        std::to_string(size));
        basis_.resize(static_cast<std::size_t>(n_) * n_);
        const double pi = std::acos(-1.0);
        for (int u = 0; u < n_; ++u) {
            const double alpha = std::sqrt((u == 0 ? 1.0 : 2.0) / n_);
            for (int x = 0; x < n_; ++x)
                basis_[static_cast<std::size_t>(u) * n_ + x] =
                    alpha * std::cos(pi * (2 * x + 1) * u / (2.0 * n_));
        }
    }

    int size() const { return n_; }

    Plane forward(const Plane& block) const { return apply(block, false); }
    Plane inverse(const Plane& coeffs) const { return apply(coeffs, true); }

private:
    double c(int u, int x) const { return basis_[static_cast<std::size_t>(u) * n_ + x]; }

    Plane apply(const Plane& in, bool transpose) const {
        if (in.width != n_ || in.height != n_)
            throw std::invalid_argument("DctPlan: block is " + std::to_string(in.width) + "x" +
                                        std::to_string(in.height) + ", plan is for " +
                                        std::to_string(n_));
        // rows pass: T = in · Bᵀ where B is C (forward) or Cᵀ (inverse)
        Plane tmp(n_, n_);
        for (int y = 0; y < n_; ++y)
            for (int u = 0; u < n_; ++u) {
                double acc = 0.0;
                for (int x = 0; x < n_; ++x)
                    acc += in.at(x, y) * (transpose ? c(x, u) : c(u, x));
                tmp.at(u, y) = acc;
            }
        Plane out(n_, n_);
        for (int v = 0; v < n_; ++v)
            for (int u = 0; u < n_; ++u) {
                double acc = 0.0;
                for (int y = 0; y < n_; ++y)
                    acc += tmp.at(u, y) * (transpose ? c(y, v) : c(v, y));
                out.at(u, v) = acc;
            }
        return out;
    }

    int n_;
    std::vector<double> basis_;
};

inline Plane dct2(const Plane& block) {
    if (block.width != block.height)
        throw std::invalid_argument("dct2: block must be square");
    return DctPlan(block.width).forward(block);
}

inline Plane idct2(const Plane& coeffs) {
    if (coeffs.width != coeffs.height)
        throw std::invalid_argument("idct2: block must be square");
    return DctPlan(coeffs.width).inverse(coeffs);
}

}  // namespace hv3d
