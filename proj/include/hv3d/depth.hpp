#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "hv3d/cyclopean.hpp"
#include "hv3d/metrics2d.hpp"
#include "hv3d/plane.hpp"

namespace hv3d {

struct DisparityEstimatorParams {
    int block_size = 8;
    int search_range = 64;  ///< shifts searched in [-search_range, +search_range]

    void validate() const {
        if (block_size < 1)
            throw std::invalid_argument("DisparityEstimatorParams: block_size must be >= 1");
        if (search_range < 1)
            throw std::invalid_argument("DisparityEstimatorParams: search_range must be >= 1");
    }
};

// Depth codes 0..255 span disparities -64..+64 px; the mapping is fixed so
// code planes and disparity planes convert without extra metadata.
constexpr double kCodeDisparityHalfRange = 64.0;

inline double disparity_to_code(double d_px) {
    const double c = (d_px + kCodeDisparityHalfRange) * 255.0 / (2.0 * kCodeDisparityHalfRange);
    return std::clamp(c, 0.0, 255.0);
}

inline double code_to_disparity(double code) {
    return code * (2.0 * kCodeDisparityHalfRange) / 255.0 - kCodeDisparityHalfRange;
}

inline DepthMap disparity_to_depth(const DisparityMap& d,
                                   std::optional<ViewingGeometry> geometry = {}) {
    DepthMap out;
    out.plane = Plane(d.plane.width, d.plane.height);
    for (std::size_t i = 0; i < d.plane.samples.size(); ++i)
        out.plane.samples[i] = disparity_to_code(d.plane.samples[i]);
    out.geometry = geometry;
    return out;
}

inline DisparityMap depth_to_disparity(const DepthMap& depth) {
    DisparityMap out;
    out.plane = Plane(depth.plane.width, depth.plane.height);
    for (std::size_t i = 0; i < depth.plane.samples.size(); ++i)
        out.plane.samples[i] = code_to_disparity(depth.plane.samples[i]);
    return out;
}

namespace detail {

inline double block_sad(const Plane& left, const Plane& right, int lx, int rx, int y,
                        int block_size) {
    double sad = 0.0;
    for (int j = 0; j < block_size; ++j) {
        const double* lrow = left.samples.data() +
                             static_cast<std::size_t>(y + j) * left.width + lx;
        const double* rrow = right.samples.data() +
                             static_cast<std::size_t>(y + j) * right.width + rx;
        for (int i = 0; i < block_size; ++i) sad += std::abs(lrow[i] - rrow[i]);
    }
    return sad;
}

}  // namespace detail

/// Exhaustive horizontal block matching, SAD cost. For each block of the
/// left view the shift d in [-range, +range] minimizing SAD against the
/// right block at x - d wins; ties break toward the smallest |d|, then
/// toward negative d. The per-block field is replicated to per-pixel
/// resolution (remainder pixels copy their nearest block).
inline DisparityMap estimate_disparity(const Plane& left, const Plane& right,
                                       const DisparityEstimatorParams& params = {}) {
    params.validate();
    require_same_size(left, right, "estimate_disparity");
    const int bs = params.block_size;
    if (left.width < bs || left.height < bs)
        throw std::invalid_argument("estimate_disparity: plane smaller than one block");

    // Candidate shifts in tie-break priority order: 0, -1, +1, -2, +2, ...
    std::vector<int> shifts;
    shifts.reserve(2 * params.search_range + 1);
    shifts.push_back(0);
    for (int m = 1; m <= params.search_range; ++m) {
        shifts.push_back(-m);
        shifts.push_back(m);
    }

    const int nx = left.width / bs;
    const int ny = left.height / bs;
    std::vector<int> block_disp(static_cast<std::size_t>(nx) * ny, 0);
    for (int by = 0; by < ny; ++by)
        for (int bx = 0; bx < nx; ++bx) {
            const int lx = bx * bs;
            const int y = by * bs;
            double best = std::numeric_limits<double>::infinity();
            int best_d = 0;
            for (int d : shifts) {
                const int rx = lx - d;
                if (rx < 0 || rx + bs > right.width) continue;
                const double sad = detail::block_sad(left, right, lx, rx, y, bs);
                if (sad < best) {
                    best = sad;
                    best_d = d;
                }
            }
            block_disp[static_cast<std::size_t>(by) * nx + bx] = best_d;
        }

    DisparityMap out;
    out.plane = Plane(left.width, left.height);
    for (int y = 0; y < left.height; ++y) {
        const int by = std::min(y / bs, ny - 1);
        for (int x = 0; x < left.width; ++x) {
            const int bx = std::min(x / bs, nx - 1);
            out.plane.at(x, y) =
                static_cast<double>(block_disp[static_cast<std::size_t>(by) * nx + bx]);
        }
    }
    return out;
}

/// Depth codes mapped through the on-screen degree domain and linearly
/// requantized back to the 0..255 range. The chain is monotone-affine, so
/// with a valid geometry it is the identity up to rounding; without a
/// geometry it is the identity by definition.
inline Plane rescale_codes_for_vif(const DepthMap& depth) {
    if (!depth.geometry) return depth.plane;
    const double dpp = depth.geometry->degrees_per_pixel();
    const double deg_half = kCodeDisparityHalfRange * dpp;
    Plane out(depth.plane.width, depth.plane.height);
    for (std::size_t i = 0; i < depth.plane.samples.size(); ++i) {
        const double deg = code_to_disparity(depth.plane.samples[i]) * dpp;
        out.samples[i] = (deg + deg_half) / (2.0 * deg_half) * 255.0;
    }
    return out;
}

/// VIF(D, D')^beta on the degree-rescaled code planes.
inline double depth_fidelity(const DepthMap& depth_ref, const DepthMap& depth_dist, double beta,
                             const VifParams& vif_params = {}) {
    if (!(beta >= 0)) throw std::invalid_argument("depth_fidelity: beta must be >= 0");
    require_same_size(depth_ref.plane, depth_dist.plane, "depth_fidelity");
    const double v = vifp(rescale_codes_for_vif(depth_ref), rescale_codes_for_vif(depth_dist),
                          vif_params);
    return std::pow(v, beta);
}

/// Population variance of each block's depth samples, partition order.
inline std::vector<double> block_variance_map(const DepthMap& depth, int block_size) {
    const auto origins = partition_blocks(depth.plane, block_size);
    std::vector<double> variances;
    variances.reserve(origins.size());
    const double n = static_cast<double>(block_size) * block_size;
    for (const BlockOrigin& o : origins) {
        double mean = 0.0;
        for (int y = 0; y < block_size; ++y)
            for (int x = 0; x < block_size; ++x) mean += depth.plane.at(o.x + x, o.y + y);
        mean /= n;
        double var = 0.0;
        for (int y = 0; y < block_size; ++y)
            for (int x = 0; x < block_size; ++x) {
                const double d = depth.plane.at(o.x + x, o.y + y) - mean;
                var += d * d;
            }
        variances.push_back(var / n);
    }
    return variances;
}

/// (Σ σ²_i) / (N · max σ²_j); 1.0 when every variance is zero (flat depth).
inline double variance_weight_sum(const std::vector<double>& variances) {
    if (variances.empty())
        throw std::invalid_argument("variance_weight_sum: empty variance list");
    double sum = 0.0, mx = 0.0;
    for (double v : variances) {
        if (!(v >= 0)) throw std::invalid_argument("variance_weight_sum: negative variance");
        sum += v;
        mx = std::max(mx, v);
    }
    if (mx == 0.0) return 1.0;
    return sum / (static_cast<double>(variances.size()) * mx);
}

/// The factor multiplying w3: depth fidelity times the variance weight sum
/// of the REFERENCE depth map.
inline double depth_quality_term(const DepthMap& depth_ref, const DepthMap& depth_dist,
                                 double beta, int block_size, const VifParams& vif_params = {}) {
    return depth_fidelity(depth_ref, depth_dist, beta, vif_params) *
           variance_weight_sum(block_variance_map(depth_ref, block_size));
}

}  // namespace hv3d
