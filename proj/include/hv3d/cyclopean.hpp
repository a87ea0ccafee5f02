#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "hv3d/csf.hpp"
#include "hv3d/dct.hpp"
#include "hv3d/metrics2d.hpp"
#include "hv3d/plane.hpp"

namespace hv3d {

struct BlockOrigin {
    int x = 0;
    int y = 0;

    friend bool operator==(const BlockOrigin& a, const BlockOrigin& b) {
        return a.x == b.x && a.y == b.y;
    }
};

/// Non-overlapping raster-order tiling; right/bottom remainder pixels are
/// dropped. N = floor(w/bs) * floor(h/bs).
inline std::vector<BlockOrigin> partition_blocks(const Plane& plane, int block_size) {
    if (block_size < 1) throw std::invalid_argument("partition_blocks: block_size must be >= 1");
    if (plane.width < block_size || plane.height < block_size)
        throw std::invalid_argument("partition_blocks: plane " + std::to_string(plane.width) +
                                    "x" + std::to_string(plane.height) +
                                    " smaller than one block of " + std::to_string(block_size));
    const int nx = plane.width / block_size;
    const int ny = plane.height / block_size;
    std::vector<BlockOrigin> origins;
    origins.reserve(static_cast<std::size_t>(nx) * ny);
    for (int by = 0; by < ny; ++by)
        for (int bx = 0; bx < nx; ++bx)
            origins.push_back({bx * block_size, by * block_size});
    return origins;
}

inline Plane extract_block(const Plane& plane, BlockOrigin origin, int block_size) {
    if (origin.x < 0 || origin.y < 0 || origin.x + block_size > plane.width ||
        origin.y + block_size > plane.height)
        throw std::invalid_argument("extract_block: block at (" + std::to_string(origin.x) +
                                    "," + std::to_string(origin.y) + ") leaves the plane");
    Plane b(block_size, block_size);
    for (int y = 0; y < block_size; ++y)
        for (int x = 0; x < block_size; ++x) b.at(x, y) = plane.at(origin.x + x, origin.y + y);
    return b;
}

struct MatchResult {
    BlockOrigin origin;
    bool clamped = false;
};

namespace detail {
/// Round to nearest integer, ties toward zero.
inline int round_ties_to_zero(double v) {
    return static_cast<int>(v >= 0.0 ? std::ceil(v - 0.5) : std::floor(v + 0.5));
}
}  // namespace detail

/// Right-view origin for the block at `left_origin`: shift by the rounded
/// mean disparity over the block (positive disparity moves toward smaller x),
/// clamped to keep the block inside the plane.
inline MatchResult match_block(BlockOrigin left_origin, const DisparityMap& disparity,
                               int block_size, int plane_width) {
    double mean = 0.0;
    for (int y = 0; y < block_size; ++y)
        for (int x = 0; x < block_size; ++x)
            mean += disparity.plane.at(left_origin.x + x, left_origin.y + y);
    mean /= static_cast<double>(block_size) * block_size;

    const int shift = detail::round_ties_to_zero(mean);
    int rx = left_origin.x - shift;
    MatchResult r;
    if (rx < 0) {
        rx = 0;
        r.clamped = true;
    } else if (rx + block_size > plane_width) {
        rx = plane_width - block_size;
        r.clamped = true;
    }
    r.origin = {rx, left_origin.y};
    return r;
}

struct CyclopeanBlock {
    Plane coefficients;
    BlockOrigin left_origin;
    BlockOrigin right_origin;
};

/// XC = csf ⊙ (dct2(left) + dct2(right)) / 2, elementwise.
inline CyclopeanBlock fuse_cyclopean(const Plane& block_left, const Plane& block_right,
                                     const Plane& csf) {
    require_same_size(block_left, block_right, "fuse_cyclopean");
    require_same_size(block_left, csf, "fuse_cyclopean(csf)");
    const Plane dl = dct2(block_left);
    const Plane dr = dct2(block_right);
    CyclopeanBlock out;
    out.coefficients = Plane(csf.width, csf.height);
    for (std::size_t i = 0; i < csf.samples.size(); ++i)
        out.coefficients.samples[i] =
            csf.samples[i] * 0.5 * (dl.samples[i] + dr.samples[i]);
    return out;
}

struct CyclopeanScore {
    double score = 0.0;  ///< mean per-block SSIM between fused ref/dist blocks
    int n_blocks = 0;
    int clamp_count_ref = 0;
    int clamp_count_dist = 0;
};

namespace detail {
inline CyclopeanBlock fuse_at(const Plane& left, const Plane& right, BlockOrigin origin,
                              const DisparityMap& disparity, const Plane& csf,
                              const DctPlan& plan, int block_size, int* clamp_count) {
    const MatchResult m = match_block(origin, disparity, block_size, right.width);
    if (m.clamped && clamp_count) ++*clamp_count;
    const Plane bl = extract_block(left, origin, block_size);
    const Plane br = extract_block(right, m.origin, block_size);
    CyclopeanBlock out;
    const Plane dl = plan.forward(bl);
    const Plane dr = plan.forward(br);
    out.coefficients = Plane(block_size, block_size);
    for (std::size_t i = 0; i < out.coefficients.samples.size(); ++i)
        out.coefficients.samples[i] = csf.samples[i] * 0.5 * (dl.samples[i] + dr.samples[i]);
    out.left_origin = origin;
    out.right_origin = m.origin;
    return out;
}
}  // namespace detail

/// Mean over all blocks of SSIM(idct2(XC_i), idct2(XC'_i)). XC_i is fused
/// from the reference pair under the reference disparity, XC'_i from the
/// distorted pair under `dist_disparity`. Per-block SSIM uses a single
/// uniform window over the block's samples.
inline CyclopeanScore cyclopean_quality(const StereoFrame& ref, const StereoFrame& dist,
                                        const DisparityMap& ref_disparity,
                                        const DisparityMap& dist_disparity,
                                        const CsfModel& csf_model, int block_size,
                                        const SsimParams& ssim_params = {}) {
    require_same_size(ref.left.y, ref.right.y, "cyclopean_quality(ref)");
    require_same_size(dist.left.y, dist.right.y, "cyclopean_quality(dist)");
    require_same_size(ref.left.y, dist.left.y, "cyclopean_quality(ref vs dist)");
    require_same_size(ref.left.y, ref_disparity.plane, "cyclopean_quality(ref disparity)");
    require_same_size(dist.left.y, dist_disparity.plane, "cyclopean_quality(dist disparity)");

    const Plane csf = csf_weights(csf_model, block_size);
    const DctPlan plan(block_size);
    const auto origins = partition_blocks(ref.left.y, block_size);

    CyclopeanScore result;
    result.n_blocks = static_cast<int>(origins.size());
    double acc = 0.0;
    for (const BlockOrigin& o : origins) {
        const CyclopeanBlock xc = detail::fuse_at(ref.left.y, ref.right.y, o, ref_disparity,
                                                  csf, plan, block_size,
                                                  &result.clamp_count_ref);
        const CyclopeanBlock xcp = detail::fuse_at(dist.left.y, dist.right.y, o, dist_disparity,
                                                   csf, plan, block_size,
                                                   &result.clamp_count_dist);
        acc += ssim_global(plan.inverse(xc.coefficients), plan.inverse(xcp.coefficients),
                           ssim_params);
    }
    result.score = acc / static_cast<double>(origins.size());
    return result;
}

}  // namespace hv3d
