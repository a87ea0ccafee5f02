#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "hv3d/csf.hpp"
#include "hv3d/cyclopean.hpp"
#include "hv3d/depth.hpp"
#include "hv3d/metrics2d.hpp"
#include "hv3d/plane.hpp"

namespace hv3d {

enum class TemporalPooling { Mean };

struct Hv3dConfig {
    double w1 = 0.2;   ///< per-view luma weight
    double w2 = 0.4;   ///< cyclopean term weight
    double w3 = 0.2;   ///< depth term weight
    double w4 = 0.05;  ///< per-view chroma weight
    double beta = 1.0;
    int block_size = 8;

    CsfModel csf;
    SsimParams ssim;
    VifParams vif;
    DisparityEstimatorParams disparity;
    TemporalPooling temporal_pooling = TemporalPooling::Mean;

    /// Build XC' with the disparity estimated from the distorted pair; when
    /// false the reference disparity is reused for the distorted fusion.
    bool distorted_pair_uses_distorted_disparity = true;

    void validate() const {
        if (!(w1 >= 0) || !(w2 >= 0) || !(w3 >= 0) || !(w4 >= 0))
            throw std::invalid_argument("Hv3dConfig: weights must be >= 0");
        if (!(w1 + w2 > 0))
            throw std::invalid_argument("Hv3dConfig: w1 + w2 must be > 0");
        if (!(beta >= 0)) throw std::invalid_argument("Hv3dConfig: beta must be >= 0");
        if (block_size < 4 || !detail::is_pow2(block_size))
            throw std::invalid_argument("Hv3dConfig: block_size must be a power of two >= 4");
        csf.validate();
        ssim.validate();
        vif.validate();
        disparity.validate();
    }
};

namespace detail {
inline double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }
}  // namespace detail

struct ViewQuality {
    double score = 0.0;  ///< w1·VIF(Y) + w4·VIF(U) + w4·VIF(V), VIFs clamped to [0,1]
    double vif_y_raw = std::numeric_limits<double>::quiet_NaN();
    double vif_u_raw = std::numeric_limits<double>::quiet_NaN();
    double vif_v_raw = std::numeric_limits<double>::quiet_NaN();
};

/// The bracketed per-view quantity, weights included. When w4 is zero the
/// chroma planes are not evaluated at all.
inline ViewQuality view_quality(const Frame& ref, const Frame& dist, double w1, double w4,
                                const VifParams& vif_params = {}) {
    require_same_size(ref.y, dist.y, "view_quality(y)");
    ViewQuality q;
    q.vif_y_raw = vifp(ref.y, dist.y, vif_params);
    q.score = w1 * detail::clamp01(q.vif_y_raw);
    if (w4 != 0.0) {
        require_same_size(ref.u, dist.u, "view_quality(u)");
        require_same_size(ref.v, dist.v, "view_quality(v)");
        q.vif_u_raw = vifp(ref.u, dist.u, vif_params);
        q.vif_v_raw = vifp(ref.v, dist.v, vif_params);
        q.score += w4 * detail::clamp01(q.vif_u_raw) + w4 * detail::clamp01(q.vif_v_raw);
    }
    return q;
}

/// Maximum attainable raw score: 2·w1 + 4·w4 + w2 + w3 · variance weight sum.
inline double hv3d_max(const Hv3dConfig& config, double variance_weight_sum_value) {
    return 2.0 * config.w1 + 4.0 * config.w4 + config.w2 +
           config.w3 * variance_weight_sum_value;
}

struct ComponentScores {
    double q_right = 0.0;      ///< bracketed right-view term (weights inside)
    double q_left = 0.0;       ///< bracketed left-view term (weights inside)
    double q_cyclopean = 0.0;  ///< fidelity^beta × mean block SSIM (factor of w2)
    double q_depth = 0.0;      ///< fidelity^beta × variance weight sum (factor of w3)
    double hv3d_raw = 0.0;
    double hv3d_max = 0.0;
    double hv3d_normalized = 0.0;

    // diagnostics
    ViewQuality right_detail;
    ViewQuality left_detail;
    double depth_vif_raw = 0.0;          ///< unclamped VIF(D, D')
    double depth_fidelity_value = 0.0;   ///< clamped VIF(D, D')^beta
    double cyclopean_block_ssim = 0.0;   ///< mean per-block SSIM alone
    double variance_weight_sum = 0.0;
    int n_blocks = 0;
    int clamp_count_ref = 0;
    int clamp_count_dist = 0;
    bool ref_depth_estimated = false;
    bool dist_depth_estimated = false;
    bool identity_pair = false;
};

namespace detail {

struct DepthSide {
    DepthMap depth;
    DisparityMap disparity;
    bool estimated = false;
};

inline DepthSide resolve_depth(const Frame& left, const Frame& right,
                               const std::optional<DepthMap>& provided,
                               const Hv3dConfig& config) {
    DepthSide side;
    if (provided) {
        side.depth = *provided;
        if (!side.depth.geometry) side.depth.geometry = config.csf.geometry;
        side.disparity = depth_to_disparity(side.depth);
    } else {
        side.disparity = estimate_disparity(left.y, right.y, config.disparity);
        side.depth = disparity_to_depth(side.disparity, config.csf.geometry);
        side.estimated = true;
    }
    return side;
}

}  // namespace detail

/// Full per-frame score: per-view VIF terms, cyclopean term, depth term,
/// normalization by the frame's attainable maximum.
inline ComponentScores hv3d_frame(const StereoFrame& ref, const StereoFrame& dist,
                                  const Hv3dConfig& config) {
    config.validate();
    ref.validate();
    dist.validate();
    require_same_size(ref.left.y, dist.left.y, "hv3d_frame");

    ComponentScores s;
    s.identity_pair = ref.left == dist.left && ref.right == dist.right &&
                      ((!ref.depth && !dist.depth) || (ref.depth && dist.depth &&
                                                       *ref.depth == *dist.depth));

    const detail::DepthSide ref_side =
        detail::resolve_depth(ref.left, ref.right, ref.depth, config);
    detail::DepthSide dist_side;
    if (s.identity_pair) {
        // D' := D keeps the identity law exact.
        dist_side = ref_side;
    } else {
        dist_side = detail::resolve_depth(dist.left, dist.right, dist.depth, config);
    }
    s.ref_depth_estimated = ref_side.estimated;
    s.dist_depth_estimated = dist_side.estimated;

    s.right_detail = view_quality(ref.right, dist.right, config.w1, config.w4, config.vif);
    s.left_detail = view_quality(ref.left, dist.left, config.w1, config.w4, config.vif);
    s.q_right = s.right_detail.score;
    s.q_left = s.left_detail.score;

    s.depth_vif_raw = vifp(rescale_codes_for_vif(ref_side.depth),
                           rescale_codes_for_vif(dist_side.depth), config.vif);
    s.depth_fidelity_value = std::pow(detail::clamp01(s.depth_vif_raw), config.beta);

    const DisparityMap& dist_pairing = config.distorted_pair_uses_distorted_disparity
                                           ? dist_side.disparity
                                           : ref_side.disparity;
    const CyclopeanScore cyc = cyclopean_quality(ref, dist, ref_side.disparity, dist_pairing,
                                                 config.csf, config.block_size, config.ssim);
    s.cyclopean_block_ssim = cyc.score;
    s.n_blocks = cyc.n_blocks;
    s.clamp_count_ref = cyc.clamp_count_ref;
    s.clamp_count_dist = cyc.clamp_count_dist;
    s.q_cyclopean = s.depth_fidelity_value * s.cyclopean_block_ssim;

    s.variance_weight_sum =
        variance_weight_sum(block_variance_map(ref_side.depth, config.block_size));
    s.q_depth = s.depth_fidelity_value * s.variance_weight_sum;

    s.hv3d_raw = s.q_right + s.q_left + config.w2 * s.q_cyclopean + config.w3 * s.q_depth;
    s.hv3d_max = hv3d_max(config, s.variance_weight_sum);
    s.hv3d_normalized = s.hv3d_raw / s.hv3d_max;
    return s;
}

struct Hv3dSequenceResult {
    std::vector<ComponentScores> frames;
    double pooled = 0.0;  ///< arithmetic mean of per-frame normalized scores
};

inline Hv3dSequenceResult hv3d_sequence(const std::vector<StereoFrame>& ref_seq,
                                        const std::vector<StereoFrame>& dist_seq,
                                        const Hv3dConfig& config) {
    if (ref_seq.size() != dist_seq.size())
        throw std::invalid_argument("hv3d_sequence: frame-count mismatch, " +
                                    std::to_string(ref_seq.size()) + " vs " +
                                    std::to_string(dist_seq.size()));
    if (ref_seq.empty()) throw std::invalid_argument("hv3d_sequence: empty sequence");
    Hv3dSequenceResult r;
    r.frames.reserve(ref_seq.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < ref_seq.size(); ++i) {
        r.frames.push_back(hv3d_frame(ref_seq[i], dist_seq[i], config));
        acc += r.frames.back().hv3d_normalized;
    }
    r.pooled = acc / static_cast<double>(ref_seq.size());
    return r;
}

}  // namespace hv3d
