#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "hv3d/plane.hpp"

namespace hv3d {

struct SsimParams {
    int window_size = 11;
    double window_sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
    double dynamic_range = 255.0;

    void validate() const {
        if (window_size < 3 || window_size % 2 == 0)
            throw std::invalid_argument("SsimParams: window_size must be odd and >= 3");
        if (!(window_sigma > 0) || !(k1 > 0) || !(k2 > 0) || !(dynamic_range > 0))
            throw std::invalid_argument("SsimParams: sigma, k1, k2 and dynamic_range must be > 0");
    }
};

struct VifParams {
    int num_scales = 4;
    double noise_variance = 2.0;  // sigma_n^2

    void validate() const {
        if (num_scales < 1)
            throw std::invalid_argument("VifParams: num_scales must be >= 1");
        if (!(noise_variance > 0))
            throw std::invalid_argument("VifParams: noise_variance must be > 0");
    }

    /// Gaussian window size at scale s (0-based): 2^(num_scales-s)+1, sigma size/5.
    int window_size(int scale) const { return (1 << (num_scales - scale)) + 1; }
};

struct MsSsimParams {
    int num_scales = 5;
    std::vector<double> exponents = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
    SsimParams ssim;

    void validate() const {
        ssim.validate();
        if (num_scales < 1)
            throw std::invalid_argument("MsSsimParams: num_scales must be >= 1");
        if (static_cast<int>(exponents.size()) != num_scales)
            throw std::invalid_argument("MsSsimParams: exponents list must have one entry per scale");
        for (double e : exponents)
            if (!(e > 0))
                throw std::invalid_argument("MsSsimParams: all exponents must be > 0");
    }
};

// ---------------------------------------------------------------------------
// Kernels and filtering

inline std::vector<double> gaussian_kernel_1d(int size, double sigma) {
    if (size < 1 || size % 2 == 0)
        throw std::invalid_argument("gaussian_kernel: size must be odd, got " +
                                    std::to_string(size));
    if (!(sigma > 0))
        throw std::invalid_argument("gaussian_kernel: sigma must be > 0");
    std::vector<double> k(size);
    const int c = size / 2;
    double sum = 0.0;
    for (int i = 0; i < size; ++i) {
        const double d = i - c;
        k[i] = std::exp(-(d * d) / (2.0 * sigma * sigma));
        sum += k[i];
    }
    for (double& v : k) v /= sum;
    return k;
}

/// Separable symmetric 2D Gaussian, normalized to sum 1.
inline Plane gaussian_kernel(int size, double sigma) {
    const auto k = gaussian_kernel_1d(size, sigma);
    Plane out(size, size);
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) out.at(x, y) = k[y] * k[x];
    return out;
}

namespace detail {

/// Valid-region separable filter: output is (w-n+1) x (h-n+1).
inline Plane filter_valid_separable(const Plane& src, const std::vector<double>& k) {
    const int n = static_cast<int>(k.size());
    const int ow = src.width - n + 1;
    const int oh = src.height - n + 1;
    if (ow < 1 || oh < 1)
        throw std::invalid_argument("filter window larger than plane");

    Plane rows(ow, src.height);
    for (int y = 0; y < src.height; ++y) {
        const double* s = src.samples.data() + static_cast<std::size_t>(y) * src.width;
        double* r = rows.samples.data() + static_cast<std::size_t>(y) * ow;
        for (int x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int i = 0; i < n; ++i) acc += k[i] * s[x + i];
            r[x] = acc;
        }
    }
    Plane out(ow, oh);
    for (int y = 0; y < oh; ++y) {
        double* o = out.samples.data() + static_cast<std::size_t>(y) * ow;
        for (int x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int i = 0; i < n; ++i) acc += k[i] * rows.at(x, y + i);
            o[x] = acc;
        }
    }
    return out;
}

inline Plane multiply(const Plane& a, const Plane& b) {
    Plane out(a.width, a.height);
    for (std::size_t i = 0; i < a.samples.size(); ++i)
        out.samples[i] = a.samples[i] * b.samples[i];
    return out;
}

/// Keeps every second sample starting at index 0 (ceil(n/2) survive).
inline Plane decimate2(const Plane& src) {
    const int ow = (src.width + 1) / 2;
    const int oh = (src.height + 1) / 2;
    Plane out(ow, oh);
    for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x) out.at(x, y) = src.at(2 * x, 2 * y);
    return out;
}

struct LocalStats {
    Plane mu1, mu2, var1, var2, cov;
};

inline LocalStats local_stats(const Plane& a, const Plane& b, const std::vector<double>& k) {
    LocalStats s;
    s.mu1 = filter_valid_separable(a, k);
    s.mu2 = filter_valid_separable(b, k);
    s.var1 = filter_valid_separable(multiply(a, a), k);
    s.var2 = filter_valid_separable(multiply(b, b), k);
    s.cov = filter_valid_separable(multiply(a, b), k);
    for (std::size_t i = 0; i < s.mu1.samples.size(); ++i) {
        s.var1.samples[i] -= s.mu1.samples[i] * s.mu1.samples[i];
        s.var2.samples[i] -= s.mu2.samples[i] * s.mu2.samples[i];
        s.cov.samples[i] -= s.mu1.samples[i] * s.mu2.samples[i];
    }
    return s;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// PSNR

/// Peak signal-to-noise ratio against the 255 peak. Identical planes yield
/// the +infinity sentinel (serialized as "inf" in reports).
inline double psnr(const Plane& ref, const Plane& dist) {
    require_same_size(ref, dist, "psnr");
    double se = 0.0;
    for (std::size_t i = 0; i < ref.samples.size(); ++i) {
        const double d = ref.samples[i] - dist.samples[i];
        se += d * d;
    }
    const double mse = se / static_cast<double>(ref.samples.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(255.0 * 255.0 / mse);
}

// ---------------------------------------------------------------------------
// SSIM

struct SsimResult {
    double mean = 0.0;            ///< mean of the full local index (luminance * cs)
    double luminance_mean = 0.0;  ///< mean of the luminance comparison term
    double cs_mean = 0.0;         ///< mean of the contrast/structure term
    std::optional<Plane> map;     ///< local index over valid window positions
};

/// Gaussian-windowed SSIM evaluated at fully-interior window positions only.
inline SsimResult ssim(const Plane& ref, const Plane& dist, const SsimParams& params = {},
                       bool want_map = false) {
    params.validate();
    require_same_size(ref, dist, "ssim");
    if (ref.width < params.window_size || ref.height < params.window_size)
        throw std::invalid_argument("ssim: plane " + std::to_string(ref.width) + "x" +
                                    std::to_string(ref.height) + " smaller than window " +
                                    std::to_string(params.window_size));

    const auto k = gaussian_kernel_1d(params.window_size, params.window_sigma);
    const auto s = detail::local_stats(ref, dist, k);
    const double c1 = params.k1 * params.dynamic_range * params.k1 * params.dynamic_range;
    const double c2 = params.k2 * params.dynamic_range * params.k2 * params.dynamic_range;

    SsimResult r;
    if (want_map) r.map = Plane(s.mu1.width, s.mu1.height);
    double acc = 0.0, acc_l = 0.0, acc_cs = 0.0;
    for (std::size_t i = 0; i < s.mu1.samples.size(); ++i) {
        const double m1 = s.mu1.samples[i], m2 = s.mu2.samples[i];
        const double l = (2.0 * m1 * m2 + c1) / (m1 * m1 + m2 * m2 + c1);
        const double cs =
            (2.0 * s.cov.samples[i] + c2) / (s.var1.samples[i] + s.var2.samples[i] + c2);
        acc += l * cs;
        acc_l += l;
        acc_cs += cs;
        if (r.map) r.map->samples[i] = l * cs;
    }
    const double n = static_cast<double>(s.mu1.samples.size());
    r.mean = acc / n;
    r.luminance_mean = acc_l / n;
    r.cs_mean = acc_cs / n;
    return r;
}

/// SSIM with a single uniform window spanning the whole plane; used for
/// scoring fused blocks that are smaller than the sliding window.
inline double ssim_global(const Plane& ref, const Plane& dist, const SsimParams& params = {}) {
    require_same_size(ref, dist, "ssim_global");
    const double n = static_cast<double>(ref.samples.size());
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < ref.samples.size(); ++i) {
        m1 += ref.samples[i];
        m2 += dist.samples[i];
    }
    m1 /= n;
    m2 /= n;
    double v1 = 0.0, v2 = 0.0, cov = 0.0;
    for (std::size_t i = 0; i < ref.samples.size(); ++i) {
        const double d1 = ref.samples[i] - m1;
        const double d2 = dist.samples[i] - m2;
        v1 += d1 * d1;
        v2 += d2 * d2;
        cov += d1 * d2;
    }
    v1 /= n;
    v2 /= n;
    cov /= n;
    const double c1 = params.k1 * params.dynamic_range * params.k1 * params.dynamic_range;
    const double c2 = params.k2 * params.dynamic_range * params.k2 * params.dynamic_range;
    return ((2.0 * m1 * m2 + c1) * (2.0 * cov + c2)) /
           ((m1 * m1 + m2 * m2 + c1) * (v1 + v2 + c2));
}

// ---------------------------------------------------------------------------
// MS-SSIM

/// 2x2 block-mean downsampling with decimation; trailing odd row/column dropped.
inline Plane downsample_2x2_mean(const Plane& src) {
    const int ow = src.width / 2;
    const int oh = src.height / 2;
    if (ow < 1 || oh < 1)
        throw std::invalid_argument("downsample_2x2_mean: plane too small");
    Plane out(ow, oh);
    for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x)
            out.at(x, y) = 0.25 * (src.at(2 * x, 2 * y) + src.at(2 * x + 1, 2 * y) +
                                   src.at(2 * x, 2 * y + 1) + src.at(2 * x + 1, 2 * y + 1));
    return out;
}

/// Multi-scale SSIM: contrast/structure means at every scale, the luminance
/// term only at the coarsest, each factor raised to its published exponent.
inline double ms_ssim(const Plane& ref, const Plane& dist, const MsSsimParams& params = {}) {
    params.validate();
    require_same_size(ref, dist, "ms_ssim");
    const int needed = params.ssim.window_size << (params.num_scales - 1);
    if (std::min(ref.width, ref.height) < needed)
        throw std::invalid_argument(
            "ms_ssim: plane " + std::to_string(ref.width) + "x" + std::to_string(ref.height) +
            " too small for " + std::to_string(params.num_scales) +
            " scales; smallest dimension must be >= " + std::to_string(needed));

    Plane a = ref, b = dist;
    double result = 1.0;
    for (int s = 0; s < params.num_scales; ++s) {
        if (s > 0) {
            a = downsample_2x2_mean(a);
            b = downsample_2x2_mean(b);
        }
        const auto r = ssim(a, b, params.ssim);
        const double term = (s == params.num_scales - 1) ? r.mean : r.cs_mean;
        result *= std::pow(std::max(term, 0.0), params.exponents[s]);
    }
    return result;
}

// ---------------------------------------------------------------------------
// VIFp

namespace detail {

struct VifSums {
    double num = 0.0;
    double den = 0.0;
    long windows = 0;
};

/// Per-scale information sums of the pixel-domain VIF. When `stabilize` is
/// set, the constant-reference stabilizer is added to the reference variance
/// inside both logs.
inline void vif_scale_sums(const Plane& ref, const Plane& dist, const std::vector<double>& k,
                           double sigma_n2, bool stabilize, VifSums& sums) {
    constexpr double kEps = 1e-10;
    const auto s = local_stats(ref, dist, k);
    for (std::size_t i = 0; i < s.mu1.samples.size(); ++i) {
        double var1 = std::max(s.var1.samples[i], 0.0);
        double var2 = std::max(s.var2.samples[i], 0.0);
        const double cov = s.cov.samples[i];

        double g = cov / (var1 + kEps);
        double sv = var2 - g * cov;
        if (var1 < kEps) {
            g = 0.0;
            sv = var2;
            var1 = 0.0;
        }
        if (var2 < kEps) {
            g = 0.0;
            sv = 0.0;
        }
        if (g < 0.0) {
            sv = var2;
            g = 0.0;
        }
        sv = std::max(sv, kEps);

        const double vr = stabilize ? var1 + kEps : var1;
        sums.num += std::log(1.0 + g * g * vr / (sv + sigma_n2));
        sums.den += std::log(1.0 + vr / sigma_n2);
        ++sums.windows;
    }
}

inline VifSums vif_sums(const Plane& ref, const Plane& dist, const VifParams& params,
                        bool stabilize) {
    VifSums sums;
    Plane a = ref, b = dist;
    for (int s = 0; s < params.num_scales; ++s) {
        const int n = params.window_size(s);
        const auto k = gaussian_kernel_1d(n, n / 5.0);
        if (s > 0) {
            if (a.width < n || a.height < n) break;  // nothing left to decimate
            a = decimate2(filter_valid_separable(a, k));
            b = decimate2(filter_valid_separable(b, k));
        }
        if (a.width >= n && a.height >= n) vif_scale_sums(a, b, k, params.noise_variance, stabilize, sums);
    }
    return sums;
}

}  // namespace detail

/// Pixel-domain multi-scale visual information fidelity. Equals 1 for
/// identical inputs; values slightly above 1 are possible when the
/// distortion amplifies local variance. Scales whose window does not fit the
/// (progressively decimated) plane contribute nothing.
inline double vifp(const Plane& ref, const Plane& dist, const VifParams& params = {}) {
    params.validate();
    require_same_size(ref, dist, "vifp");
    if (ref == dist) return 1.0;

    auto sums = detail::vif_sums(ref, dist, params, false);
    if (sums.windows == 0)
        throw std::invalid_argument("vifp: plane " + std::to_string(ref.width) + "x" +
                                    std::to_string(ref.height) +
                                    " too small for any configured scale");
    if (sums.den == 0.0) {
        // Constant reference, non-identical distorted: stabilized ratio.
        sums = detail::vif_sums(ref, dist, params, true);
    }
    return sums.num / sums.den;
}

}  // namespace hv3d
