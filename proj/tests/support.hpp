#pragma once

// Deterministic fixtures shared by the unit and acceptance suites.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "hv3d/plane.hpp"

namespace testsupport {

using hv3d::Frame;
using hv3d::Plane;
using hv3d::StereoFrame;

/// Box-Muller normal deviates on top of a fixed-seed mt19937, so fixtures do
/// not depend on the standard library's distribution implementations.
class Gauss {
public:
    explicit Gauss(std::uint32_t seed) : gen_(seed) {}

    double next() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = (static_cast<double>(gen_()) + 1.0) / 4294967296.0;
        const double u2 = static_cast<double>(gen_()) / 4294967296.0;
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::mt19937 gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

inline double uniform01(std::mt19937& g) {
    return static_cast<double>(g()) / 4294967296.0;
}

inline Plane uniform_plane(int w, int h, std::uint32_t seed, double lo = 0.0, double hi = 255.0) {
    std::mt19937 g(seed);
    Plane p(w, h);
    for (double& s : p.samples) s = lo + (hi - lo) * uniform01(g);
    return p;
}

/// Textured scene: smooth blobs + oriented gratings + fine grain, clipped to
/// the 8-bit range and rounded so it survives a YUV write untouched.
inline Plane natural_scene(int w, int h, std::uint32_t seed) {
    std::mt19937 g(seed);
    Plane p(w, h, 128.0);
    for (int b = 0; b < 6; ++b) {
        const double cx = uniform01(g) * w;
        const double cy = uniform01(g) * h;
        const double amp = (uniform01(g) * 2.0 - 1.0) * 70.0;
        const double s = (0.06 + 0.14 * uniform01(g)) * w;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const double dx = x - cx, dy = y - cy;
                p.at(x, y) += amp * std::exp(-(dx * dx + dy * dy) / (2.0 * s * s));
            }
    }
    for (int k = 0; k < 3; ++k) {
        const double fx = 0.02 + 0.10 * uniform01(g);
        const double fy = 0.02 + 0.10 * uniform01(g);
        const double ph = uniform01(g) * 2.0 * M_PI;
        const double amp = 8.0 + 14.0 * uniform01(g);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                p.at(x, y) += amp * std::sin(2.0 * M_PI * (fx * x + fy * y) + ph);
    }
    Gauss grain(seed ^ 0x9e3779b9u);
    for (double& s : p.samples) {
        s += 3.0 * grain.next();
        s = std::clamp(std::round(s), 0.0, 255.0);
    }
    return p;
}

inline Plane add_noise(const Plane& src, double sigma, std::uint32_t seed) {
    Gauss g(seed);
    Plane out = src;
    for (double& s : out.samples) s = std::clamp(s + sigma * g.next(), 0.0, 255.0);
    return out;
}

/// Gaussian blur with edge-clamped borders (fixture-grade, separable).
inline Plane gaussian_blur(const Plane& src, double sigma) {
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> k(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        k[i + radius] = std::exp(-(static_cast<double>(i) * i) / (2.0 * sigma * sigma));
        sum += k[i + radius];
    }
    for (double& v : k) v /= sum;

    Plane tmp(src.width, src.height);
    for (int y = 0; y < src.height; ++y)
        for (int x = 0; x < src.width; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i)
                acc += k[i + radius] * src.at(std::clamp(x + i, 0, src.width - 1), y);
            tmp.at(x, y) = acc;
        }
    Plane out(src.width, src.height);
    for (int y = 0; y < src.height; ++y)
        for (int x = 0; x < src.width; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i)
                acc += k[i + radius] * tmp.at(x, std::clamp(y + i, 0, src.height - 1));
            out.at(x, y) = acc;
        }
    return out;
}

inline Plane blur_frame_plane(const Plane& p, double sigma) { return gaussian_blur(p, sigma); }

/// 4:2:0 frame around a luma plane; chroma gets its own mild texture.
inline Frame make_frame(const Plane& y, std::uint32_t chroma_seed) {
    Frame f;
    f.y = y;
    const int cw = (y.width + 1) / 2;
    const int ch = (y.height + 1) / 2;
    f.u = uniform_plane(cw, ch, chroma_seed, 96.0, 160.0);
    f.v = uniform_plane(cw, ch, chroma_seed ^ 0x5bd1e995u, 96.0, 160.0);
    for (double& s : f.u.samples) s = std::round(s);
    for (double& s : f.v.samples) s = std::round(s);
    return f;
}

/// Stereo pair carved from one wide canvas: left at offset `margin`, right
/// at offset `margin + shift`, so every pixel has true disparity `shift`.
inline StereoFrame shifted_stereo(int w, int h, std::uint32_t seed, int shift, int margin = 24) {
    const Plane canvas = natural_scene(w + 2 * margin, h, seed);
    Plane left(w, h), right(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            left.at(x, y) = canvas.at(x + margin, y);
            right.at(x, y) = canvas.at(x + margin + shift, y);
        }
    StereoFrame sf;
    sf.left = make_frame(left, seed ^ 0xa511e9b3u);
    sf.right = make_frame(right, seed ^ 0x63d83595u);
    return sf;
}

/// Stereo pair with two disparity layers: a foreground square (disparity
/// `fg_shift`) over a background (disparity `bg_shift`). Also returns the
/// per-pixel true disparity.
struct LayeredScene {
    StereoFrame frame;
    Plane true_disparity;
};

inline LayeredScene layered_stereo(int w, int h, std::uint32_t seed, int bg_shift, int fg_shift,
                                   int margin = 24) {
    const Plane canvas = natural_scene(w + 2 * margin, h, seed);
    Plane left(w, h), right(w, h), disp(w, h);
    const int fx0 = w / 4, fx1 = 3 * w / 4, fy0 = h / 4, fy1 = 3 * h / 4;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const bool fg = x >= fx0 && x < fx1 && y >= fy0 && y < fy1;
            const int d = fg ? fg_shift : bg_shift;
            left.at(x, y) = canvas.at(x + margin, y);
            right.at(x, y) = canvas.at(x + margin + d, y);
            disp.at(x, y) = d;
        }
    LayeredScene s;
    s.frame.left = make_frame(left, seed ^ 0xa511e9b3u);
    s.frame.right = make_frame(right, seed ^ 0x63d83595u);
    s.true_disparity = disp;
    return s;
}

/// Piecewise depth-code plane: blocky regions with gradients, values kept
/// inside [16, 235] so additive corruptions stay clip-free.
inline Plane depth_scene(int w, int h, std::uint32_t seed) {
    std::mt19937 g(seed);
    Plane p(w, h, 128.0);
    for (int r = 0; r < 5; ++r) {
        const int rx = static_cast<int>(uniform01(g) * w * 0.75);
        const int ry = static_cast<int>(uniform01(g) * h * 0.75);
        const int rw = std::max(8, static_cast<int>(uniform01(g) * w * 0.5));
        const int rh = std::max(8, static_cast<int>(uniform01(g) * h * 0.5));
        const double level = 40.0 + 160.0 * uniform01(g);
        const double slope = (uniform01(g) - 0.5) * 0.8;
        for (int y = ry; y < std::min(h, ry + rh); ++y)
            for (int x = rx; x < std::min(w, rx + rw); ++x)
                p.at(x, y) = level + slope * (x - rx);
    }
    for (double& s : p.samples) s = std::clamp(std::round(s), 16.0, 235.0);
    return p;
}

/// Direct sliding-window SSIM, written separately from the library path:
/// explicit 2D Gaussian weights, one double loop per window position.
inline double naive_ssim(const Plane& ref, const Plane& dist, int window, double sigma,
                         double k1 = 0.01, double k2 = 0.03, double range = 255.0) {
    std::vector<double> w(static_cast<std::size_t>(window) * window);
    const int c = window / 2;
    double wsum = 0.0;
    for (int j = 0; j < window; ++j)
        for (int i = 0; i < window; ++i) {
            const double dx = i - c, dy = j - c;
            w[j * window + i] = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
            wsum += w[j * window + i];
        }
    for (double& v : w) v /= wsum;

    const double c1 = (k1 * range) * (k1 * range);
    const double c2 = (k2 * range) * (k2 * range);
    double acc = 0.0;
    long count = 0;
    for (int y0 = 0; y0 + window <= ref.height; ++y0)
        for (int x0 = 0; x0 + window <= ref.width; ++x0) {
            double m1 = 0, m2 = 0, s11 = 0, s22 = 0, s12 = 0;
            for (int j = 0; j < window; ++j)
                for (int i = 0; i < window; ++i) {
                    const double wv = w[j * window + i];
                    const double a = ref.at(x0 + i, y0 + j);
                    const double b = dist.at(x0 + i, y0 + j);
                    m1 += wv * a;
                    m2 += wv * b;
                    s11 += wv * a * a;
                    s22 += wv * b * b;
                    s12 += wv * a * b;
                }
            const double v1 = s11 - m1 * m1;
            const double v2 = s22 - m2 * m2;
            const double cov = s12 - m1 * m2;
            acc += ((2 * m1 * m2 + c1) * (2 * cov + c2)) /
                   ((m1 * m1 + m2 * m2 + c1) * (v1 + v2 + c2));
            ++count;
        }
    return acc / static_cast<double>(count);
}

/// Scratch directory under the test runner's working directory; removed on
/// destruction.
struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& name) {
        path = std::filesystem::current_path() / ("scratch_" + name);
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
};

}  // namespace testsupport
