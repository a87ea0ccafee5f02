#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hv3d {

/// Single image plane, row-major. Sample values live on the 8-bit source
/// scale (0..255) for video content; disparity planes hold signed values.
struct Plane {
    int width = 0;
    int height = 0;
    std::vector<double> samples;

    Plane() = default;
    Plane(int w, int h, double fill = 0.0) : width(w), height(h) {
        if (w < 1 || h < 1)
            throw std::invalid_argument("Plane: dimensions must be >= 1, got " +
                                        std::to_string(w) + "x" + std::to_string(h));
        samples.assign(static_cast<std::size_t>(w) * h, fill);
    }

    double at(int x, int y) const { return samples[static_cast<std::size_t>(y) * width + x]; }
    double& at(int x, int y) { return samples[static_cast<std::size_t>(y) * width + x]; }

    std::size_t size() const { return samples.size(); }

    bool same_size(const Plane& o) const { return width == o.width && height == o.height; }

    friend bool operator==(const Plane& a, const Plane& b) {
        return a.width == b.width && a.height == b.height && a.samples == b.samples;
    }
};

inline void require_same_size(const Plane& a, const Plane& b, const char* what) {
    if (!a.same_size(b))
        throw std::invalid_argument(std::string(what) + ": dimension mismatch, " +
                                    std::to_string(a.width) + "x" + std::to_string(a.height) +
                                    " vs " + std::to_string(b.width) + "x" +
                                    std::to_string(b.height));
}

/// One 4:2:0 video frame. Chroma planes are kept at their subsampled size;
/// metric math never upsamples them.
struct Frame {
    Plane y;
    Plane u;
    Plane v;

    void validate() const {
        const int cw = (y.width + 1) / 2;
        const int ch = (y.height + 1) / 2;
        if (u.width != cw || u.height != ch || v.width != cw || v.height != ch)
            throw std::invalid_argument("Frame: chroma planes must be ceil(luma/2) sized");
    }

    friend bool operator==(const Frame& a, const Frame& b) {
        return a.y == b.y && a.u == b.u && a.v == b.v;
    }
};

/// Viewer/display geometry used to map pixel frequencies and disparities to
/// visual degrees.
struct ViewingGeometry {
    double viewing_distance_m = 1.718;  // 3x the height of a 46" 16:9 panel
    double display_width_m = 1.018;
    int horizontal_resolution = 1920;

    void validate() const {
        if (!(viewing_distance_m > 0) || !(display_width_m > 0) || horizontal_resolution < 1)
            throw std::invalid_argument("ViewingGeometry: all fields must be positive");
    }

    /// Visual degrees subtended by one pixel (small-angle mapping, so the
    /// degree scale is exactly linear in distance).
    double degrees_per_pixel() const {
        return (display_width_m / horizontal_resolution) / viewing_distance_m * (180.0 / M_PI);
    }
};

/// Per-pixel depth codes on the 0..255 scale.
struct DepthMap {
    Plane plane;
    std::optional<ViewingGeometry> geometry;

    friend bool operator==(const DepthMap& a, const DepthMap& b) { return a.plane == b.plane; }
};

/// Per-pixel horizontal disparity in pixels, co-sited with the left view.
/// Positive disparity means the right-view correspondence lies at smaller x.
struct DisparityMap {
    Plane plane;
};

struct StereoFrame {
    Frame left;
    Frame right;
    std::optional<DepthMap> depth;

    void validate() const {
        left.validate();
        right.validate();
        if (!left.y.same_size(right.y))
            throw std::invalid_argument("StereoFrame: left/right dimensions differ");
        if (depth && !depth->plane.same_size(left.y))
            throw std::invalid_argument("StereoFrame: depth map size differs from luma");
    }
};

}  // namespace hv3d
