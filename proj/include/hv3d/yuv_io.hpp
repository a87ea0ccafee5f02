#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "hv3d/plane.hpp"

namespace hv3d {

enum class DepthFormat {
    Auto,         ///< ".yuv" extension selects Yuv420, anything else SinglePlane
    SinglePlane,  ///< width*height bytes per frame
    Yuv420,       ///< 4:2:0 container, chroma ignored
};

namespace detail {

inline std::uintmax_t file_size_or_throw(const std::filesystem::path& path) {
    std::error_code ec;
    const auto size = std::filesystem::file_size(path, ec);
    if (ec)
        throw std::runtime_error("cannot open file: " + path.string());
    return size;
}

inline void check_file_holds(const std::filesystem::path& path, std::uintmax_t actual,
                             std::uintmax_t required) {
    if (actual < required)
        throw std::runtime_error("truncated file: " + path.string() + " holds " +
                                 std::to_string(actual) + " bytes, need at least " +
                                 std::to_string(required));
}

inline Plane read_plane_at(std::ifstream& in, std::uintmax_t offset, int w, int h) {
    in.seekg(static_cast<std::streamoff>(offset));
    std::vector<std::uint8_t> buf(static_cast<std::size_t>(w) * h);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!in)
        throw std::runtime_error("short read while loading plane");
    Plane p(w, h);
    for (std::size_t i = 0; i < buf.size(); ++i) p.samples[i] = buf[i];
    return p;
}

inline std::uint8_t to_byte(double v) {
    const double r = std::nearbyint(v);
    if (r <= 0.0) return 0;
    if (r >= 255.0) return 255;
    return static_cast<std::uint8_t>(r);
}

}  // namespace detail

/// Bytes occupied by one 4:2:0 frame.
inline std::uintmax_t yuv420_frame_bytes(int width, int height) {
    return static_cast<std::uintmax_t>(width) * height * 3 / 2;
}

/// Reads one frame from a headerless planar YUV 4:2:0 8-bit file.
inline Frame read_yuv420(const std::filesystem::path& path, int width, int height,
                         int frame_index) {
    if (width < 2 || height < 2 || width % 2 != 0 || height % 2 != 0)
        throw std::invalid_argument("read_yuv420: dimensions must be even and >= 2, got " +
                                    std::to_string(width) + "x" + std::to_string(height));
    if (frame_index < 0)
        throw std::invalid_argument("read_yuv420: negative frame index");

    const auto frame_bytes = yuv420_frame_bytes(width, height);
    const auto actual = detail::file_size_or_throw(path);
    detail::check_file_holds(path, actual, frame_bytes * (frame_index + 1));

    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open file: " + path.string());

    const int cw = width / 2;
    const int ch = height / 2;
    const auto base = frame_bytes * frame_index;
    Frame f;
    f.y = detail::read_plane_at(in, base, width, height);
    f.u = detail::read_plane_at(in, base + static_cast<std::uintmax_t>(width) * height, cw, ch);
    f.v = detail::read_plane_at(
        in, base + static_cast<std::uintmax_t>(width) * height + static_cast<std::uintmax_t>(cw) * ch,
        cw, ch);
    return f;
}

/// Appends one frame to a headerless planar YUV 4:2:0 file. Samples are
/// rounded to the nearest integer and clipped to 0..255.
inline void append_yuv420(const std::filesystem::path& path, const Frame& frame) {
    frame.validate();
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out)
        throw std::runtime_error("cannot open file for writing: " + path.string());
    for (const Plane* p : {&frame.y, &frame.u, &frame.v}) {
        std::vector<std::uint8_t> buf(p->samples.size());
        for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = detail::to_byte(p->samples[i]);
        out.write(reinterpret_cast<const char*>(buf.data()),
                  static_cast<std::streamsize>(buf.size()));
    }
    if (!out)
        throw std::runtime_error("short write: " + path.string());
}

inline void write_yuv420(const std::filesystem::path& path, const std::vector<Frame>& frames) {
    std::ofstream(path, std::ios::binary | std::ios::trunc);
    for (const auto& f : frames) append_yuv420(path, f);
}

/// Reads one depth frame. The container is either a bare single-plane 8-bit
/// file or a YUV 4:2:0 file whose chroma is ignored.
inline DepthMap read_depth(const std::filesystem::path& path, int width, int height,
                           int frame_index, DepthFormat format = DepthFormat::Auto) {
    if (format == DepthFormat::Auto)
        format = path.extension() == ".yuv" ? DepthFormat::Yuv420 : DepthFormat::SinglePlane;

    DepthMap d;
    if (format == DepthFormat::Yuv420) {
        d.plane = read_yuv420(path, width, height, frame_index).y;
        return d;
    }

    if (width < 1 || height < 1)
        throw std::invalid_argument("read_depth: dimensions must be >= 1");
    if (frame_index < 0)
        throw std::invalid_argument("read_depth: negative frame index");
    const auto frame_bytes = static_cast<std::uintmax_t>(width) * height;
    const auto actual = detail::file_size_or_throw(path);
    detail::check_file_holds(path, actual, frame_bytes * (frame_index + 1));

    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open file: " + path.string());
    d.plane = detail::read_plane_at(in, frame_bytes * frame_index, width, height);
    return d;
}

inline void append_depth(const std::filesystem::path& path, const DepthMap& depth) {
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out)
        throw std::runtime_error("cannot open file for writing: " + path.string());
    std::vector<std::uint8_t> buf(depth.plane.samples.size());
    for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = detail::to_byte(depth.plane.samples[i]);
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

}  // namespace hv3d
