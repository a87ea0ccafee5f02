#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "hv3d/plane.hpp"

namespace hv3d {

/// Radial contrast-sensitivity curve (Mannos–Sakrison family) plus the
/// viewing geometry that maps DCT coefficient indices to cycles/degree.
///
/// S(f) = (b + (1 - b) · f/f0) · exp(-(f/f0)^c)
/// with b = low_freq_attenuation, c = decay_rate, f0 = peak_frequency.
/// decay_rate 0 with attenuation 1 degenerates to a flat curve.
struct CsfModel {
    double peak_frequency = 8.0;        ///< cycles/degree
    double low_freq_attenuation = 0.0192;
    double decay_rate = 1.1;
    int low_pass_keep = 0;  ///< if > 0, zero all weights outside the top-left k×k coefficients

    ViewingGeometry geometry;

    void validate() const {
        if (!(peak_frequency > 0))
            throw std::invalid_argument("CsfModel: peak_frequency must be > 0");
        if (!(low_freq_attenuation > 0) || low_freq_attenuation > 1.0)
            throw std::invalid_argument("CsfModel: low_freq_attenuation must be in (0, 1]");
        if (!(decay_rate >= 0))
            throw std::invalid_argument("CsfModel: decay_rate must be >= 0");
        if (low_pass_keep < 0)
            throw std::invalid_argument("CsfModel: low_pass_keep must be >= 0");
        geometry.validate();
    }

    double curve(double f_cpd) const {
        const double x = f_cpd / peak_frequency;
        return (low_freq_attenuation + (1.0 - low_freq_attenuation) * x) *
               std::exp(-std::pow(x, decay_rate));
    }
};

/// Spatial frequency of DCT coefficient (u, v) of an n-point block, in
/// cycles/degree under the given geometry. Linear in viewing distance.
inline double coefficient_frequency_cpd(int u, int v, int block_size,
                                        const ViewingGeometry& geometry) {
    const double cycles_per_pixel = std::sqrt(static_cast<double>(u) * u +
                                              static_cast<double>(v) * v) /
                                    (2.0 * block_size);
    return cycles_per_pixel / geometry.degrees_per_pixel();
}

/// Per-coefficient CSF weights: curve evaluated at each coefficient's
/// frequency, normalized so the maximum weight is 1, DC pinned to 1.
inline Plane csf_weights(const CsfModel& model, int block_size) {
    model.validate();
    if (block_size < 1) throw std::invalid_argument("csf_weights: block_size must be >= 1");

    Plane w(block_size, block_size);
    double peak = 0.0;
    for (int v = 0; v < block_size; ++v)
        for (int u = 0; u < block_size; ++u) {
            const double s = model.curve(coefficient_frequency_cpd(u, v, block_size,
                                                                   model.geometry));
            if (!std::isfinite(s) || !(s > 0))
                throw std::invalid_argument(
                    "csf_weights: non-positive or non-finite weight at coefficient (" +
                    std::to_string(u) + "," + std::to_string(v) + ")");
            w.at(u, v) = s;
            peak = std::max(peak, s);
        }
    for (double& s : w.samples) s /= peak;
    w.at(0, 0) = 1.0;

    if (model.low_pass_keep > 0)
        for (int v = 0; v < block_size; ++v)
            for (int u = 0; u < block_size; ++u)
                if (u >= model.low_pass_keep || v >= model.low_pass_keep) w.at(u, v) = 0.0;
    return w;
}

}  // namespace hv3d
