#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "hv3d/hv3d.hpp"

namespace hv3d {

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj, std::initializer_list<const char*> known,
                                const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : known)
            if (it.key() == k) {
                ok = true;
                break;
            }
        if (!ok)
            throw std::invalid_argument("config: unknown key \"" + it.key() + "\" in " + where);
    }
}

template <typename T>
void read_field(const nlohmann::json& obj, const char* key, T& out) {
    if (auto it = obj.find(key); it != obj.end()) out = it->get<T>();
}

}  // namespace detail

inline nlohmann::json config_to_json(const Hv3dConfig& c) {
    nlohmann::json j;
    j["weights"] = {{"w1", c.w1}, {"w2", c.w2}, {"w3", c.w3}, {"w4", c.w4}};
    j["beta"] = c.beta;
    j["block_size"] = c.block_size;
    j["csf"] = {{"peak_frequency", c.csf.peak_frequency},
                {"low_freq_attenuation", c.csf.low_freq_attenuation},
                {"decay_rate", c.csf.decay_rate},
                {"low_pass_keep", c.csf.low_pass_keep}};
    j["geometry"] = {{"viewing_distance_m", c.csf.geometry.viewing_distance_m},
                     {"display_width_m", c.csf.geometry.display_width_m},
                     {"horizontal_resolution", c.csf.geometry.horizontal_resolution}};
    j["ssim"] = {{"window_size", c.ssim.window_size},
                 {"window_sigma", c.ssim.window_sigma},
                 {"k1", c.ssim.k1},
                 {"k2", c.ssim.k2},
                 {"dynamic_range", c.ssim.dynamic_range}};
    j["vif"] = {{"num_scales", c.vif.num_scales}, {"noise_variance", c.vif.noise_variance}};
    j["disparity"] = {{"block_size", c.disparity.block_size},
                      {"search_range", c.disparity.search_range}};
    j["temporal_pooling"] = "mean";
    j["distorted_pair_uses_distorted_disparity"] = c.distorted_pair_uses_distorted_disparity;
    return j;
}

/// Parse a (possibly partial) config object; absent fields keep defaults,
/// unknown keys are errors.
inline Hv3dConfig config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
    detail::reject_unknown_keys(j,
                                {"weights", "beta", "block_size", "csf", "geometry", "ssim",
                                 "vif", "disparity", "temporal_pooling",
                                 "distorted_pair_uses_distorted_disparity"},
                                "top level");
    Hv3dConfig c;
    if (auto it = j.find("weights"); it != j.end()) {
        detail::reject_unknown_keys(*it, {"w1", "w2", "w3", "w4"}, "weights");
        detail::read_field(*it, "w1", c.w1);
        detail::read_field(*it, "w2", c.w2);
        detail::read_field(*it, "w3", c.w3);
        detail::read_field(*it, "w4", c.w4);
    }
    detail::read_field(j, "beta", c.beta);
    detail::read_field(j, "block_size", c.block_size);
    if (auto it = j.find("csf"); it != j.end()) {
        detail::reject_unknown_keys(
            *it, {"peak_frequency", "low_freq_attenuation", "decay_rate", "low_pass_keep"},
            "csf");
        detail::read_field(*it, "peak_frequency", c.csf.peak_frequency);
        detail::read_field(*it, "low_freq_attenuation", c.csf.low_freq_attenuation);
        detail::read_field(*it, "decay_rate", c.csf.decay_rate);
        detail::read_field(*it, "low_pass_keep", c.csf.low_pass_keep);
    }
    if (auto it = j.find("geometry"); it != j.end()) {
        detail::reject_unknown_keys(
            *it, {"viewing_distance_m", "display_width_m", "horizontal_resolution"}, "geometry");
        detail::read_field(*it, "viewing_distance_m", c.csf.geometry.viewing_distance_m);
        detail::read_field(*it, "display_width_m", c.csf.geometry.display_width_m);
        detail::read_field(*it, "horizontal_resolution", c.csf.geometry.horizontal_resolution);
    }
    if (auto it = j.find("ssim"); it != j.end()) {
        detail::reject_unknown_keys(
            *it, {"window_size", "window_sigma", "k1", "k2", "dynamic_range"}, "ssim");
        detail::read_field(*it, "window_size", c.ssim.window_size);
        detail::read_field(*it, "window_sigma", c.ssim.window_sigma);
        detail::read_field(*it, "k1", c.ssim.k1);
        detail::read_field(*it, "k2", c.ssim.k2);
        detail::read_field(*it, "dynamic_range", c.ssim.dynamic_range);
    }
    if (auto it = j.find("vif"); it != j.end()) {
        detail::reject_unknown_keys(*it, {"num_scales", "noise_variance"}, "vif");
        detail::read_field(*it, "num_scales", c.vif.num_scales);
        detail::read_field(*it, "noise_variance", c.vif.noise_variance);
    }
    if (auto it = j.find("disparity"); it != j.end()) {
        detail::reject_unknown_keys(*it, {"block_size", "search_range"}, "disparity");
        detail::read_field(*it, "block_size", c.disparity.block_size);
        detail::read_field(*it, "search_range", c.disparity.search_range);
    }
    if (auto it = j.find("temporal_pooling"); it != j.end()) {
        const auto mode = it->get<std::string>();
        if (mode != "mean")
            throw std::invalid_argument("config: unsupported temporal_pooling \"" + mode + "\"");
        c.temporal_pooling = TemporalPooling::Mean;
    }
    detail::read_field(j, "distorted_pair_uses_distorted_disparity",
                       c.distorted_pair_uses_distorted_disparity);
    c.validate();
    return c;
}

inline Hv3dConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("config: " + path + " is not valid JSON: " + e.what());
    }
    return config_from_json(j);
}

inline void save_config(const Hv3dConfig& c, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("config: cannot write " + path);
    out << config_to_json(c).dump(2) << "\n";
}

/// FNV-1a 64-bit over the canonical (sorted-key) JSON dump; identifies the
/// exact configuration a report was produced with.
inline std::string config_fingerprint(const Hv3dConfig& c) {
    const std::string dump = config_to_json(c).dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : dump) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

}  // namespace hv3d
