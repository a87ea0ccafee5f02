#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "hv3d/plane.hpp"

namespace hv3d {

/// One dataset row: a reference stereo pair, a distorted stereo pair and the
/// optional reference depth stream, all at one rate point.
struct ManifestEntry {
    std::string sequence_id;
    std::string class_label;
    std::filesystem::path ref_left_path;
    std::filesystem::path ref_right_path;
    std::filesystem::path dist_left_path;
    std::filesystem::path dist_right_path;
    std::optional<std::filesystem::path> ref_depth_path;
    int width = 0;
    int height = 0;
    int frame_count = 0;
    std::string rate_point_label;
    std::optional<double> mos;

    /// Joins sequence and rate point into the id used by ratings/results files.
    std::string item_id() const { return sequence_id + "@" + rate_point_label; }
};

struct DatasetManifest {
    std::vector<ManifestEntry> entries;
};

namespace detail {

inline std::string json_string_field(const nlohmann::json& j, const char* key) {
    if (!j.contains(key))
        throw std::runtime_error(std::string("manifest entry missing required field \"") + key +
                                 "\"");
    if (!j.at(key).is_string())
        throw std::runtime_error(std::string("manifest field \"") + key + "\" must be a string");
    return j.at(key).get<std::string>();
}

inline int json_int_field(const nlohmann::json& j, const char* key) {
    if (!j.contains(key))
        throw std::runtime_error(std::string("manifest entry missing required field \"") + key +
                                 "\"");
    if (!j.at(key).is_number_integer())
        throw std::runtime_error(std::string("manifest field \"") + key + "\" must be an integer");
    return j.at(key).get<int>();
}

inline std::filesystem::path resolve_against(const std::filesystem::path& base,
                                             const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
}

}  // namespace detail

/// Parses a JSON dataset manifest and validates it. Relative paths are
/// resolved against the manifest's own directory.
inline DatasetManifest parse_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open manifest: " + path.string());
    nlohmann::json root;
    try {
        in >> root;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("malformed manifest JSON in " + path.string() + ": " + e.what());
    }
    if (!root.is_object() || !root.contains("entries") || !root.at("entries").is_array())
        throw std::runtime_error("manifest must be an object with an \"entries\" array");

    const auto base = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
    DatasetManifest m;
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& j : root.at("entries")) {
        ManifestEntry e;
        e.sequence_id = detail::json_string_field(j, "sequence_id");
        e.class_label = j.value("class_label", std::string());
        e.ref_left_path = detail::resolve_against(base, detail::json_string_field(j, "ref_left_path"));
        e.ref_right_path =
            detail::resolve_against(base, detail::json_string_field(j, "ref_right_path"));
        e.dist_left_path =
            detail::resolve_against(base, detail::json_string_field(j, "dist_left_path"));
        e.dist_right_path =
            detail::resolve_against(base, detail::json_string_field(j, "dist_right_path"));
        if (j.contains("ref_depth_path"))
            e.ref_depth_path =
                detail::resolve_against(base, detail::json_string_field(j, "ref_depth_path"));
        e.width = detail::json_int_field(j, "width");
        e.height = detail::json_int_field(j, "height");
        e.frame_count = detail::json_int_field(j, "frame_count");
        e.rate_point_label = detail::json_string_field(j, "rate_point_label");
        if (j.contains("mos")) {
            if (!j.at("mos").is_number())
                throw std::runtime_error("manifest field \"mos\" must be a number");
            e.mos = j.at("mos").get<double>();
        }

        if (e.width < 1 || e.height < 1)
            throw std::runtime_error("manifest entry " + e.sequence_id +
                                     ": nonpositive dimension " + std::to_string(e.width) + "x" +
                                     std::to_string(e.height));
        if (e.frame_count < 1)
            throw std::runtime_error("manifest entry " + e.sequence_id + ": frame_count must be >= 1");
        if (!seen.insert({e.sequence_id, e.rate_point_label}).second)
            throw std::runtime_error("duplicate manifest entry (" + e.sequence_id + ", " +
                                     e.rate_point_label + ")");
        m.entries.push_back(std::move(e));
    }
    if (m.entries.empty())
        throw std::runtime_error("empty manifest: " + path.string());
    return m;
}

inline void write_manifest(const DatasetManifest& m, const std::filesystem::path& path) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : m.entries) {
        nlohmann::json j;
        j["sequence_id"] = e.sequence_id;
        j["class_label"] = e.class_label;
        j["ref_left_path"] = e.ref_left_path.string();
        j["ref_right_path"] = e.ref_right_path.string();
        j["dist_left_path"] = e.dist_left_path.string();
        j["dist_right_path"] = e.dist_right_path.string();
        if (e.ref_depth_path) j["ref_depth_path"] = e.ref_depth_path->string();
        j["width"] = e.width;
        j["height"] = e.height;
        j["frame_count"] = e.frame_count;
        j["rate_point_label"] = e.rate_point_label;
        if (e.mos) j["mos"] = *e.mos;
        entries.push_back(std::move(j));
    }
    nlohmann::json root;
    root["entries"] = std::move(entries);
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write manifest: " + path.string());
    out << root.dump(2) << "\n";
}

inline bool operator==(const ManifestEntry& a, const ManifestEntry& b) {
    return a.sequence_id == b.sequence_id && a.class_label == b.class_label &&
           a.ref_left_path == b.ref_left_path && a.ref_right_path == b.ref_right_path &&
           a.dist_left_path == b.dist_left_path && a.dist_right_path == b.dist_right_path &&
           a.ref_depth_path == b.ref_depth_path && a.width == b.width && a.height == b.height &&
           a.frame_count == b.frame_count && a.rate_point_label == b.rate_point_label &&
           a.mos == b.mos;
}

inline bool operator==(const DatasetManifest& a, const DatasetManifest& b) {
    return a.entries == b.entries;
}

}  // namespace hv3d
