#include <catch2/catch_amalgamated.hpp>

#include <fstream>

#include "hv3d/manifest.hpp"
#include "support.hpp"

using namespace hv3d;
using Catch::Matchers::ContainsSubstring;
using testsupport::TempDir;

namespace {

void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p);
    REQUIRE(out.good());
    out << text;
}

const char* kTwoEntries = R"({
  "entries": [
    {
      "sequence_id": "alpha",
      "class_label": "animation",
      "ref_left_path": "refs/alpha_l.yuv",
      "ref_right_path": "refs/alpha_r.yuv",
      "dist_left_path": "dist/alpha_l.yuv",
      "dist_right_path": "dist/alpha_r.yuv",
      "ref_depth_path": "refs/alpha_d.raw",
      "width": 1920,
      "height": 1080,
      "frame_count": 120,
      "rate_point_label": "qp32",
      "mos": 7.25
    },
    {
      "sequence_id": "beta",
      "ref_left_path": "/abs/beta_l.yuv",
      "ref_right_path": "/abs/beta_r.yuv",
      "dist_left_path": "/abs/beta_dl.yuv",
      "dist_right_path": "/abs/beta_dr.yuv",
      "width": 640,
      "height": 360,
      "frame_count": 8,
      "rate_point_label": "qp40.5"
    }
  ]
})";

}  // namespace

TEST_CASE("manifest parses fields and resolves relative paths") {
    TempDir dir("manifest_parse");
    write_text(dir.path / "set.json", kTwoEntries);

    const auto m = parse_manifest(dir.path / "set.json");
    REQUIRE(m.entries.size() == 2);

    const auto& a = m.entries[0];
    CHECK(a.sequence_id == "alpha");
    CHECK(a.class_label == "animation");
    CHECK(a.ref_left_path == dir.path / "refs/alpha_l.yuv");
    CHECK(a.dist_right_path == dir.path / "dist/alpha_r.yuv");
    REQUIRE(a.ref_depth_path.has_value());
    CHECK(*a.ref_depth_path == dir.path / "refs/alpha_d.raw");
    CHECK(a.width == 1920);
    CHECK(a.height == 1080);
    CHECK(a.frame_count == 120);
    CHECK(a.rate_point_label == "qp32");
    REQUIRE(a.mos.has_value());
    CHECK(*a.mos == 7.25);
    CHECK(a.item_id() == "alpha@qp32");

    const auto& b = m.entries[1];
    CHECK(b.class_label.empty());
    CHECK_FALSE(b.ref_depth_path.has_value());
    CHECK_FALSE(b.mos.has_value());
    CHECK(b.ref_left_path == std::filesystem::path("/abs/beta_l.yuv"));  // absolute stays put
    CHECK(b.item_id() == "beta@qp40.5");
}

TEST_CASE("manifest round-trips through write_manifest") {
    TempDir dir("manifest_roundtrip");
    write_text(dir.path / "set.json", kTwoEntries);
    const auto m = parse_manifest(dir.path / "set.json");

    write_manifest(m, dir.path / "copy.json");
    const auto again = parse_manifest(dir.path / "copy.json");
    CHECK(again == m);
}

TEST_CASE("manifest rejects malformed input") {
    TempDir dir("manifest_bad");

    write_text(dir.path / "nojson.json", "{ not json");
    CHECK_THROWS_WITH(parse_manifest(dir.path / "nojson.json"),
                      ContainsSubstring("malformed manifest JSON"));

    write_text(dir.path / "noentries.json", R"({"items": []})");
    CHECK_THROWS_WITH(parse_manifest(dir.path / "noentries.json"),
                      ContainsSubstring("\"entries\""));

    write_text(dir.path / "empty.json", R"({"entries": []})");
    CHECK_THROWS_WITH(parse_manifest(dir.path / "empty.json"), ContainsSubstring("empty manifest"));

    CHECK_THROWS_WITH(parse_manifest(dir.path / "absent.json"), ContainsSubstring("cannot open"));
}

TEST_CASE("manifest rejects bad entries") {
    TempDir dir("manifest_entries");

    const std::string base = R"({
      "entries": [{
        "sequence_id": "x",
        "ref_left_path": "a", "ref_right_path": "b",
        "dist_left_path": "c", "dist_right_path": "d",
        "width": WIDTH, "height": 2, "frame_count": COUNT,
        "rate_point_label": "r1"
      }]
    })";

    auto with = [&](const std::string& w, const std::string& c) {
        std::string s = base;
        s.replace(s.find("WIDTH"), 5, w);
        s.replace(s.find("COUNT"), 5, c);
        return s;
    };

    write_text(dir.path / "w0.json", with("0", "1"));
    CHECK_THROWS_WITH(parse_manifest(dir.path / "w0.json"), ContainsSubstring("nonpositive"));

    write_text(dir.path / "f0.json", with("2", "0"));
    CHECK_THROWS_WITH(parse_manifest(dir.path / "f0.json"),
                      ContainsSubstring("frame_count must be >= 1"));

    write_text(dir.path / "missing.json", R"({"entries": [{"sequence_id": "x"}]})");
    CHECK_THROWS_WITH(parse_manifest(dir.path / "missing.json"),
                      ContainsSubstring("missing required field"));
}

TEST_CASE("duplicate (sequence, rate point) pairs are rejected") {
    TempDir dir("manifest_dup");
    const char* dup = R"({
      "entries": [
        {"sequence_id": "x", "ref_left_path": "a", "ref_right_path": "b",
         "dist_left_path": "c", "dist_right_path": "d",
         "width": 2, "height": 2, "frame_count": 1, "rate_point_label": "r1"},
        {"sequence_id": "x", "ref_left_path": "a2", "ref_right_path": "b2",
         "dist_left_path": "c2", "dist_right_path": "d2",
         "width": 2, "height": 2, "frame_count": 1, "rate_point_label": "r1"}
      ]
    })";
    write_text(dir.path / "dup.json", dup);
    CHECK_THROWS_WITH(parse_manifest(dir.path / "dup.json"),
                      ContainsSubstring("duplicate manifest entry"));
}

TEST_CASE("same sequence at different rate points is fine") {
    TempDir dir("manifest_rates");
    const char* two_rates = R"({
      "entries": [
        {"sequence_id": "x", "ref_left_path": "a", "ref_right_path": "b",
         "dist_left_path": "c", "dist_right_path": "d",
         "width": 2, "height": 2, "frame_count": 1, "rate_point_label": "r1"},
        {"sequence_id": "x", "ref_left_path": "a", "ref_right_path": "b",
         "dist_left_path": "c2", "dist_right_path": "d2",
         "width": 2, "height": 2, "frame_count": 1, "rate_point_label": "r2"}
      ]
    })";
    write_text(dir.path / "rates.json", two_rates);
    const auto m = parse_manifest(dir.path / "rates.json");
    REQUIRE(m.entries.size() == 2);
    CHECK(m.entries[0].item_id() == "x@r1");
    CHECK(m.entries[1].item_id() == "x@r2");
}
