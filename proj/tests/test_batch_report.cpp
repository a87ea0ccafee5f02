#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hv3d/batch.hpp"
#include "hv3d/depth.hpp"
#include "hv3d/report.hpp"
#include "hv3d/yuv_io.hpp"
#include "support.hpp"

using namespace hv3d;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
namespace fs = std::filesystem;

namespace {

/// Writes one manifest entry's media: a shifted stereo pair, optionally
/// noise-corrupted views and a reference depth file. sigma == 0 aliases the
/// distorted paths to the reference files.
ManifestEntry stereo_entry(const fs::path& dir, const std::string& seq, const std::string& rate,
                           int w, int h, std::uint32_t seed, double sigma,
                           std::optional<double> mos = std::nullopt, bool with_depth = false,
                           const std::string& class_label = "generic") {
    const StereoFrame ref = testsupport::shifted_stereo(w, h, seed, 4);
    ManifestEntry e;
    e.sequence_id = seq;
    e.rate_point_label = rate;
    e.class_label = class_label;
    e.width = w;
    e.height = h;
    e.frame_count = 1;
    e.mos = mos;
    e.ref_left_path = dir / (seq + "_" + rate + "_rl.yuv");
    e.ref_right_path = dir / (seq + "_" + rate + "_rr.yuv");
    write_yuv420(e.ref_left_path, {ref.left});
    write_yuv420(e.ref_right_path, {ref.right});
    if (sigma > 0.0) {
        Frame dl = ref.left, dr = ref.right;
        dl.y = testsupport::add_noise(ref.left.y, sigma, seed ^ 0x9e3779b9u);
        dr.y = testsupport::add_noise(ref.right.y, sigma, seed ^ 0x7f4a7c15u);
        e.dist_left_path = dir / (seq + "_" + rate + "_dl.yuv");
        e.dist_right_path = dir / (seq + "_" + rate + "_dr.yuv");
        write_yuv420(e.dist_left_path, {dl});
        write_yuv420(e.dist_right_path, {dr});
    } else {
        e.dist_left_path = e.ref_left_path;
        e.dist_right_path = e.ref_right_path;
    }
    if (with_depth) {
        DepthMap d;
        d.plane = testsupport::depth_scene(w, h, seed ^ 0x1234u);
        e.ref_depth_path = dir / (seq + "_" + rate + "_depth.raw");
        append_depth(*e.ref_depth_path, d);
    }
    return e;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    cells.push_back(cur);
    return cells;
}

/// Raw line of `file` whose metric column matches, skipping the header.
std::string find_line(const std::string& file, const std::string& seq, const std::string& metric) {
    std::istringstream in(file);
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        const auto cells = split_line(line);
        if (cells.size() >= 3 && cells[0] == seq && cells[2] == metric) return line;
    }
    FAIL("no row for " + seq + "/" + metric);
    return {};
}

}  // namespace

TEST_CASE("an identity entry reports every metric at its ceiling") {
    testsupport::TempDir dir("batch_identity");
    DatasetManifest manifest;
    manifest.entries.push_back(
        stereo_entry(dir.path, "ident", "qp0", 192, 192, 61, 0.0, 8.25, false, "cgi"));

    const fs::path out = dir.path / "results.csv";
    const BatchSummary summary = run_batch(manifest, Hv3dConfig{}, BatchOptions{}, out);
    CHECK(summary.result_rows == 5);
    CHECK(summary.error_rows == 0);

    const std::string file = slurp(out);
    std::istringstream in(file);
    std::string header;
    std::getline(in, header);
    CHECK(header == results_csv_header());

    const auto rows = parse_results_csv(out);
    REQUIRE(rows.size() == 5);
    // canonical order
    CHECK(rows[0].metric == "psnr");
    CHECK(rows[1].metric == "ssim");
    CHECK(rows[2].metric == "msssim");
    CHECK(rows[3].metric == "vifp");
    CHECK(rows[4].metric == "hv3d");

    CHECK(rows[0].score == "inf");
    CHECK_THAT(std::stod(rows[1].score), WithinAbs(1.0, 1e-12));
    CHECK_THAT(std::stod(rows[2].score), WithinAbs(1.0, 1e-12));
    CHECK_THAT(std::stod(rows[3].score), WithinAbs(1.0, 1e-12));
    CHECK_THAT(std::stod(rows[4].score), WithinAbs(1.0, 1e-6));
    CHECK(rows[4].note == "ref_depth:estimated");
    for (const auto& r : rows) {
        CHECK(r.sequence_id == "ident");
        CHECK(r.rate_point == "qp0");
        CHECK(r.class_label == "cgi");
        CHECK(r.item_id() == "ident@qp0");
    }

    // component and mos cells, straight from the raw line
    const auto hv3d_cells = split_line(find_line(file, "ident", "hv3d"));
    REQUIRE(hv3d_cells.size() == 13);
    CHECK(hv3d_cells[6] == "1");  // q_cyclopean is exact for identical views
    CHECK(hv3d_cells[11] == "8.25");
    const auto psnr_cells = split_line(find_line(file, "ident", "psnr"));
    REQUIRE(psnr_cells.size() == 13);
    for (int i = 4; i <= 9; ++i) CHECK(psnr_cells[i].empty());  // components are hv3d-only
    CHECK(psnr_cells[11] == "8.25");
    CHECK(psnr_cells[12].empty());
}

TEST_CASE("batch runs survive bad entries and stay byte-stable across job counts") {
    testsupport::TempDir dir("batch_errors");
    DatasetManifest manifest;
    manifest.entries.push_back(stereo_entry(dir.path, "good1", "q1", 192, 192, 11, 4.0, 7.0));
    manifest.entries.push_back(stereo_entry(dir.path, "bad", "q1", 192, 192, 12, 4.0, 5.0));
    manifest.entries.push_back(
        stereo_entry(dir.path, "good2", "q1", 192, 192, 13, 4.0, 6.0, true));
    fs::resize_file(manifest.entries[1].dist_left_path, 1000);  // less than one frame

    const fs::path out1 = dir.path / "jobs1.csv";
    BatchOptions o1;
    o1.jobs = 1;
    const BatchSummary s1 = run_batch(manifest, Hv3dConfig{}, o1, out1);
    CHECK(s1.result_rows == 10);  // two good entries x five metrics
    CHECK(s1.error_rows == 1);

    const std::string file = slurp(out1);
    const auto rows = parse_results_csv(out1);
    REQUIRE(rows.size() == 11);
    // manifest order: good1's five rows, then the error row, then good2's
    CHECK(rows[4].sequence_id == "good1");
    CHECK(rows[5].sequence_id == "bad");
    CHECK(rows[5].metric == "error");
    CHECK(rows[5].score.empty());
    CHECK_THAT(rows[5].note, ContainsSubstring("truncated file"));
    CHECK(rows[6].sequence_id == "good2");

    CHECK(find_line(file, "good2", "hv3d").find("ref_depth:provided") != std::string::npos);
    CHECK(find_line(file, "good1", "hv3d").find("ref_depth:estimated") != std::string::npos);

    // same manifest, four workers: byte-identical output
    const fs::path out4 = dir.path / "jobs4.csv";
    BatchOptions o4;
    o4.jobs = 4;
    const BatchSummary s4 = run_batch(manifest, Hv3dConfig{}, o4, out4);
    CHECK(s4.result_rows == s1.result_rows);
    CHECK(s4.error_rows == s1.error_rows);
    CHECK(slurp(out4) == file);
}

TEST_CASE("a metric that rejects the input fails alone") {
    testsupport::TempDir dir("batch_metric_error");
    DatasetManifest manifest;
    manifest.entries.push_back(
        stereo_entry(dir.path, "small", "q1", 100, 100, 21, 0.0, std::nullopt, false,
                     "real, outdoor"));  // comma exercises cell sanitization

    const fs::path out = dir.path / "results.csv";
    const BatchSummary summary = run_batch(manifest, Hv3dConfig{}, BatchOptions{}, out);
    CHECK(summary.result_rows == 4);
    CHECK(summary.error_rows == 1);  // 100 px cannot carry five dyadic scales

    const auto rows = parse_results_csv(out);
    REQUIRE(rows.size() == 5);
    for (const auto& r : rows) CHECK(r.class_label == "real; outdoor");
    CHECK(rows[0].score == "inf");
    CHECK(rows[2].metric == "msssim");
    CHECK(rows[2].score.empty());
    CHECK_THAT(rows[2].note, ContainsSubstring("176"));
    CHECK_THAT(std::stod(rows[3].score), WithinAbs(1.0, 1e-12));
    CHECK_THAT(std::stod(rows[4].score), WithinAbs(1.0, 1e-6));
}

TEST_CASE("metric selection is filtered into canonical order") {
    testsupport::TempDir dir("batch_filter");
    DatasetManifest manifest;
    manifest.entries.push_back(stereo_entry(dir.path, "one", "q1", 96, 96, 31, 2.0));

    BatchOptions options;
    options.metrics = {"vifp", "psnr", "psnr"};  // reversed, with a duplicate
    const fs::path out = dir.path / "results.csv";
    const BatchSummary summary = run_batch(manifest, Hv3dConfig{}, options, out);
    CHECK(summary.result_rows == 2);

    const auto rows = parse_results_csv(out);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].metric == "psnr");
    CHECK(rows[1].metric == "vifp");
}

TEST_CASE("batch options and output paths are validated") {
    testsupport::TempDir dir("batch_validate");
    DatasetManifest manifest;
    manifest.entries.push_back(stereo_entry(dir.path, "one", "q1", 96, 96, 41, 0.0));

    BatchOptions bad_jobs;
    bad_jobs.jobs = 0;
    CHECK_THROWS_WITH(run_batch(manifest, Hv3dConfig{}, bad_jobs, dir.path / "r.csv"),
                      ContainsSubstring("jobs must be >= 1"));
    BatchOptions bad_metric;
    bad_metric.metrics = {"psnr", "ssim2"};
    CHECK_THROWS_WITH(run_batch(manifest, Hv3dConfig{}, bad_metric, dir.path / "r.csv"),
                      ContainsSubstring("unknown metric \"ssim2\""));
    CHECK_THROWS_WITH(
        run_batch(manifest, Hv3dConfig{}, BatchOptions{}, dir.path / "missing" / "r.csv"),
        ContainsSubstring("cannot write results file"));
}

TEST_CASE("correlation_report recovers clean logistic relations") {
    MetricSeries up, down;
    up.metric = "m_up";
    down.metric = "m_down";
    for (int i = 0; i < 10; ++i) {
        const double x = i / 9.0;
        up.points.push_back({"i" + std::to_string(i), x, logistic_eval(1.0, 9.0, 0.5, 0.15, x)});
        down.points.push_back({"i" + std::to_string(i), x, logistic_eval(9.0, 1.0, 0.5, 0.15, x)});
    }

    const CorrelationReport report = correlation_report({up, down}, "toy", "default");
    REQUIRE(report.rows.size() == 2);
    CHECK(report.dataset_id == "toy");
    CHECK(report.config_fingerprint == "default");

    CHECK_THAT(report.rows[0].scc, WithinAbs(1.0, 1e-12));
    CHECK_THAT(report.rows[0].pcc, WithinAbs(1.0, 1e-6));
    CHECK(report.rows[0].n_points == 10);
    CHECK(report.rows[0].n_excluded == 0);

    // scc sees the reversal; pcc is computed after the fit flips orientation
    CHECK_THAT(report.rows[1].scc, WithinAbs(-1.0, 1e-12));
    CHECK_THAT(report.rows[1].pcc, WithinAbs(1.0, 1e-6));
}

TEST_CASE("non-finite scores are dropped and itemized") {
    MetricSeries s;
    s.metric = "psnr";
    s.excluded_items = {"prior@x"};
    for (int i = 0; i < 5; ++i) {
        const double x = 30.0 + 2.0 * i;
        s.points.push_back({"i" + std::to_string(i), x, 2.0 + 0.7 * i});
    }
    s.points.push_back({"lossless1", std::numeric_limits<double>::infinity(), 9.0});
    s.points.push_back({"lossless2", std::numeric_limits<double>::infinity(), 9.5});

    const MetricSeries finite = finite_series(s);
    CHECK(finite.points.size() == 5);
    REQUIRE(finite.excluded_items.size() == 3);
    CHECK(finite.excluded_items[0] == "prior@x");
    CHECK(finite.excluded_items[1] == "lossless1");
    CHECK(finite.excluded_items[2] == "lossless2");

    const CorrelationReport report = correlation_report({s}, "d", "c");
    CHECK(report.rows[0].n_points == 5);
    CHECK(report.rows[0].n_excluded == 3);
    CHECK_THAT(report.rows[0].scc, WithinAbs(1.0, 1e-12));

    // dropping below five finite points is an error that names the metric
    MetricSeries thin = s;
    thin.points.erase(thin.points.begin());
    CHECK_THROWS_WITH(correlation_report({thin}, "d", "c"),
                      ContainsSubstring("psnr has only 4 finite matched points"));
}

TEST_CASE("report, points, and scatter files are byte-stable") {
    testsupport::TempDir dir("report_files");
    MetricSeries s;
    s.metric = "hv3d";
    testsupport::Gauss g(99);
    for (int i = 0; i < 12; ++i) {
        const double x = 0.3 + 0.05 * i;
        s.points.push_back(
            {"p" + std::to_string(i), x, logistic_eval(2.0, 9.0, 0.6, 0.1, x) + 0.1 * g.next()});
    }
    const CorrelationReport report = correlation_report({s}, "toy", "default");
    const LogisticFit& fit = report.rows[0].fit;

    write_report_csv(report, dir.path / "report1.csv");
    write_report_csv(report, dir.path / "report2.csv");
    const std::string rep = slurp(dir.path / "report1.csv");
    CHECK(rep == slurp(dir.path / "report2.csv"));
    std::istringstream rin(rep);
    std::string line;
    std::getline(rin, line);
    CHECK_THAT(line, ContainsSubstring("# dataset=toy config=default"));
    CHECK_THAT(line, ContainsSubstring("scc=spearman(raw_scores,mos)"));
    std::getline(rin, line);
    CHECK(line ==
          "metric,scc,pcc,fit_a,fit_b,fit_c,fit_d,fit_rmse,fit_converged,fit_degenerate,"
          "n_points,n_excluded");
    std::getline(rin, line);
    CHECK(split_line(line).size() == 12);
    CHECK(split_line(line)[0] == "hv3d");

    write_points_csv(s, fit, dir.path / "points1.csv");
    write_points_csv(s, fit, dir.path / "points2.csv");
    const std::string pts = slurp(dir.path / "points1.csv");
    CHECK(pts == slurp(dir.path / "points2.csv"));
    std::istringstream pin(pts);
    std::getline(pin, line);
    CHECK(line == "item_id,score,mos,fitted");
    int n_lines = 0;
    while (std::getline(pin, line)) {
        const auto cells = split_line(line);
        REQUIRE(cells.size() == 4);
        CHECK_THAT(std::stod(cells[3]),
                   WithinAbs(logistic_eval(fit, std::stod(cells[1])), 1e-8));
        ++n_lines;
    }
    CHECK(n_lines == 12);

    write_scatter_svg(s, fit, dir.path / "scatter1.svg");
    write_scatter_svg(s, fit, dir.path / "scatter2.svg");
    const std::string svg = slurp(dir.path / "scatter1.svg");
    CHECK(svg == slurp(dir.path / "scatter2.svg"));
    CHECK(svg.rfind("<svg xmlns", 0) == 0);
    CHECK_THAT(svg, ContainsSubstring("hv3d vs MOS"));
    CHECK_THAT(svg, ContainsSubstring("<polyline"));
    std::size_t circles = 0;
    for (std::size_t pos = svg.find("<circle"); pos != std::string::npos;
         pos = svg.find("<circle", pos + 1))
        ++circles;
    CHECK(circles == 12);

    MetricSeries empty;
    empty.metric = "vifp";
    CHECK_THROWS_WITH(write_scatter_svg(empty, fit, dir.path / "none.svg"),
                      ContainsSubstring("no points for metric vifp"));
}

TEST_CASE("results rows parse back with textual scores preserved") {
    testsupport::TempDir dir("results_roundtrip");
    const fs::path p = dir.path / "results.csv";
    {
        std::ofstream out(p);
        out << results_csv_header() << "\n";
        out << "a,q1,psnr,inf,,,,,,,cgi,8,\n";
        out << "a,q1,hv3d,0.93,0.27,0.27,0.24,0.15,0.93,1,cgi,8,ref_depth:provided\n";
        out << "b,q2,error,,,,,,,,cgi,,truncated file: x\n";
    }
    const auto rows = parse_results_csv(p);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].score == "inf");
    CHECK(std::isinf(std::stod(rows[0].score)));
    CHECK(rows[0].item_id() == "a@q1");
    CHECK(rows[1].score == "0.93");
    CHECK(rows[1].note == "ref_depth:provided");
    CHECK(rows[2].metric == "error");
    CHECK(rows[2].score.empty());

    {
        std::ofstream out(p, std::ios::app);
        out << "c,q1,psnr,40\n";
    }
    CHECK_THROWS_WITH(parse_results_csv(p), ContainsSubstring("expected 13"));
    CHECK_THROWS_WITH(parse_results_csv(dir.path / "absent.csv"),
                      ContainsSubstring("cannot open results file"));
}

TEST_CASE("mos records round-trip through their CSV") {
    testsupport::TempDir dir("mos_roundtrip");
    const fs::path p = dir.path / "mos.csv";
    const std::vector<MosRecord> records = {{"a@q1", 7.25, 17}, {"b@q2", 3.0, 18}};
    write_mos_csv(records, p);

    const auto back = parse_mos_csv(p);
    REQUIRE(back.size() == 2);
    CHECK(back[0].item_id == "a@q1");
    CHECK(back[0].mos == 7.25);
    CHECK(back[0].n_subjects_retained == 17);
    CHECK(back[1].item_id == "b@q2");
    CHECK(back[1].mos == 3.0);
    CHECK(back[1].n_subjects_retained == 18);

    {
        std::ofstream out(p, std::ios::app);
        out << "c@q1,not_a_number,4\n";
    }
    CHECK_THROWS_WITH(parse_mos_csv(p), ContainsSubstring("bad number"));
    CHECK_THROWS_WITH(parse_mos_csv(dir.path / "absent.csv"),
                      ContainsSubstring("cannot open mos file"));
}

TEST_CASE("build_series joins scores with mos by item id") {
    std::vector<ResultsRow> rows;
    rows.push_back({"a", "q1", "psnr", "41.5", "cgi", ""});
    rows.push_back({"a", "q1", "hv3d", "0.91", "cgi", "ref_depth:estimated"});
    rows.push_back({"b", "q1", "psnr", "38.2", "cgi", ""});
    rows.push_back({"b", "q1", "error", "", "cgi", "boom"});  // skipped: empty score
    rows.push_back({"c", "q1", "psnr", "35.0", "cgi", ""});   // skipped: no mos record

    const std::vector<MosRecord> mos = {{"a@q1", 8.0, 17}, {"b@q1", 6.0, 17}};
    const auto series = build_series(rows, mos, canonical_metric_order());

    REQUIRE(series.size() == 2);  // vifp/ssim/msssim have no rows at all
    CHECK(series[0].metric == "psnr");
    REQUIRE(series[0].points.size() == 2);
    CHECK(series[0].points[0].item_id == "a@q1");
    CHECK(series[0].points[0].score == 41.5);
    CHECK(series[0].points[0].mos == 8.0);
    CHECK(series[0].points[1].item_id == "b@q1");
    CHECK(series[1].metric == "hv3d");
    REQUIRE(series[1].points.size() == 1);
    CHECK(series[1].points[0].score == 0.91);
}

TEST_CASE("batch output feeds the correlation pipeline end to end") {
    testsupport::TempDir dir("batch_pipeline");
    DatasetManifest manifest;
    const double sigmas[6] = {2.0, 4.0, 8.0, 16.0, 24.0, 32.0};
    std::vector<MosRecord> mos;
    for (int i = 0; i < 6; ++i) {
        const std::string rate = "r" + std::to_string(i);
        manifest.entries.push_back(stereo_entry(dir.path, "mono", rate, 96, 96, 71, sigmas[i]));
        mos.push_back({"mono@" + rate, 9.0 - i, 17});
    }

    BatchOptions options;
    options.metrics = {"psnr"};
    const fs::path out = dir.path / "results.csv";
    run_batch(manifest, Hv3dConfig{}, options, out);

    const auto series = build_series(parse_results_csv(out), mos, canonical_metric_order());
    REQUIRE(series.size() == 1);
    REQUIRE(series[0].points.size() == 6);

    const CorrelationReport report = correlation_report(series, "pipeline", "default");
    REQUIRE(report.rows.size() == 1);
    CHECK(report.rows[0].metric == "psnr");
    CHECK_THAT(report.rows[0].scc, WithinAbs(1.0, 1e-12));  // heavier noise, lower mos
    CHECK(report.rows[0].pcc > 0.95);
    CHECK(report.rows[0].n_excluded == 0);
}
