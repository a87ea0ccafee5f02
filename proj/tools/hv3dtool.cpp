// Command-line front end: single-pair metric computation, manifest batch
// runs, MOS screening, and correlation reports.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hv3d/batch.hpp"
#include "hv3d/config_io.hpp"
#include "hv3d/hv3d.hpp"
#include "hv3d/manifest.hpp"
#include "hv3d/metrics2d.hpp"
#include "hv3d/report.hpp"
#include "hv3d/screening.hpp"
#include "hv3d/yuv_io.hpp"

namespace {

struct ConfigCli {
    std::string config_path;
    std::optional<double> w1, w2, w3, w4, beta;
    std::optional<int> block_size;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON config file");
        cmd->add_option("--w1", w1, "override: per-view luma weight");
        cmd->add_option("--w2", w2, "override: cyclopean term weight");
        cmd->add_option("--w3", w3, "override: depth term weight");
        cmd->add_option("--w4", w4, "override: per-view chroma weight");
        cmd->add_option("--beta", beta, "override: depth-fidelity exponent");
        cmd->add_option("--block-size", block_size, "override: block size");
    }

    hv3d::Hv3dConfig resolve() const {
        hv3d::Hv3dConfig c =
            config_path.empty() ? hv3d::Hv3dConfig{} : hv3d::load_config(config_path);
        if (w1) c.w1 = *w1;
        if (w2) c.w2 = *w2;
        if (w3) c.w3 = *w3;
        if (w4) c.w4 = *w4;
        if (beta) c.beta = *beta;
        if (block_size) c.block_size = *block_size;
        c.validate();
        return c;
    }
};

int frames_in_file(const std::filesystem::path& path, int width, int height) {
    const auto size = std::filesystem::file_size(path);
    return static_cast<int>(size / hv3d::yuv420_frame_bytes(width, height));
}

std::string fmt_score(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

int run_compute(const std::string& ref_left, const std::string& ref_right,
                const std::string& dist_left, const std::string& dist_right,
                const std::string& ref_depth, const std::string& dist_depth, int width,
                int height, int frames, const std::string& metric, const ConfigCli& cfg_cli) {
    const hv3d::Hv3dConfig config = cfg_cli.resolve();

    int n = frames;
    if (n <= 0) {
        n = frames_in_file(ref_left, width, height);
        if (n < 1) throw std::runtime_error("no complete frames in " + ref_left);
    }

    double sum = 0.0;
    double comp_right = 0, comp_left = 0, comp_cyc = 0, comp_depth = 0;
    for (int f = 0; f < n; ++f) {
        hv3d::StereoFrame ref, dist;
        ref.left = hv3d::read_yuv420(ref_left, width, height, f);
        ref.right = hv3d::read_yuv420(ref_right, width, height, f);
        dist.left = hv3d::read_yuv420(dist_left, width, height, f);
        dist.right = hv3d::read_yuv420(dist_right, width, height, f);
        if (!ref_depth.empty()) ref.depth = hv3d::read_depth(ref_depth, width, height, f);
        if (!dist_depth.empty()) dist.depth = hv3d::read_depth(dist_depth, width, height, f);

        if (metric == "psnr") {
            sum += 0.5 * (hv3d::psnr(ref.left.y, dist.left.y) +
                          hv3d::psnr(ref.right.y, dist.right.y));
        } else if (metric == "ssim") {
            sum += 0.5 * (hv3d::ssim(ref.left.y, dist.left.y, config.ssim).mean +
                          hv3d::ssim(ref.right.y, dist.right.y, config.ssim).mean);
        } else if (metric == "msssim") {
            hv3d::MsSsimParams p;
            p.ssim = config.ssim;
            sum += 0.5 * (hv3d::ms_ssim(ref.left.y, dist.left.y, p) +
                          hv3d::ms_ssim(ref.right.y, dist.right.y, p));
        } else if (metric == "vifp") {
            sum += 0.5 * (hv3d::vifp(ref.left.y, dist.left.y, config.vif) +
                          hv3d::vifp(ref.right.y, dist.right.y, config.vif));
        } else {  // hv3d
            const hv3d::ComponentScores s = hv3d::hv3d_frame(ref, dist, config);
            sum += s.hv3d_normalized;
            comp_right += s.q_right;
            comp_left += s.q_left;
            comp_cyc += s.q_cyclopean;
            comp_depth += s.q_depth;
        }
    }

    std::cout << metric << " " << fmt_score(sum / n) << "\n";
    if (metric == "hv3d") {
        std::cout << "q_right " << fmt_score(comp_right / n) << "\n"
                  << "q_left " << fmt_score(comp_left / n) << "\n"
                  << "q_cyclopean " << fmt_score(comp_cyc / n) << "\n"
                  << "q_depth " << fmt_score(comp_depth / n) << "\n";
    }
    return 0;
}

int run_mos(const std::string& ratings_path, const std::string& out_path,
            const std::string& screening_path) {
    const hv3d::RatingsTable ratings = hv3d::parse_ratings(ratings_path);
    const hv3d::ScreeningResult screening = hv3d::screen_outliers(ratings);
    const auto records = hv3d::compute_mos(ratings, screening.retained);
    hv3d::write_mos_csv(records, out_path);

    std::ostream* rep = &std::cout;
    std::ofstream rep_file;
    if (!screening_path.empty()) {
        rep_file.open(screening_path, std::ios::trunc);
        if (!rep_file) throw std::runtime_error("cannot write " + screening_path);
        rep = &rep_file;
    }
    *rep << "subjects " << ratings.subjects.size() << "\n"
         << "retained " << screening.retained.size() << "\n"
         << "rejected " << screening.rejected.size() << "\n";
    for (const auto& r : screening.rejected)
        *rep << "reject " << r.id << " P=" << r.p_count << " Q=" << r.q_count
             << " outlier_ratio=" << fmt_score(r.outlier_ratio)
             << " asymmetry=" << fmt_score(r.asymmetry_ratio) << "\n";
    return 0;
}

int run_correlate(const std::string& results_path, const std::string& mos_path,
                  const std::string& out_dir, const std::string& group_by,
                  const ConfigCli& cfg_cli) {
    const hv3d::Hv3dConfig config = cfg_cli.resolve();
    const auto rows = hv3d::parse_results_csv(results_path);
    const auto mos = hv3d::parse_mos_csv(mos_path);
    std::filesystem::create_directories(out_dir);

    const auto emit = [&](const std::vector<hv3d::ResultsRow>& subset,
                          const std::string& suffix, const std::string& dataset_id) {
        const auto series =
            hv3d::build_series(subset, mos, hv3d::canonical_metric_order());
        if (series.empty())
            throw std::runtime_error("no metric rows matched the MOS items" +
                                     (suffix.empty() ? "" : " for group " + dataset_id));
        const auto report =
            hv3d::correlation_report(series, dataset_id, hv3d::config_fingerprint(config));
        const std::filesystem::path dir(out_dir);
        hv3d::write_report_csv(report, dir / ("report" + suffix + ".csv"));
        for (std::size_t i = 0; i < series.size(); ++i) {
            const auto finite = hv3d::finite_series(series[i]);
            hv3d::write_scatter_svg(finite, report.rows[i].fit,
                                    dir / (series[i].metric + suffix + "_scatter.svg"));
            hv3d::write_points_csv(finite, report.rows[i].fit,
                                   dir / (series[i].metric + suffix + "_points.csv"));
        }
    };

    if (group_by.empty()) {
        emit(rows, "", results_path);
        return 0;
    }
    if (group_by != "class")
        throw std::invalid_argument("--group-by: only \"class\" is supported");
    std::set<std::string> classes;
    for (const auto& r : rows) classes.insert(r.class_label);
    for (const auto& cls : classes) {
        std::vector<hv3d::ResultsRow> subset;
        for (const auto& r : rows)
            if (r.class_label == cls) subset.push_back(r);
        const std::string label = cls.empty() ? "unlabeled" : cls;
        emit(subset, "_" + label, label);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Full-reference stereoscopic video quality toolkit"};
    app.require_subcommand(1);

    // compute
    auto* compute = app.add_subcommand("compute", "score one stereo pair");
    std::string c_ref_left, c_ref_right, c_dist_left, c_dist_right, c_ref_depth, c_dist_depth;
    int c_width = 0, c_height = 0, c_frames = 0;
    std::string c_metric = "hv3d";
    ConfigCli c_cfg;
    compute->add_option("--ref-left", c_ref_left)->required();
    compute->add_option("--ref-right", c_ref_right)->required();
    compute->add_option("--dist-left", c_dist_left)->required();
    compute->add_option("--dist-right", c_dist_right)->required();
    compute->add_option("--ref-depth", c_ref_depth, "reference depth stream");
    compute->add_option("--dist-depth", c_dist_depth, "distorted depth stream");
    compute->add_option("--width", c_width)->required();
    compute->add_option("--height", c_height)->required();
    compute->add_option("--frames", c_frames, "frames to score (default: all in ref-left)");
    compute->add_option("--metric", c_metric)
        ->check(CLI::IsMember({"psnr", "ssim", "msssim", "vifp", "hv3d"}));
    c_cfg.attach(compute);

    // batch
    auto* batch = app.add_subcommand("batch", "score every manifest entry");
    std::string b_manifest, b_out;
    int b_jobs = 1;
    std::vector<std::string> b_metrics;
    ConfigCli b_cfg;
    batch->add_option("--manifest", b_manifest)->required();
    batch->add_option("--out", b_out)->required();
    batch->add_option("--jobs", b_jobs, "concurrent entries")->check(CLI::PositiveNumber);
    batch->add_option("--metrics", b_metrics,
                      "subset of psnr,ssim,msssim,vifp,hv3d (default: all)")
        ->delimiter(',');
    b_cfg.attach(batch);

    // mos
    auto* mos = app.add_subcommand("mos", "screen subjects and compute MOS");
    std::string m_ratings, m_out, m_screening;
    mos->add_option("--ratings", m_ratings)->required();
    mos->add_option("--out", m_out)->required();
    mos->add_option("--screening-report", m_screening, "write screening details here");

    // correlate
    auto* correlate = app.add_subcommand("correlate", "correlate results with MOS");
    std::string r_results, r_mos, r_out_dir, r_group_by;
    ConfigCli r_cfg;
    correlate->add_option("--results", r_results)->required();
    correlate->add_option("--mos", r_mos)->required();
    correlate->add_option("--out-dir", r_out_dir)->required();
    correlate->add_option("--group-by", r_group_by)->check(CLI::IsMember({"class"}));
    r_cfg.attach(correlate);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);  // prints help/errors
        return e.get_exit_code() == 0 ? 0 : 2;
    }

    try {
        if (compute->parsed())
            return run_compute(c_ref_left, c_ref_right, c_dist_left, c_dist_right, c_ref_depth,
                               c_dist_depth, c_width, c_height, c_frames, c_metric, c_cfg);
        if (batch->parsed()) {
            hv3d::BatchOptions options;
            options.jobs = b_jobs;
            if (!b_metrics.empty()) options.metrics = b_metrics;
            options.validate();
            const auto manifest = hv3d::parse_manifest(b_manifest);
            const auto summary = hv3d::run_batch(manifest, b_cfg.resolve(), options, b_out);
            std::cout << "rows " << summary.result_rows << "\nerrors " << summary.error_rows
                      << "\n";
            return summary.error_rows > 0 ? 1 : 0;
        }
        if (mos->parsed()) return run_mos(m_ratings, m_out, m_screening);
        if (correlate->parsed())
            return run_correlate(r_results, r_mos, r_out_dir, r_group_by, r_cfg);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
