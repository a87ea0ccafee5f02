#pragma once

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstdio>
#include <fstream>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "hv3d/config_io.hpp"
#include "hv3d/hv3d.hpp"
#include "hv3d/manifest.hpp"
#include "hv3d/metrics2d.hpp"
#include "hv3d/yuv_io.hpp"

namespace hv3d {

inline const std::vector<std::string>& canonical_metric_order() {
    static const std::vector<std::string> order = {"psnr", "ssim", "msssim", "vifp", "hv3d"};
    return order;
}

struct BatchOptions {
    int jobs = 1;
    std::vector<std::string> metrics = canonical_metric_order();

    void validate() const {
        if (jobs < 1) throw std::invalid_argument("BatchOptions: jobs must be >= 1");
        for (const auto& m : metrics) {
            const auto& order = canonical_metric_order();
            if (std::find(order.begin(), order.end(), m) == order.end())
                throw std::invalid_argument("BatchOptions: unknown metric \"" + m + "\"");
        }
    }
};

struct BatchSummary {
    int result_rows = 0;
    int error_rows = 0;
};

inline const char* results_csv_header() {
    return "sequence_id,rate_point,metric,score,q_right,q_left,q_cyclopean,q_depth,hv3d_raw,"
           "hv3d_max,class_label,mos,note";
}

namespace detail {

inline std::string fmt_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline std::string csv_safe(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return s;
}

struct EntryOutput {
    std::vector<std::string> lines;
    int result_rows = 0;
    int error_rows = 0;
};

/// Everything accumulated for one metric over an entry's frames.
struct MetricAccum {
    double sum = 0.0;
    bool failed = false;
    std::string error;

    // hv3d component sums
    double q_right = 0.0, q_left = 0.0, q_cyclopean = 0.0, q_depth = 0.0;
    double raw = 0.0, max = 0.0;
    bool ref_depth_estimated = false;
};

inline EntryOutput evaluate_entry(const ManifestEntry& entry, const Hv3dConfig& config,
                                  const std::vector<std::string>& metrics) {
    EntryOutput out;
    const std::string prefix = entry.sequence_id + "," + entry.rate_point_label + ",";
    const std::string mos_cell = entry.mos ? fmt_double(*entry.mos) : "";

    std::vector<MetricAccum> acc(metrics.size());
    int frames_done = 0;
    try {
        for (int f = 0; f < entry.frame_count; ++f) {
            StereoFrame ref, dist;
            ref.left = read_yuv420(entry.ref_left_path, entry.width, entry.height, f);
            ref.right = read_yuv420(entry.ref_right_path, entry.width, entry.height, f);
            dist.left = read_yuv420(entry.dist_left_path, entry.width, entry.height, f);
            dist.right = read_yuv420(entry.dist_right_path, entry.width, entry.height, f);
            if (entry.ref_depth_path)
                ref.depth = read_depth(*entry.ref_depth_path, entry.width, entry.height, f);

            for (std::size_t m = 0; m < metrics.size(); ++m) {
                if (acc[m].failed) continue;
                try {
                    const std::string& name = metrics[m];
                    if (name == "psnr") {
                        acc[m].sum += 0.5 * (psnr(ref.left.y, dist.left.y) +
                                             psnr(ref.right.y, dist.right.y));
                    } else if (name == "ssim") {
                        acc[m].sum += 0.5 * (ssim(ref.left.y, dist.left.y, config.ssim).mean +
                                             ssim(ref.right.y, dist.right.y, config.ssim).mean);
                    } else if (name == "msssim") {
                        MsSsimParams p;
                        p.ssim = config.ssim;
                        acc[m].sum += 0.5 * (ms_ssim(ref.left.y, dist.left.y, p) +
                                             ms_ssim(ref.right.y, dist.right.y, p));
                    } else if (name == "vifp") {
                        acc[m].sum += 0.5 * (vifp(ref.left.y, dist.left.y, config.vif) +
                                             vifp(ref.right.y, dist.right.y, config.vif));
                    } else {  // hv3d
                        const ComponentScores s = hv3d_frame(ref, dist, config);
                        acc[m].sum += s.hv3d_normalized;
                        acc[m].q_right += s.q_right;
                        acc[m].q_left += s.q_left;
                        acc[m].q_cyclopean += s.q_cyclopean;
                        acc[m].q_depth += s.q_depth;
                        acc[m].raw += s.hv3d_raw;
                        acc[m].max += s.hv3d_max;
                        acc[m].ref_depth_estimated = s.ref_depth_estimated;
                    }
                } catch (const std::exception& e) {
                    acc[m].failed = true;
                    acc[m].error = e.what();
                }
            }
            ++frames_done;
        }
    } catch (const std::exception& e) {
        // entry-level failure (unreadable/truncated input): one error row
        out.lines.push_back(prefix + "error,,,,,,,," + csv_safe(entry.class_label) + "," +
                            mos_cell + "," + csv_safe(e.what()));
        out.error_rows = 1;
        return out;
    }

    const double n = static_cast<double>(frames_done);
    for (std::size_t m = 0; m < metrics.size(); ++m) {
        const std::string& name = metrics[m];
        if (acc[m].failed) {
            out.lines.push_back(prefix + name + ",,,,,,,," + csv_safe(entry.class_label) + "," +
                                mos_cell + "," + csv_safe(acc[m].error));
            ++out.error_rows;
            continue;
        }
        std::string components = ",,,,,,";
        std::string note;
        if (name == "hv3d") {
            components = fmt_double(acc[m].q_right / n) + "," + fmt_double(acc[m].q_left / n) +
                         "," + fmt_double(acc[m].q_cyclopean / n) + "," +
                         fmt_double(acc[m].q_depth / n) + "," + fmt_double(acc[m].raw / n) + "," +
                         fmt_double(acc[m].max / n) + ",";
            note = acc[m].ref_depth_estimated ? "ref_depth:estimated" : "ref_depth:provided";
        }
        out.lines.push_back(prefix + name + "," + fmt_double(acc[m].sum / n) + "," + components +
                            csv_safe(entry.class_label) + "," + mos_cell + "," + note);
        ++out.result_rows;
    }
    return out;
}

}  // namespace detail

/// Evaluates every manifest entry (concurrently up to `jobs`) and streams
/// rows to a results CSV. Rows appear in manifest order regardless of the
/// job count, and the file is flushed after every entry, so output is
/// byte-stable and a crash loses at most the entry in flight.
inline BatchSummary run_batch(const DatasetManifest& manifest, const Hv3dConfig& config,
                              const BatchOptions& options, const std::filesystem::path& out_csv) {
    options.validate();
    config.validate();

    // requested metrics in canonical row order
    std::vector<std::string> metrics;
    for (const auto& name : canonical_metric_order())
        if (std::find(options.metrics.begin(), options.metrics.end(), name) !=
            options.metrics.end())
            metrics.push_back(name);

    std::ofstream out(out_csv, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write results file: " + out_csv.string());
    out << results_csv_header() << "\n";
    out.flush();

    const std::size_t n = manifest.entries.size();
    std::vector<std::unique_ptr<detail::EntryOutput>> done(n);
    std::mutex mu;
    std::condition_variable cv;
    std::atomic<std::size_t> next{0};

    const int workers = static_cast<int>(
        std::min<std::size_t>(static_cast<std::size_t>(options.jobs), n));
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&]() {
            for (;;) {
                const std::size_t idx = next.fetch_add(1);
                if (idx >= n) return;
                auto result = std::make_unique<detail::EntryOutput>(
                    detail::evaluate_entry(manifest.entries[idx], config, metrics));
                std::lock_guard<std::mutex> lock(mu);
                done[idx] = std::move(result);
                cv.notify_all();
            }
        });

    BatchSummary summary;
    for (std::size_t i = 0; i < n; ++i) {
        std::unique_lock<std::mutex> lock(mu);
        cv.wait(lock, [&] { return done[i] != nullptr; });
        const detail::EntryOutput& r = *done[i];
        lock.unlock();
        for (const auto& line : r.lines) out << line << "\n";
        out.flush();
        summary.result_rows += r.result_rows;
        summary.error_rows += r.error_rows;
    }
    for (auto& t : pool) t.join();
    return summary;
}

}  // namespace hv3d
