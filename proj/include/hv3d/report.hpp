#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hv3d/logistic.hpp"
#include "hv3d/ratings.hpp"
#include "hv3d/screening.hpp"
#include "hv3d/stats.hpp"

namespace hv3d {

struct MetricPoint {
    std::string item_id;
    double score = 0.0;
    double mos = 0.0;
};

struct MetricSeries {
    std::string metric;
    std::vector<MetricPoint> points;
    std::vector<std::string> excluded_items;  ///< non-finite scores dropped before fitting
};

struct ReportRow {
    std::string metric;
    double scc = 0.0;  ///< Spearman on raw scores vs MOS
    double pcc = 0.0;  ///< Pearson on logistic-fitted scores vs MOS
    LogisticFit fit;
    int n_points = 0;
    int n_excluded = 0;
};

struct CorrelationReport {
    std::vector<ReportRow> rows;
    std::string dataset_id;
    std::string config_fingerprint;
};

namespace detail {

inline std::string fmt_report_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline std::string fmt_fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

}  // namespace detail

/// Drops non-finite scores from a series, recording the excluded item ids.
inline MetricSeries finite_series(const MetricSeries& in) {
    MetricSeries out;
    out.metric = in.metric;
    out.excluded_items = in.excluded_items;
    for (const auto& p : in.points) {
        if (std::isfinite(p.score))
            out.points.push_back(p);
        else
            out.excluded_items.push_back(p.item_id);
    }
    return out;
}

/// SCC on raw scores, logistic fit, PCC on fitted scores. Each series needs
/// at least 5 finite matched points.
inline CorrelationReport correlation_report(const std::vector<MetricSeries>& series,
                                            const std::string& dataset_id,
                                            const std::string& config_fingerprint) {
    CorrelationReport report;
    report.dataset_id = dataset_id;
    report.config_fingerprint = config_fingerprint;
    for (const auto& raw : series) {
        const MetricSeries s = finite_series(raw);
        if (s.points.size() < 5)
            throw std::invalid_argument("correlation_report: metric " + s.metric + " has only " +
                                        std::to_string(s.points.size()) +
                                        " finite matched points, need at least 5");
        std::vector<double> scores, mos;
        scores.reserve(s.points.size());
        mos.reserve(s.points.size());
        for (const auto& p : s.points) {
            scores.push_back(p.score);
            mos.push_back(p.mos);
        }
        ReportRow row;
        row.metric = s.metric;
        row.scc = spearman(scores, mos);
        row.fit = logistic_fit(scores, mos);
        std::vector<double> fitted;
        fitted.reserve(scores.size());
        for (double x : scores) fitted.push_back(logistic_eval(row.fit, x));
        row.pcc = pearson(fitted, mos);
        row.n_points = static_cast<int>(s.points.size());
        row.n_excluded = static_cast<int>(s.excluded_items.size());
        report.rows.push_back(row);
    }
    return report;
}

/// Report table: one row per metric, deterministic formatting. PCC is
/// computed on logistic-fitted scores, SCC on raw scores (stated in the
/// header comment).
inline void write_report_csv(const CorrelationReport& report, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write report: " + path.string());
    out << "# dataset=" << report.dataset_id << " config=" << report.config_fingerprint
        << " pcc=pearson(logistic_fitted_scores,mos) scc=spearman(raw_scores,mos)\n";
    out << "metric,scc,pcc,fit_a,fit_b,fit_c,fit_d,fit_rmse,fit_converged,fit_degenerate,"
           "n_points,n_excluded\n";
    for (const auto& r : report.rows) {
        out << r.metric << "," << detail::fmt_report_double(r.scc) << ","
            << detail::fmt_report_double(r.pcc) << "," << detail::fmt_report_double(r.fit.a)
            << "," << detail::fmt_report_double(r.fit.b) << ","
            << detail::fmt_report_double(r.fit.c) << "," << detail::fmt_report_double(r.fit.d)
            << "," << detail::fmt_report_double(r.fit.rmse) << ","
            << (r.fit.converged ? 1 : 0) << "," << (r.fit.degenerate ? 1 : 0) << ","
            << r.n_points << "," << r.n_excluded << "\n";
    }
}

/// The plotted points with their fitted values, one CSV per metric.
inline void write_points_csv(const MetricSeries& series, const LogisticFit& fit,
                             const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write points file: " + path.string());
    out << "item_id,score,mos,fitted\n";
    for (const auto& p : series.points)
        out << p.item_id << "," << detail::fmt_report_double(p.score) << ","
            << detail::fmt_report_double(p.mos) << ","
            << detail::fmt_report_double(logistic_eval(fit, p.score)) << "\n";
}

/// Self-contained SVG scatter of score vs MOS with the fitted logistic
/// curve. Pure text output, byte-deterministic for fixed inputs.
inline void write_scatter_svg(const MetricSeries& series, const LogisticFit& fit,
                              const std::filesystem::path& path) {
    if (series.points.empty())
        throw std::invalid_argument("write_scatter_svg: no points for metric " + series.metric);

    const double width = 640.0, height = 480.0;
    const double ml = 64.0, mr = 24.0, mt = 40.0, mb = 56.0;
    const double pw = width - ml - mr, ph = height - mt - mb;

    double x_min = series.points[0].score, x_max = x_min;
    double y_min = series.points[0].mos, y_max = y_min;
    for (const auto& p : series.points) {
        x_min = std::min(x_min, p.score);
        x_max = std::max(x_max, p.score);
        y_min = std::min(y_min, p.mos);
        y_max = std::max(y_max, p.mos);
    }
    if (x_max - x_min == 0.0) {
        x_min -= 0.5;
        x_max += 0.5;
    }
    if (y_max - y_min == 0.0) {
        y_min -= 0.5;
        y_max += 0.5;
    }
    const double x_pad = 0.05 * (x_max - x_min);
    const double y_pad = 0.05 * (y_max - y_min);
    x_min -= x_pad;
    x_max += x_pad;
    y_min -= y_pad;
    y_max += y_pad;

    const auto sx = [&](double x) { return ml + (x - x_min) / (x_max - x_min) * pw; };
    const auto sy = [&](double y) { return mt + ph - (y - y_min) / (y_max - y_min) * ph; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
           "viewBox=\"0 0 640 480\">\n";
    svg << "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
    svg << "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"16\">"
        << series.metric << " vs MOS</text>\n";

    // axes
    svg << "<line x1=\"" << detail::fmt_fixed(ml, 2) << "\" y1=\"" << detail::fmt_fixed(mt, 2)
        << "\" x2=\"" << detail::fmt_fixed(ml, 2) << "\" y2=\""
        << detail::fmt_fixed(mt + ph, 2) << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << detail::fmt_fixed(ml, 2) << "\" y1=\""
        << detail::fmt_fixed(mt + ph, 2) << "\" x2=\"" << detail::fmt_fixed(ml + pw, 2)
        << "\" y2=\"" << detail::fmt_fixed(mt + ph, 2) << "\" stroke=\"black\"/>\n";

    for (int t = 0; t <= 4; ++t) {
        const double fx = x_min + (x_max - x_min) * t / 4.0;
        const double fy = y_min + (y_max - y_min) * t / 4.0;
        svg << "<line x1=\"" << detail::fmt_fixed(sx(fx), 2) << "\" y1=\""
            << detail::fmt_fixed(mt + ph, 2) << "\" x2=\"" << detail::fmt_fixed(sx(fx), 2)
            << "\" y2=\"" << detail::fmt_fixed(mt + ph + 5, 2) << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << detail::fmt_fixed(sx(fx), 2) << "\" y=\""
            << detail::fmt_fixed(mt + ph + 20, 2)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
            << detail::fmt_fixed(fx, 3) << "</text>\n";
        svg << "<line x1=\"" << detail::fmt_fixed(ml - 5, 2) << "\" y1=\""
            << detail::fmt_fixed(sy(fy), 2) << "\" x2=\"" << detail::fmt_fixed(ml, 2)
            << "\" y2=\"" << detail::fmt_fixed(sy(fy), 2) << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << detail::fmt_fixed(ml - 8, 2) << "\" y=\""
            << detail::fmt_fixed(sy(fy) + 4, 2)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
            << detail::fmt_fixed(fy, 2) << "</text>\n";
    }
    svg << "<text x=\"" << detail::fmt_fixed(ml + pw / 2, 2) << "\" y=\""
        << detail::fmt_fixed(height - 12, 2)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
        << series.metric << " score</text>\n";
    svg << "<text x=\"16\" y=\"" << detail::fmt_fixed(mt + ph / 2, 2)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
           "transform=\"rotate(-90 16 "
        << detail::fmt_fixed(mt + ph / 2, 2) << ")\">MOS</text>\n";

    // fitted curve
    svg << "<polyline fill=\"none\" stroke=\"#c22\" stroke-width=\"1.5\" points=\"";
    for (int i = 0; i <= 200; ++i) {
        const double x = x_min + (x_max - x_min) * i / 200.0;
        const double y = std::clamp(logistic_eval(fit, x), y_min, y_max);
        svg << detail::fmt_fixed(sx(x), 2) << "," << detail::fmt_fixed(sy(y), 2);
        if (i != 200) svg << " ";
    }
    svg << "\"/>\n";

    for (const auto& p : series.points)
        svg << "<circle cx=\"" << detail::fmt_fixed(sx(p.score), 2) << "\" cy=\""
            << detail::fmt_fixed(sy(p.mos), 2) << "\" r=\"3\" fill=\"#247\" "
               "fill-opacity=\"0.8\"/>\n";

    svg << "</svg>\n";

    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write plot: " + path.string());
    out << svg.str();
}

// ---------------------------------------------------------------------------
// Round-tripping the harness's own CSV outputs

struct ResultsRow {
    std::string sequence_id;
    std::string rate_point;
    std::string metric;
    std::string score;  ///< textual; "inf" and empty cells preserved
    std::string class_label;
    std::string note;

    std::string item_id() const { return sequence_id + "@" + rate_point; }
};

inline std::vector<ResultsRow> parse_results_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open results file: " + path.string());
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("results file is empty: " + path.string());
    std::vector<ResultsRow> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != 13)
            throw std::runtime_error("results row " + std::to_string(lineno) + " has " +
                                     std::to_string(cells.size()) + " cells, expected 13");
        ResultsRow r;
        r.sequence_id = cells[0];
        r.rate_point = cells[1];
        r.metric = cells[2];
        r.score = cells[3];
        r.class_label = cells[10];
        r.note = cells[12];
        rows.push_back(std::move(r));
    }
    return rows;
}

inline void write_mos_csv(const std::vector<MosRecord>& records,
                          const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write mos file: " + path.string());
    out << "item_id,mos,n_subjects_retained\n";
    for (const auto& r : records)
        out << r.item_id << "," << detail::fmt_report_double(r.mos) << ","
            << r.n_subjects_retained << "\n";
}

inline std::vector<MosRecord> parse_mos_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open mos file: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("mos file is empty: " + path.string());
    std::vector<MosRecord> records;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != 3)
            throw std::runtime_error("mos row " + std::to_string(lineno) + " has " +
                                     std::to_string(cells.size()) + " cells, expected 3");
        MosRecord r;
        r.item_id = cells[0];
        try {
            r.mos = std::stod(cells[1]);
            r.n_subjects_retained = std::stoi(cells[2]);
        } catch (const std::exception&) {
            throw std::runtime_error("mos row " + std::to_string(lineno) + ": bad number");
        }
        records.push_back(std::move(r));
    }
    return records;
}

/// Joins batch results with MOS records into per-metric series. Metric rows
/// whose item id has no MOS record are skipped; error rows are skipped.
inline std::vector<MetricSeries> build_series(const std::vector<ResultsRow>& rows,
                                              const std::vector<MosRecord>& mos,
                                              const std::vector<std::string>& metric_order) {
    std::map<std::string, double> mos_by_item;
    for (const auto& r : mos) mos_by_item[r.item_id] = r.mos;

    std::vector<MetricSeries> series;
    for (const auto& metric : metric_order) {
        MetricSeries s;
        s.metric = metric;
        for (const auto& row : rows) {
            if (row.metric != metric || row.score.empty()) continue;
            auto it = mos_by_item.find(row.item_id());
            if (it == mos_by_item.end()) continue;
            MetricPoint p;
            p.item_id = row.item_id();
            p.score = std::stod(row.score);
            p.mos = it->second;
            s.points.push_back(std::move(p));
        }
        if (!s.points.empty()) series.push_back(std::move(s));
    }
    return series;
}

}  // namespace hv3d
