#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "hv3d/ratings.hpp"

namespace hv3d {

struct RejectedSubject {
    std::string id;
    int p_count = 0;        ///< ratings above the per-item upper bound
    int q_count = 0;        ///< ratings below the per-item lower bound
    double outlier_ratio = 0.0;    ///< (P+Q)/N
    double asymmetry_ratio = 0.0;  ///< |P-Q|/(P+Q)
};

struct ScreeningResult {
    std::vector<std::string> retained;
    std::vector<RejectedSubject> rejected;
};

/// Subject screening over the full panel: per item, the score distribution's
/// kurtosis selects 2σ bounds (2 ≤ β2 ≤ 4) or √20·σ bounds; a subject whose
/// out-of-bound counts P, Q satisfy (P+Q)/N > 0.05 and |P−Q|/(P+Q) < 0.3 is
/// rejected. N is the subject's own non-missing rating count.
inline ScreeningResult screen_outliers(const RatingsTable& ratings) {
    const std::size_t n_subjects = ratings.subjects.size();
    const std::size_t n_items = ratings.items.size();
    if (n_subjects < 3)
        throw std::invalid_argument("screen_outliers: need at least 3 subjects, got " +
                                    std::to_string(n_subjects));

    struct Bounds {
        double lower, upper;
    };
    std::vector<Bounds> bounds(n_items);
    for (std::size_t i = 0; i < n_items; ++i) {
        double sum = 0.0;
        int n = 0;
        for (std::size_t s = 0; s < n_subjects; ++s)
            if (auto v = ratings.score(i, s)) {
                sum += *v;
                ++n;
            }
        const double mean = sum / n;
        double m2 = 0.0, m4 = 0.0, ss = 0.0;
        for (std::size_t s = 0; s < n_subjects; ++s)
            if (auto v = ratings.score(i, s)) {
                const double d = *v - mean;
                m2 += d * d;
                m4 += d * d * d * d;
            }
        ss = m2;
        m2 /= n;
        m4 /= n;
        const double beta2 = m2 > 0.0 ? m4 / (m2 * m2) : 0.0;
        const double stddev = n > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
        const double spread =
            (beta2 >= 2.0 && beta2 <= 4.0) ? 2.0 * stddev : std::sqrt(20.0) * stddev;
        bounds[i] = {mean - spread, mean + spread};
    }

    ScreeningResult result;
    for (std::size_t s = 0; s < n_subjects; ++s) {
        int p = 0, q = 0, n = 0;
        for (std::size_t i = 0; i < n_items; ++i)
            if (auto v = ratings.score(i, s)) {
                ++n;
                if (*v > bounds[i].upper) ++p;
                if (*v < bounds[i].lower) ++q;
            }
        const double pq = static_cast<double>(p + q);
        const double outlier_ratio = n > 0 ? pq / n : 0.0;
        const double asymmetry = pq > 0.0 ? std::abs(p - q) / pq : 1.0;
        if (outlier_ratio > 0.05 && asymmetry < 0.3) {
            result.rejected.push_back({ratings.subjects[s], p, q, outlier_ratio, asymmetry});
        } else {
            result.retained.push_back(ratings.subjects[s]);
        }
    }
    return result;
}

struct MosRecord {
    std::string item_id;
    double mos = 0.0;  ///< in [1, 10]
    int n_subjects_retained = 0;
};

/// Per-item mean over the retained subjects' non-missing ratings.
inline std::vector<MosRecord> compute_mos(const RatingsTable& ratings,
                                          const std::vector<std::string>& retained) {
    if (retained.empty()) throw std::invalid_argument("compute_mos: retained set is empty");
    std::vector<std::size_t> cols;
    for (const auto& id : retained) {
        bool found = false;
        for (std::size_t s = 0; s < ratings.subjects.size(); ++s)
            if (ratings.subjects[s] == id) {
                cols.push_back(s);
                found = true;
                break;
            }
        if (!found)
            throw std::invalid_argument("compute_mos: unknown subject id \"" + id + "\"");
    }

    std::vector<MosRecord> records;
    records.reserve(ratings.items.size());
    for (std::size_t i = 0; i < ratings.items.size(); ++i) {
        double sum = 0.0;
        int n = 0;
        for (std::size_t c : cols)
            if (auto v = ratings.score(i, c)) {
                sum += *v;
                ++n;
            }
        if (n == 0)
            throw std::invalid_argument("compute_mos: item " + ratings.items[i] +
                                        " has no retained ratings");
        records.push_back({ratings.items[i], sum / n, n});
    }
    return records;
}

}  // namespace hv3d
