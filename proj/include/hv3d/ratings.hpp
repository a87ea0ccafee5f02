#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace hv3d {

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    cells.push_back(cur);
    return cells;
}

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace detail

/// Subject rating matrix on the 1..10 opinion scale. Missing cells are
/// allowed and stay unset.
struct RatingsTable {
    std::vector<std::string> items;
    std::vector<std::string> subjects;
    std::vector<std::optional<int>> scores;  // row-major, items x subjects

    std::optional<int> score(std::size_t item, std::size_t subject) const {
        return scores[item * subjects.size() + subject];
    }
};

/// Parses a ratings CSV: header of subject ids, one row per item, first
/// column the item id, blank cells meaning a missing rating. Items with more
/// than 20% missing cells are rejected.
inline RatingsTable parse_ratings(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open ratings file: " + path.string());

    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("ratings file is empty: " + path.string());
    auto header = detail::split_csv_line(line);
    if (header.size() < 2)
        throw std::runtime_error("ratings header needs an item column plus subject columns");

    RatingsTable t;
    for (std::size_t i = 1; i < header.size(); ++i) {
        auto id = detail::trim(header[i]);
        if (id.empty())
            throw std::runtime_error("ratings header: empty subject id in column " +
                                     std::to_string(i + 1));
        t.subjects.push_back(id);
    }

    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (detail::trim(line).empty()) continue;
        auto cells = detail::split_csv_line(line);
        if (cells.size() != header.size())
            throw std::runtime_error("ragged ratings row " + std::to_string(row) + ": expected " +
                                     std::to_string(header.size()) + " cells, got " +
                                     std::to_string(cells.size()));
        const auto item = detail::trim(cells[0]);
        if (item.empty())
            throw std::runtime_error("ratings row " + std::to_string(row) + ": empty item id");

        int missing = 0;
        for (std::size_t c = 1; c < cells.size(); ++c) {
            const auto cell = detail::trim(cells[c]);
            if (cell.empty()) {
                t.scores.push_back(std::nullopt);
                ++missing;
                continue;
            }
            std::size_t pos = 0;
            int v = 0;
            try {
                v = std::stoi(cell, &pos);
            } catch (const std::exception&) {
                pos = 0;
            }
            if (pos != cell.size())
                throw std::runtime_error("ratings row " + std::to_string(row) + ", subject " +
                                         t.subjects[c - 1] + ": cell \"" + cell +
                                         "\" is not an integer");
            if (v < 1 || v > 10)
                throw std::runtime_error("ratings score out of range 1..10: item " + item +
                                         ", subject " + t.subjects[c - 1] + ", value " +
                                         std::to_string(v));
            t.scores.push_back(v);
        }
        if (static_cast<double>(missing) > 0.2 * static_cast<double>(t.subjects.size()))
            throw std::runtime_error("item " + item + " has more than 20% missing ratings (" +
                                     std::to_string(missing) + " of " +
                                     std::to_string(t.subjects.size()) + ")");
        t.items.push_back(item);
    }
    if (t.items.empty())
        throw std::runtime_error("ratings file has no item rows: " + path.string());
    return t;
}

}  // namespace hv3d
