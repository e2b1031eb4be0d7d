#pragma once

// Dataset CSV: n rows, p comma-separated decimal fields, no header, '.' decimal
// separator, LF line endings.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "robust_scatter/error.hpp"
#include "robust_scatter/scatter_model.hpp"

namespace robust_scatter {

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

inline std::string location(std::size_t row, std::size_t col) {
    return "row " + std::to_string(row) + ", column " + std::to_string(col);
}

}  // namespace detail

/// Parses a dense real matrix. Row and column numbers in errors are 1-based.
inline Matrix read_matrix_csv(std::istream& in) {
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            throw Error(ErrorCode::parse_error,
                        "row " + std::to_string(line_no) + ": CR line endings are not accepted");
        if (detail::trim(line).empty()) {
            // Trailing blank lines are tolerated; interior ones are not.
            std::string rest;
            while (std::getline(in, rest)) {
                ++line_no;
                if (!detail::trim(rest).empty())
                    throw Error(ErrorCode::parse_error,
                                "row " + std::to_string(line_no) + ": unexpected data after blank line");
            }
            break;
        }
        std::vector<double> values;
        std::string_view view(line);
        std::size_t col = 0;
        while (true) {
            ++col;
            const auto comma = view.find(',');
            std::string_view field = detail::trim(view.substr(0, comma));
            double value = 0.0;
            const char* first = field.data();
            const char* last = field.data() + field.size();
            if (!field.empty() && *first == '+') ++first;
            auto [ptr, ec] = std::from_chars(first, last, value);
            if (field.empty() || ec != std::errc() || ptr != last || !std::isfinite(value))
                throw Error(ErrorCode::parse_error, detail::location(line_no, col) +
                                                        ": invalid number '" + std::string(field) + "'");
            values.push_back(value);
            if (comma == std::string_view::npos) break;
            view.remove_prefix(comma + 1);
        }
        if (rows.empty()) {
            width = values.size();
        } else if (values.size() != width) {
            throw Error(ErrorCode::parse_error, "row " + std::to_string(line_no) + ": expected " +
                                                    std::to_string(width) + " fields, found " +
                                                    std::to_string(values.size()));
        }
        rows.push_back(std::move(values));
    }
    require(!rows.empty(), ErrorCode::parse_error, "empty CSV input");
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < width; ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return m;
}

inline Dataset read_dataset_csv(std::istream& in) { return Dataset(read_matrix_csv(in)); }

inline Matrix read_matrix_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorCode::io_error, "cannot open " + path.string());
    return read_matrix_csv(in);
}

inline Dataset read_dataset_csv(const std::filesystem::path& path) {
    Provenance prov;
    prov.family = "file:" + path.string();
    return Dataset(read_matrix_csv(path), prov);
}

inline void write_matrix_csv(std::ostream& out, const Matrix& m, int precision = 10) {
    std::ostringstream buf;
    buf.precision(precision);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) buf << ',';
            buf << m(i, j);
        }
        buf << '\n';
    }
    out << buf.str();
}

}  // namespace robust_scatter
