#pragma once

// CSV formats used by the command-line tool.
//
//   counts:  header `bin_center,real_1,...,real_R`, one row per bin, missing entries `NaN`
//   kernel:  headerless d x d matrix
//   truth:   header `bin_center,z_true[,t_true]`
//   results: header row followed by one row per bin, see results_columns()
//
// Numbers are written with 9 significant digits.

#include "ratiouq/errors.hpp"
#include "ratiouq/kernel.hpp"
#include "ratiouq/permanental.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace ratiouq::cli {

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline bool is_nan_token(std::string_view s) {
    return s == "NaN" || s == "nan" || s == "NAN" || s == "NA" || s.empty();
}

inline double parse_number(std::string_view s, std::size_t line, bool allow_nan) {
    if (is_nan_token(s)) {
        if (allow_nan) return std::numeric_limits<double>::quiet_NaN();
        throw DataError("missing value not allowed here", line);
    }
    if (s == "inf" || s == "Inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf" || s == "-Inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    const char* first = s.data();
    if (!s.empty() && s.front() == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw DataError("cannot parse number '" + std::string(s) + "'", line);
    return v;
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
    std::vector<std::size_t> lines;  // source line of each row

    std::ptrdiff_t column(std::string_view name) const {
        for (std::size_t j = 0; j < header.size(); ++j)
            if (header[j] == name) return std::ptrdiff_t(j);
        return -1;
    }
};

// Comma-separated table with a header row; blank lines are skipped.
inline Table read_table(std::istream& in, bool allow_nan) {
    Table t;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto fields = split(line);
        if (t.header.empty()) {
            for (auto f : fields) t.header.emplace_back(f);
            continue;
        }
        if (fields.size() != t.header.size())
            throw DataError("expected " + std::to_string(t.header.size()) + " fields, found " +
                                std::to_string(fields.size()),
                            lineno);
        std::vector<double> row;
        row.reserve(fields.size());
        for (auto f : fields) row.push_back(parse_number(f, lineno, allow_nan));
        t.rows.push_back(std::move(row));
        t.lines.push_back(lineno);
    }
    if (t.header.empty()) throw DataError("file is empty");
    return t;
}

inline std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    return in;
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    return out;
}

}  // namespace detail

/// Count table with the bin centers it was read with.
struct CountFile {
    std::vector<double> centers;
    CountData counts;
};

inline CountFile read_counts(std::istream& in) {
    auto t = detail::read_table(in, true);
    if (t.header.size() < 2 || t.header[0] != "bin_center")
        throw DataError("count file header must be bin_center,real_1,...", 1);
    if (t.rows.empty()) throw DataError("count file has no bins");
    Matrix m(Eigen::Index(t.rows.size()), Eigen::Index(t.header.size() - 1));
    std::vector<double> centers;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& r = t.rows[i];
        if (!std::isfinite(r[0])) throw DataError("bin center must be finite", t.lines[i]);
        centers.push_back(r[0]);
        for (std::size_t j = 1; j < r.size(); ++j) {
            const double v = r[j];
            if (!std::isnan(v) && (!std::isfinite(v) || v < 0.0 || std::floor(v) != v))
                throw DataError("counts must be non-negative integers or NaN", t.lines[i]);
            m(Eigen::Index(i), Eigen::Index(j - 1)) = v;
        }
    }
    return {std::move(centers), CountData(std::move(m))};
}

inline CountFile read_counts(const std::string& path) {
    auto in = detail::open_in(path);
    try {
        return read_counts(in);
    } catch (const DataError& e) {
        throw DataError(path + ": " + e.what());
    }
}

inline void write_counts(std::ostream& out, std::span<const double> centers, const CountData& data) {
    if (centers.size() != data.bins()) throw ShapeError("centers and counts disagree in length");
    out << "bin_center";
    for (std::size_t r = 0; r < data.realizations(); ++r) out << ",real_" << (r + 1);
    out << '\n' << std::setprecision(9);
    for (std::size_t i = 0; i < data.bins(); ++i) {
        out << centers[i];
        for (std::size_t r = 0; r < data.realizations(); ++r) {
            out << ',';
            if (data.present(i, r))
                out << static_cast<long long>(data.matrix()(Eigen::Index(i), Eigen::Index(r)));
            else
                out << "NaN";
        }
        out << '\n';
    }
}

inline void write_counts(const std::string& path, std::span<const double> centers,
                         const CountData& data) {
    auto out = detail::open_out(path);
    write_counts(out, centers, data);
}

/// Headerless square matrix; symmetry is checked by KernelMatrix.
inline Matrix read_kernel_matrix(std::istream& in) {
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        std::vector<double> row;
        for (auto f : detail::split(line)) row.push_back(detail::parse_number(f, lineno, false));
        if (!rows.empty() && row.size() != rows.front().size())
            throw DataError("kernel rows differ in length", lineno);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw DataError("kernel file is empty");
    if (rows.size() != rows.front().size())
        throw DataError("kernel matrix is " + std::to_string(rows.size()) + "x" +
                        std::to_string(rows.front().size()) + ", expected square");
    Matrix k(Eigen::Index(rows.size()), Eigen::Index(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows.size(); ++j) k(Eigen::Index(i), Eigen::Index(j)) = rows[i][j];
    return k;
}

inline Matrix read_kernel_matrix(const std::string& path) {
    auto in = detail::open_in(path);
    try {
        return read_kernel_matrix(in);
    } catch (const DataError& e) {
        throw DataError(path + ": " + e.what());
    }
}

struct TruthFile {
    std::vector<double> centers;
    std::vector<double> z_true;
    std::vector<double> t_true;  // empty when absent
};

inline TruthFile read_truth(std::istream& in) {
    auto t = detail::read_table(in, true);
    const auto cc = t.column("bin_center"), cz = t.column("z_true"), ct = t.column("t_true");
    if (cc < 0 || cz < 0) throw DataError("truth file header must contain bin_center,z_true", 1);
    TruthFile out;
    for (const auto& r : t.rows) {
        out.centers.push_back(r[std::size_t(cc)]);
        out.z_true.push_back(r[std::size_t(cz)]);
        if (ct >= 0) out.t_true.push_back(r[std::size_t(ct)]);
    }
    return out;
}

inline TruthFile read_truth(const std::string& path) {
    auto in = detail::open_in(path);
    try {
        return read_truth(in);
    } catch (const DataError& e) {
        throw DataError(path + ": " + e.what());
    }
}

inline void write_truth(std::ostream& out, const TruthFile& t) {
    out << "bin_center,z_true" << (t.t_true.empty() ? "" : ",t_true") << '\n' << std::setprecision(17);
    for (std::size_t i = 0; i < t.centers.size(); ++i) {
        out << t.centers[i] << ',' << t.z_true[i];
        if (!t.t_true.empty()) out << ',' << t.t_true[i];
        out << '\n';
    }
}

/// Column order of the estimate results table.
inline const std::vector<std::string>& results_columns() {
    static const std::vector<std::string> cols{
        "bin_center", "map_ratio", "alpha_a",   "alpha_b",   "p",
        "q",          "hpd_lower", "hpd_upper", "valid",     "converged"};
    return cols;
}

/// Extra columns present when a forward model was supplied.
inline const std::vector<std::string>& qoi_columns() {
    static const std::vector<std::string> cols{"qoi_shift", "qoi_alpha",     "qoi_beta",
                                               "qoi_p",     "qoi_q",         "qoi_map",
                                               "qoi_hpd_lower", "qoi_hpd_upper"};
    return cols;
}

/// Generic results table (header + numeric rows) as read back by `score`.
using ResultsTable = detail::Table;

inline ResultsTable read_results(const std::string& path) {
    auto in = detail::open_in(path);
    try {
        auto t = detail::read_table(in, true);
        for (const auto& c : results_columns())
            if (t.column(c) < 0) throw DataError("results file lacks column '" + c + "'", 1);
        return t;
    } catch (const DataError& e) {
        throw DataError(path + ": " + e.what());
    }
}

}  // namespace ratiouq::cli
