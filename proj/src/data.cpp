#include "topomap/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "topomap/rng.hpp"

namespace topomap::data {
namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (line.empty()) cells.emplace_back();
    return cells;
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t");
    return s.substr(first, last - first + 1);
}

bool is_missing(const std::string& cell) {
    if (cell.empty()) return true;
    std::string lower = cell;
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    return lower == "nan";
}

std::optional<double> parse_number(const std::string& cell) {
    const char* first = cell.data();
    const char* last = first + cell.size();
    if (first != last && *first == '+') ++first;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v)) return std::nullopt;
    return v;
}

struct RawCsv {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

RawCsv read_raw(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    RawCsv raw;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
        if (line.empty()) {
            if (line_no == 1) throw DataError(path + ": missing header row");
            continue;
        }
        auto cells = split_line(line);
        for (auto& c : cells) c = trim(c);
        if (line_no == 1) {
            std::set<std::string> seen;
            for (const auto& c : cells) {
                if (!seen.insert(c).second) throw DataError(path + ": duplicate column name '" + c + "'");
            }
            raw.header = std::move(cells);
            continue;
        }
        if (cells.size() != raw.header.size()) {
            throw DataError(path + ":" + std::to_string(line_no) + ": expected " + std::to_string(raw.header.size()) +
                            " cells, found " + std::to_string(cells.size()));
        }
        raw.rows.push_back(std::move(cells));
    }
    if (raw.header.empty()) throw DataError(path + ": missing header row");
    return raw;
}

double parse_cell(const std::string& cell, const std::string& path, std::size_t row) {
    if (is_missing(cell)) return std::numeric_limits<double>::quiet_NaN();
    if (auto v = parse_number(cell)) return *v;
    throw DataError(path + ": row " + std::to_string(row + 2) + ": non-numeric cell '" + cell + "'");
}

double median_of(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

Dataset gen_saddle(Index n, double noise_std, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("saddle needs at least one point");
    if (!(noise_std >= 0.0)) throw std::invalid_argument("noise std must be >= 0");
    Rng rng(seed);
    Dataset ds;
    ds.points.resize(n, 3);
    for (Index i = 0; i < n; ++i) {
        const double x1 = rng.uniform(-1.0, 1.0);
        const double x2 = rng.uniform(-1.0, 1.0);
        const double xi = rng.normal(0.0, 1.0) * noise_std;
        ds.points(i, 0) = x1;
        ds.points(i, 1) = x2;
        ds.points(i, 2) = x1 * x1 - x2 * x2 + xi;
    }
    ds.feature_names = {"x1", "x2", "x3"};
    return ds;
}

Index Table::column(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    return it == columns.end() ? -1 : static_cast<Index>(it - columns.begin());
}

Table read_table(const std::string& path) {
    const RawCsv raw = read_raw(path);
    Table t;
    t.columns = raw.header;
    t.values.resize(static_cast<Index>(raw.rows.size()), static_cast<Index>(raw.header.size()));
    for (std::size_t r = 0; r < raw.rows.size(); ++r) {
        for (std::size_t c = 0; c < raw.header.size(); ++c) {
            t.values(static_cast<Index>(r), static_cast<Index>(c)) = parse_cell(raw.rows[r][c], path, r);
        }
    }
    return t;
}

Dataset load_csv(const std::string& path, const std::optional<std::string>& label_column) {
    const RawCsv raw = read_raw(path);
    std::ptrdiff_t label_idx = -1;
    if (label_column) {
        const auto it = std::find(raw.header.begin(), raw.header.end(), *label_column);
        if (it == raw.header.end()) throw DataError(path + ": unknown label column '" + *label_column + "'");
        label_idx = it - raw.header.begin();
    }

    Dataset ds;
    std::vector<std::size_t> feature_cols;
    for (std::size_t c = 0; c < raw.header.size(); ++c) {
        if (static_cast<std::ptrdiff_t>(c) == label_idx) continue;
        feature_cols.push_back(c);
        ds.feature_names.push_back(raw.header[c]);
    }
    if (feature_cols.empty()) throw DataError(path + ": no feature columns");

    ds.points.resize(static_cast<Index>(raw.rows.size()), static_cast<Index>(feature_cols.size()));
    for (std::size_t r = 0; r < raw.rows.size(); ++r) {
        for (std::size_t f = 0; f < feature_cols.size(); ++f) {
            ds.points(static_cast<Index>(r), static_cast<Index>(f)) = parse_cell(raw.rows[r][feature_cols[f]], path, r);
        }
    }

    if (label_idx >= 0) {
        const auto li = static_cast<std::size_t>(label_idx);
        bool all_integer = true;
        std::vector<std::int64_t> ints;
        for (const auto& row : raw.rows) {
            std::int64_t v = 0;
            const std::string& cell = row[li];
            auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) {
                all_integer = false;
                break;
            }
            ints.push_back(v);
        }
        if (all_integer) {
            ds.labels = std::move(ints);
        } else {
            std::map<std::string, std::int64_t> codes;
            std::vector<std::int64_t> labels;
            for (const auto& row : raw.rows) {
                auto [it, inserted] = codes.emplace(row[li], static_cast<std::int64_t>(codes.size()));
                labels.push_back(it->second);
            }
            ds.labels = std::move(labels);
        }
    }
    return ds;
}

Dataset impute_median(const Dataset& ds) {
    Dataset out = ds;
    for (Index c = 0; c < ds.points.cols(); ++c) {
        std::vector<double> observed;
        for (Index r = 0; r < ds.points.rows(); ++r) {
            if (!std::isnan(ds.points(r, c))) observed.push_back(ds.points(r, c));
        }
        if (observed.size() == static_cast<std::size_t>(ds.points.rows())) continue;
        if (observed.empty()) {
            const std::string name = c < static_cast<Index>(ds.feature_names.size()) ? ds.feature_names[c] : std::to_string(c);
            throw DataError("feature '" + name + "' has no observed values");
        }
        const double med = median_of(std::move(observed));
        for (Index r = 0; r < ds.points.rows(); ++r) {
            if (std::isnan(out.points(r, c))) out.points(r, c) = med;
        }
    }
    return out;
}

Dataset standardize(const Dataset& ds) {
    Dataset out = ds;
    const auto n = static_cast<double>(ds.points.rows());
    for (Index c = 0; c < ds.points.cols(); ++c) {
        const double mean = ds.points.col(c).sum() / n;
        const double var = (ds.points.col(c).array() - mean).square().sum() / n;
        const double sd = std::sqrt(var);
        // A constant column leaves only rounding noise in the deviations.
        if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) {
            out.points.col(c).setZero();
        } else {
            out.points.col(c) = (ds.points.col(c).array() - mean) / sd;
        }
    }
    return out;
}

Dataset scale_by(const Dataset& ds, double c) {
    if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("scale factor must be > 0");
    Dataset out = ds;
    out.points /= c;
    return out;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "NaN";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, ptr);
}

void write_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    for (Index c = 0; c < ds.points.cols(); ++c) {
        if (c) out << ',';
        out << (c < static_cast<Index>(ds.feature_names.size()) ? ds.feature_names[c] : "f" + std::to_string(c));
    }
    if (ds.labels) out << ",label";
    out << '\n';
    for (Index r = 0; r < ds.points.rows(); ++r) {
        for (Index c = 0; c < ds.points.cols(); ++c) {
            if (c) out << ',';
            out << format_double(ds.points(r, c));
        }
        if (ds.labels) out << ',' << (*ds.labels)[static_cast<std::size_t>(r)];
        out << '\n';
    }
}

}  // namespace topomap::data
