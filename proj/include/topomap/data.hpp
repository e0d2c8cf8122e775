/**
 * @file data.hpp
 * @brief Dataset generation, CSV input/output and preprocessing.
 *
 * CSV dialect: UTF-8, header row of unique column names, comma separator,
 * '.' decimal point, unquoted numeric cells, LF or CRLF line endings. An
 * empty cell or the literal NaN (any case) marks a missing value.
 */

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "topomap/core.hpp"

namespace topomap::data {

/// x1, x2 ~ U[-1, 1], x3 = x1^2 - x2^2 + N(0, noise_std^2). Columns x1, x2, x3.
Dataset gen_saddle(Index n = 500, double noise_std = 0.1, std::uint64_t seed = 0);

/// Plain numeric table: header plus rows (NaN for missing cells).
struct Table {
    std::vector<std::string> columns;
    Matrix values;

    Index column(const std::string& name) const;  // -1 when absent
};

/// Reads a fully numeric CSV table. Throws DataError on malformed input.
Table read_table(const std::string& path);

/**
 * @brief Loads a dataset; `label_column`, when given, is removed from the
 * features and mapped to integer codes (integers are kept as-is, any other
 * strings are numbered in order of first appearance).
 */
Dataset load_csv(const std::string& path, const std::optional<std::string>& label_column = std::nullopt);

/// Replaces missing entries by the median of the observed values in their column.
Dataset impute_median(const Dataset& ds);

/// Per-feature (x - mean) / std with population std; constant features map to 0.
Dataset standardize(const Dataset& ds);

/// Divides every feature by c > 0.
Dataset scale_by(const Dataset& ds, double c);

/// Writes features (and a trailing `label` column when present).
void write_csv(const Dataset& ds, const std::string& path);

/// 17 significant digits, enough for an exact round-trip.
std::string format_double(double v);

}  // namespace topomap::data
