/**
 * @file metrics.hpp
 * @brief Neighborhood preservation (trustworthiness, continuity) and
 * quantization error.
 */

#pragma once

#include <cstdint>
#include <vector>

#include "topomap/core.hpp"

namespace topomap::metrics {

/// Neighbor ranks: at(i, j) is the rank of j among all points other than i by
/// squared Euclidean distance from i (nearest = 1; ties go to the smaller
/// index). The diagonal holds 0.
struct RankTable {
    Index n = 0;
    std::vector<std::int32_t> ranks;

    std::int32_t at(Index i, Index j) const { return ranks[static_cast<std::size_t>(i * n + j)]; }
};

RankTable rank_table(const Matrix& points);

/**
 * @brief Trustworthiness at k neighbors: penalizes points that are latent
 * neighbors but not data neighbors, by their excess data-space rank.
 * Requires 1 <= k < N/2.
 */
double trustworthiness(const Matrix& data, const Matrix& latent, int k);

/// Continuity: trustworthiness with the two spaces swapped.
double continuity(const Matrix& data, const Matrix& latent, int k);

/// Mean squared Euclidean distance from each point to its best matching reference.
double quantization_error(const Matrix& points, const Matrix& refs);

/// (TW + CN) / 2
double tuning_score(double tw, double cn);

/// Neighbor count used throughout the evaluation protocol.
inline constexpr int kDefaultNeighbors = 5;

}  // namespace topomap::metrics
