/**
 * @file init.hpp
 * @brief Deterministic PCA initialization of reference vectors and assignments.
 */

#pragma once

#include "topomap/core.hpp"

namespace topomap {

/// Leading principal directions (rows, orthonormal) with the population
/// standard deviation of the data projected onto each one.
struct PcaBasis {
    RowVector mean;
    Matrix directions;  // K x D
    Vector stds;        // K, non-increasing

    Index rank() const { return directions.rows(); }
};

/**
 * @brief Top-K principal directions of the centered data.
 *
 * Uses the population covariance (divisor N). Each direction is flipped so its
 * largest-magnitude component is positive; directions with equal variance are
 * ordered lexicographically. Requires N >= 2 and 1 <= K <= min(N-1, D).
 */
PcaBasis pca(const Matrix& points, Index k);

/// Same conventions as pca() but accepts any 1 <= K <= D, including N = 1.
/// Directions beyond the data rank get zero standard deviation.
PcaBasis pca_any_rank(const Matrix& points, Index k);

/// Affinely maps every grid axis from [min, max] to [-1, 1]; zero-extent axes map to 0.
Matrix normalize_grid_axes(const LatentGrid& grid);

/**
 * @brief w_j = mean + 2 sum_l rn_jl s_l u_l over the first K = basis.rank()
 * latent axes, where rn is the per-axis normalized node coordinate.
 */
Matrix init_refs(const PcaBasis& basis, const LatentGrid& grid);

/// PCA basis with K = min(L, D) followed by init_refs.
Matrix pca_init_refs(const Matrix& points, const LatentGrid& grid);

/// p_ij proportional to exp(-|x_i - w_j|^2 / lambda), rows normalized.
Assignments init_assignments(const Matrix& points, const Matrix& refs, double lambda);

}  // namespace topomap
