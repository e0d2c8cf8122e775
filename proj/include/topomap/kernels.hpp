/**
 * @file kernels.hpp
 * @brief Gaussian neighborhood kernels over latent grid nodes.
 */

#pragma once

#include <cmath>
#include <span>

#include "topomap/core.hpp"

namespace topomap {

/// M x M node-node kernel. Unnormalized: K_jk = exp(-|r_j - r_k|^2 / 2 sigma^2).
/// Normalized: each row rescaled to sum to 1.
struct KernelMatrix {
    Matrix values;
    bool normalized = false;

    Index size() const { return values.rows(); }
};

KernelMatrix gaussian_kernel(const LatentGrid& grid, double sigma);
KernelMatrix normalized_kernel(const LatentGrid& grid, double sigma);

/**
 * @brief Writes softmax(-cost / temperature) into `out`.
 *
 * The smallest cost is subtracted before exponentiating, so the largest
 * exponent is exactly 0 and nothing overflows. `out` may alias `cost`.
 */
void soft_assign_row(std::span<const double> cost, double temperature, std::span<double> out);

/// p ln p with the 0 ln 0 = 0 convention (guarded below 1e-300).
inline double entropy_term(double p) {
    return p < 1e-300 ? 0.0 : p * std::log(p);
}

/**
 * @brief Continuous neighborhood function h(r, r_k) for k = 1..M.
 */
Vector continuous_neighborhood(const Eigen::Ref<const RowVector>& r, const LatentGrid& grid, double sigma);

/**
 * @brief Continuous neighborhood distortion E(r) = sum_k h(r, r_k) |x - w_k|^2.
 *
 * Diagnostic only; no fit evaluates it.
 */
double neighborhood_distortion(const Eigen::Ref<const RowVector>& r,
                               const Eigen::Ref<const RowVector>& x,
                               const Matrix& refs,
                               const LatentGrid& grid,
                               double sigma);

}  // namespace topomap
