/**
 * @file baselines.hpp
 * @brief Comparison methods: sequential and batch SOM, soft topographic
 * vector quantization (direct and bias-variance forms), and PCA projection.
 */

#pragma once

#include <vector>

#include "topomap/core.hpp"
#include "topomap/kernels.hpp"

namespace topomap::baselines {

/// Index of the nearest reference vector; ties go to the smallest index.
Index bmu(const Eigen::Ref<const RowVector>& x, const Matrix& refs);

/// BMU of every row of `points`.
std::vector<Index> bmus(const Matrix& points, const Matrix& refs);

/// w_j += eta K_{j,bmu(x)} (x - w_j) for every node. `kernel` must be unnormalized.
Matrix sequential_som_step(const Eigen::Ref<const RowVector>& x,
                           const Matrix& refs,
                           const KernelMatrix& kernel,
                           double eta);

/// One pass of sequential_som_step over a seed-shuffled permutation of the points.
Matrix sequential_som_epoch(const Matrix& points,
                            const Matrix& refs,
                            const KernelMatrix& kernel,
                            double eta,
                            std::uint64_t seed);

// -- Batch SOM ---------------------------------------------------------------

struct BsomState {
    LatentGrid grid;
    KernelMatrix kernel;  // unnormalized
    Matrix refs;
    std::vector<Index> bmu;
};

struct BsomResult {
    BsomState state;
    FitReport report;
};

BsomState bsom_initialize(const Matrix& points, const LatentGrid& grid, double sigma);

/// Recomputes every BMU and applies the batch update. Returns true when the
/// BMU vector did not change. The quantization distortion sum |x_i - w_bmu|^2
/// at the BMU step is written to `distortion` when non-null.
bool bsom_iterate(BsomState& state, const Matrix& points, double* distortion = nullptr);

/// Iterates until the BMU vector is unchanged or max_iters is reached. The
/// objective trace holds the BMU distortion of each iteration (diagnostic,
/// not monotone in general).
BsomResult bsom_fit(const Matrix& points, const LatentGrid& grid, double sigma, const FitConfig& cfg);

// -- Soft topographic vector quantization ------------------------------------

struct StvqState {
    LatentGrid grid;
    Assignments assign;
    Matrix refs;
    KernelMatrix kernel;  // normalized
    double lambda = 1.0;
};

struct StvqResult {
    StvqState state;
    FitReport report;
};

/// Entropy-regularized convolved distortion:
/// sum_ij p_ij sum_k h_jk |x_i - w_k|^2 + lambda sum_ij p_ij ln p_ij.
double stvq_objective(const StvqState& state, const Matrix& points);

/// Neighborhood-averaged references w~_j = sum_k h_jk w_k.
Matrix smoothed_refs(const KernelMatrix& kernel, const Matrix& refs);

/// Node variances V_j = sum_k h_jk |w_k - w~_j|^2.
Vector node_variances(const KernelMatrix& kernel, const Matrix& refs, const Matrix& smoothed);

/// PCA reference vectors and data-distortion assignments.
StvqState stvq_initialize(const Matrix& points, const LatentGrid& grid, double sigma, double lambda);

/// One W -> P cycle by direct O(N M^2) neighborhood sums; returns the objective.
double stvq_iterate(StvqState& state, const Matrix& points);

/// One W -> P cycle through the bias-variance decomposition, O(N M + M^2) per
/// iteration in the node count; returns the objective.
double stvqf_iterate(StvqState& state, const Matrix& points);

StvqResult stvq_fit(const Matrix& points, const LatentGrid& grid, double sigma, double lambda, const FitConfig& cfg);
StvqResult stvqf_fit(const Matrix& points, const LatentGrid& grid, double sigma, double lambda, const FitConfig& cfg);

// -- PCA ---------------------------------------------------------------------

/// Centered data projected on the top `latent_dim` principal directions.
Matrix pca_project(const Matrix& points, Index latent_dim = 2);

// -- Latent representations consumed by the metrics --------------------------

/// r_{bmu(x_i)} for each point.
Matrix bmu_latents(const LatentGrid& grid, const std::vector<Index>& bmu);

/// r_{argmax_j p_ij} for each point; ties go to the smallest index.
Matrix argmax_latents(const LatentGrid& grid, const Assignments& assign);

}  // namespace topomap::baselines
