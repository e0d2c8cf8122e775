/**
 * @file som_olp.hpp
 * @brief Self-organizing map with optimized per-point latent positions.
 *
 * The objective
 *
 *   J = sum_ij p_ij (|x_i - w_j|^2 + gamma |v_i - r_j|^2) + lambda sum_ij p_ij ln p_ij
 *
 * is minimized by cyclic block coordinate descent over latent positions V,
 * reference vectors W and assignments P, in that order. Every block update is
 * an exact closed-form minimizer, so J never increases. One iteration costs
 * O(N M (D + L)).
 */

#pragma once

#include <functional>

#include "topomap/core.hpp"

namespace topomap::som_olp {

struct State {
    MapModel model;
    Assignments assign;
    HyperParams hp;
};

/// |x - w|^2 + gamma |v - r|^2
double local_cost(const Eigen::Ref<const RowVector>& x,
                  const Eigen::Ref<const RowVector>& w,
                  const Eigen::Ref<const RowVector>& v,
                  const Eigen::Ref<const RowVector>& r,
                  double gamma);

double objective(const State& state, const Matrix& points);

/// Softmax of the local costs with temperature lambda.
Assignments update_assignments(const Matrix& points, const MapModel& model, double gamma, double lambda);

/// v_i = sum_j p_ij r_j
Matrix update_latents(const Assignments& assign, const LatentGrid& grid);

/// w_j = sum_i p_ij x_i / sum_i p_ij. Nodes whose mass underflows (< 1e-300)
/// keep their row of `previous`.
Matrix update_refs(const Assignments& assign, const Matrix& points, const Matrix& previous);

/// PCA reference vectors, data-distortion assignments and V = P R.
State initialize(const Matrix& points, const LatentGrid& grid, const HyperParams& hp);

/// One V -> W -> P cycle; returns the objective after the P update.
double iterate(State& state, const Matrix& points);

using IterationCallback = std::function<void(int iteration, const State&)>;

/// Runs iterate() until the relative change rule holds or max_iters is reached.
std::pair<State, FitReport> fit(const Matrix& points,
                                const LatentGrid& grid,
                                const HyperParams& hp,
                                const FitConfig& cfg,
                                const IterationCallback& on_iteration = {});

/**
 * @brief The objective rewritten with data-space and latent-space Laplacians:
 * tr(X' L_data X) + gamma tr(R' L_lat R) + lambda sum p ln p.
 *
 * Matches objective() whenever V and W are the closed-form updates for P.
 * Nodes with zero mass are dropped from D_n^-1.
 */
double objective_laplacian_form(const Assignments& assign,
                                const Matrix& points,
                                const LatentGrid& grid,
                                double gamma,
                                double lambda);

}  // namespace topomap::som_olp
