/**
 * @file core.hpp
 * @brief Domain types shared by every topographic mapping method.
 *
 * Matrices are dense and row-major: one data point, node, or latent
 * position per row.
 */

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace topomap {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Index = Eigen::Index;

/// Raised when input data is malformed (bad CSV, non-finite values, ...).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when an iteration produces non-finite values.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/**
 * @brief N points in D dimensions plus optional integer labels.
 *
 * Freshly loaded CSV data may carry NaN as the missing-value marker until
 * it has been imputed; `validate()` rejects such data.
 */
struct Dataset {
    Matrix points;
    std::optional<std::vector<std::int64_t>> labels;
    std::vector<std::string> feature_names;

    Index size() const { return points.rows(); }
    Index dim() const { return points.cols(); }
    bool has_missing() const;

    /// Throws DataError unless N >= 1, D >= 1, all entries finite and labels sized N.
    void validate() const;
};

/**
 * @brief Fixed node coordinates of the latent topology (M x L).
 *
 * `rows`/`cols` are the side counts of a rectangular grid; both are 0 for a
 * free-form node set.
 */
struct LatentGrid {
    Matrix coords;
    int rows = 0;
    int cols = 0;

    Index size() const { return coords.rows(); }
    Index dim() const { return coords.cols(); }
    void validate() const;
};

/**
 * @brief Square grid of side^L nodes spanning [-1, 1] on every axis.
 *
 * Nodes are enumerated row-major with the last axis varying fastest. A side
 * of 1 places the single node at the origin.
 */
LatentGrid make_square_grid(int side, int latent_dim = 2);

/// Free-form grid from explicit node coordinates.
LatentGrid make_grid(Matrix coords);

/// Row-stochastic N x M soft assignment matrix.
struct Assignments {
    Matrix weights;

    Index size() const { return weights.rows(); }
    Index nodes() const { return weights.cols(); }
};

/// True iff every row sums to 1 within 1e-12 and every entry lies in [0, 1].
bool row_stochastic_check(const Assignments& assign);

/// Map state: grid, reference vectors (M x D) and per-point latent positions (N x L).
struct MapModel {
    LatentGrid grid;
    Matrix refs;
    Matrix latents;
};

/**
 * @brief Method hyperparameters with range checks at construction.
 *
 * gamma >= 0 weights latent proximity, lambda > 0 weights the entropy term,
 * sigma > 0 is the neighborhood width of the kernel based baselines and
 * eta in (0, 1) is the sequential SOM learning rate.
 */
class HyperParams {
public:
    HyperParams(double gamma = 0.0, double lambda = 1.0, double sigma = 1.0, double eta = 0.5);

    double gamma() const { return gamma_; }
    double lambda() const { return lambda_; }
    double sigma() const { return sigma_; }
    double eta() const { return eta_; }

    HyperParams with_gamma(double v) const { return {v, lambda_, sigma_, eta_}; }
    HyperParams with_lambda(double v) const { return {gamma_, v, sigma_, eta_}; }
    HyperParams with_sigma(double v) const { return {gamma_, lambda_, v, eta_}; }
    HyperParams with_eta(double v) const { return {gamma_, lambda_, sigma_, v}; }

private:
    double gamma_;
    double lambda_;
    double sigma_;
    double eta_;
};

struct FitConfig {
    int max_iters = 1000;
    double tol = 1e-4;
    std::uint64_t seed = 0;

    void validate() const;
};

struct FitReport {
    std::vector<double> objective_trace;
    int iterations = 0;
    bool converged = false;
    std::vector<double> per_iter_ms;
};

/// Relative-change stopping rule with the max{1, |J_prev|} guard.
bool relative_change_converged(double previous, double current, double tol);

/// Squared Euclidean distance computed directly from the difference.
template <typename A, typename B>
double squared_distance(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
    return (a - b).squaredNorm();
}

}  // namespace topomap
