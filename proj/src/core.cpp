#include "topomap/core.hpp"

#include <cmath>
#include <limits>

namespace topomap {

bool Dataset::has_missing() const {
    return points.array().isNaN().any();
}

void Dataset::validate() const {
    if (points.rows() < 1 || points.cols() < 1) {
        throw DataError("dataset must have at least one point and one feature");
    }
    if (!points.allFinite()) {
        throw DataError("dataset contains non-finite or missing entries");
    }
    if (labels && static_cast<Index>(labels->size()) != points.rows()) {
        throw DataError("label count does not match point count");
    }
}

void LatentGrid::validate() const {
    if (coords.rows() < 1 || coords.cols() < 1) {
        throw std::invalid_argument("latent grid must have at least one node and one axis");
    }
    if (!coords.allFinite()) {
        throw std::invalid_argument("latent grid coordinates must be finite");
    }
}

LatentGrid make_square_grid(int side, int latent_dim) {
    if (side < 1) throw std::invalid_argument("grid side must be >= 1");
    if (latent_dim < 1) throw std::invalid_argument("latent dimension must be >= 1");

    std::vector<double> axis(static_cast<std::size_t>(side));
    for (int s = 0; s < side; ++s) {
        // Integer numerator keeps the axis exactly antisymmetric about 0.
        axis[s] = side == 1 ? 0.0 : static_cast<double>(2 * s - (side - 1)) / (side - 1);
    }

    Index count = 1;
    for (int l = 0; l < latent_dim; ++l) count *= side;

    LatentGrid grid;
    grid.coords.resize(count, latent_dim);
    for (Index j = 0; j < count; ++j) {
        Index rest = j;
        for (int l = latent_dim - 1; l >= 0; --l) {
            grid.coords(j, l) = axis[static_cast<std::size_t>(rest % side)];
            rest /= side;
        }
    }
    grid.rows = side;
    grid.cols = latent_dim >= 2 ? side : 1;
    return grid;
}

LatentGrid make_grid(Matrix coords) {
    LatentGrid grid;
    grid.coords = std::move(coords);
    grid.validate();
    return grid;
}

bool row_stochastic_check(const Assignments& assign) {
    const Matrix& p = assign.weights;
    for (Index i = 0; i < p.rows(); ++i) {
        double sum = 0.0;
        for (Index j = 0; j < p.cols(); ++j) {
            const double v = p(i, j);
            if (!(v >= 0.0 && v <= 1.0)) return false;
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-12) return false;
    }
    return true;
}

HyperParams::HyperParams(double gamma, double lambda, double sigma, double eta)
    : gamma_(gamma), lambda_(lambda), sigma_(sigma), eta_(eta) {
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("gamma must be >= 0");
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be > 0");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("sigma must be > 0");
    if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("eta must lie in (0, 1)");
}

void FitConfig::validate() const {
    if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
    if (!(tol > 0.0)) throw std::invalid_argument("tol must be > 0");
}

bool relative_change_converged(double previous, double current, double tol) {
    const double denom = std::max(1.0, std::abs(previous));
    // Rounding slack: the difference of two rounded values is only known to
    // a few ulps of the larger magnitude.
    const double slack = 4.0 * std::numeric_limits<double>::epsilon() *
                         std::max(std::abs(previous), std::abs(current));
    return std::abs(current - previous) <= tol * denom + slack;
}

}  // namespace topomap
