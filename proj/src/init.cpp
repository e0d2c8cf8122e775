#include "topomap/init.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>

#include "topomap/kernels.hpp"
#include "topomap/parallel.hpp"

namespace topomap {
namespace {

void fix_sign(Eigen::Ref<RowVector> u) {
    Index pivot = 0;
    for (Index d = 1; d < u.size(); ++d) {
        if (std::abs(u(d)) > std::abs(u(pivot))) pivot = d;
    }
    if (u(pivot) < 0.0) u = -u;
}

}  // namespace

PcaBasis pca_any_rank(const Matrix& points, Index k) {
    const Index n = points.rows();
    const Index d = points.cols();
    if (n < 1 || d < 1) throw std::invalid_argument("pca needs a non-empty matrix");
    if (k < 1 || k > d) throw std::invalid_argument("pca component count out of range");

    PcaBasis basis;
    basis.mean = points.colwise().mean();
    const Matrix centered = points.rowwise() - basis.mean;
    const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw NumericalError("covariance eigen-decomposition failed");

    Matrix vecs = solver.eigenvectors().transpose();  // rows are eigenvectors
    Vector vals = solver.eigenvalues();
    for (Index r = 0; r < d; ++r) fix_sign(vecs.row(r));

    std::vector<Index> order(static_cast<std::size_t>(d));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return vals(a) > vals(b); });

    // Eigenvalues that agree to rounding form one degenerate block; order it
    // lexicographically by the sign-fixed eigenvector.
    const double scale = std::max(1.0, std::abs(vals.maxCoeff()));
    const double tie_tol = 1e-12 * scale;
    auto lex_less = [&](Index a, Index b) {
        for (Index c = 0; c < d; ++c) {
            if (vecs(a, c) != vecs(b, c)) return vecs(a, c) < vecs(b, c);
        }
        return false;
    };
    for (std::size_t start = 0; start < order.size();) {
        std::size_t stop = start + 1;
        while (stop < order.size() && vals(order[stop - 1]) - vals(order[stop]) <= tie_tol) ++stop;
        std::sort(order.begin() + static_cast<std::ptrdiff_t>(start),
                  order.begin() + static_cast<std::ptrdiff_t>(stop), lex_less);
        start = stop;
    }

    basis.directions.resize(k, d);
    basis.stds.resize(k);
    for (Index r = 0; r < k; ++r) {
        basis.directions.row(r) = vecs.row(order[static_cast<std::size_t>(r)]);
        basis.stds(r) = std::sqrt(std::max(0.0, vals(order[static_cast<std::size_t>(r)])));
    }
    // Block reordering can swap near-equal values by a few ulps.
    for (Index r = 1; r < k; ++r) basis.stds(r) = std::min(basis.stds(r), basis.stds(r - 1));
    return basis;
}

PcaBasis pca(const Matrix& points, Index k) {
    if (points.rows() < 2) throw std::invalid_argument("pca needs at least two points");
    if (k < 1 || k > std::min(points.rows() - 1, points.cols())) {
        throw std::invalid_argument("pca component count must lie in [1, min(N-1, D)]");
    }
    return pca_any_rank(points, k);
}

Matrix normalize_grid_axes(const LatentGrid& grid) {
    Matrix out(grid.size(), grid.dim());
    for (Index l = 0; l < grid.dim(); ++l) {
        const double lo = grid.coords.col(l).minCoeff();
        const double hi = grid.coords.col(l).maxCoeff();
        for (Index j = 0; j < grid.size(); ++j) {
            out(j, l) = hi > lo ? -1.0 + 2.0 * (grid.coords(j, l) - lo) / (hi - lo) : 0.0;
        }
    }
    return out;
}

Matrix init_refs(const PcaBasis& basis, const LatentGrid& grid) {
    const Index k = basis.rank();
    if (k > grid.dim()) throw std::invalid_argument("basis rank exceeds latent dimension");
    const Matrix rn = normalize_grid_axes(grid);
    Matrix refs(grid.size(), basis.mean.size());
    for (Index j = 0; j < grid.size(); ++j) {
        RowVector w = basis.mean;
        for (Index l = 0; l < k; ++l) w += (2.0 * rn(j, l) * basis.stds(l)) * basis.directions.row(l);
        refs.row(j) = w;
    }
    return refs;
}

Matrix pca_init_refs(const Matrix& points, const LatentGrid& grid) {
    const Index k = std::min(grid.dim(), points.cols());
    return init_refs(pca_any_rank(points, k), grid);
}

Assignments init_assignments(const Matrix& points, const Matrix& refs, double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be > 0");
    if (points.cols() != refs.cols()) throw std::invalid_argument("points and refs differ in dimension");
    const Index n = points.rows();
    const Index m = refs.rows();
    Assignments a;
    a.weights.resize(n, m);
    parallel_for(static_cast<std::size_t>(n), 16, [&](std::size_t b, std::size_t e) {
        for (auto i = static_cast<Index>(b); i < static_cast<Index>(e); ++i) {
            std::span<double> row(a.weights.row(i).data(), static_cast<std::size_t>(m));
            for (Index j = 0; j < m; ++j) row[static_cast<std::size_t>(j)] = squared_distance(points.row(i), refs.row(j));
            soft_assign_row(row, lambda, row);
        }
    });
    return a;
}

}  // namespace topomap
