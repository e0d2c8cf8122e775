#include "topomap/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "topomap/parallel.hpp"

namespace topomap {
namespace {

void check_sigma(double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("sigma must be > 0");
}

Matrix grid_exponents(const LatentGrid& grid, double sigma) {
    const Index m = grid.size();
    const double scale = 1.0 / (2.0 * sigma * sigma);
    Matrix e(m, m);
    parallel_for(static_cast<std::size_t>(m), 64, [&](std::size_t b, std::size_t end) {
        for (auto j = static_cast<Index>(b); j < static_cast<Index>(end); ++j) {
            for (Index k = 0; k < m; ++k) {
                e(j, k) = squared_distance(grid.coords.row(j), grid.coords.row(k)) * scale;
            }
        }
    });
    return e;
}

}  // namespace

void soft_assign_row(std::span<const double> cost, double temperature, std::span<double> out) {
    if (cost.empty()) return;
    const double lowest = *std::min_element(cost.begin(), cost.end());
    const double inv_t = 1.0 / temperature;
    double sum = 0.0;
    for (std::size_t j = 0; j < cost.size(); ++j) {
        const double e = std::exp(-(cost[j] - lowest) * inv_t);
        out[j] = e;
        sum += e;
    }
    const double inv_sum = 1.0 / sum;
    for (std::size_t j = 0; j < cost.size(); ++j) out[j] *= inv_sum;
}

KernelMatrix gaussian_kernel(const LatentGrid& grid, double sigma) {
    check_sigma(sigma);
    KernelMatrix k;
    k.values = grid_exponents(grid, sigma);
    k.values = (-k.values.array()).exp().matrix();
    k.normalized = false;
    return k;
}

KernelMatrix normalized_kernel(const LatentGrid& grid, double sigma) {
    check_sigma(sigma);
    KernelMatrix k;
    k.values = grid_exponents(grid, sigma);
    const Index m = grid.size();
    parallel_for(static_cast<std::size_t>(m), 64, [&](std::size_t b, std::size_t end) {
        for (auto j = static_cast<Index>(b); j < static_cast<Index>(end); ++j) {
            std::span<double> row(k.values.row(j).data(), static_cast<std::size_t>(m));
            soft_assign_row(row, 1.0, row);
        }
    });
    k.normalized = true;
    return k;
}

Vector continuous_neighborhood(const Eigen::Ref<const RowVector>& r, const LatentGrid& grid, double sigma) {
    check_sigma(sigma);
    if (r.size() != grid.dim()) throw std::invalid_argument("latent point dimension mismatch");
    const Index m = grid.size();
    const double scale = 1.0 / (2.0 * sigma * sigma);
    Vector h(m);
    for (Index k = 0; k < m; ++k) h(k) = squared_distance(r, grid.coords.row(k)) * scale;
    std::span<double> hs(h.data(), static_cast<std::size_t>(m));
    soft_assign_row(hs, 1.0, hs);
    return h;
}

double neighborhood_distortion(const Eigen::Ref<const RowVector>& r,
                               const Eigen::Ref<const RowVector>& x,
                               const Matrix& refs,
                               const LatentGrid& grid,
                               double sigma) {
    if (refs.rows() != grid.size()) throw std::invalid_argument("reference count must equal node count");
    if (x.size() != refs.cols()) throw std::invalid_argument("data point dimension mismatch");
    const Vector h = continuous_neighborhood(r, grid, sigma);
    double e = 0.0;
    for (Index k = 0; k < refs.rows(); ++k) e += h(k) * squared_distance(x, refs.row(k));
    return e;
}

}  // namespace topomap
