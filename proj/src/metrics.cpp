#include "topomap/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "topomap/baselines.hpp"
#include "topomap/parallel.hpp"

namespace topomap::metrics {
namespace {

constexpr std::size_t kRowGrain = 8;

// Indices of all points except i, ordered by (squared distance, index).
std::vector<Index> neighbor_order(const Matrix& points, Index i) {
    const Index n = points.rows();
    std::vector<double> dist(static_cast<std::size_t>(n));
    for (Index j = 0; j < n; ++j) dist[static_cast<std::size_t>(j)] = squared_distance(points.row(i), points.row(j));
    std::vector<Index> order;
    order.reserve(static_cast<std::size_t>(n - 1));
    for (Index j = 0; j < n; ++j) {
        if (j != i) order.push_back(j);
    }
    std::sort(order.begin(), order.end(), [&](Index a, Index b) {
        const double da = dist[static_cast<std::size_t>(a)];
        const double db = dist[static_cast<std::size_t>(b)];
        return da < db || (da == db && a < b);
    });
    return order;
}

// Sum over i of sum_{j in kNN_neighbor(i) \ kNN_rank(i)} (rank_rank(i, j) - k).
std::int64_t excess_rank_penalty(const Matrix& rank_space, const Matrix& neighbor_space, int k) {
    const Index n = rank_space.rows();
    std::vector<std::int64_t> per_row(static_cast<std::size_t>(n), 0);
    parallel_for(static_cast<std::size_t>(n), kRowGrain, [&](std::size_t b, std::size_t e) {
        std::vector<std::int32_t> rank(static_cast<std::size_t>(n));
        for (auto i = static_cast<Index>(b); i < static_cast<Index>(e); ++i) {
            const auto by_rank = neighbor_order(rank_space, i);
            for (std::size_t r = 0; r < by_rank.size(); ++r) {
                rank[static_cast<std::size_t>(by_rank[r])] = static_cast<std::int32_t>(r + 1);
            }
            const auto by_neighbor = neighbor_order(neighbor_space, i);
            std::int64_t penalty = 0;
            for (int r = 0; r < k; ++r) {
                const std::int32_t rho = rank[static_cast<std::size_t>(by_neighbor[static_cast<std::size_t>(r)])];
                if (rho > k) penalty += rho - k;
            }
            per_row[static_cast<std::size_t>(i)] = penalty;
        }
    });
    return std::accumulate(per_row.begin(), per_row.end(), std::int64_t{0});
}

void check_pair(const Matrix& a, const Matrix& b, int k) {
    if (a.rows() != b.rows()) throw std::invalid_argument("both spaces must hold the same points");
    if (k < 1 || 2 * static_cast<Index>(k) >= a.rows()) {
        throw std::invalid_argument("neighbor count must satisfy 1 <= k < N/2");
    }
}

}  // namespace

RankTable rank_table(const Matrix& points) {
    const Index n = points.rows();
    if (n < 2) throw std::invalid_argument("rank table needs at least two points");
    RankTable t;
    t.n = n;
    t.ranks.assign(static_cast<std::size_t>(n * n), 0);
    parallel_for(static_cast<std::size_t>(n), kRowGrain, [&](std::size_t b, std::size_t e) {
        for (auto i = static_cast<Index>(b); i < static_cast<Index>(e); ++i) {
            const auto order = neighbor_order(points, i);
            for (std::size_t r = 0; r < order.size(); ++r) {
                t.ranks[static_cast<std::size_t>(i * n + order[r])] = static_cast<std::int32_t>(r + 1);
            }
        }
    });
    return t;
}

double trustworthiness(const Matrix& data, const Matrix& latent, int k) {
    check_pair(data, latent, k);
    const auto n = static_cast<double>(data.rows());
    const double kk = k;
    const double norm = 2.0 / (n * kk * (2.0 * n - 3.0 * kk - 1.0));
    return 1.0 - norm * static_cast<double>(excess_rank_penalty(data, latent, k));
}

double continuity(const Matrix& data, const Matrix& latent, int k) {
    return trustworthiness(latent, data, k);
}

double quantization_error(const Matrix& points, const Matrix& refs) {
    if (refs.rows() < 1) throw std::invalid_argument("quantization error needs at least one reference vector");
    if (points.rows() < 1) throw std::invalid_argument("quantization error needs at least one point");
    std::vector<double> dist(static_cast<std::size_t>(points.rows()));
    parallel_for(dist.size(), 64, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const auto x = points.row(static_cast<Index>(i));
            dist[i] = squared_distance(x, refs.row(baselines::bmu(x, refs)));
        }
    });
    double total = 0.0;
    for (double d : dist) total += d;
    return total / static_cast<double>(points.rows());
}

double tuning_score(double tw, double cn) {
    return 0.5 * (tw + cn);
}

}  // namespace topomap::metrics
