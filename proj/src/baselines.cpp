#include "topomap/baselines.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>

#include "topomap/init.hpp"
#include "topomap/parallel.hpp"
#include "topomap/rng.hpp"

namespace topomap::baselines {
namespace {

constexpr std::size_t kRowGrain = 16;
constexpr std::size_t kNodeGrain = 64;
constexpr double kMassFloor = 1e-300;

void check_sigma_lambda(double sigma, double lambda) {
    if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be > 0");
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be > 0");
}

double ordered_sum(const std::vector<double>& parts) {
    double total = 0.0;
    for (double v : parts) total += v;
    return total;
}

// w_j = num_j / den_j, keeping `previous` where the mass underflows.
Matrix divide_or_keep(const Matrix& num, const Vector& den, const Matrix& previous) {
    Matrix w(num.rows(), num.cols());
    for (Index j = 0; j < num.rows(); ++j) {
        w.row(j) = den(j) < kMassFloor ? RowVector(previous.row(j)) : RowVector(num.row(j) / den(j));
    }
    return w;
}

// Softmax each row of `cost` into `p` starting at `row_offset`; returns
// sum p*cost + lambda sum p ln p over those rows.
double softmax_block(const Matrix& cost, Index row_offset, double lambda, Matrix& p) {
    double total = 0.0;
    const Index m = cost.cols();
    for (Index r = 0; r < cost.rows(); ++r) {
        std::span<const double> c(cost.row(r).data(), static_cast<std::size_t>(m));
        std::span<double> out(p.row(row_offset + r).data(), static_cast<std::size_t>(m));
        soft_assign_row(c, lambda, out);
        double fit = 0.0;
        double ent = 0.0;
        for (std::size_t j = 0; j < c.size(); ++j) {
            fit += out[j] * c[j];
            ent += entropy_term(out[j]);
        }
        total += fit + lambda * ent;
    }
    return total;
}

template <typename Iterate>
FitReport run_fit(StvqState& state, const Matrix& points, const FitConfig& cfg, Iterate&& iterate) {
    cfg.validate();
    FitReport report;
    using Clock = std::chrono::steady_clock;
    for (int t = 1; t <= cfg.max_iters; ++t) {
        const auto start = Clock::now();
        const double j = iterate(state, points);
        report.per_iter_ms.push_back(std::chrono::duration<double, std::milli>(Clock::now() - start).count());
        report.objective_trace.push_back(j);
        report.iterations = t;
        if (t >= 2 && relative_change_converged(report.objective_trace[t - 2], j, cfg.tol)) {
            report.converged = true;
            break;
        }
    }
    return report;
}

}  // namespace

Index bmu(const Eigen::Ref<const RowVector>& x, const Matrix& refs) {
    if (refs.rows() < 1) throw std::invalid_argument("bmu needs at least one reference vector");
    if (x.size() != refs.cols()) throw std::invalid_argument("dimension mismatch");
    Index best = 0;
    double best_d = squared_distance(x, refs.row(0));
    for (Index k = 1; k < refs.rows(); ++k) {
        const double d = squared_distance(x, refs.row(k));
        if (d < best_d) {
            best_d = d;
            best = k;
        }
    }
    return best;
}

std::vector<Index> bmus(const Matrix& points, const Matrix& refs) {
    std::vector<Index> out(static_cast<std::size_t>(points.rows()));
    parallel_for(out.size(), kRowGrain, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) out[i] = bmu(points.row(static_cast<Index>(i)), refs);
    });
    return out;
}

Matrix sequential_som_step(const Eigen::Ref<const RowVector>& x,
                           const Matrix& refs,
                           const KernelMatrix& kernel,
                           double eta) {
    if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("eta must lie in (0, 1)");
    if (kernel.normalized) throw std::invalid_argument("sequential SOM expects the unnormalized kernel");
    if (kernel.size() != refs.rows()) throw std::invalid_argument("kernel size must equal node count");
    const Index winner = bmu(x, refs);
    Matrix out = refs;
    for (Index j = 0; j < refs.rows(); ++j) {
        out.row(j) += (eta * kernel.values(j, winner)) * (x - refs.row(j));
    }
    return out;
}

Matrix sequential_som_epoch(const Matrix& points,
                            const Matrix& refs,
                            const KernelMatrix& kernel,
                            double eta,
                            std::uint64_t seed) {
    std::vector<Index> order(static_cast<std::size_t>(points.rows()));
    std::iota(order.begin(), order.end(), Index{0});
    Rng rng(seed);
    for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[rng.below(i)]);
    }
    Matrix w = refs;
    for (Index i : order) w = sequential_som_step(points.row(i), w, kernel, eta);
    return w;
}

BsomState bsom_initialize(const Matrix& points, const LatentGrid& grid, double sigma) {
    grid.validate();
    BsomState s;
    s.grid = grid;
    s.kernel = gaussian_kernel(grid, sigma);
    s.refs = pca_init_refs(points, grid);
    return s;
}

bool bsom_iterate(BsomState& state, const Matrix& points, double* distortion) {
    const Index n = points.rows();
    const Index m = state.refs.rows();
    const Index d = points.cols();

    std::vector<Index> winners(static_cast<std::size_t>(n));
    std::vector<double> row_dist(static_cast<std::size_t>(n));
    parallel_for(static_cast<std::size_t>(n), kRowGrain, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const auto x = points.row(static_cast<Index>(i));
            winners[i] = bmu(x, state.refs);
            row_dist[i] = squared_distance(x, state.refs.row(winners[i]));
        }
    });
    if (distortion) *distortion = ordered_sum(row_dist);
    const bool unchanged = winners == state.bmu;
    state.bmu = std::move(winners);

    // Pool points per BMU so the kernel-weighted update is O(N D + M^2 D).
    Matrix pooled = Matrix::Zero(m, d);
    Vector counts = Vector::Zero(m);
    for (Index i = 0; i < n; ++i) {
        const Index k = state.bmu[static_cast<std::size_t>(i)];
        pooled.row(k) += points.row(i);
        counts(k) += 1.0;
    }
    Matrix num(m, d);
    Vector den(m);
    const Matrix& kv = state.kernel.values;
    parallel_for(static_cast<std::size_t>(m), kNodeGrain, [&](std::size_t b, std::size_t e) {
        const auto j0 = static_cast<Index>(b);
        const auto c = static_cast<Index>(e - b);
        num.middleRows(j0, c).noalias() = kv.middleRows(j0, c) * pooled;
        den.segment(j0, c).noalias() = kv.middleRows(j0, c) * counts;
    });
    state.refs = divide_or_keep(num, den, state.refs);
    return unchanged;
}

BsomResult bsom_fit(const Matrix& points, const LatentGrid& grid, double sigma, const FitConfig& cfg) {
    cfg.validate();
    BsomResult result{bsom_initialize(points, grid, sigma), {}};
    using Clock = std::chrono::steady_clock;
    for (int t = 1; t <= cfg.max_iters; ++t) {
        const auto start = Clock::now();
        double distortion = 0.0;
        const bool unchanged = bsom_iterate(result.state, points, &distortion);
        result.report.per_iter_ms.push_back(std::chrono::duration<double, std::milli>(Clock::now() - start).count());
        result.report.objective_trace.push_back(distortion);
        result.report.iterations = t;
        if (unchanged) {
            result.report.converged = true;
            break;
        }
    }
    return result;
}

double stvq_objective(const StvqState& state, const Matrix& points) {
    const Matrix& p = state.assign.weights;
    const Matrix& h = state.kernel.values;
    const Index n = points.rows();
    const Index m = state.refs.rows();
    std::vector<double> row_objective(static_cast<std::size_t>(n));
    parallel_for(static_cast<std::size_t>(n), kRowGrain, [&](std::size_t b, std::size_t e) {
        Vector dist(m);
        for (auto i = static_cast<Index>(b); i < static_cast<Index>(e); ++i) {
            for (Index k = 0; k < m; ++k) dist(k) = squared_distance(points.row(i), state.refs.row(k));
            double total = 0.0;
            double ent = 0.0;
            for (Index j = 0; j < m; ++j) {
                total += p(i, j) * h.row(j).dot(dist.transpose());
                ent += entropy_term(p(i, j));
            }
            row_objective[static_cast<std::size_t>(i)] = total + state.lambda * ent;
        }
    });
    return ordered_sum(row_objective);
}

Matrix smoothed_refs(const KernelMatrix& kernel, const Matrix& refs) {
    Matrix out(refs.rows(), refs.cols());
    parallel_for(static_cast<std::size_t>(refs.rows()), kNodeGrain, [&](std::size_t b, std::size_t e) {
        const auto j0 = static_cast<Index>(b);
        const auto c = static_cast<Index>(e - b);
        out.middleRows(j0, c).noalias() = kernel.values.middleRows(j0, c) * refs;
    });
    return out;
}

Vector node_variances(const KernelMatrix& kernel, const Matrix& refs, const Matrix& smoothed) {
    const Index m = refs.rows();
    Vector v(m);
    parallel_for(static_cast<std::size_t>(m), kNodeGrain, [&](std::size_t b, std::size_t e) {
        for (auto j = static_cast<Index>(b); j < static_cast<Index>(e); ++j) {
            double s = 0.0;
            for (Index k = 0; k < m; ++k) s += kernel.values(j, k) * squared_distance(refs.row(k), smoothed.row(j));
            v(j) = s;
        }
    });
    return v;
}

StvqState stvq_initialize(const Matrix& points, const LatentGrid& grid, double sigma, double lambda) {
    check_sigma_lambda(sigma, lambda);
    grid.validate();
    StvqState s;
    s.grid = grid;
    s.kernel = normalized_kernel(grid, sigma);
    s.lambda = lambda;
    s.refs = pca_init_refs(points, grid);
    s.assign = init_assignments(points, s.refs, lambda);
    return s;
}

double stvq_iterate(StvqState& state, const Matrix& points) {
    const Index n = points.rows();
    const Index m = state.refs.rows();
    const Matrix& h = state.kernel.values;
    Matrix& p = state.assign.weights;

    // W: w_k = sum_i q_ik x_i / sum_i q_ik with q = P h.
    Matrix q(n, m);
    parallel_for(static_cast<std::size_t>(n), kRowGrain, [&](std::size_t b, std::size_t e) {
        const auto i0 = static_cast<Index>(b);
        const auto c = static_cast<Index>(e - b);
        q.middleRows(i0, c).noalias() = p.middleRows(i0, c) * h;
    });
    Matrix num(m, points.cols());
    Vector den(m);
    parallel_for(static_cast<std::size_t>(m), kNodeGrain, [&](std::size_t b, std::size_t e) {
        const auto j0 = static_cast<Index>(b);
        const auto c = static_cast<Index>(e - b);
        num.middleRows(j0, c).noalias() = q.middleCols(j0, c).transpose() * points;
        den.segment(j0, c) = q.middleCols(j0, c).colwise().sum().transpose();
    });
    state.refs = divide_or_keep(num, den, state.refs);
    q.resize(0, 0);

    // P: softmax of E_i(r_j) = sum_k h_jk |x_i - w_k|^2.
    std::vector<double> block_objective((static_cast<std::size_t>(n) + kRowGrain - 1) / kRowGrain);
    parallel_for(static_cast<std::size_t>(n), kRowGrain, [&](std::size_t b, std::size_t e) {
        const auto i0 = static_cast<Index>(b);
        const auto c = static_cast<Index>(e - b);
        Matrix dist(c, m);
        for (Index r = 0; r < c; ++r) {
            for (Index k = 0; k < m; ++k) dist(r, k) = squared_distance(points.row(i0 + r), state.refs.row(k));
        }
        const Matrix conv = dist * h.transpose();
        block_objective[b / kRowGrain] = softmax_block(conv, i0, state.lambda, p);
    });
    const double j = ordered_sum(block_objective);
    if (!std::isfinite(j)) throw NumericalError("objective became non-finite");
    return j;
}

double stvqf_iterate(StvqState& state, const Matrix& points) {
    const Index n = points.rows();
    const Index m = state.refs.rows();
    const Matrix& h = state.kernel.values;
    Matrix& p = state.assign.weights;

    // W: same stationary point as the direct form, pooled as h' (P' X).
    Matrix pooled(m, points.cols());
    Vector mass(m);
    parallel_for(static_cast<std::size_t>(m), kNodeGrain, [&](std::size_t b, std::size_t e) {
        const auto j0 = static_cast<Index>(b);
        const auto c = static_cast<Index>(e - b);
        pooled.middleRows(j0, c).noalias() = p.middleCols(j0, c).transpose() * points;
        mass.segment(j0, c) = p.middleCols(j0, c).colwise().sum().transpose();
    });
    Matrix num(m, points.cols());
    Vector den(m);
    parallel_for(static_cast<std::size_t>(m), kNodeGrain, [&](std::size_t b, std::size_t e) {
        const auto k0 = static_cast<Index>(b);
        const auto c = static_cast<Index>(e - b);
        num.middleRows(k0, c).noalias() = h.middleCols(k0, c).transpose() * pooled;
        den.segment(k0, c).noalias() = h.middleCols(k0, c).transpose() * mass;
    });
    state.refs = divide_or_keep(num, den, state.refs);

    // P: softmax of |x_i - w~_j|^2 + V_j.
    const Matrix smooth = smoothed_refs(state.kernel, state.refs);
    const Vector variance = node_variances(state.kernel, state.refs, smooth);
    std::vector<double> block_objective((static_cast<std::size_t>(n) + kRowGrain - 1) / kRowGrain);
    parallel_for(static_cast<std::size_t>(n), kRowGrain, [&](std::size_t b, std::size_t e) {
        const auto i0 = static_cast<Index>(b);
        const auto c = static_cast<Index>(e - b);
        Matrix cost(c, m);
        for (Index r = 0; r < c; ++r) {
            for (Index j = 0; j < m; ++j) cost(r, j) = squared_distance(points.row(i0 + r), smooth.row(j)) + variance(j);
        }
        block_objective[b / kRowGrain] = softmax_block(cost, i0, state.lambda, p);
    });
    const double j = ordered_sum(block_objective);
    if (!std::isfinite(j)) throw NumericalError("objective became non-finite");
    return j;
}

StvqResult stvq_fit(const Matrix& points, const LatentGrid& grid, double sigma, double lambda, const FitConfig& cfg) {
    StvqResult r{stvq_initialize(points, grid, sigma, lambda), {}};
    r.report = run_fit(r.state, points, cfg, stvq_iterate);
    return r;
}

StvqResult stvqf_fit(const Matrix& points, const LatentGrid& grid, double sigma, double lambda, const FitConfig& cfg) {
    StvqResult r{stvq_initialize(points, grid, sigma, lambda), {}};
    r.report = run_fit(r.state, points, cfg, stvqf_iterate);
    return r;
}

Matrix pca_project(const Matrix& points, Index latent_dim) {
    const PcaBasis basis = pca(points, latent_dim);
    return (points.rowwise() - basis.mean) * basis.directions.transpose();
}

Matrix bmu_latents(const LatentGrid& grid, const std::vector<Index>& bmu) {
    Matrix out(static_cast<Index>(bmu.size()), grid.dim());
    for (std::size_t i = 0; i < bmu.size(); ++i) out.row(static_cast<Index>(i)) = grid.coords.row(bmu[i]);
    return out;
}

Matrix argmax_latents(const LatentGrid& grid, const Assignments& assign) {
    const Matrix& p = assign.weights;
    Matrix out(p.rows(), grid.dim());
    for (Index i = 0; i < p.rows(); ++i) {
        Index best = 0;
        for (Index j = 1; j < p.cols(); ++j) {
            if (p(i, j) > p(i, best)) best = j;
        }
        out.row(i) = grid.coords.row(best);
    }
    return out;
}

}  // namespace topomap::baselines
