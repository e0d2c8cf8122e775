#include "topomap/som_olp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <span>
#include <stdexcept>

#include "topomap/init.hpp"
#include "topomap/kernels.hpp"
#include "topomap/parallel.hpp"

namespace topomap::som_olp {
namespace {

constexpr std::size_t kRowGrain = 16;
constexpr std::size_t kNodeGrain = 64;
constexpr Index kNodeBlock = 256;
constexpr double kMassFloor = 1e-300;

void check_shapes(const Matrix& points, const MapModel& model) {
    if (model.refs.rows() != model.grid.size()) throw std::invalid_argument("refs must have one row per node");
    if (model.refs.cols() != points.cols()) throw std::invalid_argument("refs and points differ in dimension");
}

double ordered_sum(const std::vector<double>& parts) {
    double total = 0.0;
    for (double v : parts) total += v;
    return total;
}

// Local costs of points [b, e) against every node into the rows of `costs`.
// Nodes are visited in blocks so a block of reference vectors stays in cache
// while every point of the chunk is scored against it.
void chunk_costs(const Matrix& points, const MapModel& model, double gamma, Index b, Index e, Matrix& costs) {
    const Index m = model.refs.rows();
    const bool has_latent = gamma != 0.0;
    costs.resize(e - b, m);
    for (Index j0 = 0; j0 < m; j0 += kNodeBlock) {
        const Index j1 = std::min(m, j0 + kNodeBlock);
        for (Index i = b; i < e; ++i) {
            const auto x = points.row(i);
            for (Index j = j0; j < j1; ++j) {
                double c = squared_distance(x, model.refs.row(j));
                if (has_latent) c += gamma * squared_distance(model.latents.row(i), model.grid.coords.row(j));
                costs(i - b, j) = c;
            }
        }
    }
}

// P update fused with the objective evaluation at the new P.
double assign_and_score(const Matrix& points, const MapModel& model, double gamma, double lambda, Matrix& p) {
    const Index n = points.rows();
    const Index m = model.refs.rows();
    p.resize(n, m);
    std::vector<double> row_objective(static_cast<std::size_t>(n));
    parallel_for(static_cast<std::size_t>(n), kRowGrain, [&](std::size_t b, std::size_t e) {
        Matrix costs;
        chunk_costs(points, model, gamma, static_cast<Index>(b), static_cast<Index>(e), costs);
        for (auto i = static_cast<Index>(b); i < static_cast<Index>(e); ++i) {
            std::span<const double> cost(costs.row(i - static_cast<Index>(b)).data(), static_cast<std::size_t>(m));
            std::span<double> row(p.row(i).data(), static_cast<std::size_t>(m));
            soft_assign_row(cost, lambda, row);
            double fit = 0.0;
            double ent = 0.0;
            for (std::size_t j = 0; j < cost.size(); ++j) {
                fit += row[j] * cost[j];
                ent += entropy_term(row[j]);
            }
            row_objective[static_cast<std::size_t>(i)] = fit + lambda * ent;
        }
    });
    return ordered_sum(row_objective);
}

}  // namespace

double local_cost(const Eigen::Ref<const RowVector>& x,
                  const Eigen::Ref<const RowVector>& w,
                  const Eigen::Ref<const RowVector>& v,
                  const Eigen::Ref<const RowVector>& r,
                  double gamma) {
    if (!(gamma >= 0.0)) throw std::invalid_argument("gamma must be >= 0");
    return squared_distance(x, w) + gamma * squared_distance(v, r);
}

double objective(const State& state, const Matrix& points) {
    const MapModel& model = state.model;
    check_shapes(points, model);
    const Matrix& p = state.assign.weights;
    if (p.rows() != points.rows() || p.cols() != model.grid.size()) {
        throw std::invalid_argument("assignment shape mismatch");
    }
    const double gamma = state.hp.gamma();
    const double lambda = state.hp.lambda();
    const Index n = points.rows();
    const Index m = p.cols();
    std::vector<double> row_objective(static_cast<std::size_t>(n));
    parallel_for(static_cast<std::size_t>(n), kRowGrain, [&](std::size_t b, std::size_t e) {
        Matrix costs;
        chunk_costs(points, model, gamma, static_cast<Index>(b), static_cast<Index>(e), costs);
        for (auto i = static_cast<Index>(b); i < static_cast<Index>(e); ++i) {
            double fit = 0.0;
            double ent = 0.0;
            for (Index j = 0; j < m; ++j) {
                fit += p(i, j) * costs(i - static_cast<Index>(b), j);
                ent += entropy_term(p(i, j));
            }
            row_objective[static_cast<std::size_t>(i)] = fit + lambda * ent;
        }
    });
    return ordered_sum(row_objective);
}

Assignments update_assignments(const Matrix& points, const MapModel& model, double gamma, double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be > 0");
    if (!(gamma >= 0.0)) throw std::invalid_argument("gamma must be >= 0");
    check_shapes(points, model);
    Assignments a;
    assign_and_score(points, model, gamma, lambda, a.weights);
    return a;
}

Matrix update_latents(const Assignments& assign, const LatentGrid& grid) {
    const Matrix& p = assign.weights;
    if (p.cols() != grid.size()) throw std::invalid_argument("assignment columns must equal node count");
    Matrix v(p.rows(), grid.dim());
    parallel_for(static_cast<std::size_t>(p.rows()), kRowGrain, [&](std::size_t b, std::size_t e) {
        const auto rows = static_cast<Index>(e - b);
        v.middleRows(static_cast<Index>(b), rows).noalias() = p.middleRows(static_cast<Index>(b), rows) * grid.coords;
    });
    return v;
}

Matrix update_refs(const Assignments& assign, const Matrix& points, const Matrix& previous) {
    const Matrix& p = assign.weights;
    if (p.rows() != points.rows()) throw std::invalid_argument("assignment rows must equal point count");
    if (previous.rows() != p.cols() || previous.cols() != points.cols()) {
        throw std::invalid_argument("previous refs shape mismatch");
    }
    Matrix w(p.cols(), points.cols());
    parallel_for(static_cast<std::size_t>(p.cols()), kNodeGrain, [&](std::size_t b, std::size_t e) {
        const auto j0 = static_cast<Index>(b);
        const auto count = static_cast<Index>(e - b);
        const auto block = p.middleCols(j0, count);
        Matrix num = block.transpose() * points;
        const RowVector mass = block.colwise().sum();
        for (Index c = 0; c < count; ++c) {
            if (mass(c) < kMassFloor) {
                w.row(j0 + c) = previous.row(j0 + c);
            } else {
                w.row(j0 + c) = num.row(c) / mass(c);
            }
        }
    });
    return w;
}

State initialize(const Matrix& points, const LatentGrid& grid, const HyperParams& hp) {
    grid.validate();
    if (points.rows() < 1 || points.cols() < 1) throw std::invalid_argument("empty data");
    State s{MapModel{grid, pca_init_refs(points, grid), Matrix{}}, Assignments{}, hp};
    s.assign = init_assignments(points, s.model.refs, hp.lambda());
    s.model.latents = update_latents(s.assign, grid);
    return s;
}

double iterate(State& state, const Matrix& points) {
    state.model.latents = update_latents(state.assign, state.model.grid);
    state.model.refs = update_refs(state.assign, points, state.model.refs);
    const double j = assign_and_score(points, state.model, state.hp.gamma(), state.hp.lambda(), state.assign.weights);
    if (!std::isfinite(j)) throw NumericalError("objective became non-finite");
    return j;
}

std::pair<State, FitReport> fit(const Matrix& points,
                                const LatentGrid& grid,
                                const HyperParams& hp,
                                const FitConfig& cfg,
                                const IterationCallback& on_iteration) {
    cfg.validate();
    State state = initialize(points, grid, hp);
    FitReport report;
    using Clock = std::chrono::steady_clock;
    for (int t = 1; t <= cfg.max_iters; ++t) {
        const auto start = Clock::now();
        const double j = iterate(state, points);
        report.per_iter_ms.push_back(std::chrono::duration<double, std::milli>(Clock::now() - start).count());
        report.objective_trace.push_back(j);
        report.iterations = t;
        if (on_iteration) on_iteration(t, state);
        if (t >= 2 && relative_change_converged(report.objective_trace[t - 2], j, cfg.tol)) {
            report.converged = true;
            break;
        }
    }
    return {std::move(state), std::move(report)};
}

double objective_laplacian_form(const Assignments& assign,
                                const Matrix& points,
                                const LatentGrid& grid,
                                double gamma,
                                double lambda) {
    const Matrix& p = assign.weights;
    if (p.rows() != points.rows() || p.cols() != grid.size()) throw std::invalid_argument("assignment shape mismatch");

    const RowVector mass = p.colwise().sum();
    const Matrix pooled_data = p.transpose() * points;       // M x D
    const Matrix pooled_latent = p * grid.coords;            // N x L

    // tr(X' (I - P Dn^-1 P') X)
    double data_term = points.squaredNorm();
    for (Index j = 0; j < p.cols(); ++j) {
        if (mass(j) >= kMassFloor) data_term -= pooled_data.row(j).squaredNorm() / mass(j);
    }

    // tr(R' (Dn - P'P) R)
    double latent_term = 0.0;
    for (Index j = 0; j < p.cols(); ++j) latent_term += mass(j) * grid.coords.row(j).squaredNorm();
    latent_term -= pooled_latent.squaredNorm();

    double ent = 0.0;
    for (Index i = 0; i < p.rows(); ++i) {
        for (Index j = 0; j < p.cols(); ++j) ent += entropy_term(p(i, j));
    }
    return data_term + gamma * latent_term + lambda * ent;
}

}  // namespace topomap::som_olp
