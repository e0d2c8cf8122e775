#include "topomap/methods.hpp"

#include <stdexcept>

#include "topomap/baselines.hpp"
#include "topomap/metrics.hpp"
#include "topomap/som_olp.hpp"

namespace topomap {
namespace {

class SomOlpStepper final : public Stepper {
public:
    SomOlpStepper(const Matrix& points, const LatentGrid& grid, const HyperParams& hp)
        : points_(points), state_(som_olp::initialize(points, grid, hp)) {}
    void step() override { som_olp::iterate(state_, points_); }

private:
    const Matrix& points_;
    som_olp::State state_;
};

class BsomStepper final : public Stepper {
public:
    BsomStepper(const Matrix& points, const LatentGrid& grid, double sigma)
        : points_(points), state_(baselines::bsom_initialize(points, grid, sigma)) {}
    void step() override { baselines::bsom_iterate(state_, points_); }

private:
    const Matrix& points_;
    baselines::BsomState state_;
};

class StvqStepper final : public Stepper {
public:
    StvqStepper(const Matrix& points, const LatentGrid& grid, double sigma, double lambda, bool fast)
        : points_(points), state_(baselines::stvq_initialize(points, grid, sigma, lambda)), fast_(fast) {}
    void step() override {
        if (fast_) {
            baselines::stvqf_iterate(state_, points_);
        } else {
            baselines::stvq_iterate(state_, points_);
        }
    }

private:
    const Matrix& points_;
    baselines::StvqState state_;
    bool fast_;
};

}  // namespace

std::string_view method_name(Method m) {
    switch (m) {
        case Method::SomOlp: return "som-olp";
        case Method::Bsom: return "bsom";
        case Method::Stvq: return "stvq";
        case Method::Stvqf: return "stvqf";
        case Method::Pca: return "pca";
    }
    return "unknown";
}

std::optional<Method> parse_method(std::string_view name) {
    for (Method m : {Method::SomOlp, Method::Bsom, Method::Stvq, Method::Stvqf, Method::Pca}) {
        if (method_name(m) == name) return m;
    }
    return std::nullopt;
}

void require_params(Method m, const MethodParams& p) {
    std::string missing;
    auto need = [&](const std::optional<double>& v, const char* name) {
        if (!v) missing += missing.empty() ? name : std::string(", ") + name;
    };
    switch (m) {
        case Method::SomOlp:
            need(p.gamma, "gamma");
            need(p.lambda, "lambda");
            break;
        case Method::Bsom:
            need(p.sigma, "sigma");
            break;
        case Method::Stvq:
        case Method::Stvqf:
            need(p.sigma, "sigma");
            need(p.lambda, "lambda");
            break;
        case Method::Pca:
            break;
    }
    if (!missing.empty()) {
        throw std::invalid_argument(std::string(method_name(m)) + " requires " + missing);
    }
}

MethodResult fit_method(Method m, const Matrix& points, const LatentGrid& grid,
                        const MethodParams& params, const FitConfig& cfg) {
    require_params(m, params);
    MethodResult out;
    out.method = m;
    switch (m) {
        case Method::SomOlp: {
            auto [state, report] = som_olp::fit(points, grid, HyperParams(*params.gamma, *params.lambda), cfg);
            out.latents = std::move(state.model.latents);
            out.refs = std::move(state.model.refs);
            out.assign = std::move(state.assign);
            out.report = std::move(report);
            break;
        }
        case Method::Bsom: {
            auto r = baselines::bsom_fit(points, grid, *params.sigma, cfg);
            out.latents = baselines::bmu_latents(grid, baselines::bmus(points, r.state.refs));
            out.refs = std::move(r.state.refs);
            out.report = std::move(r.report);
            break;
        }
        case Method::Stvq:
        case Method::Stvqf: {
            auto r = m == Method::Stvq ? baselines::stvq_fit(points, grid, *params.sigma, *params.lambda, cfg)
                                       : baselines::stvqf_fit(points, grid, *params.sigma, *params.lambda, cfg);
            out.latents = baselines::argmax_latents(grid, r.state.assign);
            out.refs = std::move(r.state.refs);
            out.assign = std::move(r.state.assign);
            out.report = std::move(r.report);
            break;
        }
        case Method::Pca:
            out.latents = baselines::pca_project(points, grid.dim());
            out.report.converged = true;
            break;
    }
    return out;
}

Evaluation evaluate(const Matrix& points, const MethodResult& result, int k) {
    Evaluation e;
    e.k = k;
    e.tw = metrics::trustworthiness(points, result.latents, k);
    e.cn = metrics::continuity(points, result.latents, k);
    e.score = metrics::tuning_score(e.tw, e.cn);
    if (result.refs) e.qe = metrics::quantization_error(points, *result.refs);
    return e;
}

std::unique_ptr<Stepper> make_stepper(Method m, const Matrix& points, const LatentGrid& grid,
                                      const MethodParams& params) {
    require_params(m, params);
    switch (m) {
        case Method::SomOlp:
            return std::make_unique<SomOlpStepper>(points, grid, HyperParams(*params.gamma, *params.lambda));
        case Method::Bsom:
            return std::make_unique<BsomStepper>(points, grid, *params.sigma);
        case Method::Stvq:
            return std::make_unique<StvqStepper>(points, grid, *params.sigma, *params.lambda, false);
        case Method::Stvqf:
            return std::make_unique<StvqStepper>(points, grid, *params.sigma, *params.lambda, true);
        case Method::Pca:
            break;
    }
    throw std::invalid_argument("pca is not iterative");
}

double estimated_bytes(Method m, Index n, Index nodes, Index dim, Index latent_dim) {
    const double nd = static_cast<double>(n);
    const double md = static_cast<double>(nodes);
    const double per_node = md * static_cast<double>(dim + latent_dim);
    const double data = nd * static_cast<double>(dim + latent_dim);
    const double b = sizeof(double);
    switch (m) {
        case Method::SomOlp: return b * (nd * md + 3.0 * per_node + data);
        case Method::Bsom: return b * (md * md + 4.0 * per_node + data);
        case Method::Stvq: return b * (md * md + 3.0 * nd * md + 3.0 * per_node + data);
        case Method::Stvqf: return b * (md * md + nd * md + 5.0 * per_node + data);
        case Method::Pca: return b * (data + static_cast<double>(dim * dim));
    }
    return 0.0;
}

}  // namespace topomap
