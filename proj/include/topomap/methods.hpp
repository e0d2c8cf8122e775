/**
 * @file methods.hpp
 * @brief Uniform entry point over SOM-OLP and the baselines, used by the
 * tuner, the benchmark harness and the command line.
 */

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "topomap/core.hpp"

namespace topomap {

enum class Method { SomOlp, Bsom, Stvq, Stvqf, Pca };

std::string_view method_name(Method m);
std::optional<Method> parse_method(std::string_view name);

/// Hyperparameters by name; each method reads only the ones it needs.
struct MethodParams {
    std::optional<double> gamma;
    std::optional<double> lambda;
    std::optional<double> sigma;
};

/// Throws std::invalid_argument naming any hyperparameter the method needs but lacks.
void require_params(Method m, const MethodParams& params);

struct MethodResult {
    Method method = Method::SomOlp;
    Matrix latents;                     // N x L representation for the metrics
    std::optional<Matrix> refs;         // absent for PCA
    std::optional<Assignments> assign;  // soft methods only
    FitReport report;
};

/**
 * @brief Fits `m` and extracts its latent representation: V for SOM-OLP,
 * BMU node coordinates for batch SOM, argmax node coordinates for STVQ and
 * the projection itself for PCA.
 */
MethodResult fit_method(Method m, const Matrix& points, const LatentGrid& grid,
                        const MethodParams& params, const FitConfig& cfg);

struct Evaluation {
    double tw = 0.0;
    double cn = 0.0;
    std::optional<double> qe;
    double score = 0.0;
    int k = 5;
};

Evaluation evaluate(const Matrix& points, const MethodResult& result, int k = 5);

/// An initialized iterative method that can be advanced one full update at a time.
class Stepper {
public:
    virtual ~Stepper() = default;
    virtual void step() = 0;
};

/// Initializes `m` (not timed by callers) and returns a stepper. PCA is not iterative.
std::unique_ptr<Stepper> make_stepper(Method m, const Matrix& points, const LatentGrid& grid,
                                      const MethodParams& params);

/// Dominant working-set size of one fit in bytes.
double estimated_bytes(Method m, Index n, Index nodes, Index dim, Index latent_dim);

}  // namespace topomap
