/**
 * @file tune.hpp
 * @brief Seeded random search over log/linear hyperparameter ranges.
 *
 * A study draws `trials` parameter sets and keeps the one with the highest
 * (TW + CN) / 2. Several studies with derived seeds are run and the kept
 * trial with the smallest quantization error is returned.
 */

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "topomap/core.hpp"
#include "topomap/methods.hpp"

namespace topomap::tune {

enum class Scale { Linear, Log };

struct ParamRange {
    std::string name;
    double low = 0.0;
    double high = 1.0;
    Scale scale = Scale::Linear;
    bool integer = false;
};

class SearchSpace {
public:
    SearchSpace() = default;
    explicit SearchSpace(std::vector<ParamRange> entries);

    const std::vector<ParamRange>& entries() const { return entries_; }

private:
    std::vector<ParamRange> entries_;
};

/// Ranges searched for each method: every continuous hyperparameter is
/// log-uniform on [1e-3, 1e3].
SearchSpace default_space(Method m);

using Params = std::map<std::string, double>;

/// Deterministic draw number `index` of the stream identified by `seed`.
Params sample(const SearchSpace& space, std::uint64_t seed, std::uint64_t index);

MethodParams to_method_params(const Params& p);

struct TrialRecord {
    int study = 0;
    int trial = 0;
    Params params;
    double score = 0.0;
    double qe = 0.0;
    double tw = 0.0;
    double cn = 0.0;
    int iterations = 0;
    bool converged = false;
};

struct StudyOptions {
    int trials = 100;
    int studies = 5;
    std::uint64_t seed = 0;
    int k = 5;
    FitConfig fit;
};

struct StudyResult {
    TrialRecord best;
    std::vector<TrialRecord> trials;  // every recorded (non-skipped) trial
    int skipped = 0;
};

/// Trial runner; the default fits with fit_method and scores with evaluate.
using TrialFn = std::function<TrialRecord(const Params&)>;

StudyResult run_study(Method m, const Matrix& points, const LatentGrid& grid, const SearchSpace& space,
                      const StudyOptions& opts);

/// The selection protocol on its own, for a custom trial function. Trials
/// whose function throws or returns non-finite metrics are skipped.
StudyResult run_study(const TrialFn& run_trial, const SearchSpace& space, const StudyOptions& opts);

/// One CSV row per trial: study, trial, each parameter, score, tw, cn, qe, iterations, converged.
void write_trials_csv(const StudyResult& result, const SearchSpace& space, const std::string& path);

}  // namespace topomap::tune
