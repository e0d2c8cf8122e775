/**
 * @file bench.hpp
 * @brief Per-iteration timing harness and cross-dataset rank statistics.
 */

#pragma once

#include <string>
#include <vector>

#include "topomap/core.hpp"
#include "topomap/methods.hpp"

namespace topomap::bench {

enum class Outcome { Ok, OutOfMemory };

struct TimingResult {
    Method method = Method::SomOlp;
    Index nodes = 0;
    Index points = 0;
    double mean_ms = 0.0;
    double cv = 0.0;                // coefficient of variation of the samples
    std::vector<double> samples_ms; // T timed iterations
    Outcome outcome = Outcome::Ok;
};

struct TimingOptions {
    int iterations = 20;  // T
    int latent_dim = 2;
    /// Runs whose estimated working set exceeds this many bytes are reported
    /// as out-of-memory without being attempted. <= 0 uses 80% of physical memory.
    double memory_budget_bytes = 0.0;
};

/// Physical memory in bytes (0 if unknown).
double physical_memory_bytes();

/**
 * @brief Mean wall-clock milliseconds of one full update on a side^L grid.
 *
 * Initialization and one warm-up iteration are excluded; exactly T further
 * iterations are timed with no convergence check. Allocation failure is
 * reported as Outcome::OutOfMemory.
 */
TimingResult time_per_iteration(Method m, const Matrix& points, int grid_side, const MethodParams& params,
                                const TimingOptions& opts = {});

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// CSV with columns method,M,N,mean_ms,cv,outcome.
void write_timing_csv(const std::vector<TimingResult>& rows, const std::string& path);

/// scores[method][dataset]. Per dataset the best method gets rank 1; tied
/// methods share the mean of their ranks. Returns the per-method mean rank.
std::vector<double> average_ranks(const std::vector<std::vector<double>>& scores, bool higher_is_better = true);

struct FriedmanResult {
    double chi_square = 0.0;
    int df = 0;
    double p_value = 1.0;
};

/// chi^2 = 12 / (n k (k + 1)) sum_j R_j^2 - 3 n (k + 1) over mid-ranks, without
/// tie correction; df = k - 1; p from the chi-square upper tail.
FriedmanResult friedman_statistic(const std::vector<std::vector<double>>& scores, bool higher_is_better = true);

}  // namespace topomap::bench
