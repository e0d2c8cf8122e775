#include "topomap/bench.hpp"

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <new>
#include <numeric>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

#include "topomap/data.hpp"

namespace topomap::bench {
namespace {

void check_scores(const std::vector<std::vector<double>>& scores) {
    if (scores.size() < 2) throw std::invalid_argument("need at least two methods");
    const std::size_t datasets = scores.front().size();
    if (datasets < 1) throw std::invalid_argument("need at least one dataset");
    for (const auto& row : scores) {
        if (row.size() != datasets) throw std::invalid_argument("score matrix is ragged");
        for (double v : row) {
            if (!std::isfinite(v)) throw std::invalid_argument("score matrix has missing entries");
        }
    }
}

// ranks[method][dataset] with mid-ranks for ties.
std::vector<std::vector<double>> rank_matrix(const std::vector<std::vector<double>>& scores, bool higher_is_better) {
    check_scores(scores);
    const std::size_t k = scores.size();
    const std::size_t n = scores.front().size();
    std::vector<std::vector<double>> ranks(k, std::vector<double>(n));
    std::vector<std::size_t> order(k);
    for (std::size_t d = 0; d < n; ++d) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return higher_is_better ? scores[a][d] > scores[b][d] : scores[a][d] < scores[b][d];
        });
        for (std::size_t start = 0; start < k;) {
            std::size_t stop = start + 1;
            while (stop < k && scores[order[stop]][d] == scores[order[start]][d]) ++stop;
            const double mid = 0.5 * static_cast<double>(start + 1 + stop);
            for (std::size_t r = start; r < stop; ++r) ranks[order[r]][d] = mid;
            start = stop;
        }
    }
    return ranks;
}

}  // namespace

double physical_memory_bytes() {
    const long pages = sysconf(_SC_PHYS_PAGES);
    const long page_size = sysconf(_SC_PAGE_SIZE);
    if (pages <= 0 || page_size <= 0) return 0.0;
    return static_cast<double>(pages) * static_cast<double>(page_size);
}

TimingResult time_per_iteration(Method m, const Matrix& points, int grid_side, const MethodParams& params,
                                const TimingOptions& opts) {
    if (opts.iterations < 1) throw std::invalid_argument("iteration count must be >= 1");
    const LatentGrid grid = make_square_grid(grid_side, opts.latent_dim);

    TimingResult r;
    r.method = m;
    r.nodes = grid.size();
    r.points = points.rows();

    double budget = opts.memory_budget_bytes;
    if (budget <= 0.0) budget = 0.8 * physical_memory_bytes();
    if (budget > 0.0 && estimated_bytes(m, points.rows(), grid.size(), points.cols(), grid.dim()) > budget) {
        r.outcome = Outcome::OutOfMemory;
        return r;
    }

    using Clock = std::chrono::steady_clock;
    try {
        auto stepper = make_stepper(m, points, grid, params);
        stepper->step();  // warm-up
        for (int t = 0; t < opts.iterations; ++t) {
            const auto start = Clock::now();
            stepper->step();
            r.samples_ms.push_back(std::chrono::duration<double, std::milli>(Clock::now() - start).count());
        }
    } catch (const std::bad_alloc&) {
        r.outcome = Outcome::OutOfMemory;
        r.samples_ms.clear();
        return r;
    }

    const double n = static_cast<double>(r.samples_ms.size());
    r.mean_ms = std::accumulate(r.samples_ms.begin(), r.samples_ms.end(), 0.0) / n;
    double var = 0.0;
    for (double s : r.samples_ms) var += (s - r.mean_ms) * (s - r.mean_ms);
    var /= n;
    r.cv = r.mean_ms > 0.0 ? std::sqrt(var) / r.mean_ms : 0.0;
    return r;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("slope needs two or more paired samples");
    const double n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0 && y[i] > 0.0)) throw std::invalid_argument("log-log slope needs positive samples");
        sx += std::log(x[i]);
        sy += std::log(y[i]);
    }
    const double mx = sx / n;
    const double my = sy / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    if (sxx == 0.0) throw std::invalid_argument("slope needs distinct x values");
    return sxy / sxx;
}

void write_timing_csv(const std::vector<TimingResult>& rows, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    out << "method,M,N,mean_ms,cv,outcome\n";
    for (const auto& r : rows) {
        out << method_name(r.method) << ',' << r.nodes << ',' << r.points << ',';
        if (r.outcome == Outcome::Ok) {
            out << data::format_double(r.mean_ms) << ',' << data::format_double(r.cv) << ",ok\n";
        } else {
            out << ",,oom\n";
        }
    }
}

std::vector<double> average_ranks(const std::vector<std::vector<double>>& scores, bool higher_is_better) {
    const auto ranks = rank_matrix(scores, higher_is_better);
    std::vector<double> mean(ranks.size());
    for (std::size_t j = 0; j < ranks.size(); ++j) {
        mean[j] = std::accumulate(ranks[j].begin(), ranks[j].end(), 0.0) / static_cast<double>(ranks[j].size());
    }
    return mean;
}

FriedmanResult friedman_statistic(const std::vector<std::vector<double>>& scores, bool higher_is_better) {
    const auto ranks = rank_matrix(scores, higher_is_better);
    const double k = static_cast<double>(ranks.size());
    const double n = static_cast<double>(ranks.front().size());
    if (n < 2) throw std::invalid_argument("friedman test needs at least two datasets");
    double sum_sq = 0.0;
    for (const auto& row : ranks) {
        const double r = std::accumulate(row.begin(), row.end(), 0.0);
        sum_sq += r * r;
    }
    FriedmanResult f;
    f.chi_square = 12.0 / (n * k * (k + 1.0)) * sum_sq - 3.0 * n * (k + 1.0);
    if (std::abs(f.chi_square) < 1e-12 * n * k) f.chi_square = 0.0;
    f.df = static_cast<int>(k) - 1;
    f.p_value = f.chi_square <= 0.0 ? 1.0 : boost::math::gamma_q(0.5 * f.df, 0.5 * f.chi_square);
    return f;
}

}  // namespace topomap::bench
