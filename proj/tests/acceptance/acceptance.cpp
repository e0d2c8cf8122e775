// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "support/test_util.hpp"
#include "topomap/baselines.hpp"
#include "topomap/bench.hpp"
#include "topomap/data.hpp"
#include "topomap/init.hpp"
#include "topomap/metrics.hpp"
#include "topomap/rng.hpp"
#include "topomap/som_olp.hpp"

using namespace topomap;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(4);
    s << v;
    return s.str();
}

double log_uniform(Rng& rng, double lo, double hi) { return std::pow(10.0, rng.uniform(std::log10(lo), std::log10(hi))); }

// Random free-form grid of m nodes in the plane.
LatentGrid random_grid(Index m, std::uint64_t seed) { return make_grid(testing::random_matrix(m, 2, seed)); }

som_olp::State state_at_closed_form(const Matrix& x, const LatentGrid& g, const Assignments& p, double gamma, double lambda) {
    som_olp::State s{MapModel{g, Matrix::Zero(g.size(), x.cols()), Matrix{}}, p, HyperParams(gamma, lambda)};
    s.model.latents = som_olp::update_latents(p, g);
    s.model.refs = som_olp::update_refs(p, x, s.model.refs);
    return s;
}

Outcome monotone_descent() {
    Rng rng(1);
    double worst = 0.0;
    for (int inst = 0; inst < 50; ++inst) {
        const Index n = 10 + static_cast<Index>(rng.below(191));
        const int side = 1 + static_cast<int>(rng.below(8));
        const Index d = 1 + static_cast<Index>(rng.below(10));
        const double gamma = log_uniform(rng, 1e-2, 1e2);
        const double lambda = log_uniform(rng, 1e-2, 1e2);
        const Matrix x = testing::random_matrix(n, d, 100 + static_cast<std::uint64_t>(inst));
        const auto [state, report] = som_olp::fit(x, make_square_grid(side), HyperParams(gamma, lambda), FitConfig{});
        const auto& tr = report.objective_trace;
        for (std::size_t t = 1; t < tr.size(); ++t) {
            const double excess = (tr[t] - tr[t - 1]) / std::max(std::abs(tr[t - 1]), 1e-3);
            worst = std::max(worst, excess);
            if (tr[t] > tr[t - 1] + 1e-9 * std::abs(tr[t - 1]) + 1e-12) {
                return {false, "instance " + std::to_string(inst) + " rose at iteration " + std::to_string(t + 1)};
            }
        }
    }
    return {true, "50 instances, largest relative rise " + fmt(worst)};
}

Outcome laplacian_equivalence() {
    Rng rng(2);
    double worst = 0.0;
    for (int inst = 0; inst < 100; ++inst) {
        const Index n = 1 + static_cast<Index>(rng.below(10));
        const Index m = 1 + static_cast<Index>(rng.below(10));
        const Index d = 1 + static_cast<Index>(rng.below(5));
        const double gamma = log_uniform(rng, 1e-2, 1e2);
        const double lambda = log_uniform(rng, 1e-2, 1e2);
        const auto seed = 1000 + static_cast<std::uint64_t>(inst) * 3;
        const Matrix x = testing::random_matrix(n, d, seed);
        const LatentGrid g = random_grid(m, seed + 1);
        const Assignments p = testing::random_assignments(n, m, seed + 2);
        const som_olp::State s = state_at_closed_form(x, g, p, gamma, lambda);
        const double direct = som_olp::objective(s, x);
        const double lap = som_olp::objective_laplacian_form(p, x, g, gamma, lambda);
        worst = std::max(worst, std::abs(direct - lap) / std::max(std::abs(direct), 1e-300));
    }
    return {worst <= 1e-8, "100 instances, max relative gap " + fmt(worst)};
}

Outcome efcm_reduction() {
    double worst = 0.0;
    Rng rng(3);
    for (int inst = 0; inst < 10; ++inst) {
        const Index n = 20 + static_cast<Index>(rng.below(80));
        const int side = 2 + static_cast<int>(rng.below(4));
        const double lambda = log_uniform(rng, 1e-2, 1.0);
        const Matrix x = testing::random_matrix(n, 3, 2000 + static_cast<std::uint64_t>(inst));
        som_olp::State s = som_olp::initialize(x, make_square_grid(side), HyperParams(0.0, lambda));
        testing::EfcmOracle oracle{x, s.model.refs, s.assign.weights, lambda};
        for (int t = 0; t < 20; ++t) {
            som_olp::iterate(s, x);
            oracle.step();
            worst = std::max({worst, (s.model.refs - oracle.centers).cwiseAbs().maxCoeff(),
                              (s.assign.weights - oracle.u).cwiseAbs().maxCoeff()});
        }
    }
    return {worst <= 1e-10, "10 instances x 20 iterates, max deviation " + fmt(worst)};
}

Outcome kmeans_reduction() {
    Matrix centers(3, 2);
    centers << 0, 0, 8, 1, 3, 7;
    const Matrix x = testing::blobs(centers, 60, 0.5, 4);
    Matrix c(3, 1);
    c << -1, 0, 1;
    const LatentGrid g = make_grid(c);
    const Matrix w0 = pca_init_refs(x, g);
    const auto [state, report] = som_olp::fit(x, g, HyperParams(0.0, 1e-6), FitConfig{});
    const auto [lloyd_centers, labels] = testing::lloyd(x, w0);
    bool same_labels = true;
    for (Index i = 0; i < x.rows(); ++i) {
        Index arg = 0;
        state.assign.weights.row(i).maxCoeff(&arg);
        same_labels = same_labels && arg == labels[static_cast<std::size_t>(i)];
    }
    const double gap = (state.model.refs - lloyd_centers).cwiseAbs().maxCoeff();
    return {report.converged && same_labels && gap <= 1e-6,
            "converged in " + std::to_string(report.iterations) + " iterations, labels " +
                (same_labels ? "equal" : "differ") + ", max ref gap " + fmt(gap)};
}

Outcome bias_variance() {
    Rng rng(5);
    double worst_identity = 0.0;
    for (int t = 0; t < 100; ++t) {
        const LatentGrid g = make_square_grid(2 + static_cast<int>(rng.below(8)));
        const KernelMatrix h = normalized_kernel(g, log_uniform(rng, 0.05, 5.0));
        const Index d = 1 + static_cast<Index>(rng.below(8));
        const Matrix w = testing::random_matrix(g.size(), d, 3000 + static_cast<std::uint64_t>(t));
        const RowVector x = testing::random_matrix(1, d, 4000 + static_cast<std::uint64_t>(t)).row(0);
        const Matrix smooth = baselines::smoothed_refs(h, w);
        const Vector var = baselines::node_variances(h, w, smooth);
        for (Index j = 0; j < g.size(); ++j) {
            double direct = 0.0;
            for (Index k = 0; k < g.size(); ++k) direct += h.values(j, k) * (x - w.row(k)).squaredNorm();
            const double bvd = (x - smooth.row(j)).squaredNorm() + var(j);
            worst_identity = std::max(worst_identity, std::abs(direct - bvd) / direct);
        }
    }
    double worst_fit = 0.0;
    for (int side : {3, 5, 8, 10}) {
        const Matrix x = testing::random_matrix(150, 4, 5000 + static_cast<std::uint64_t>(side));
        FitConfig cfg;
        cfg.max_iters = 40;
        cfg.tol = 1e-300;
        const auto a = baselines::stvq_fit(x, make_square_grid(side), 0.25, 0.05, cfg);
        const auto b = baselines::stvqf_fit(x, make_square_grid(side), 0.25, 0.05, cfg);
        if (a.report.iterations != b.report.iterations) return {false, "iteration counts differ"};
        worst_fit = std::max({worst_fit, (a.state.assign.weights - b.state.assign.weights).cwiseAbs().maxCoeff(),
                              (a.state.refs - b.state.refs).cwiseAbs().maxCoeff()});
    }
    return {worst_identity <= 1e-10 && worst_fit <= 1e-9,
            "identity max relative gap " + fmt(worst_identity) + ", stvq vs stvqf max gap " + fmt(worst_fit)};
}

Outcome stationarity() {
    Rng rng(6);
    double worst = 0.0;
    for (int inst = 0; inst < 20; ++inst) {
        const Index n = 2 + static_cast<Index>(rng.below(8));
        const Index m = 2 + static_cast<Index>(rng.below(8));
        const Index d = 1 + static_cast<Index>(rng.below(4));
        const auto seed = 6000 + static_cast<std::uint64_t>(inst) * 3;
        const Matrix x = testing::random_matrix(n, d, seed);
        const LatentGrid g = random_grid(m, seed + 1);
        som_olp::State s = state_at_closed_form(x, g, testing::random_assignments(n, m, seed + 2), log_uniform(rng, 1e-2, 1e2),
                                                log_uniform(rng, 1e-2, 1e2));
        const double h = 1e-5;
        for (Matrix* block : {&s.model.latents, &s.model.refs}) {
            for (Index e = 0; e < block->size(); ++e) {
                const double saved = block->data()[e];
                block->data()[e] = saved + h;
                const double up = som_olp::objective(s, x);
                block->data()[e] = saved - h;
                const double down = som_olp::objective(s, x);
                block->data()[e] = saved;
                worst = std::max(worst, std::abs(up - down) / (2 * h));
            }
        }
    }
    return {worst <= 1e-6, "20 instances, max |dJ| " + fmt(worst)};
}

Outcome saddle() {
    const Dataset ds = data::gen_saddle(500, 0.1, 0);
    const auto [s, r] = som_olp::fit(ds.points, make_square_grid(16), HyperParams(73.79, 1.696), FitConfig{});
    const double tw = metrics::trustworthiness(ds.points, s.model.latents, 5);
    const double cn = metrics::continuity(ds.points, s.model.latents, 5);
    const double qe = metrics::quantization_error(ds.points, s.model.refs);
    return {tw >= 0.99 && cn >= 0.99 && qe <= 0.02 && r.iterations <= 1000,
            "TW " + fmt(tw) + ", CN " + fmt(cn) + ", QE " + fmt(qe) + ", " + std::to_string(r.iterations) + " iterations"};
}

// Seeded stand-in for the 8x8 digit images: ten prototypes in [0, 1]^64 plus noise.
Matrix digits_like(std::uint64_t seed) {
    Rng rng(seed);
    Matrix protos(10, 64);
    for (Index i = 0; i < protos.size(); ++i) protos.data()[i] = rng.uniform() < 0.4 ? rng.uniform(0.5, 1.0) : 0.0;
    Matrix x(1797, 64);
    for (Index i = 0; i < x.rows(); ++i) {
        const Index c = static_cast<Index>(rng.below(10));
        for (Index d = 0; d < 64; ++d) x(i, d) = std::clamp(protos(c, d) + rng.normal(0.0, 0.15), 0.0, 1.0);
    }
    return x;
}

Outcome scalability() {
    const Matrix x = digits_like(8);
    bench::TimingOptions opts;
    opts.iterations = 5;
    MethodParams olp;
    olp.gamma = 0.815;
    olp.lambda = 0.331;
    std::vector<double> m_olp, t_olp;
    for (int side : {50, 100, 150, 200}) {
        const auto r = bench::time_per_iteration(Method::SomOlp, x, side, olp, opts);
        if (r.outcome != bench::Outcome::Ok) return {false, "som-olp out of memory at side " + std::to_string(side)};
        m_olp.push_back(static_cast<double>(r.nodes));
        t_olp.push_back(r.mean_ms);
    }
    MethodParams stvq;
    stvq.sigma = 0.0556;
    stvq.lambda = 0.154;
    std::vector<double> m_stvq, t_stvq;
    for (int side : {20, 30, 40, 50}) {
        const auto r = bench::time_per_iteration(Method::Stvq, x, side, stvq, opts);
        if (r.outcome != bench::Outcome::Ok) return {false, "stvq out of memory at side " + std::to_string(side)};
        m_stvq.push_back(static_cast<double>(r.nodes));
        t_stvq.push_back(r.mean_ms);
    }
    const double s_olp = bench::loglog_slope(m_olp, t_olp);
    const double s_stvq = bench::loglog_slope(m_stvq, t_stvq);
    std::string detail = "som-olp slope " + fmt(s_olp) + " (ms:";
    for (double t : t_olp) detail += " " + fmt(t);
    detail += "), stvq slope " + fmt(s_stvq) + " (ms:";
    for (double t : t_stvq) detail += " " + fmt(t);
    detail += ")";
    return {s_olp <= 1.3 && s_stvq >= 1.6, detail};
}

Outcome metric_correctness() {
    const Matrix x = testing::random_matrix(100, 4, 9);
    bool identity = metrics::trustworthiness(x, x, 5) == 1.0 && metrics::continuity(x, x, 5) == 1.0;
    int mismatches = 0;
    for (std::uint64_t inst = 0; inst < 200; ++inst) {
        const Matrix data = testing::random_matrix(6, 3, 7000 + inst);
        const Matrix latent = testing::random_matrix(6, 2, 8000 + inst);
        for (int k : {1, 2}) {
            const double tw = metrics::trustworthiness(data, latent, k);
            const double cn = metrics::continuity(data, latent, k);
            if (tw != testing::brute_trustworthiness(data, latent, k)) ++mismatches;
            if (cn != testing::brute_trustworthiness(latent, data, k)) ++mismatches;
            if (cn != metrics::trustworthiness(latent, data, k)) ++mismatches;
        }
    }
    return {identity && mismatches == 0,
            std::string("identity ") + (identity ? "1.0" : "not 1.0") + ", " + std::to_string(mismatches) +
                " mismatches over 200 six-point instances"};
}

Outcome rank_statistics() {
    const auto table = testing::benchmark_score_table();
    const auto ranks = bench::average_ranks(table);
    const double expected[] = {4.88, 3.38, 2.88, 2.31, 1.56};
    bool ok = true;
    std::string detail = "ranks";
    for (std::size_t m = 0; m < 5; ++m) {
        ok = ok && std::abs(ranks[m] - expected[m]) <= 0.07;
        detail += " " + fmt(ranks[m]);
    }
    const auto f = bench::friedman_statistic(table);
    ok = ok && std::abs(f.chi_square - 39.75) <= 2.0;
    return {ok, detail + ", chi2 " + fmt(f.chi_square) + ", p " + fmt(f.p_value)};
}

// -- Criterion 11: byte-reproducible CLI -------------------------------------

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Every file under `dir`, with the wall-clock field removed from JSON reports.
std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        std::string body = slurp(e.path());
        if (e.path().filename() == "report.json") {
            auto j = nlohmann::json::parse(body);
            j.erase("per_iter_ms");
            body = j.dump();
        }
        files[fs::relative(e.path(), dir).string()] = body;
    }
    return files;
}

bool run_cli(const std::string& args) {
    const std::string cmd = std::string("\"") + TOPOMAP_BIN + "\" " + args + " > /dev/null 2>&1";
    return std::system(cmd.c_str()) == 0;
}

bool produce_outputs(const fs::path& dir, int threads) {
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string t = "--threads " + std::to_string(threads) + " ";
    const std::string d = dir.string();
    const std::string saddle = d + "/saddle.csv";
    bool ok = run_cli(t + "gen-saddle --seed 3 --out " + saddle);
    ok = ok && run_cli(t + "fit --method som-olp --data " + saddle + " --gamma 73.79 --lambda 1.696 --out-dir " + d + "/som-olp");
    ok = ok && run_cli(t + "fit --method bsom --data " + saddle + " --sigma 0.1184 --out-dir " + d + "/bsom");
    ok = ok && run_cli(t + "fit --method stvqf --data " + saddle + " --sigma 0.0637 --lambda 0.0087 --out-dir " + d + "/stvqf");
    ok = ok && run_cli(t + "fit --method stvq --data " + saddle + " --sigma 0.0637 --lambda 0.0087 --grid-side 8 --out-dir " + d + "/stvq");
    ok = ok && run_cli(t + "fit --method pca --data " + saddle + " --out-dir " + d + "/pca");
    ok = ok && run_cli(t + "eval --data " + saddle + " --latents " + d + "/som-olp/latents.csv --refs " + d +
                       "/som-olp/refs.csv --out " + d + "/eval.json");
    ok = ok && run_cli(t + "tune --method som-olp --data " + saddle + " --trials 6 --studies 2 --seed 5 --grid-side 8 --out-dir " +
                       d + "/tune");
    return ok;
}

Outcome determinism() {
    const fs::path root = fs::temp_directory_path() / ("topomap_acceptance_" + std::to_string(::getpid()));
    const bool ran = produce_outputs(root / "a", 1) && produce_outputs(root / "b", 1) && produce_outputs(root / "c", 4);
    if (!ran) {
        fs::remove_all(root);
        return {false, "a CLI command failed"};
    }
    const auto a = snapshot(root / "a");
    const auto b = snapshot(root / "b");
    const auto c = snapshot(root / "c");
    fs::remove_all(root);
    const bool repeat = a == b;
    const bool threads = a == c;
    return {repeat && threads && a.size() >= 15,
            std::to_string(a.size()) + " files; repeat run " + (repeat ? "identical" : "differs") + ", --threads 1 vs 4 " +
                (threads ? "identical" : "differs")};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"monotone descent", monotone_descent},
        {"Laplacian-form equivalence", laplacian_equivalence},
        {"fuzzy c-means reduction", efcm_reduction},
        {"k-means reduction", kmeans_reduction},
        {"bias-variance exactness", bias_variance},
        {"stationarity", stationarity},
        {"saddle reproduction", saddle},
        {"scalability shape", scalability},
        {"metric correctness", metric_correctness},
        {"rank statistics", rank_statistics},
        {"determinism", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (!o.pass) ++failed;
        std::printf("%s %2zu %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    return failed;
}
