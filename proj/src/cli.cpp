#include "topomap/cli.hpp"

#include <filesystem>
#include <fstream>
#include <new>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "topomap/bench.hpp"
#include "topomap/data.hpp"
#include "topomap/methods.hpp"
#include "topomap/metrics.hpp"
#include "topomap/parallel.hpp"
#include "topomap/tune.hpp"

namespace topomap::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Preprocess {
    std::string data;
    std::string label_column;
    bool impute = false;
    bool standardize = false;
    double scale = 0.0;

    void add_to(CLI::App& app, bool data_required = true) {
        auto* opt = app.add_option("--data", data, "Input CSV");
        if (data_required) opt->required();
        app.add_option("--label-column", label_column, "Column holding class labels (excluded from features)");
        app.add_flag("--impute-median", impute, "Fill missing cells with the column median");
        app.add_flag("--standardize", standardize, "Scale features to zero mean and unit variance");
        app.add_option("--scale-by", scale, "Divide every feature by this constant");
    }

    Dataset load() const {
        std::optional<std::string> label;
        if (!label_column.empty()) label = label_column;
        Dataset ds = data::load_csv(data, label);
        if (impute) ds = data::impute_median(ds);
        if (ds.has_missing()) throw DataError(data + ": missing values present; pass --impute-median");
        if (standardize) ds = data::standardize(ds);
        if (scale != 0.0) ds = data::scale_by(ds, scale);
        ds.validate();
        return ds;
    }
};

struct HyperFlags {
    std::optional<double> gamma;
    std::optional<double> lambda;
    std::optional<double> sigma;

    void add_to(CLI::App& app) {
        app.add_option("--gamma", gamma, "Latent proximity weight (som-olp)");
        app.add_option("--lambda", lambda, "Entropy weight (som-olp, stvq, stvqf)");
        app.add_option("--sigma", sigma, "Neighborhood width (bsom, stvq, stvqf)");
    }

    MethodParams params() const { return {gamma, lambda, sigma}; }
};

Method method_or_throw(const std::string& name) {
    if (auto m = parse_method(name)) return *m;
    throw UsageError("unknown method '" + name + "'");
}

json number_or_null(double v) {
    return std::isfinite(v) ? json(v) : json(nullptr);
}

json params_json(Method m, const MethodParams& p) {
    json j = json::object();
    if (m == Method::SomOlp) {
        j["gamma"] = *p.gamma;
        j["lambda"] = *p.lambda;
    } else if (m == Method::Bsom) {
        j["sigma"] = *p.sigma;
    } else if (m == Method::Stvq || m == Method::Stvqf) {
        j["sigma"] = *p.sigma;
        j["lambda"] = *p.lambda;
    }
    return j;
}

json evaluation_json(const Evaluation& e) {
    return json{{"k", e.k},
                {"tw", e.tw},
                {"cn", e.cn},
                {"qe", e.qe ? json(*e.qe) : json(nullptr)},
                {"score", e.score}};
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << text;
}

void write_matrix_csv(const fs::path& path, const std::vector<std::string>& header,
                      const std::vector<std::string>& leading, const std::vector<const Matrix*>& blocks,
                      const std::optional<std::vector<std::int64_t>>& labels = std::nullopt) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
    if (labels) out << ",label";
    out << '\n';
    for (std::size_t r = 0; r < leading.size(); ++r) {
        out << leading[r];
        for (const Matrix* b : blocks) {
            for (Index c = 0; c < b->cols(); ++c) out << ',' << data::format_double((*b)(static_cast<Index>(r), c));
        }
        if (labels) out << ',' << (*labels)[r];
        out << '\n';
    }
}

std::vector<std::string> index_column(Index n) {
    std::vector<std::string> out(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = std::to_string(i);
    return out;
}

std::vector<std::string> numbered(const std::string& prefix, Index count, int first = 1) {
    std::vector<std::string> out;
    for (Index c = 0; c < count; ++c) out.push_back(prefix + std::to_string(c + first));
    return out;
}

// -- gen-saddle ---------------------------------------------------------------

struct GenSaddleArgs {
    long n = 500;
    double noise_std = 0.1;
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_gen_saddle(const GenSaddleArgs& a) {
    if (a.n < 1) throw UsageError("--n must be >= 1");
    if (!(a.noise_std >= 0.0)) throw UsageError("--noise-std must be >= 0");
    data::write_csv(data::gen_saddle(a.n, a.noise_std, a.seed), a.out);
    return kOk;
}

// -- fit ------------------------------------------------------------------------

struct FitArgs {
    std::string method;
    Preprocess pre;
    HyperFlags hyper;
    int grid_side = 16;
    int max_iters = 1000;
    double tol = 1e-4;
    int k = metrics::kDefaultNeighbors;
    std::string out_dir = ".";
};

int cmd_fit(const FitArgs& a, std::ostream& out) {
    const Method m = method_or_throw(a.method);
    const MethodParams params = a.hyper.params();
    try {
        require_params(m, params);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    if (a.grid_side < 1) throw UsageError("--grid-side must be >= 1");
    const Dataset ds = a.pre.load();
    const LatentGrid grid = make_square_grid(a.grid_side, 2);
    FitConfig cfg;
    cfg.max_iters = a.max_iters;
    cfg.tol = a.tol;

    const MethodResult result = fit_method(m, ds.points, grid, params, cfg);
    const Evaluation ev = evaluate(ds.points, result, a.k);

    const fs::path dir(a.out_dir);
    fs::create_directories(dir);

    if (result.refs) {
        std::vector<std::string> header{"node"};
        for (auto& h : numbered("r", grid.dim())) header.push_back(h);
        for (auto& h : numbered("w", result.refs->cols())) header.push_back(h);
        write_matrix_csv(dir / "refs.csv", header, index_column(grid.size()), {&grid.coords, &*result.refs});
    } else {
        fs::remove(dir / "refs.csv");
    }

    std::vector<std::string> lat_header{"index"};
    for (auto& h : numbered("v", result.latents.cols())) lat_header.push_back(h);
    write_matrix_csv(dir / "latents.csv", lat_header, index_column(ds.size()), {&result.latents}, ds.labels);

    if (result.assign) {
        std::vector<std::string> header{"index"};
        for (auto& h : numbered("p", grid.size(), 0)) header.push_back(h);
        write_matrix_csv(dir / "assignments.csv", header, index_column(ds.size()), {&result.assign->weights});
    } else {
        fs::remove(dir / "assignments.csv");
    }

    json report{{"schema", 1},
                {"method", method_name(m)},
                {"params", params_json(m, params)},
                {"grid_side", a.grid_side},
                {"n", ds.size()},
                {"d", ds.dim()},
                {"m", grid.size()},
                {"max_iters", cfg.max_iters},
                {"tol", cfg.tol},
                {"objective_trace", result.report.objective_trace},
                {"iterations", result.report.iterations},
                {"converged", result.report.converged},
                {"per_iter_ms", result.report.per_iter_ms},
                {"metrics", evaluation_json(ev)}};
    write_text(dir / "report.json", report.dump(2) + "\n");
    out << evaluation_json(ev).dump() << '\n';
    return kOk;
}

// -- eval -----------------------------------------------------------------------

struct EvalArgs {
    Preprocess pre;
    std::string latents;
    std::string refs;
    int k = metrics::kDefaultNeighbors;
    std::string out;
};

Matrix select_columns(const data::Table& t, const std::function<bool(const std::string&)>& keep) {
    std::vector<Index> cols;
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
        if (keep(t.columns[c])) cols.push_back(static_cast<Index>(c));
    }
    if (cols.empty()) throw DataError("no usable columns");
    Matrix m(t.values.rows(), static_cast<Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) m.col(static_cast<Index>(c)) = t.values.col(cols[c]);
    if (!m.allFinite()) throw DataError("non-finite or missing values in evaluation input");
    return m;
}

bool is_prefixed_number(const std::string& name, char prefix) {
    return name.size() >= 2 && name[0] == prefix &&
           name.find_first_not_of("0123456789", 1) == std::string::npos;
}

int cmd_eval(const EvalArgs& a, std::ostream& out) {
    const Dataset ds = a.pre.load();
    const data::Table lat_table = data::read_table(a.latents);
    const Matrix latents = select_columns(lat_table, [](const std::string& c) { return c != "index" && c != "label"; });
    if (latents.rows() != ds.size()) throw DataError("latents and data differ in row count");

    Evaluation ev;
    ev.k = a.k;
    ev.tw = metrics::trustworthiness(ds.points, latents, a.k);
    ev.cn = metrics::continuity(ds.points, latents, a.k);
    ev.score = metrics::tuning_score(ev.tw, ev.cn);
    if (!a.refs.empty()) {
        const data::Table ref_table = data::read_table(a.refs);
        const bool has_w = std::any_of(ref_table.columns.begin(), ref_table.columns.end(),
                                       [](const std::string& c) { return is_prefixed_number(c, 'w'); });
        const Matrix refs = has_w ? select_columns(ref_table, [](const std::string& c) { return is_prefixed_number(c, 'w'); })
                                  : select_columns(ref_table, [](const std::string& c) { return c != "node"; });
        if (refs.cols() != ds.dim()) throw DataError("refs and data differ in dimension");
        ev.qe = metrics::quantization_error(ds.points, refs);
    }
    const std::string text = evaluation_json(ev).dump(2) + "\n";
    if (!a.out.empty()) write_text(a.out, text);
    out << text;
    return kOk;
}

// -- tune -----------------------------------------------------------------------

struct TuneArgs {
    std::string method;
    Preprocess pre;
    int trials = 100;
    int studies = 5;
    std::uint64_t seed = 0;
    int grid_side = 16;
    int max_iters = 1000;
    double tol = 1e-4;
    int k = metrics::kDefaultNeighbors;
    std::string out_dir = ".";
};

int cmd_tune(const TuneArgs& a, std::ostream& out) {
    const Method m = method_or_throw(a.method);
    if (a.trials < 1 || a.studies < 1) throw UsageError("--trials and --studies must be >= 1");
    if (a.grid_side < 1) throw UsageError("--grid-side must be >= 1");
    const Dataset ds = a.pre.load();
    const LatentGrid grid = make_square_grid(a.grid_side, 2);
    const tune::SearchSpace space = tune::default_space(m);

    tune::StudyOptions opts;
    opts.trials = a.trials;
    opts.studies = a.studies;
    opts.seed = a.seed;
    opts.k = a.k;
    opts.fit.max_iters = a.max_iters;
    opts.fit.tol = a.tol;

    tune::StudyResult result;
    try {
        result = tune::run_study(m, ds.points, grid, space, opts);
    } catch (const std::runtime_error& e) {
        throw NumericalError(e.what());
    }

    const fs::path dir(a.out_dir);
    fs::create_directories(dir);
    tune::write_trials_csv(result, space, (dir / "trials.csv").string());

    const auto& b = result.best;
    json params = json::object();
    for (const auto& [name, value] : b.params) params[name] = value;
    json best{{"schema", 1},
              {"method", method_name(m)},
              {"seed", a.seed},
              {"trials", a.trials},
              {"studies", a.studies},
              {"study", b.study},
              {"trial", b.trial},
              {"params", params},
              {"score", b.score},
              {"tw", b.tw},
              {"cn", b.cn},
              {"qe", number_or_null(b.qe)},
              {"iterations", b.iterations},
              {"converged", b.converged},
              {"recorded_trials", result.trials.size()},
              {"skipped_trials", result.skipped}};
    const std::string text = best.dump(2) + "\n";
    write_text(dir / "best.json", text);
    out << text;
    return kOk;
}

// -- bench ----------------------------------------------------------------------

struct BenchArgs {
    std::string methods = "som-olp";
    Preprocess pre;
    HyperFlags hyper;
    std::vector<int> grid_sides;
    int iters = 20;
    double memory_budget_mb = 0.0;
    std::string out;
};

int cmd_bench(const BenchArgs& a, std::ostream& out) {
    std::vector<Method> methods;
    std::stringstream ss(a.methods);
    for (std::string name; std::getline(ss, name, ',');) {
        const Method m = method_or_throw(name);
        if (m == Method::Pca) throw UsageError("pca has no iterations to time");
        try {
            require_params(m, a.hyper.params());
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
        methods.push_back(m);
    }
    if (methods.empty()) throw UsageError("--methods is empty");
    if (a.iters < 1) throw UsageError("--iters must be >= 1");
    const Dataset ds = a.pre.load();

    bench::TimingOptions opts;
    opts.iterations = a.iters;
    opts.memory_budget_bytes = a.memory_budget_mb * 1024.0 * 1024.0;

    std::vector<bench::TimingResult> rows;
    bool any_oom = false;
    for (Method m : methods) {
        for (int side : a.grid_sides) {
            if (side < 1) throw UsageError("grid sides must be >= 1");
            rows.push_back(bench::time_per_iteration(m, ds.points, side, a.hyper.params(), opts));
            any_oom = any_oom || rows.back().outcome == bench::Outcome::OutOfMemory;
        }
    }
    if (!a.out.empty()) bench::write_timing_csv(rows, a.out);
    out << "method,M,N,mean_ms,cv,outcome\n";
    for (const auto& r : rows) {
        out << method_name(r.method) << ',' << r.nodes << ',' << r.points << ',';
        if (r.outcome == bench::Outcome::Ok) {
            out << data::format_double(r.mean_ms) << ',' << data::format_double(r.cv) << ",ok\n";
        } else {
            out << ",,oom\n";
        }
    }
    return any_oom ? kOutOfMemory : kOk;
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Topographic mapping toolkit"};
    app.require_subcommand(1);
    int threads = num_threads();
    app.add_option("--threads", threads, "Worker threads (results do not depend on this)")->check(CLI::PositiveNumber);

    GenSaddleArgs gen;
    auto* gen_cmd = app.add_subcommand("gen-saddle", "Sample the noisy saddle surface");
    gen_cmd->add_option("--n", gen.n, "Number of points")->capture_default_str();
    gen_cmd->add_option("--noise-std", gen.noise_std, "Standard deviation of the x3 noise")->capture_default_str();
    gen_cmd->add_option("--seed", gen.seed, "Random seed")->capture_default_str();
    gen_cmd->add_option("--out", gen.out, "Output CSV")->required();

    FitArgs fit;
    auto* fit_cmd = app.add_subcommand("fit", "Fit a map and write refs, latents, assignments and a report");
    fit_cmd->add_option("--method", fit.method, "som-olp | bsom | stvq | stvqf | pca")->required();
    fit.pre.add_to(*fit_cmd);
    fit.hyper.add_to(*fit_cmd);
    fit_cmd->add_option("--grid-side", fit.grid_side, "Nodes per grid side")->capture_default_str();
    fit_cmd->add_option("--max-iters", fit.max_iters, "Iteration cap")->capture_default_str();
    fit_cmd->add_option("--tol", fit.tol, "Relative objective change tolerance")->capture_default_str();
    fit_cmd->add_option("--k", fit.k, "Neighbors for trustworthiness/continuity")->capture_default_str();
    fit_cmd->add_option("--out-dir", fit.out_dir, "Output directory")->capture_default_str();

    EvalArgs ev;
    auto* eval_cmd = app.add_subcommand("eval", "Score a latent representation against its data");
    ev.pre.add_to(*eval_cmd);
    eval_cmd->add_option("--latents", ev.latents, "Latent coordinates CSV")->required();
    eval_cmd->add_option("--refs", ev.refs, "Reference vectors CSV (enables QE)");
    eval_cmd->add_option("--k", ev.k, "Neighbors for trustworthiness/continuity")->capture_default_str();
    eval_cmd->add_option("--out", ev.out, "Also write the JSON here");

    TuneArgs tn;
    auto* tune_cmd = app.add_subcommand("tune", "Random-search hyperparameter study");
    tune_cmd->add_option("--method", tn.method, "som-olp | bsom | stvq | stvqf | pca")->required();
    tn.pre.add_to(*tune_cmd);
    tune_cmd->add_option("--trials", tn.trials, "Trials per study")->capture_default_str();
    tune_cmd->add_option("--studies", tn.studies, "Independent studies")->capture_default_str();
    tune_cmd->add_option("--seed", tn.seed, "Base seed")->capture_default_str();
    tune_cmd->add_option("--grid-side", tn.grid_side, "Nodes per grid side")->capture_default_str();
    tune_cmd->add_option("--max-iters", tn.max_iters, "Iteration cap per fit")->capture_default_str();
    tune_cmd->add_option("--tol", tn.tol, "Relative objective change tolerance")->capture_default_str();
    tune_cmd->add_option("--k", tn.k, "Neighbors for trustworthiness/continuity")->capture_default_str();
    tune_cmd->add_option("--out-dir", tn.out_dir, "Output directory")->capture_default_str();

    BenchArgs bn;
    auto* bench_cmd = app.add_subcommand("bench", "Per-iteration timing versus grid size");
    bench_cmd->add_option("--methods", bn.methods, "Comma-separated methods")->capture_default_str();
    bn.pre.add_to(*bench_cmd);
    bn.hyper.add_to(*bench_cmd);
    bench_cmd->add_option("--grid-sides", bn.grid_sides, "Grid sides to time")->delimiter(',')->required();
    bench_cmd->add_option("--iters", bn.iters, "Timed iterations per run (T)")->capture_default_str();
    bench_cmd->add_option("--memory-budget-mb", bn.memory_budget_mb,
                          "Report runs above this estimated footprint as oom (default: 80% of RAM)");
    bench_cmd->add_option("--out", bn.out, "Output CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        set_num_threads(threads);
        if (*gen_cmd) return cmd_gen_saddle(gen);
        if (*fit_cmd) return cmd_fit(fit, out);
        if (*eval_cmd) return cmd_eval(ev, out);
        if (*tune_cmd) return cmd_tune(tn, out);
        if (*bench_cmd) return cmd_bench(bn, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << '\n';
        return kDataError;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kNumericalFailure;
    } catch (const std::bad_alloc&) {
        err << "out of memory\n";
        return kOutOfMemory;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kDataError;
    }
    return kUsage;
}

}  // namespace topomap::cli
