#include "topomap/tune.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "topomap/data.hpp"
#include "topomap/rng.hpp"

namespace topomap::tune {

SearchSpace::SearchSpace(std::vector<ParamRange> entries) : entries_(std::move(entries)) {
    for (const auto& e : entries_) {
        if (!(e.low < e.high)) throw std::invalid_argument("range '" + e.name + "' needs low < high");
        if (e.scale == Scale::Log && !(e.low > 0.0)) {
            throw std::invalid_argument("log range '" + e.name + "' needs low > 0");
        }
    }
}

SearchSpace default_space(Method m) {
    auto log_range = [](const char* name) { return ParamRange{name, 1e-3, 1e3, Scale::Log, false}; };
    switch (m) {
        case Method::SomOlp: return SearchSpace({log_range("gamma"), log_range("lambda")});
        case Method::Bsom: return SearchSpace({log_range("sigma")});
        case Method::Stvq:
        case Method::Stvqf: return SearchSpace({log_range("sigma"), log_range("lambda")});
        case Method::Pca: return SearchSpace();
    }
    return SearchSpace();
}

Params sample(const SearchSpace& space, std::uint64_t seed, std::uint64_t index) {
    Rng rng(mix_seed(seed, index));
    Params out;
    for (const auto& e : space.entries()) {
        const double u = rng.uniform();
        double v = 0.0;
        if (e.scale == Scale::Log) {
            const double lo = std::log10(e.low);
            const double hi = std::log10(e.high);
            v = std::pow(10.0, lo + u * (hi - lo));
        } else {
            v = e.low + u * (e.high - e.low);
        }
        if (e.integer) v = std::round(v);
        out[e.name] = std::clamp(v, e.integer ? std::ceil(e.low) : e.low, e.integer ? std::floor(e.high) : e.high);
    }
    return out;
}

MethodParams to_method_params(const Params& p) {
    MethodParams mp;
    if (auto it = p.find("gamma"); it != p.end()) mp.gamma = it->second;
    if (auto it = p.find("lambda"); it != p.end()) mp.lambda = it->second;
    if (auto it = p.find("sigma"); it != p.end()) mp.sigma = it->second;
    return mp;
}

StudyResult run_study(const TrialFn& run_trial, const SearchSpace& space, const StudyOptions& opts) {
    if (opts.trials < 1) throw std::invalid_argument("trials must be >= 1");
    if (opts.studies < 1) throw std::invalid_argument("studies must be >= 1");

    StudyResult result;
    std::vector<TrialRecord> kept;
    for (int s = 0; s < opts.studies; ++s) {
        const std::uint64_t study_seed = mix_seed(opts.seed, static_cast<std::uint64_t>(s));
        std::optional<TrialRecord> best;
        for (int t = 0; t < opts.trials; ++t) {
            const Params params = sample(space, study_seed, static_cast<std::uint64_t>(t));
            TrialRecord rec;
            try {
                rec = run_trial(params);
            } catch (const std::exception&) {
                ++result.skipped;
                continue;
            }
            rec.study = s;
            rec.trial = t;
            rec.params = params;
            if (!std::isfinite(rec.tw) || !std::isfinite(rec.cn)) {
                ++result.skipped;
                continue;
            }
            result.trials.push_back(rec);
            if (!best || rec.score > best->score) best = rec;
        }
        if (best) kept.push_back(*best);
    }
    if (kept.empty()) throw std::runtime_error("every trial failed");

    result.best = kept.front();
    for (const auto& rec : kept) {
        if (rec.qe < result.best.qe) result.best = rec;
    }
    return result;
}

StudyResult run_study(Method m, const Matrix& points, const LatentGrid& grid, const SearchSpace& space,
                      const StudyOptions& opts) {
    auto trial = [&](const Params& params) {
        const MethodResult fitted = fit_method(m, points, grid, to_method_params(params), opts.fit);
        const Evaluation ev = evaluate(points, fitted, opts.k);
        TrialRecord rec;
        rec.tw = ev.tw;
        rec.cn = ev.cn;
        rec.score = ev.score;
        rec.qe = ev.qe.value_or(std::numeric_limits<double>::infinity());
        if (std::isnan(rec.qe)) rec.qe = std::numeric_limits<double>::infinity();
        rec.iterations = fitted.report.iterations;
        rec.converged = fitted.report.converged;
        return rec;
    };
    return run_study(trial, space, opts);
}

void write_trials_csv(const StudyResult& result, const SearchSpace& space, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    out << "study,trial";
    for (const auto& e : space.entries()) out << ',' << e.name;
    out << ",score,tw,cn,qe,iterations,converged\n";
    for (const auto& r : result.trials) {
        out << r.study << ',' << r.trial;
        for (const auto& e : space.entries()) out << ',' << data::format_double(r.params.at(e.name));
        out << ',' << data::format_double(r.score) << ',' << data::format_double(r.tw) << ','
            << data::format_double(r.cn) << ',' << data::format_double(r.qe) << ',' << r.iterations << ','
            << (r.converged ? "true" : "false") << '\n';
    }
}

}  // namespace topomap::tune
