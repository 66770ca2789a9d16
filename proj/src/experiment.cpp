#include "creepuq/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <thread>

#include "creepuq/plots.hpp"

namespace creepuq {

namespace fs = std::filesystem;

void parallel_for_tasks(std::size_t n_tasks, int threads,
                        const std::function<void(std::size_t)>& fn) {
    if (n_tasks == 0) return;
    std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), n_tasks);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n_tasks; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (;;) {
                    std::size_t i = next.fetch_add(1);
                    if (i >= n_tasks) return;
                    fn(i);
                }
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

FoldData prepare_fold(const Dataset& base, const std::vector<std::size_t>& train_idx,
                      const std::vector<std::size_t>& test_idx, const ExperimentConfig& cfg) {
    Dataset train = base.rows(train_idx);
    Dataset test = base.rows(test_idx);
    FoldData out;
    out.preprocessing = nlohmann::json::object();

    if (cfg.physics.enabled) {
        int t_idx = train.feature_index(cfg.columns.temperature);
        int s_idx = train.feature_index(cfg.columns.stress);
        if (t_idx < 0 || s_idx < 0)
            throw std::runtime_error("prepare_fold: physics temperature/stress columns missing");
        std::vector<double> lt, tt, st;
        for (std::size_t i = 0; i < train.size(); ++i) {
            lt.push_back(train.target[i]);
            tt.push_back(train.features.at(i, static_cast<std::size_t>(t_idx)));
            st.push_back(train.features.at(i, static_cast<std::size_t>(s_idx)));
        }
        TtpModel ttp;
        if (cfg.physics.fit_constants)
            ttp = fit_manson_haferd(lt, tt, st, cfg.columns.temperature_unit);
        else
            ttp = fit_ttp_stress_polynomial(cfg.physics.ttp, lt, tt, st);
        train = augment_features(train, ttp, cfg.physics.include_sfe, cfg.columns);
        test = augment_features(test, ttp, cfg.physics.include_sfe, cfg.columns);
        out.preprocessing["ttp"] = train.metadata["ttp_model"];
    }

    if (cfg.normalize) {
        auto bounds = fit_normalization(train);
        train = apply_normalization(train, bounds);
        test = apply_normalization(test, bounds);
        nlohmann::json b = nlohmann::json::array();
        for (const auto& [lo, hi] : bounds) b.push_back({lo, hi});
        out.preprocessing["normalization_bounds"] = std::move(b);
    }

    out.x_train = std::move(train.features);
    out.y_train = std::move(train.target);
    out.x_test = std::move(test.features);
    out.y_test = std::move(test.target);
    return out;
}

namespace {

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

FoldMetrics evaluate_fold(std::size_t fold, const std::vector<double>& y_test,
                          const std::vector<PredictiveDistribution>& preds) {
    FoldMetrics fm;
    fm.fold = fold;
    std::vector<double> mean;
    mean.reserve(preds.size());
    for (const auto& p : preds) mean.push_back(p.mean);
    fm.pcc = pcc(y_test, mean);
    fm.r_squared = r_squared(y_test, mean);
    fm.rmse = rmse(y_test, mean);
    fm.mae = mae(y_test, mean);
    bool any_std = false;
    for (const auto& p : preds) any_std |= p.has_std;
    if (any_std) {
        std::vector<std::pair<double, double>> intervals;
        intervals.reserve(preds.size());
        for (const auto& p : preds) intervals.emplace_back(p.lower, p.upper);
        fm.coverage = coverage(y_test, intervals);
        fm.interval_width = mean_interval_width(intervals);
        if (*fm.interval_width > 0.0)
            fm.composite = composite_metric(*fm.coverage, *fm.interval_width);
    }
    return fm;
}

struct FoldOutcome {
    FoldMetrics metrics;
    nlohmann::json predictions;  // fold 0 only
    nlohmann::json fitted;
    std::string error;
};

void write_text_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

void write_tables(const std::vector<EvaluationReport>& reports, const fs::path& dir) {
    // CSV: mean and sd columns in the published table order.
    std::string csv = "model,pcc_mean,pcc_sd,r2_mean,r2_sd,rmse_mean,rmse_sd,mae_mean,mae_sd,"
                      "coverage_mean,coverage_sd,interval_width_mean,interval_width_sd,"
                      "composite_mean,composite_sd\n";
    for (const auto& r : reports) {
        csv += r.model;
        for (const char* m : {"pcc", "r2", "rmse", "mae"}) {
            MetricSummary s = r.summary(m);
            csv += "," + format_number(s.mean) + "," + format_number(s.sd);
        }
        if (r.has_uncertainty()) {
            for (const char* m : {"coverage", "interval_width", "composite"}) {
                MetricSummary s = r.summary(m);
                csv += "," + format_number(s.mean) + "," + format_number(s.sd);
            }
        } else {
            csv += ",,,,,,";
        }
        csv += "\n";
    }
    write_text_file(dir / "table.csv", csv);

    std::string md = "| Model | PCC | R2 | RMSE | MAE | Coverage | Interval width | Composite metric |\n";
    md += "|---|---|---|---|---|---|---|---|\n";
    auto cell = [](const MetricSummary& s) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.3f ± %.3f", s.mean, s.sd);
        return std::string(buf);
    };
    for (const auto& r : reports) {
        md += "| " + r.model;
        for (const char* m : {"pcc", "r2", "rmse", "mae"}) md += " | " + cell(r.summary(m));
        if (r.has_uncertainty()) {
            for (const char* m : {"coverage", "interval_width", "composite"})
                md += " | " + cell(r.summary(m));
        } else {
            md += " |  |  | ";
        }
        md += " |\n";
    }
    write_text_file(dir / "table.md", md);
}

void write_prediction_plot(const nlohmann::json& detail, const std::string& model,
                           const fs::path& dir) {
    if (!detail.contains("predictions")) return;
    std::vector<PredictionPlotPoint> pts;
    for (const auto& row : detail.at("predictions")) {
        PredictionPlotPoint p;
        p.target = row.at("target").get<double>();
        p.mean = row.at("mean").get<double>();
        p.has_band = row.at("has_std").get<bool>();
        p.lower = p.has_band ? row.at("lower").get<double>() : p.mean;
        p.upper = p.has_band ? row.at("upper").get<double>() : p.mean;
        pts.push_back(p);
    }
    if (pts.empty()) return;
    RenderedPlot plot = render_prediction_plot(model + " — fold 0 test predictions", pts);
    write_text_file(dir / ("pred_" + model + ".svg"), plot.svg);
}

}  // namespace

BenchmarkResult run_benchmark(const ExperimentConfig& cfg) {
    Dataset base = cfg.load_dataset();
    if (cfg.log10_target) base = apply_log10_target(base);
    FoldSplit split = kfold_split(base.size(), cfg.cv_folds, cfg.seed);

    fs::create_directories(cfg.output_dir);

    struct Task {
        std::size_t model_idx;
        std::size_t fold;
    };
    std::vector<Task> tasks;
    for (std::size_t m = 0; m < cfg.models.size(); ++m)
        for (std::size_t f = 0; f < cfg.cv_folds; ++f) tasks.push_back({m, f});

    std::vector<FoldOutcome> outcomes(tasks.size());
    parallel_for_tasks(tasks.size(), cfg.threads, [&](std::size_t ti) {
        const Task& task = tasks[ti];
        const ModelSpec& spec = cfg.models[task.model_idx];
        FoldOutcome& out = outcomes[ti];
        try {
            FoldData fold = prepare_fold(base, split.train_indices(task.fold),
                                         split.test_indices(task.fold), cfg);
            auto model = make_regressor(spec, cfg);
            model->fit(fold.x_train, fold.y_train,
                       derive_seed(cfg.seed, spec.name, task.fold));
            std::vector<PredictiveDistribution> preds = model->predict(fold.x_test);
            out.metrics = evaluate_fold(task.fold, fold.y_test, preds);
            out.fitted = model->fitted_summary();
            if (task.fold == 0) {
                // Keep fold-0 test predictions (sorted by target) for plots.
                std::vector<std::size_t> order(preds.size());
                std::iota(order.begin(), order.end(), std::size_t{0});
                std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                    if (fold.y_test[a] != fold.y_test[b]) return fold.y_test[a] < fold.y_test[b];
                    return a < b;
                });
                nlohmann::json rows = nlohmann::json::array();
                for (std::size_t i : order) {
                    rows.push_back({{"target", fold.y_test[i]},
                                    {"mean", preds[i].mean},
                                    {"std", preds[i].std},
                                    {"lower", preds[i].lower},
                                    {"upper", preds[i].upper},
                                    {"has_std", preds[i].has_std}});
                }
                out.predictions = std::move(rows);
            }
        } catch (const std::exception& e) {
            out.error = std::string("model ") + spec.name + ", fold " +
                        std::to_string(task.fold) + ": " + e.what();
        }
    });

    BenchmarkResult result;
    std::string first_error;
    for (std::size_t m = 0; m < cfg.models.size(); ++m) {
        const ModelSpec& spec = cfg.models[m];
        EvaluationReport report;
        report.model = spec.name;
        report.dataset_id = cfg.dataset_id;
        report.config_hash = cfg.hash;
        nlohmann::json detail = nlohmann::json::object();
        nlohmann::json fold_summaries = nlohmann::json::array();
        bool failed = false;
        for (std::size_t ti = 0; ti < tasks.size(); ++ti) {
            if (tasks[ti].model_idx != m) continue;
            const FoldOutcome& out = outcomes[ti];
            if (!out.error.empty()) {
                failed = true;
                if (first_error.empty()) first_error = out.error;
                continue;  // partial results are still written
            }
            report.folds.push_back(out.metrics);
            fold_summaries.push_back(out.fitted);
            if (tasks[ti].fold == 0) detail["predictions"] = out.predictions;
        }
        detail["fitted"] = std::move(fold_summaries);
        if (failed) detail["error"] = first_error;

        nlohmann::json rj = report.to_json();
        rj["config"] = cfg.resolved;
        rj["details"] = detail;
        write_text_file(fs::path(cfg.output_dir) / ("report_" + spec.name + ".json"),
                        rj.dump(2) + "\n");
        write_prediction_plot(detail, spec.name, cfg.output_dir);
        result.details[spec.name] = std::move(detail);
        result.reports.push_back(std::move(report));
    }
    write_tables(result.reports, cfg.output_dir);
    if (!first_error.empty())
        throw std::runtime_error("benchmark finished with failures; first: " + first_error +
                                 " (partial results written to " + cfg.output_dir + ")");
    return result;
}

namespace {

std::string trace_csv(const ActiveLearningTrace& t) {
    std::string s = "iteration,n_labeled,r2,rmse,indices\n";
    for (std::size_t i = 0; i < t.iterations.size(); ++i) {
        const auto& it = t.iterations[i];
        s += std::to_string(i) + "," + std::to_string(it.labeled_count) + "," +
             format_number(it.r2) + "," + format_number(it.rmse) + ",";
        for (std::size_t k = 0; k < it.selected.size(); ++k) {
            if (k) s += ";";
            s += std::to_string(it.selected[k]);
        }
        s += "\n";
    }
    return s;
}

void write_al_plot(const std::vector<ActiveLearningTrace>& traces, const fs::path& dir) {
    // One curve per (model, strategy): mean R2 across seeds with min-max band.
    std::map<std::string, std::vector<const ActiveLearningTrace*>> groups;
    for (const auto& t : traces) groups[t.model + " / " + t.strategy].push_back(&t);
    std::vector<CurveSeries> series;
    for (const auto& [label, members] : groups) {
        CurveSeries cs;
        cs.label = label;
        std::size_t n_iters = members[0]->iterations.size();
        for (const auto* t : members) n_iters = std::min(n_iters, t->iterations.size());
        for (std::size_t i = 0; i < n_iters; ++i) {
            double lo = members[0]->iterations[i].r2, hi = lo, sum = 0.0;
            for (const auto* t : members) {
                double v = t->iterations[i].r2;
                lo = std::min(lo, v);
                hi = std::max(hi, v);
                sum += v;
            }
            cs.x.push_back(static_cast<double>(members[0]->iterations[i].labeled_count));
            cs.mean.push_back(sum / static_cast<double>(members.size()));
            cs.lower.push_back(lo);
            cs.upper.push_back(hi);
        }
        series.push_back(std::move(cs));
    }
    RenderedPlot plot = render_curves_plot("Active learning — test R2 vs labeled count",
                                           "labeled samples", "test R2", series);
    write_text_file(dir / "al_curves.svg", plot.svg);
}

}  // namespace

std::vector<ActiveLearningTrace> run_al(const ExperimentConfig& cfg) {
    if (!cfg.al.enabled) throw ConfigError("run_al: config has no 'al' section");
    Dataset base = cfg.load_dataset();
    if (cfg.log10_target) base = apply_log10_target(base);
    fs::create_directories(cfg.output_dir);

    struct Task {
        std::string model;
        std::string strategy;
        std::uint64_t seed;
    };
    std::vector<Task> tasks;
    for (const auto& m : cfg.al.models)
        for (const auto& s : cfg.al.strategies)
            for (std::uint64_t seed : cfg.al.seeds) tasks.push_back({m, s, seed});

    std::vector<ActiveLearningTrace> traces(tasks.size());
    parallel_for_tasks(tasks.size(), cfg.threads, [&](std::size_t ti) {
        const Task& task = tasks[ti];
        AlRunConfig al;
        al.strategy = task.strategy;
        al.batch = cfg.al.batch;
        al.initial_size = cfg.al.initial_size;
        al.label_budget = cfg.al.label_budget;
        al.test_fraction = cfg.al.test_fraction;
        al.seed = task.seed;
        al.normalize = cfg.normalize;
        if (cfg.physics.enabled) {
            al.physics.enabled = true;
            al.physics.ttp_kind = cfg.physics.ttp_kind;
            al.physics.fit_constants = cfg.physics.fit_constants;
            al.physics.ttp = cfg.physics.ttp;
            al.physics.roles = cfg.columns;
        }
        ModelSpec spec;
        spec.name = task.model;
        for (const auto& m : cfg.models)
            if (m.name == task.model) spec = m;
        traces[ti] = run_al_loop(base, [&] { return make_regressor(spec, cfg); }, al);
    });

    for (const auto& t : traces) {
        std::string name = "trace_" + t.model + "_" + t.strategy + "_" +
                           std::to_string(t.seed) + ".csv";
        write_text_file(fs::path(cfg.output_dir) / name, trace_csv(t));
    }
    write_al_plot(traces, cfg.output_dir);
    return traces;
}

void render_saved_outputs(const std::string& dir) {
    std::vector<fs::path> reports, trace_files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        std::string name = entry.path().filename().string();
        if (name.rfind("report_", 0) == 0 && entry.path().extension() == ".json")
            reports.push_back(entry.path());
        if (name.rfind("trace_", 0) == 0 && entry.path().extension() == ".csv")
            trace_files.push_back(entry.path);
    }
    std::sort(reports.begin(), reports.end());
    std::sort(trace_files.begin(), trace_files.end());
    if (reports.empty() && trace_files.empty())
        throw std::runtime_error("render_saved_outputs: no report/trace files in " + dir);

    for (const auto& path : reports) {
        std::ifstream in(path);
        nlohmann::json rj;
        in >> rj;
        if (rj.contains("details"))
            write_prediction_plot(rj.at("details"), rj.at("model").get<std::string>(), dir);
    }

    std::vector<ActiveLearningTrace> traces;
    for (const auto& path : trace_files) {
        // trace_<model>_<strategy>_<seed>.csv
        std::string stem = path.stem().string().substr(6);
        std::size_t last = stem.rfind('_');
        std::size_t mid = stem.rfind('_', last - 1);
        ActiveLearningTrace t;
        t.model = stem.substr(0, mid);
        t.strategy = stem.substr(mid + 1, last - mid - 1);
        t.seed = std::stoull(stem.substr(last + 1));
        std::ifstream in(path);
        std::string line;
        std::getline(in, line);  // header
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            AlIterationRecord rec;
            std::size_t p1 = line.find(','), p2 = line.find(',', p1 + 1),
                        p3 = line.find(',', p2 + 1), p4 = line.find(',', p3 + 1);
            rec.labeled_count = std::stoul(line.substr(p1 + 1, p2 - p1 - 1));
            rec.r2 = std::stod(line.substr(p2 + 1, p3 - p2 - 1));
            rec.rmse = std::stod(line.substr(p3 + 1, p4 - p3 - 1));
            t.iterations.push_back(std::move(rec));
        }
        if (!t.iterations.empty()) traces.push_back(std::move(t));
    }
    if (!traces.empty()) write_al_plot(traces, dir);
}

}  // namespace creepuq
