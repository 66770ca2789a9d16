#pragma once

#include <string>
#include <vector>

#include "creepuq/active_learning.hpp"
#include "creepuq/config.hpp"
#include "creepuq/metrics.hpp"

namespace creepuq {

/// Per-fold train/test matrices after leakage-free preprocessing: physics
/// fits and normalization bounds come from the training rows only.
struct FoldData {
    Tensor x_train, x_test;
    std::vector<double> y_train, y_test;
    nlohmann::json preprocessing;  // fitted bounds / TTP constants, for audit
};

FoldData prepare_fold(const Dataset& base, const std::vector<std::size_t>& train_idx,
                      const std::vector<std::size_t>& test_idx, const ExperimentConfig& cfg);

struct BenchmarkResult {
    std::vector<EvaluationReport> reports;
    // Per model, fold 0 test predictions for plotting: (target, mean, lo, hi, has_band).
    nlohmann::json details = nlohmann::json::object();
};

/// K-fold benchmark over every configured model; writes report_<model>.json,
/// table.csv, table.md and pred_<model>.svg under cfg.output_dir.
BenchmarkResult run_benchmark(const ExperimentConfig& cfg);

/// AL study over (model, strategy, seed); writes trace_*.csv and
/// al_curves.svg under cfg.output_dir.
std::vector<ActiveLearningTrace> run_al(const ExperimentConfig& cfg);

/// Re-renders plots from report/trace files already in `dir`.
void render_saved_outputs(const std::string& dir);

/// Bounded deterministic task runner: tasks write into their own slots, so
/// scheduling never changes results.
void parallel_for_tasks(std::size_t n_tasks, int threads,
                        const std::function<void(std::size_t)>& fn);

}  // namespace creepuq
