#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace creepuq {

double pcc(const std::vector<double>& y, const std::vector<double>& y_pred);
double r_squared(const std::vector<double>& y, const std::vector<double>& y_pred);
double rmse(const std::vector<double>& y, const std::vector<double>& y_pred);
double mae(const std::vector<double>& y, const std::vector<double>& y_pred);

/// Fraction of targets inside their (closed) interval.
double coverage(const std::vector<double>& y,
                const std::vector<std::pair<double, double>>& intervals);

double mean_interval_width(const std::vector<std::pair<double, double>>& intervals);

/// 0.75 * coverage + 0.25 / width, coverage as a fraction in [0, 1].
double composite_metric(double coverage_fraction, double width);

/// Accuracy + UQ metrics for one fold; UQ entries absent for models without
/// a std output or with degenerate (zero-width) intervals.
struct FoldMetrics {
    std::size_t fold = 0;
    double pcc = 0.0;
    double r_squared = 0.0;
    double rmse = 0.0;
    double mae = 0.0;
    std::optional<double> coverage;
    std::optional<double> interval_width;
    std::optional<double> composite;
};

struct MetricSummary {
    double mean = 0.0;
    double sd = 0.0;  // sample SD (n-1)
};

struct EvaluationReport {
    std::string model;
    std::string dataset_id;
    std::string config_hash;
    std::vector<FoldMetrics> folds;

    MetricSummary summary(const std::string& metric) const;
    /// Composite evaluated on the across-fold mean coverage and width, as a
    /// cross-check next to the per-fold-then-average value.
    std::optional<double> composite_direct() const;
    bool has_uncertainty() const;

    nlohmann::json to_json() const;
};

}  // namespace creepuq
