#include "creepuq/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace creepuq {

namespace {

void check_lengths(const std::vector<double>& y, const std::vector<double>& y_pred,
                   std::size_t min_len, const char* who) {
    if (y.size() != y_pred.size())
        throw std::invalid_argument(std::string(who) + ": length mismatch");
    if (y.size() < min_len)
        throw std::invalid_argument(std::string(who) + ": need at least " +
                                    std::to_string(min_len) + " values");
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

}  // namespace

double pcc(const std::vector<double>& y, const std::vector<double>& y_pred) {
    check_lengths(y, y_pred, 2, "pcc");
    double my = mean_of(y), mp = mean_of(y_pred);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        double a = y[i] - my, b = y_pred[i] - mp;
        sxy += a * b;
        sxx += a * a;
        syy += b * b;
    }
    if (sxx == 0.0 || syy == 0.0)
        throw std::invalid_argument("pcc: constant input vector (zero standard deviation)");
    return sxy / std::sqrt(sxx * syy);
}

double r_squared(const std::vector<double>& y, const std::vector<double>& y_pred) {
    check_lengths(y, y_pred, 2, "r_squared");
    double my = mean_of(y);
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        double r = y[i] - y_pred[i];
        double d = y[i] - my;
        ss_res += r * r;
        ss_tot += d * d;
    }
    if (ss_tot == 0.0) throw std::invalid_argument("r_squared: constant target vector");
    return 1.0 - ss_res / ss_tot;
}

double rmse(const std::vector<double>& y, const std::vector<double>& y_pred) {
    check_lengths(y, y_pred, 1, "rmse");
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        double r = y[i] - y_pred[i];
        s += r * r;
    }
    return std::sqrt(s / static_cast<double>(y.size()));
}

double mae(const std::vector<double>& y, const std::vector<double>& y_pred) {
    check_lengths(y, y_pred, 1, "mae");
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += std::abs(y[i] - y_pred[i]);
    return s / static_cast<double>(y.size());
}

double coverage(const std::vector<double>& y,
                const std::vector<std::pair<double, double>>& intervals) {
    if (y.size() != intervals.size()) throw std::invalid_argument("coverage: length mismatch");
    if (y.empty()) throw std::invalid_argument("coverage: empty input");
    std::size_t inside = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        auto [lo, hi] = intervals[i];
        if (lo > hi) throw std::invalid_argument("coverage: inverted interval at index " +
                                                 std::to_string(i));
        if (lo <= y[i] && y[i] <= hi) ++inside;
    }
    return static_cast<double>(inside) / static_cast<double>(y.size());
}

double mean_interval_width(const std::vector<std::pair<double, double>>& intervals) {
    if (intervals.empty()) throw std::invalid_argument("mean_interval_width: empty input");
    double s = 0.0;
    for (std::size_t i = 0; i < intervals.size(); ++i) {
        auto [lo, hi] = intervals[i];
        if (lo > hi)
            throw std::invalid_argument("mean_interval_width: inverted interval at index " +
                                        std::to_string(i));
        s += hi - lo;
    }
    return s / static_cast<double>(intervals.size());
}

double composite_metric(double coverage_fraction, double width) {
    if (width <= 0.0)
        throw std::invalid_argument("composite_metric: undefined for non-positive width");
    if (coverage_fraction < 0.0 || coverage_fraction > 1.0)
        throw std::invalid_argument("composite_metric: coverage must be a fraction in [0, 1]");
    return 0.75 * coverage_fraction + 0.25 / width;
}

namespace {

MetricSummary summarize(const std::vector<double>& values) {
    MetricSummary s;
    if (values.empty()) return s;
    double m = mean_of(values);
    s.mean = m;
    if (values.size() > 1) {
        double acc = 0.0;
        for (double v : values) acc += (v - m) * (v - m);
        s.sd = std::sqrt(acc / static_cast<double>(values.size() - 1));
    }
    return s;
}

}  // namespace

MetricSummary EvaluationReport::summary(const std::string& metric) const {
    std::vector<double> vals;
    for (const auto& f : folds) {
        if (metric == "pcc") vals.push_back(f.pcc);
        else if (metric == "r2") vals.push_back(f.r_squared);
        else if (metric == "rmse") vals.push_back(f.rmse);
        else if (metric == "mae") vals.push_back(f.mae);
        else if (metric == "coverage") { if (f.coverage) vals.push_back(*f.coverage); }
        else if (metric == "interval_width") { if (f.interval_width) vals.push_back(*f.interval_width); }
        else if (metric == "composite") { if (f.composite) vals.push_back(*f.composite); }
        else throw std::invalid_argument("EvaluationReport: unknown metric " + metric);
    }
    return summarize(vals);
}

std::optional<double> EvaluationReport::composite_direct() const {
    std::vector<double> covs, widths;
    for (const auto& f : folds) {
        if (f.coverage && f.interval_width) {
            covs.push_back(*f.coverage);
            widths.push_back(*f.interval_width);
        }
    }
    if (covs.empty()) return std::nullopt;
    double w = mean_of(widths);
    if (w <= 0.0) return std::nullopt;
    return composite_metric(mean_of(covs), w);
}

bool EvaluationReport::has_uncertainty() const {
    for (const auto& f : folds)
        if (f.coverage) return true;
    return false;
}

nlohmann::json EvaluationReport::to_json() const {
    nlohmann::json folds_json = nlohmann::json::array();
    for (const auto& f : folds) {
        nlohmann::json j = {
            {"fold", f.fold}, {"pcc", f.pcc}, {"r2", f.r_squared},
            {"rmse", f.rmse}, {"mae", f.mae},
        };
        if (f.coverage) j["coverage"] = *f.coverage;
        if (f.interval_width) j["interval_width"] = *f.interval_width;
        if (f.composite) j["composite"] = *f.composite;
        folds_json.push_back(std::move(j));
    }
    nlohmann::json agg;
    for (const char* m : {"pcc", "r2", "rmse", "mae", "coverage", "interval_width", "composite"}) {
        MetricSummary s = summary(m);
        bool present = true;
        if (std::string(m) == "coverage" || std::string(m) == "interval_width" ||
            std::string(m) == "composite")
            present = has_uncertainty();
        if (present) agg[m] = {{"mean", s.mean}, {"sd", s.sd}};
    }
    if (auto cd = composite_direct()) agg["composite_direct"] = *cd;
    return nlohmann::json{{"model", model},
                          {"dataset", dataset_id},
                          {"config_hash", config_hash},
                          {"folds", std::move(folds_json)},
                          {"aggregate", std::move(agg)}};
}

}  // namespace creepuq
