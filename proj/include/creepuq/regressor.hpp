#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "creepuq/predictive.hpp"
#include "creepuq/tensor.hpp"

namespace creepuq {

/// Uniform fit/predict surface shared by every model family; the benchmark
/// runner and the active-learning loop only see this.
class Regressor {
public:
    virtual ~Regressor() = default;

    /// Fits on preprocessed data (normalized features, log-transformed
    /// target). Deterministic in `seed`.
    virtual void fit(const Tensor& x, const std::vector<double>& y, std::uint64_t seed) = 0;

    virtual std::vector<PredictiveDistribution> predict(const Tensor& x) const = 0;

    virtual std::string name() const = 0;
    virtual bool has_uncertainty() const { return true; }

    /// Fitted hyperparameters / diagnostics for the results file.
    virtual nlohmann::json fitted_summary() const { return nlohmann::json::object(); }
};

}  // namespace creepuq
