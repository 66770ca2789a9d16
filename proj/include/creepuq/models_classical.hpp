#pragma once

#include <optional>

#include "creepuq/boosting.hpp"
#include "creepuq/gpr.hpp"
#include "creepuq/regressor.hpp"

namespace creepuq {

class GprRegressor : public Regressor {
public:
    explicit GprRegressor(double interval_z, GprSearchConfig search = {})
        : z_(interval_z), search_(search) {}

    void fit(const Tensor& x, const std::vector<double>& y, std::uint64_t) override {
        model_ = GprModel::fit(x, y, search_);
    }
    std::vector<PredictiveDistribution> predict(const Tensor& x) const override {
        return model_->predict(x, z_);
    }
    std::string name() const override { return "gpr"; }
    nlohmann::json fitted_summary() const override {
        if (!model_) return nlohmann::json::object();
        const auto& hp = model_->hyperparameters();
        return {{"signal_sd", hp.signal_sd},
                {"length_scale", hp.length_scale},
                {"noise_sd", hp.noise_sd},
                {"log_marginal_likelihood", model_->log_marginal_likelihood()}};
    }

private:
    double z_;
    GprSearchConfig search_;
    std::optional<GprModel> model_;
};

class QuantileRegressor : public Regressor {
public:
    explicit QuantileRegressor(BoostConfig cfg = {},
                               std::vector<double> quantiles = {0.025, 0.5, 0.975})
        : cfg_(cfg), quantiles_(std::move(quantiles)) {}

    void fit(const Tensor& x, const std::vector<double>& y, std::uint64_t) override {
        model_ = QuantileBoostModel::fit(x, y, quantiles_, cfg_);
    }
    std::vector<PredictiveDistribution> predict(const Tensor& x) const override {
        return model_->predict(x);
    }
    std::string name() const override { return "qr"; }
    nlohmann::json fitted_summary() const override {
        return {{"rounds", cfg_.rounds},
                {"learning_rate", cfg_.learning_rate},
                {"max_depth", cfg_.max_depth},
                {"quantiles", quantiles_}};
    }

private:
    BoostConfig cfg_;
    std::vector<double> quantiles_;
    std::optional<QuantileBoostModel> model_;
};

class NgboostRegressor : public Regressor {
public:
    explicit NgboostRegressor(double interval_z, NgboostConfig cfg = {})
        : z_(interval_z), cfg_(cfg) {}

    void fit(const Tensor& x, const std::vector<double>& y, std::uint64_t) override {
        model_ = NgboostModel::fit(x, y, cfg_);
    }
    std::vector<PredictiveDistribution> predict(const Tensor& x) const override {
        return model_->predict(x, z_);
    }
    std::string name() const override { return "ngboost"; }
    nlohmann::json fitted_summary() const override {
        return {{"rounds", cfg_.rounds}, {"learning_rate", cfg_.learning_rate},
                {"max_depth", cfg_.max_depth}};
    }

private:
    double z_;
    NgboostConfig cfg_;
    std::optional<NgboostModel> model_;
};

}  // namespace creepuq
