#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "creepuq/predictive.hpp"
#include "creepuq/tensor.hpp"

namespace creepuq {

/// Axis-aligned regression tree, exact greedy least-squares splits.
class RegressionTree {
public:
    struct Config {
        int max_depth = 3;
        std::size_t min_leaf = 1;
    };

    static RegressionTree fit(const Tensor& x, const std::vector<double>& targets,
                              const Config& cfg);

    double predict_row(const double* x) const;

private:
    struct Node {
        int feature = -1;       // -1 => leaf
        double threshold = 0.0; // go left when x[feature] <= threshold
        double value = 0.0;
        std::int32_t left = -1, right = -1;
    };
    std::vector<Node> nodes_;

    std::int32_t grow(const Tensor& x, const std::vector<double>& targets,
                      std::vector<std::size_t>& rows, int depth, const Config& cfg);
};

/// Pinball loss and its subgradient w.r.t. the quantile estimate q
/// (gradient 0 at the y == q tie).
double pinball_loss(double y, double q, double tau);
double pinball_gradient(double y, double q, double tau);

/// Type-7 (linear interpolation) empirical quantile of unsorted data.
double empirical_quantile(std::vector<double> values, double tau);

struct BoostConfig {
    int rounds = 300;
    double learning_rate = 0.05;
    int max_depth = 3;
    std::size_t min_leaf = 1;
};

/// One boosted ensemble per quantile, trained on the pinball-loss negative
/// gradient. Initial prediction is the empirical tau-quantile of the
/// training targets.
class QuantileBoostModel {
public:
    static QuantileBoostModel fit(const Tensor& x, const std::vector<double>& y,
                                  const std::vector<double>& quantiles,
                                  const BoostConfig& cfg = {});

    /// Raw per-quantile estimates (unsorted) in quantile order.
    std::vector<double> predict_quantiles(const double* x) const;

    /// Assembles mean = q(0.5), interval = (lowest, highest) after sorting
    /// crossed quantiles, std = width / (2 * 1.96). Requires exactly three
    /// quantiles {lo, 0.5, hi}.
    PredictiveDistribution predict(const double* x) const;
    std::vector<PredictiveDistribution> predict(const Tensor& x) const;

    const std::vector<double>& quantiles() const { return quantiles_; }

private:
    std::vector<double> quantiles_;
    std::vector<double> initial_;                       // per quantile
    std::vector<std::vector<RegressionTree>> ensembles_; // per quantile
    double learning_rate_ = 0.05;
};

struct NgboostConfig {
    int rounds = 500;
    double learning_rate = 0.01;
    int max_depth = 3;
    std::size_t min_leaf = 1;
};

/// Natural-gradient boosting of a Gaussian predictive distribution
/// parameterized as (mu, s = log sigma). Natural gradients of the Gaussian
/// NLL: d_mu = (mu - y), d_s = (1 - (y - mu)^2 / sigma^2) / 2.
class NgboostModel {
public:
    static NgboostModel fit(const Tensor& x, const std::vector<double>& y,
                            const NgboostConfig& cfg = {});

    std::pair<double, double> predict_mean_std(const double* x) const;
    PredictiveDistribution predict(const double* x, double z) const;
    std::vector<PredictiveDistribution> predict(const Tensor& x, double z) const;

    /// Training-set NLL after each round (index 0 = initialization), kept
    /// for the monotonicity diagnostic.
    const std::vector<double>& training_nll_history() const { return nll_history_; }

    static double natural_gradient_mu(double y, double mu);
    static double natural_gradient_log_sigma(double y, double mu, double sigma);

private:
    double initial_mu_ = 0.0;
    double initial_log_sigma_ = 0.0;
    std::vector<RegressionTree> mu_trees_;
    std::vector<RegressionTree> log_sigma_trees_;
    double learning_rate_ = 0.01;
    std::vector<double> nll_history_;
};

}  // namespace creepuq
