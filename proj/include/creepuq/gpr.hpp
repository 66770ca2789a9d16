#pragma once

#include <utility>
#include <vector>

#include "creepuq/predictive.hpp"
#include "creepuq/tensor.hpp"

namespace creepuq {

struct GprHyperparameters {
    double signal_sd = 1.0;    // sigma_f
    double length_scale = 1.0; // l
    double noise_sd = 0.1;     // sigma_n
};

struct GprSearchConfig {
    // log10-spaced grid per hyperparameter, then coordinate refinement.
    int grid_points = 7;
    double signal_min = 1e-2, signal_max = 1e2;
    double length_min = 1e-2, length_max = 1e2;
    double noise_min = 1e-4, noise_max = 1.0;
    int refine_rounds = 3;
};

/// Zero-mean GP with the isotropic RBF kernel
/// k(a,b) = sigma_f^2 exp(-|a-b|^2 / (2 l^2)). Predictive variance includes
/// the noise term, so intervals target observations rather than the latent
/// function.
class GprModel {
public:
    /// Maximizes log marginal likelihood over the grid, then refines each
    /// coordinate locally (halving the log-step each round). Targets are
    /// centered by their mean, restored at prediction.
    static GprModel fit(const Tensor& x, const std::vector<double>& y,
                        const GprSearchConfig& cfg = {});

    /// Fixed hyperparameters; optional centering (off matches the raw
    /// zero-mean equations).
    static GprModel fit_fixed(const Tensor& x, const std::vector<double>& y,
                              const GprHyperparameters& hp, bool center_targets = false);

    std::pair<double, double> predict_mean_std(const double* x_star) const;
    PredictiveDistribution predict(const double* x_star, double z) const;
    std::vector<PredictiveDistribution> predict(const Tensor& x_star, double z) const;

    const GprHyperparameters& hyperparameters() const { return hp_; }
    double log_marginal_likelihood() const { return lml_; }
    double target_mean() const { return y_mean_; }

private:
    GprHyperparameters hp_;
    Tensor x_train_;                 // (n, d)
    std::vector<double> alpha_;      // (K + sn^2 I)^-1 (y - mean)
    std::vector<double> chol_;       // lower-triangular factor, row-major n*n
    double y_mean_ = 0.0;
    double lml_ = 0.0;

    void factorize(const std::vector<double>& y_centered);
};

}  // namespace creepuq
