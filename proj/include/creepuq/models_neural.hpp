#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "creepuq/inference.hpp"
#include "creepuq/mlp.hpp"
#include "creepuq/optim.hpp"
#include "creepuq/regressor.hpp"

namespace creepuq {

enum class NeuralVariant { kDeterministic, kDeepEnsemble, kMcDropout, kBnnVi, kBnnMcmc };

NeuralVariant neural_variant_from_string(const std::string& s);
std::string to_string(NeuralVariant v);

/// Boundary-penalty attachment for the training objective (posterior
/// tempering for the MCMC variant).
struct PhysicsLossSpec {
    bool enabled = false;
    double lambda1 = 0.1;
    double lambda2 = 0.1;
    /// <= 0 selects the default: (max training target) + 1.
    double upper_bound = 0.0;
};

struct TrainOptions {
    int max_epochs = 2000;
    int batch_size = 16;
    int patience = 200;  // epochs without training-loss improvement
};

struct NeuralModelConfig {
    NeuralVariant variant = NeuralVariant::kDeterministic;
    std::vector<std::size_t> hidden_widths;
    OptimizerSpec optimizer;
    TrainOptions train;
    int ensemble_size = 5;      // Deep Ensemble
    double dropout_rate = 0.5;  // DE training / MC Dropout
    int mc_passes = 1000;       // MC Dropout inference
    double prior_sd = 1.0;      // BNNs
    double kl_weight = 0.01;    // VI
    double sigma_obs = 0.1;     // VI fixed observation noise (log10 hours)
    int vi_draws = 1000;        // VI inference draws
    int vi_mc_samples = 1;      // reparameterized samples per ELBO step
    int mcmc_warmup = 500;
    int mcmc_samples = 100;
    PhysicsLossSpec physics;

    /// Per-variant defaults matching the published recipes.
    static NeuralModelConfig defaults(NeuralVariant v);
};

/// NN / Deep Ensemble / MC Dropout / BNN-VI / BNN-MCMC behind the uniform
/// Regressor surface. Targets are centered by the training mean internally;
/// predictions come back in target units. The deterministic variant emits
/// point predictions only.
class NeuralRegressor : public Regressor {
public:
    explicit NeuralRegressor(NeuralModelConfig cfg, double interval_z)
        : cfg_(std::move(cfg)), z_(interval_z) {}

    void fit(const Tensor& x, const std::vector<double>& y, std::uint64_t seed) override;
    std::vector<PredictiveDistribution> predict(const Tensor& x) const override;
    std::string name() const override { return to_string(cfg_.variant); }
    bool has_uncertainty() const override {
        return cfg_.variant != NeuralVariant::kDeterministic;
    }
    nlohmann::json fitted_summary() const override;

    /// Flat parameter vectors: one for deterministic / MC dropout, S for the
    /// ensemble, retained draws for MCMC.
    const std::vector<std::vector<double>>& parameter_sets() const { return params_; }
    const MlpArchitecture& architecture() const { return arch_; }
    double target_center() const { return center_; }
    const std::optional<MeanFieldPosterior>& variational_posterior() const { return vi_posterior_; }

private:
    NeuralModelConfig cfg_;
    double z_ = 1.96;
    MlpArchitecture arch_;
    double center_ = 0.0;
    std::uint64_t fit_seed_ = 0;
    std::vector<std::vector<double>> params_;
    std::optional<MeanFieldPosterior> vi_posterior_;
    nlohmann::json diagnostics_ = nlohmann::json::object();
};

/// Gradient-trained MLP (the deterministic / ensemble-member / MC-dropout
/// training path): MSE plus optional boundary penalties, minibatched, early
/// stopping on the full-train loss evaluated without dropout.
struct MlpTrainResult {
    std::vector<double> params;
    double best_loss = 0.0;
    int epochs_run = 0;
};
MlpTrainResult train_mlp_regressor(const MlpArchitecture& arch, const Tensor& x,
                                   const std::vector<double>& y_centered, double center,
                                   double dropout_rate, const OptimizerSpec& opt_spec,
                                   const TrainOptions& train, const PhysicsLossSpec& physics,
                                   double physics_upper_bound, std::uint64_t seed);

/// Unnormalized BNN log posterior over [network params, log sigma_obs]:
/// Gaussian prior on weights, half-normal(1) prior on sigma_obs, Gaussian
/// likelihood, optional boundary penalties scaled by n as posterior
/// tempering. The returned target owns its graph.
LogDensityTarget make_bnn_log_density(const MlpArchitecture& arch, const Tensor& x,
                                      const std::vector<double>& y_centered, double center,
                                      double prior_sd, const PhysicsLossSpec& physics,
                                      double physics_upper_bound);

}  // namespace creepuq
