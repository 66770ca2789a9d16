#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "creepuq/graph.hpp"
#include "creepuq/optim.hpp"
#include "creepuq/rng.hpp"
#include "creepuq/tensor.hpp"

namespace creepuq {

/// Unnormalized log posterior with gradient. Returns the log density and
/// fills `grad` (resized to dim). Non-finite values signal divergence to
/// the samplers rather than throwing.
struct LogDensityTarget {
    std::size_t dim = 0;
    std::function<double(const std::vector<double>&, std::vector<double>&)> log_density_grad;

    double log_density(const std::vector<double>& position) const {
        std::vector<double> scratch;
        return log_density_grad(position, scratch);
    }
};

struct LeapfrogResult {
    std::vector<double> position;
    std::vector<double> momentum;
    double log_density = 0.0;
    bool diverged = false;  // non-finite energy encountered
};

/// Standard leapfrog with identity mass matrix: time-reversible and
/// volume-preserving.
LeapfrogResult leapfrog(const LogDensityTarget& target, std::vector<double> position,
                        std::vector<double> momentum, double step_size, int n_steps);

struct NutsConfig {
    int warmup = 1000;
    int samples = 1000;
    double target_accept = 0.8;
    int max_tree_depth = 10;
    double divergence_threshold = 1000.0;  // energy error triggering a divergence
    std::uint64_t seed = 0;
};

struct PosteriorSamples {
    std::vector<std::vector<double>> draws;  // retained, post-warmup, non-divergent
    std::size_t divergence_count = 0;        // over post-warmup iterations
    std::size_t post_warmup_iterations = 0;
    double adapted_step_size = 0.0;
    double mean_tree_depth = 0.0;
    std::vector<int> tree_depths;            // per post-warmup iteration
    std::uint64_t seed = 0;
};

/// Multiplicative-doubling NUTS with multinomial state selection and
/// dual-averaging step-size adaptation during warmup.
PosteriorSamples nuts_sample(const LogDensityTarget& target,
                             const std::vector<double>& initial,
                             const NutsConfig& cfg);

/// Mean-field Gaussian variational posterior over a flat parameter vector.
struct MeanFieldPosterior {
    std::vector<double> mean;
    std::vector<double> log_sd;

    std::size_t dim() const { return mean.size(); }
    std::vector<double> sample(Rng& rng) const;
};

struct GaussianPrior {
    double mean = 0.0;
    double sd = 1.0;
};

/// Closed-form KL between diagonal Gaussians, per dimension summed.
double gaussian_kl(double mu_q, double sd_q, double mu_p, double sd_p);

/// Builds a differentiable prediction node from a flat parameter node and an
/// input node; the hook that lets VI/HMC run over MLPs, linear models, or
/// anything else expressible on the graph.
using PredictionBuilder =
    std::function<Graph::NodeId(Graph& g, Graph::NodeId params, Graph::NodeId x)>;

/// Negative-ELBO loss graph: reparameterized MC estimate of the expected
/// Gaussian negative log likelihood (fixed observation noise) plus
/// kl_weight * KL[q || prior]. Likelihood is scaled by dataset_size/batch
/// so minibatches estimate the full-data ELBO.
struct ElboGraph {
    Graph graph;
    Graph::NodeId mean = -1;
    Graph::NodeId log_sd = -1;
    std::vector<Graph::NodeId> noise_inputs;  // one per MC sample, dim = param count
    Graph::NodeId x = -1;
    Graph::NodeId y = -1;
    Graph::NodeId loss = -1;         // negative ELBO
    Graph::NodeId kl = -1;
    std::size_t param_dim = 0;
};

ElboGraph build_elbo_graph(const PredictionBuilder& builder, std::size_t param_dim,
                           std::size_t batch_rows, std::size_t input_width,
                           std::size_t dataset_size, const GaussianPrior& prior,
                           double sigma_obs, int n_mc_samples, double kl_weight);

struct ViConfig {
    GaussianPrior prior{0.0, 1.0};
    double kl_weight = 1.0;
    double sigma_obs = 0.1;
    int n_mc_samples = 1;
    int batch_size = 16;
    int max_epochs = 2000;
    int patience = 200;
    OptimizerSpec optimizer{OptimizerKind::kSgd, 0.001, 0.95};
    std::uint64_t seed = 0;
};

struct ViResult {
    MeanFieldPosterior posterior;
    double final_loss = 0.0;   // epoch-mean negative ELBO at the best epoch
    int epochs_run = 0;
};

/// Stochastic optimization of the negative ELBO. `initial_mean` seeds the
/// variational means (e.g. an MLP init); sd starts at 0.1 * prior sd.
/// An empty dataset reduces the objective to the KL term alone.
ViResult vi_fit(const PredictionBuilder& builder, std::size_t param_dim,
                const Tensor& x, const std::vector<double>& y,
                const std::vector<double>& initial_mean, const ViConfig& cfg);

/// Eq. 5/6 aggregation: per-point mean and population standard deviation
/// (divisor S) over per-draw predictions. `per_draw[s]` holds draw s's
/// outputs for all points.
struct PredictiveMoments {
    std::vector<double> mean;
    std::vector<double> sd;
};
PredictiveMoments aggregate_predictions(const std::vector<std::vector<double>>& per_draw);

/// Draws S parameter vectors from q and aggregates `predict` outputs.
PredictiveMoments posterior_predict(const MeanFieldPosterior& q, std::size_t n_draws,
                                    std::uint64_t seed,
                                    const std::function<std::vector<double>(const std::vector<double>&)>& predict);

/// Aggregates over an explicit sample set (e.g. retained MCMC draws).
PredictiveMoments posterior_predict(const std::vector<std::vector<double>>& samples,
                                    const std::function<std::vector<double>(const std::vector<double>&)>& predict);

}  // namespace creepuq
