#include "creepuq/models_neural.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <stdexcept>

#include "creepuq/physics.hpp"

namespace creepuq {

NeuralVariant neural_variant_from_string(const std::string& s) {
    if (s == "nn") return NeuralVariant::kDeterministic;
    if (s == "deep_ensemble") return NeuralVariant::kDeepEnsemble;
    if (s == "mc_dropout") return NeuralVariant::kMcDropout;
    if (s == "bnn_vi") return NeuralVariant::kBnnVi;
    if (s == "bnn_mcmc") return NeuralVariant::kBnnMcmc;
    throw std::invalid_argument("unknown neural variant: " + s);
}

std::string to_string(NeuralVariant v) {
    switch (v) {
        case NeuralVariant::kDeterministic: return "nn";
        case NeuralVariant::kDeepEnsemble: return "deep_ensemble";
        case NeuralVariant::kMcDropout: return "mc_dropout";
        case NeuralVariant::kBnnVi: return "bnn_vi";
        case NeuralVariant::kBnnMcmc: return "bnn_mcmc";
    }
    return "?";
}

NeuralModelConfig NeuralModelConfig::defaults(NeuralVariant v) {
    NeuralModelConfig cfg;
    cfg.variant = v;
    switch (v) {
        case NeuralVariant::kDeterministic:
            cfg.hidden_widths = {1000, 200, 40};
            cfg.optimizer = {OptimizerKind::kRmsProp, 0.01};
            cfg.dropout_rate = 0.0;
            break;
        case NeuralVariant::kDeepEnsemble:
            cfg.hidden_widths = {10, 10, 10};
            cfg.optimizer = {OptimizerKind::kAdam, 0.01};
            cfg.ensemble_size = 5;
            cfg.dropout_rate = 0.5;  // training only; inference has dropout off
            break;
        case NeuralVariant::kMcDropout:
            cfg.hidden_widths = {100, 100, 100};
            cfg.optimizer = {OptimizerKind::kAdagrad, 0.01};
            cfg.dropout_rate = 0.5;
            cfg.mc_passes = 1000;
            break;
        case NeuralVariant::kBnnVi:
            cfg.hidden_widths = {100, 100};
            cfg.optimizer = {OptimizerKind::kSgd, 0.001, 0.95};
            cfg.prior_sd = 0.06;
            cfg.kl_weight = 0.01;
            cfg.vi_draws = 1000;
            break;
        case NeuralVariant::kBnnMcmc:
            cfg.hidden_widths = {10, 10, 10};
            cfg.prior_sd = 1.0;
            cfg.mcmc_warmup = 500;
            cfg.mcmc_samples = 100;
            break;
    }
    return cfg;
}

namespace {

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

/// Per-batch training graph: params/x/y inputs, MSE(+penalty) loss.
struct BatchGraph {
    Graph graph;
    Graph::NodeId params = -1;
    Graph::NodeId x = -1;
    Graph::NodeId y = -1;
    Graph::NodeId loss = -1;
    std::vector<Graph::NodeId> masks;
};

BatchGraph make_batch_graph(const MlpArchitecture& arch, std::size_t rows, double center,
                            bool dropout, const PhysicsLossSpec& physics,
                            double upper_bound) {
    BatchGraph bg;
    Graph& g = bg.graph;
    bg.params = g.input({arch.parameter_count()});
    bg.x = g.input({rows, arch.input_width()});
    bg.y = g.input({rows, 1});
    MlpGraphOutput net = build_mlp_graph(g, arch, bg.params, bg.x, dropout);
    bg.masks = net.dropout_masks;
    Graph::NodeId resid = g.sub(net.output, bg.y);
    Graph::NodeId loss = g.mean(g.mul(resid, resid));
    if (physics.enabled) {
        // Penalties act on predictions in target units.
        Graph::NodeId pred_orig = g.affine(net.output, 1.0, center);
        PiLossNodes pi = pi_loss_nodes(g, pred_orig, upper_bound);
        loss = composite_pi_loss_node(g, loss, pi, physics.lambda1, physics.lambda2);
    }
    bg.loss = loss;
    return bg;
}

void fill_dropout_masks(BatchGraph& bg, double rate, Rng& rng) {
    if (bg.masks.empty()) return;
    double keep = 1.0 - rate;
    double scale = (keep > 0.0) ? 1.0 / keep : 0.0;
    std::vector<double> mask;
    for (Graph::NodeId m : bg.masks) {
        std::size_t n = bg.graph.value(m).size();
        mask.resize(n);
        for (std::size_t i = 0; i < n; ++i)
            mask[i] = (rng.uniform() < keep) ? scale : 0.0;
        bg.graph.set_values(m, mask);
    }
}

void set_masks_identity(BatchGraph& bg) {
    for (Graph::NodeId m : bg.masks) {
        std::size_t n = bg.graph.value(m).size();
        bg.graph.set_values(m, std::vector<double>(n, 1.0));
    }
}

}  // namespace

MlpTrainResult train_mlp_regressor(const MlpArchitecture& arch, const Tensor& x,
                                   const std::vector<double>& y_centered, double center,
                                   double dropout_rate, const OptimizerSpec& opt_spec,
                                   const TrainOptions& train, const PhysicsLossSpec& physics,
                                   double physics_upper_bound, std::uint64_t seed) {
    std::size_t n = y_centered.size();
    if (x.rows() != n || n == 0)
        throw std::invalid_argument("train_mlp_regressor: bad training set");

    Rng init_rng(derive_seed(seed, "init"));
    std::vector<double> params = init_mlp_params(arch, init_rng);
    Optimizer opt(opt_spec, params.size());
    Rng rng(derive_seed(seed, "train"));

    bool dropout = dropout_rate > 0.0;
    std::size_t batch = std::min<std::size_t>(static_cast<std::size_t>(train.batch_size), n);
    std::map<std::size_t, BatchGraph> graphs;
    auto graph_for = [&](std::size_t rows) -> BatchGraph& {
        auto it = graphs.find(rows);
        if (it == graphs.end())
            it = graphs.emplace(rows, make_batch_graph(arch, rows, center, dropout, physics,
                                                       physics_upper_bound)).first;
        return it->second;
    };
    // Full-batch graph, dropout disabled, for the early-stopping metric.
    BatchGraph eval = make_batch_graph(arch, n, center, dropout, physics, physics_upper_bound);
    set_masks_identity(eval);
    {
        std::vector<double> yb(n);
        for (std::size_t i = 0; i < n; ++i) yb[i] = y_centered[i];
        eval.graph.set_values(eval.x, x.values);
        eval.graph.set_values(eval.y, yb);
    }

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    MlpTrainResult result;
    double best_loss = std::numeric_limits<double>::infinity();
    std::vector<double> best_params = params;
    int best_epoch = 0;
    int epoch = 0;

    std::vector<double> xb, yb;
    for (epoch = 0; epoch < train.max_epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < n; start += batch) {
            std::size_t rows = std::min(batch, n - start);
            BatchGraph& bg = graph_for(rows);
            xb.resize(rows * x.cols());
            yb.resize(rows);
            for (std::size_t r = 0; r < rows; ++r) {
                std::size_t src = order[start + r];
                std::copy(&x.values[src * x.cols()], &x.values[(src + 1) * x.cols()],
                          &xb[r * x.cols()]);
                yb[r] = y_centered[src];
            }
            bg.graph.set_values(bg.x, xb);
            bg.graph.set_values(bg.y, yb);
            bg.graph.set_values(bg.params, params);
            fill_dropout_masks(bg, dropout_rate, rng);
            if (!bg.graph.forward_finite(bg.loss))
                throw std::runtime_error("train_mlp_regressor: non-finite loss at epoch " +
                                         std::to_string(epoch));
            bg.graph.backward(bg.loss);
            const Tensor& gp = bg.graph.grad(bg.params);
            opt.step(params, gp.values);
        }
        eval.graph.set_values(eval.params, params);
        eval.graph.forward();
        double loss = eval.graph.scalar_value(eval.loss);
        if (!std::isfinite(loss))
            throw std::runtime_error("train_mlp_regressor: non-finite training loss at epoch " +
                                     std::to_string(epoch));
        if (loss < best_loss - 1e-12) {
            best_loss = loss;
            best_params = params;
            best_epoch = epoch;
        } else if (epoch - best_epoch >= train.patience) {
            break;
        }
    }

    result.params = std::move(best_params);
    result.best_loss = best_loss;
    result.epochs_run = epoch;
    return result;
}

LogDensityTarget make_bnn_log_density(const MlpArchitecture& arch, const Tensor& x,
                                      const std::vector<double>& y_centered, double center,
                                      double prior_sd, const PhysicsLossSpec& physics,
                                      double physics_upper_bound) {
    std::size_t n = y_centered.size();
    std::size_t p = arch.parameter_count();
    if (x.rows() != n || n == 0) throw std::invalid_argument("make_bnn_log_density: bad data");
    if (prior_sd <= 0.0) throw std::invalid_argument("make_bnn_log_density: prior sd must be > 0");

    auto g = std::make_shared<Graph>();
    Graph::NodeId theta = g->input({p + 1});
    Graph::NodeId net_params = g->slice(theta, 0, {p});
    Graph::NodeId log_sigma = g->slice(theta, p, {1});

    Graph::NodeId xc = g->constant(Tensor({n, arch.input_width()}, x.values));
    Graph::NodeId yc = g->constant(Tensor({n, 1}, y_centered));

    MlpGraphOutput net = build_mlp_graph(*g, arch, net_params, xc, false);
    Graph::NodeId resid = g->sub(net.output, yc);
    Graph::NodeId sq = g->sum(g->mul(resid, resid));
    Graph::NodeId inv_var = g->exp(g->affine(log_sigma, -2.0, 0.0));
    double nd = static_cast<double>(n);
    // log N(y | f, sigma^2): -sq/(2 sigma^2) - n log sigma - n/2 log(2 pi)
    Graph::NodeId loglik = g->add(g->affine(g->mul(sq, inv_var), -0.5, -0.5 * nd * std::log(2.0 * M_PI)),
                                  g->affine(log_sigma, -nd, 0.0));

    // Gaussian prior over weights.
    double pd = static_cast<double>(p);
    Graph::NodeId prior_w = g->affine(g->sum(g->mul(net_params, net_params)),
                                      -1.0 / (2.0 * prior_sd * prior_sd),
                                      -pd * std::log(prior_sd) - 0.5 * pd * std::log(2.0 * M_PI));
    // Half-normal(1) prior on sigma_obs = exp(s), log-transform Jacobian included:
    // log p(s) = log sqrt(2/pi) - exp(2s)/2 + s.
    Graph::NodeId two_s = g->exp(g->affine(log_sigma, 2.0, 0.0));
    Graph::NodeId prior_s = g->add(g->affine(two_s, -0.5, 0.5 * std::log(2.0 / M_PI)), log_sigma);

    Graph::NodeId logp = g->add(g->add(loglik, prior_w), prior_s);

    if (physics.enabled) {
        Graph::NodeId pred_orig = g->affine(net.output, 1.0, center);
        PiLossNodes pi = pi_loss_nodes(*g, pred_orig, physics_upper_bound);
        Graph::NodeId penalty = g->add(g->affine(pi.l_b1, physics.lambda1 * nd, 0.0),
                                       g->affine(pi.l_b2, physics.lambda2 * nd, 0.0));
        logp = g->sub(logp, penalty);
    }

    LogDensityTarget target;
    target.dim = p + 1;
    target.log_density_grad = [g, theta, logp](const std::vector<double>& pos,
                                               std::vector<double>& grad) -> double {
        g->set_values(theta, pos);
        if (!g->forward_finite(logp)) {
            grad.assign(g->value(theta).size(), 0.0);
            return -std::numeric_limits<double>::infinity();
        }
        g->backward(logp);
        const Tensor& gt = g->grad(theta);
        grad = gt.values;
        return g->scalar_value(logp);
    };
    return target;
}

namespace {

std::vector<double> forward_with_dropout(const MlpArchitecture& arch,
                                         const std::vector<double>& params, const Tensor& x,
                                         double rate, Rng& rng) {
    // Inverted dropout applied after each hidden activation, mirroring the
    // training-time masks.
    std::size_t batch = x.rows();
    double keep = 1.0 - rate;
    double scale = (keep > 0.0) ? 1.0 / keep : 0.0;
    std::vector<double> cur(x.values);
    std::size_t cur_w = arch.input_width();
    std::size_t off = 0;
    for (std::size_t l = 0; l + 1 < arch.layer_widths.size(); ++l) {
        std::size_t w_in = arch.layer_widths[l];
        std::size_t w_out = arch.layer_widths[l + 1];
        const double* w = params.data() + off;
        const double* b = params.data() + off + w_in * w_out;
        off += (w_in + 1) * w_out;
        std::vector<double> next(batch * w_out);
        for (std::size_t r = 0; r < batch; ++r) {
            const double* in = cur.data() + r * cur_w;
            double* out = next.data() + r * w_out;
            for (std::size_t j = 0; j < w_out; ++j) out[j] = b[j];
            for (std::size_t i = 0; i < w_in; ++i) {
                double v = in[i];
                if (v == 0.0) continue;
                const double* wrow = w + i * w_out;
                for (std::size_t j = 0; j < w_out; ++j) out[j] += v * wrow[j];
            }
        }
        bool last = (l + 2 == arch.layer_widths.size());
        if (!last) {
            for (double& v : next) v = v > 0.0 ? v : 0.0;
            if (rate > 0.0)
                for (double& v : next) v = (rng.uniform() < keep) ? v * scale : 0.0;
        }
        cur = std::move(next);
        cur_w = w_out;
    }
    return cur;
}

}  // namespace

void NeuralRegressor::fit(const Tensor& x, const std::vector<double>& y, std::uint64_t seed) {
    if (x.rows() != y.size() || y.empty())
        throw std::invalid_argument("NeuralRegressor: bad training set");
    if (cfg_.hidden_widths.empty())
        throw std::invalid_argument("NeuralRegressor: at least one hidden layer required");

    arch_.layer_widths.clear();
    arch_.layer_widths.push_back(x.cols());
    for (std::size_t w : cfg_.hidden_widths) arch_.layer_widths.push_back(w);
    arch_.layer_widths.push_back(1);
    arch_.validate();

    center_ = mean_of(y);
    fit_seed_ = seed;
    std::vector<double> yc(y);
    for (double& v : yc) v -= center_;

    double upper_bound = cfg_.physics.upper_bound;
    if (cfg_.physics.enabled && upper_bound <= 0.0)
        upper_bound = *std::max_element(y.begin(), y.end()) + 1.0;

    params_.clear();
    vi_posterior_.reset();
    diagnostics_ = nlohmann::json::object();

    switch (cfg_.variant) {
        case NeuralVariant::kDeterministic: {
            MlpTrainResult r = train_mlp_regressor(arch_, x, yc, center_, 0.0, cfg_.optimizer,
                                                   cfg_.train, cfg_.physics, upper_bound, seed);
            diagnostics_["train_loss"] = r.best_loss;
            diagnostics_["epochs"] = r.epochs_run;
            params_.push_back(std::move(r.params));
            return;
        }
        case NeuralVariant::kDeepEnsemble: {
            for (int s = 0; s < cfg_.ensemble_size; ++s) {
                MlpTrainResult r = train_mlp_regressor(
                    arch_, x, yc, center_, cfg_.dropout_rate, cfg_.optimizer, cfg_.train,
                    cfg_.physics, upper_bound, derive_seed(seed, "member", static_cast<std::uint64_t>(s)));
                params_.push_back(std::move(r.params));
            }
            diagnostics_["members"] = cfg_.ensemble_size;
            return;
        }
        case NeuralVariant::kMcDropout: {
            MlpTrainResult r = train_mlp_regressor(arch_, x, yc, center_, cfg_.dropout_rate,
                                                   cfg_.optimizer, cfg_.train, cfg_.physics,
                                                   upper_bound, seed);
            diagnostics_["train_loss"] = r.best_loss;
            diagnostics_["epochs"] = r.epochs_run;
            params_.push_back(std::move(r.params));
            return;
        }
        case NeuralVariant::kBnnVi: {
            MlpArchitecture arch = arch_;
            PredictionBuilder builder = [arch](Graph& g, Graph::NodeId params,
                                               Graph::NodeId xin) {
                return build_mlp_graph(g, arch, params, xin, false).output;
            };
            ViConfig vcfg;
            vcfg.prior = {0.0, cfg_.prior_sd};
            vcfg.kl_weight = cfg_.kl_weight;
            vcfg.sigma_obs = cfg_.sigma_obs;
            vcfg.n_mc_samples = cfg_.vi_mc_samples;
            vcfg.batch_size = cfg_.train.batch_size;
            vcfg.max_epochs = cfg_.train.max_epochs;
            vcfg.patience = cfg_.train.patience;
            vcfg.optimizer = cfg_.optimizer;
            vcfg.seed = seed;
            Rng init_rng(derive_seed(seed, "init"));
            std::vector<double> mean0 = init_mlp_params(arch_, init_rng);
            ViResult vr = vi_fit(builder, arch_.parameter_count(), x, yc, mean0, vcfg);
            vi_posterior_ = std::move(vr.posterior);
            diagnostics_["negative_elbo"] = vr.final_loss;
            diagnostics_["epochs"] = vr.epochs_run;
            return;
        }
        case NeuralVariant::kBnnMcmc: {
            LogDensityTarget target = make_bnn_log_density(arch_, x, yc, center_, cfg_.prior_sd,
                                                           cfg_.physics, upper_bound);
            Rng init_rng(derive_seed(seed, "init"));
            std::vector<double> init = init_mlp_params(arch_, init_rng);
            double sd_y = 0.0;
            for (double v : yc) sd_y += v * v;
            sd_y = std::sqrt(sd_y / static_cast<double>(yc.size()));
            init.push_back(std::log(std::max(sd_y, 1e-2)));

            NutsConfig ncfg;
            ncfg.warmup = cfg_.mcmc_warmup;
            ncfg.samples = cfg_.mcmc_samples;
            ncfg.seed = derive_seed(seed, "nuts-chain");
            PosteriorSamples ps = nuts_sample(target, init, ncfg);
            params_ = std::move(ps.draws);
            diagnostics_["divergences"] = ps.divergence_count;
            diagnostics_["adapted_step_size"] = ps.adapted_step_size;
            diagnostics_["mean_tree_depth"] = ps.mean_tree_depth;
            diagnostics_["post_warmup_iterations"] = ps.post_warmup_iterations;
            return;
        }
    }
}

std::vector<PredictiveDistribution> NeuralRegressor::predict(const Tensor& x) const {
    if (x.cols() != arch_.input_width())
        throw std::invalid_argument("NeuralRegressor: prediction feature dimension mismatch");
    std::size_t n = x.rows();
    std::vector<PredictiveDistribution> out;
    out.reserve(n);

    switch (cfg_.variant) {
        case NeuralVariant::kDeterministic: {
            std::vector<double> pred = mlp_forward(arch_, params_[0], x);
            for (double v : pred) out.push_back(point_prediction(v + center_));
            return out;
        }
        case NeuralVariant::kDeepEnsemble: {
            std::vector<std::vector<double>> per_member;
            per_member.reserve(params_.size());
            for (const auto& p : params_) per_member.push_back(mlp_forward(arch_, p, x));
            PredictiveMoments m = aggregate_predictions(per_member);
            for (std::size_t i = 0; i < n; ++i)
                out.push_back(make_predictive(m.mean[i] + center_, m.sd[i], z_));
            return out;
        }
        case NeuralVariant::kMcDropout: {
            Rng rng(derive_seed(fit_seed_, "mc-dropout-predict"));
            std::vector<std::vector<double>> passes;
            passes.reserve(static_cast<std::size_t>(cfg_.mc_passes));
            for (int p = 0; p < cfg_.mc_passes; ++p)
                passes.push_back(forward_with_dropout(arch_, params_[0], x, cfg_.dropout_rate, rng));
            PredictiveMoments m = aggregate_predictions(passes);
            for (std::size_t i = 0; i < n; ++i)
                out.push_back(make_predictive(m.mean[i] + center_, m.sd[i], z_));
            return out;
        }
        case NeuralVariant::kBnnVi: {
            const MlpArchitecture& arch = arch_;
            PredictiveMoments m = posterior_predict(
                *vi_posterior_, static_cast<std::size_t>(cfg_.vi_draws),
                derive_seed(fit_seed_, "vi-predict"),
                [&](const std::vector<double>& theta) { return mlp_forward(arch, theta, x); });
            for (std::size_t i = 0; i < n; ++i)
                out.push_back(make_predictive(m.mean[i] + center_, m.sd[i], z_));
            return out;
        }
        case NeuralVariant::kBnnMcmc: {
            std::size_t p = arch_.parameter_count();
            std::vector<std::vector<double>> per_draw;
            per_draw.reserve(params_.size());
            double noise_var = 0.0;
            for (const auto& theta : params_) {
                std::vector<double> net(theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(p));
                per_draw.push_back(mlp_forward(arch_, net, x));
                double sigma = std::exp(theta[p]);
                noise_var += sigma * sigma;
            }
            noise_var /= static_cast<double>(params_.size());
            PredictiveMoments m = aggregate_predictions(per_draw);
            // Predictive std targets observations: epistemic spread plus the
            // posterior-mean observation noise in quadrature.
            for (std::size_t i = 0; i < n; ++i) {
                double sd = std::sqrt(m.sd[i] * m.sd[i] + noise_var);
                out.push_back(make_predictive(m.mean[i] + center_, sd, z_));
            }
            return out;
        }
    }
    throw std::logic_error("unreachable");
}

nlohmann::json NeuralRegressor::fitted_summary() const {
    nlohmann::json j = diagnostics_;
    j["variant"] = to_string(cfg_.variant);
    j["layer_widths"] = arch_.layer_widths;
    j["target_center"] = center_;
    return j;
}

}  // namespace creepuq
