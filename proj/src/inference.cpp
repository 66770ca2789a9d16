#include "creepuq/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace creepuq {

namespace {

bool finite_all(const std::vector<double>& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double log_sum_exp(double a, double b) {
    double m = std::max(a, b);
    if (!std::isfinite(m)) return m;
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

}  // namespace

LeapfrogResult leapfrog(const LogDensityTarget& target, std::vector<double> position,
                        std::vector<double> momentum, double step_size, int n_steps) {
    if (step_size <= 0.0) throw std::invalid_argument("leapfrog: step size must be > 0");
    if (position.size() != target.dim || momentum.size() != target.dim)
        throw std::invalid_argument("leapfrog: dimension mismatch");

    LeapfrogResult res;
    std::vector<double> grad(target.dim);
    double logp = target.log_density_grad(position, grad);
    if (!std::isfinite(logp) || !finite_all(grad)) {
        res.position = std::move(position);
        res.momentum = std::move(momentum);
        res.log_density = logp;
        res.diverged = true;
        return res;
    }
    for (int step = 0; step < n_steps; ++step) {
        for (std::size_t i = 0; i < target.dim; ++i)
            momentum[i] += 0.5 * step_size * grad[i];
        for (std::size_t i = 0; i < target.dim; ++i)
            position[i] += step_size * momentum[i];
        logp = target.log_density_grad(position, grad);
        if (!std::isfinite(logp) || !finite_all(grad)) {
            res.diverged = true;
            break;
        }
        for (std::size_t i = 0; i < target.dim; ++i)
            momentum[i] += 0.5 * step_size * grad[i];
    }
    res.position = std::move(position);
    res.momentum = std::move(momentum);
    res.log_density = logp;
    return res;
}

namespace {

/// One end of the sampled trajectory.
struct Edge {
    std::vector<double> position;
    std::vector<double> momentum;
    std::vector<double> grad;
};

struct Tree {
    Edge backward_end;
    Edge forward_end;
    std::vector<double> candidate;
    double log_weight = -std::numeric_limits<double>::infinity();
    bool turned = false;
    bool diverged = false;
    double sum_accept = 0.0;
    int leaves = 0;
};

bool u_turned(const Edge& minus, const Edge& plus) {
    double a = 0.0, b = 0.0;
    for (std::size_t i = 0; i < minus.position.size(); ++i) {
        double span = plus.position[i] - minus.position[i];
        a += span * minus.momentum[i];
        b += span * plus.momentum[i];
    }
    return a < 0.0 || b < 0.0;
}

class NutsSampler {
public:
    NutsSampler(const LogDensityTarget& target, const NutsConfig& cfg)
        : target_(target), cfg_(cfg), rng_(derive_seed(cfg.seed, "nuts")) {}

    PosteriorSamples run(const std::vector<double>& initial);

private:
    /// One leapfrog step from an edge; returns the new edge plus its joint
    /// log density (logp - |p|^2/2).
    bool single_step(const Edge& from, double direction, Edge& out, double& joint);
    Tree build_tree(const Edge& from, double direction, int depth, double joint0);
    double find_initial_step(const std::vector<double>& position);

    const LogDensityTarget& target_;
    NutsConfig cfg_;
    Rng rng_;
    double step_size_ = 1.0;
};

bool NutsSampler::single_step(const Edge& from, double direction, Edge& out, double& joint) {
    std::size_t d = target_.dim;
    out.position = from.position;
    out.momentum = from.momentum;
    out.grad.assign(d, 0.0);
    double eps = direction * step_size_;
    for (std::size_t i = 0; i < d; ++i) out.momentum[i] += 0.5 * eps * from.grad[i];
    for (std::size_t i = 0; i < d; ++i) out.position[i] += eps * out.momentum[i];
    double logp = target_.log_density_grad(out.position, out.grad);
    if (!std::isfinite(logp) || !finite_all(out.grad)) {
        joint = -std::numeric_limits<double>::infinity();
        return false;
    }
    for (std::size_t i = 0; i < d; ++i) out.momentum[i] += 0.5 * eps * out.grad[i];
    joint = logp - 0.5 * dot(out.momentum, out.momentum);
    return std::isfinite(joint);
}

Tree NutsSampler::build_tree(const Edge& from, double direction, int depth, double joint0) {
    Tree tree;
    if (depth == 0) {
        Edge next;
        double joint;
        bool ok = single_step(from, direction, next, joint);
        double delta = joint - joint0;
        tree.diverged = !ok || (joint0 - joint) > cfg_.divergence_threshold;
        tree.leaves = 1;
        tree.sum_accept = std::min(1.0, std::exp(std::min(0.0, delta)));
        if (!tree.diverged) {
            tree.candidate = next.position;
            tree.log_weight = delta;
        }
        tree.backward_end = next;
        tree.forward_end = std::move(next);
        return tree;
    }

    Tree first = build_tree(from, direction, depth - 1, joint0);
    if (first.diverged || first.turned) return first;

    const Edge& grow_from = (direction > 0) ? first.forward_end : first.backward_end;
    Tree second = build_tree(grow_from, direction, depth - 1, joint0);

    Tree combined;
    combined.leaves = first.leaves + second.leaves;
    combined.sum_accept = first.sum_accept + second.sum_accept;
    combined.diverged = second.diverged;
    combined.backward_end = (direction > 0) ? first.backward_end : second.backward_end;
    combined.forward_end = (direction > 0) ? second.forward_end : first.forward_end;
    combined.log_weight = log_sum_exp(first.log_weight, second.log_weight);
    // Multinomial selection between the subtrees, proportional to weight.
    double p_second = std::exp(second.log_weight - combined.log_weight);
    combined.candidate =
        (!second.diverged && rng_.uniform() < p_second) ? second.candidate : first.candidate;
    combined.turned = second.turned || second.diverged ||
                      u_turned(combined.backward_end, combined.forward_end);
    return combined;
}

double NutsSampler::find_initial_step(const std::vector<double>& position) {
    std::size_t d = target_.dim;
    std::vector<double> grad(d);
    double logp = target_.log_density_grad(position, grad);
    if (!std::isfinite(logp))
        throw std::runtime_error("nuts: non-finite log density at the initial point");

    Edge start{position, rng_.normal_vector(d), grad};
    double joint0 = logp - 0.5 * dot(start.momentum, start.momentum);

    step_size_ = 1.0;
    Edge next;
    double joint;
    single_step(start, +1.0, next, joint);
    double ratio = std::exp(joint - joint0);
    double direction = (ratio > 0.5) ? 1.0 : -1.0;
    for (int iter = 0; iter < 100; ++iter) {
        if (direction > 0 && !(std::pow(ratio, direction) > std::pow(2.0, -direction))) break;
        if (direction < 0 && !(std::pow(ratio, direction) > std::pow(2.0, -direction))) break;
        step_size_ *= std::pow(2.0, direction);
        single_step(start, +1.0, next, joint);
        ratio = std::exp(joint - joint0);
    }
    return step_size_;
}

PosteriorSamples NutsSampler::run(const std::vector<double>& initial) {
    if (initial.size() != target_.dim) throw std::invalid_argument("nuts: initial point dimension mismatch");
    if (cfg_.warmup < 10) throw std::invalid_argument("nuts: warmup must be >= 10");
    if (cfg_.samples < 1) throw std::invalid_argument("nuts: samples must be >= 1");

    PosteriorSamples out;
    out.seed = cfg_.seed;

    std::vector<double> position = initial;
    step_size_ = find_initial_step(position);

    // Dual averaging (Hoffman & Gelman 2014).
    const double mu = std::log(10.0 * step_size_);
    const double gamma = 0.05, t0 = 10.0, kappa = 0.75;
    double log_step_bar = 0.0, h_bar = 0.0;

    std::vector<double> grad(target_.dim);
    auto one_draw = [&](bool adapting, int adapt_iter, int& depth_out, bool& diverged_out) {
        double logp = target_.log_density_grad(position, grad);
        Edge current{position, rng_.normal_vector(target_.dim), grad};
        double joint0 = logp - 0.5 * dot(current.momentum, current.momentum);

        Tree tree;
        tree.backward_end = current;
        tree.forward_end = current;
        tree.candidate = position;
        tree.log_weight = 0.0;
        tree.leaves = 0;
        double sum_accept = 0.0;
        int n_accept = 0;
        int depth = 0;
        bool diverged = false;
        while (depth < cfg_.max_tree_depth) {
            double direction = rng_.uniform() < 0.5 ? -1.0 : 1.0;
            const Edge& grow_from = (direction > 0) ? tree.forward_end : tree.backward_end;
            Tree subtree = build_tree(grow_from, direction, depth, joint0);
            sum_accept += subtree.sum_accept;
            n_accept += subtree.leaves;
            if (subtree.diverged) diverged = true;
            if (subtree.diverged || subtree.turned) break;
            // Biased progressive sampling toward the new subtree.
            double p_new = std::exp(std::min(0.0, subtree.log_weight - tree.log_weight));
            if (rng_.uniform() < p_new) tree.candidate = subtree.candidate;
            tree.log_weight = log_sum_exp(tree.log_weight, subtree.log_weight);
            if (direction > 0) tree.forward_end = subtree.forward_end;
            else tree.backward_end = subtree.backward_end;
            ++depth;
            if (u_turned(tree.backward_end, tree.forward_end)) break;
        }
        position = tree.candidate;
        depth_out = depth;
        diverged_out = diverged;

        if (adapting) {
            double accept_stat = (n_accept > 0) ? sum_accept / n_accept : 0.0;
            double m = static_cast<double>(adapt_iter + 1);
            h_bar = (1.0 - 1.0 / (m + t0)) * h_bar +
                    (cfg_.target_accept - accept_stat) / (m + t0);
            double log_step = mu - std::sqrt(m) / gamma * h_bar;
            double eta = std::pow(m, -kappa);
            log_step_bar = eta * log_step + (1.0 - eta) * log_step_bar;
            step_size_ = std::exp(log_step);
        }
    };

    for (int it = 0; it < cfg_.warmup; ++it) {
        int depth;
        bool div;
        one_draw(true, it, depth, div);
    }
    step_size_ = std::exp(log_step_bar);
    out.adapted_step_size = step_size_;

    std::size_t max_iterations = static_cast<std::size_t>(cfg_.samples) * 4;
    while (out.draws.size() < static_cast<std::size_t>(cfg_.samples) &&
           out.post_warmup_iterations < max_iterations) {
        int depth;
        bool div;
        one_draw(false, 0, depth, div);
        ++out.post_warmup_iterations;
        out.tree_depths.push_back(depth);
        if (div) {
            ++out.divergence_count;
        } else {
            out.draws.push_back(position);
        }
        if (out.post_warmup_iterations >= 40 &&
            out.divergence_count * 4 > out.post_warmup_iterations)
            throw std::runtime_error(
                "nuts: more than 25% divergent transitions; reduce the step size "
                "(lower target_accept tolerance or reparameterize)");
    }
    if (out.draws.size() < static_cast<std::size_t>(cfg_.samples))
        throw std::runtime_error("nuts: sampling stalled before reaching the requested draws");

    double depth_sum = 0.0;
    for (int d : out.tree_depths) depth_sum += d;
    out.mean_tree_depth = out.tree_depths.empty() ? 0.0
                                                  : depth_sum / static_cast<double>(out.tree_depths.size());
    return out;
}

}  // namespace

PosteriorSamples nuts_sample(const LogDensityTarget& target,
                             const std::vector<double>& initial, const NutsConfig& cfg) {
    NutsSampler sampler(target, cfg);
    return sampler.run(initial);
}

std::vector<double> MeanFieldPosterior::sample(Rng& rng) const {
    std::vector<double> out(mean.size());
    for (std::size_t i = 0; i < mean.size(); ++i)
        out[i] = mean[i] + std::exp(log_sd[i]) * rng.normal();
    return out;
}

double gaussian_kl(double mu_q, double sd_q, double mu_p, double sd_p) {
    if (sd_q <= 0.0 || sd_p <= 0.0) throw std::invalid_argument("gaussian_kl: sd must be > 0");
    double dm = mu_q - mu_p;
    return std::log(sd_p / sd_q) + (sd_q * sd_q + dm * dm) / (2.0 * sd_p * sd_p) - 0.5;
}

ElboGraph build_elbo_graph(const PredictionBuilder& builder, std::size_t param_dim,
                           std::size_t batch_rows, std::size_t input_width,
                           std::size_t dataset_size, const GaussianPrior& prior,
                           double sigma_obs, int n_mc_samples, double kl_weight) {
    if (n_mc_samples < 1) throw std::invalid_argument("build_elbo_graph: n_mc_samples must be >= 1");
    if (kl_weight < 0.0) throw std::invalid_argument("build_elbo_graph: kl_weight must be >= 0");
    if (sigma_obs <= 0.0) throw std::invalid_argument("build_elbo_graph: sigma_obs must be > 0");

    ElboGraph eg;
    Graph& g = eg.graph;
    eg.param_dim = param_dim;
    eg.mean = g.input({param_dim});
    eg.log_sd = g.input({param_dim});

    // KL[q || prior] in closed form, summed over dimensions.
    Graph::NodeId sd_sq = g.exp(g.affine(eg.log_sd, 2.0, 0.0));
    Graph::NodeId centered = g.affine(eg.mean, 1.0, -prior.mean);
    Graph::NodeId quad = g.affine(g.add(sd_sq, g.mul(centered, centered)),
                                  1.0 / (2.0 * prior.sd * prior.sd), 0.0);
    Graph::NodeId per_dim = g.add(g.affine(eg.log_sd, -1.0, std::log(prior.sd) - 0.5), quad);
    eg.kl = g.sum(per_dim);

    Graph::NodeId loss = g.affine(eg.kl, kl_weight, 0.0);

    if (batch_rows > 0) {
        eg.x = g.input({batch_rows, input_width});
        eg.y = g.input({batch_rows, 1});
        Graph::NodeId sd = g.exp(eg.log_sd);
        double scale = static_cast<double>(dataset_size) / static_cast<double>(batch_rows);
        double nb = static_cast<double>(batch_rows);
        // Gaussian NLL constants so the reported loss is the full -ELBO.
        double const_term = nb * (std::log(sigma_obs) + 0.5 * std::log(2.0 * M_PI));
        Graph::NodeId nll_acc = -1;
        for (int s = 0; s < n_mc_samples; ++s) {
            Graph::NodeId eps = g.input({param_dim});
            eg.noise_inputs.push_back(eps);
            Graph::NodeId theta = g.add(eg.mean, g.mul(sd, eps));
            Graph::NodeId pred = builder(g, theta, eg.x);
            Graph::NodeId resid = g.sub(pred, eg.y);
            Graph::NodeId sq = g.sum(g.mul(resid, resid));
            Graph::NodeId nll =
                g.affine(sq, 1.0 / (2.0 * sigma_obs * sigma_obs), const_term);
            nll_acc = (nll_acc < 0) ? nll : g.add(nll_acc, nll);
        }
        Graph::NodeId nll_mean = g.affine(nll_acc, scale / n_mc_samples, 0.0);
        loss = g.add(nll_mean, loss);
    }
    eg.loss = loss;
    return eg;
}

ViResult vi_fit(const PredictionBuilder& builder, std::size_t param_dim,
                const Tensor& x, const std::vector<double>& y,
                const std::vector<double>& initial_mean, const ViConfig& cfg) {
    if (initial_mean.size() != param_dim)
        throw std::invalid_argument("vi_fit: initial mean dimension mismatch");
    if (x.rows() != y.size()) throw std::invalid_argument("vi_fit: feature/target length mismatch");

    std::size_t n = y.size();
    Rng rng(derive_seed(cfg.seed, "vi"));

    // Variational parameters flattened as [mean, log_sd].
    std::vector<double> phi(2 * param_dim);
    std::copy(initial_mean.begin(), initial_mean.end(), phi.begin());
    double init_log_sd = std::log(std::max(0.1 * cfg.prior.sd, 1e-8));
    std::fill(phi.begin() + static_cast<std::ptrdiff_t>(param_dim), phi.end(), init_log_sd);

    Optimizer opt(cfg.optimizer, phi.size());
    std::vector<double> grad_phi(phi.size());

    std::size_t batch = (n == 0) ? 0 : std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size), n);
    // Graphs cached per distinct batch size (the tail batch may be smaller).
    std::map<std::size_t, ElboGraph> graphs;
    auto graph_for = [&](std::size_t rows) -> ElboGraph& {
        auto it = graphs.find(rows);
        if (it == graphs.end()) {
            it = graphs.emplace(rows, build_elbo_graph(builder, param_dim, rows, x.cols(), n,
                                                       cfg.prior, cfg.sigma_obs,
                                                       cfg.n_mc_samples, cfg.kl_weight))
                     .first;
        }
        return it->second;
    };

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    double best_loss = std::numeric_limits<double>::infinity();
    std::vector<double> best_phi = phi;
    int best_epoch = 0;
    int epoch = 0;

    std::vector<double> xb, yb, eps;
    for (epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        double epoch_loss = 0.0;
        std::size_t steps = 0;
        if (n == 0) {
            ElboGraph& eg = graph_for(0);
            eg.graph.set_values(eg.mean, phi.data(), param_dim);
            eg.graph.set_values(eg.log_sd, phi.data() + param_dim, param_dim);
            eg.graph.forward();
            eg.graph.backward(eg.loss);
            const Tensor& gm = eg.graph.grad(eg.mean);
            const Tensor& gs = eg.graph.grad(eg.log_sd);
            std::copy(gm.values.begin(), gm.values.end(), grad_phi.begin());
            std::copy(gs.values.begin(), gs.values.end(),
                      grad_phi.begin() + static_cast<std::ptrdiff_t>(param_dim));
            epoch_loss = eg.graph.scalar_value(eg.loss);
            steps = 1;
            opt.step(phi, grad_phi);
        } else {
            rng.shuffle(order);
            for (std::size_t start = 0; start < n; start += batch) {
                std::size_t rows = std::min(batch, n - start);
                ElboGraph& eg = graph_for(rows);
                xb.resize(rows * x.cols());
                yb.resize(rows);
                for (std::size_t r = 0; r < rows; ++r) {
                    std::size_t src = order[start + r];
                    std::copy(&x.values[src * x.cols()], &x.values[(src + 1) * x.cols()],
                              &xb[r * x.cols()]);
                    yb[r] = y[src];
                }
                eg.graph.set_values(eg.x, xb);
                eg.graph.set_values(eg.y, yb);
                eg.graph.set_values(eg.mean, phi.data(), param_dim);
                eg.graph.set_values(eg.log_sd, phi.data() + param_dim, param_dim);
                for (Graph::NodeId eps_node : eg.noise_inputs) {
                    eps = rng.normal_vector(param_dim);
                    eg.graph.set_values(eps_node, eps);
                }
                if (!eg.graph.forward_finite(eg.loss))
                    throw std::runtime_error("vi_fit: NaN loss at epoch " + std::to_string(epoch));
                eg.graph.backward(eg.loss);
                const Tensor& gm = eg.graph.grad(eg.mean);
                const Tensor& gs = eg.graph.grad(eg.log_sd);
                std::copy(gm.values.begin(), gm.values.end(), grad_phi.begin());
                std::copy(gs.values.begin(), gs.values.end(),
                          grad_phi.begin() + static_cast<std::ptrdiff_t>(param_dim));
                epoch_loss += eg.graph.scalar_value(eg.loss);
                ++steps;
                opt.step(phi, grad_phi);
            }
        }
        epoch_loss /= static_cast<double>(steps);
        if (epoch_loss < best_loss - 1e-12) {
            best_loss = epoch_loss;
            best_phi = phi;
            best_epoch = epoch;
        } else if (epoch - best_epoch >= cfg.patience) {
            break;
        }
    }

    ViResult res;
    res.posterior.mean.assign(best_phi.begin(), best_phi.begin() + static_cast<std::ptrdiff_t>(param_dim));
    res.posterior.log_sd.assign(best_phi.begin() + static_cast<std::ptrdiff_t>(param_dim), best_phi.end());
    res.final_loss = best_loss;
    res.epochs_run = epoch;
    return res;
}

PredictiveMoments aggregate_predictions(const std::vector<std::vector<double>>& per_draw) {
    if (per_draw.size() < 2)
        throw std::invalid_argument("aggregate_predictions: need at least 2 draws");
    std::size_t s = per_draw.size();
    std::size_t n = per_draw[0].size();
    for (const auto& row : per_draw)
        if (row.size() != n)
            throw std::invalid_argument("aggregate_predictions: inconsistent prediction lengths");

    PredictiveMoments out;
    out.mean.assign(n, 0.0);
    out.sd.assign(n, 0.0);
    for (const auto& row : per_draw)
        for (std::size_t i = 0; i < n; ++i) out.mean[i] += row[i];
    for (double& m : out.mean) m /= static_cast<double>(s);
    for (const auto& row : per_draw)
        for (std::size_t i = 0; i < n; ++i) {
            double d = row[i] - out.mean[i];
            out.sd[i] += d * d;
        }
    for (double& v : out.sd) v = std::sqrt(v / static_cast<double>(s));
    return out;
}

PredictiveMoments posterior_predict(const MeanFieldPosterior& q, std::size_t n_draws,
                                    std::uint64_t seed,
                                    const std::function<std::vector<double>(const std::vector<double>&)>& predict) {
    if (n_draws < 2) throw std::invalid_argument("posterior_predict: need at least 2 draws");
    Rng rng(derive_seed(seed, "posterior-predict"));
    std::vector<std::vector<double>> outputs;
    outputs.reserve(n_draws);
    for (std::size_t s = 0; s < n_draws; ++s) outputs.push_back(predict(q.sample(rng)));
    return aggregate_predictions(outputs);
}

PredictiveMoments posterior_predict(const std::vector<std::vector<double>>& samples,
                                    const std::function<std::vector<double>(const std::vector<double>&)>& predict) {
    if (samples.size() < 2) throw std::invalid_argument("posterior_predict: need at least 2 draws");
    std::vector<std::vector<double>> outputs;
    outputs.reserve(samples.size());
    for (const auto& theta : samples) outputs.push_back(predict(theta));
    return aggregate_predictions(outputs);
}

}  // namespace creepuq
