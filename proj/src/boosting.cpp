#include "creepuq/boosting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace creepuq {

namespace {

double mean_of(const std::vector<double>& v, const std::vector<std::size_t>& rows) {
    double s = 0.0;
    for (std::size_t r : rows) s += v[r];
    return s / static_cast<double>(rows.size());
}

}  // namespace

std::int32_t RegressionTree::grow(const Tensor& x, const std::vector<double>& targets,
                                  std::vector<std::size_t>& rows, int depth,
                                  const Config& cfg) {
    Node node;
    node.value = mean_of(targets, rows);
    std::int32_t id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back(node);

    if (depth >= cfg.max_depth || rows.size() < 2 * cfg.min_leaf) return id;

    double parent_sse = 0.0;
    for (std::size_t r : rows) {
        double d = targets[r] - node.value;
        parent_sse += d * d;
    }
    if (parent_sse <= 1e-12) return id;

    std::size_t d_count = x.cols();
    int best_feature = -1;
    double best_threshold = 0.0, best_gain = 1e-12;

    std::vector<std::size_t> order(rows);
    for (std::size_t f = 0; f < d_count; ++f) {
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            double va = x.at(a, f), vb = x.at(b, f);
            if (va != vb) return va < vb;
            return a < b;
        });
        double left_sum = 0.0, left_sq = 0.0;
        double total_sum = 0.0, total_sq = 0.0;
        for (std::size_t r : order) {
            total_sum += targets[r];
            total_sq += targets[r] * targets[r];
        }
        std::size_t n = order.size();
        for (std::size_t i = 0; i + 1 < n; ++i) {
            double t = targets[order[i]];
            left_sum += t;
            left_sq += t * t;
            std::size_t nl = i + 1, nr = n - nl;
            if (nl < cfg.min_leaf || nr < cfg.min_leaf) continue;
            double xv = x.at(order[i], f), xnext = x.at(order[i + 1], f);
            if (xv == xnext) continue;  // cannot split between equal values
            double right_sum = total_sum - left_sum, right_sq = total_sq - left_sq;
            double sse_l = left_sq - left_sum * left_sum / static_cast<double>(nl);
            double sse_r = right_sq - right_sum * right_sum / static_cast<double>(nr);
            double gain = parent_sse - sse_l - sse_r;
            if (gain > best_gain) {
                best_gain = gain;
                best_feature = static_cast<int>(f);
                best_threshold = 0.5 * (xv + xnext);
            }
        }
    }
    if (best_feature < 0) return id;

    std::vector<std::size_t> left_rows, right_rows;
    for (std::size_t r : rows) {
        if (x.at(r, static_cast<std::size_t>(best_feature)) <= best_threshold)
            left_rows.push_back(r);
        else
            right_rows.push_back(r);
    }
    if (left_rows.empty() || right_rows.empty()) return id;

    nodes_[id].feature = best_feature;
    nodes_[id].threshold = best_threshold;
    nodes_[id].left = grow(x, targets, left_rows, depth + 1, cfg);
    nodes_[id].right = grow(x, targets, right_rows, depth + 1, cfg);
    return id;
}

RegressionTree RegressionTree::fit(const Tensor& x, const std::vector<double>& targets,
                                   const Config& cfg) {
    if (x.rows() != targets.size())
        throw std::invalid_argument("RegressionTree: feature/target length mismatch");
    if (targets.empty()) throw std::invalid_argument("RegressionTree: empty training set");
    RegressionTree tree;
    std::vector<std::size_t> rows(targets.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    tree.grow(x, targets, rows, 0, cfg);
    return tree;
}

double RegressionTree::predict_row(const double* x) const {
    std::int32_t id = 0;
    while (nodes_[id].feature >= 0) {
        const Node& n = nodes_[id];
        id = (x[n.feature] <= n.threshold) ? n.left : n.right;
    }
    return nodes_[id].value;
}

double pinball_loss(double y, double q, double tau) {
    if (tau <= 0.0 || tau >= 1.0) throw std::invalid_argument("pinball_loss: tau must be in (0,1)");
    return (y >= q) ? tau * (y - q) : (1.0 - tau) * (q - y);
}

double pinball_gradient(double y, double q, double tau) {
    if (tau <= 0.0 || tau >= 1.0)
        throw std::invalid_argument("pinball_gradient: tau must be in (0,1)");
    if (y > q) return -tau;
    if (y < q) return 1.0 - tau;
    return 0.0;
}

double empirical_quantile(std::vector<double> values, double tau) {
    if (values.empty()) throw std::invalid_argument("empirical_quantile: empty input");
    if (tau <= 0.0 || tau >= 1.0)
        throw std::invalid_argument("empirical_quantile: tau must be in (0,1)");
    std::sort(values.begin(), values.end());
    double h = (static_cast<double>(values.size()) - 1.0) * tau;
    std::size_t lo = static_cast<std::size_t>(h);
    double frac = h - static_cast<double>(lo);
    if (lo + 1 >= values.size()) return values.back();
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

QuantileBoostModel QuantileBoostModel::fit(const Tensor& x, const std::vector<double>& y,
                                           const std::vector<double>& quantiles,
                                           const BoostConfig& cfg) {
    if (y.size() < 2) throw std::invalid_argument("QuantileBoostModel: need at least 2 rows");
    if (quantiles.empty()) throw std::invalid_argument("QuantileBoostModel: no quantiles given");
    for (std::size_t i = 0; i < quantiles.size(); ++i) {
        if (quantiles[i] <= 0.0 || quantiles[i] >= 1.0)
            throw std::invalid_argument("QuantileBoostModel: quantiles must lie in (0,1)");
        if (i > 0 && quantiles[i] <= quantiles[i - 1])
            throw std::invalid_argument("QuantileBoostModel: quantiles must be strictly increasing");
    }

    QuantileBoostModel m;
    m.quantiles_ = quantiles;
    m.learning_rate_ = cfg.learning_rate;
    RegressionTree::Config tree_cfg{cfg.max_depth, cfg.min_leaf};

    std::size_t n = y.size();
    for (double tau : quantiles) {
        double f0 = empirical_quantile(y, tau);
        std::vector<double> f(n, f0);
        std::vector<RegressionTree> trees;
        trees.reserve(static_cast<std::size_t>(cfg.rounds));
        std::vector<double> negative_gradient(n);
        for (int round = 0; round < cfg.rounds; ++round) {
            for (std::size_t i = 0; i < n; ++i)
                negative_gradient[i] = -pinball_gradient(y[i], f[i], tau);
            RegressionTree tree = RegressionTree::fit(x, negative_gradient, tree_cfg);
            for (std::size_t i = 0; i < n; ++i)
                f[i] += cfg.learning_rate * tree.predict_row(&x.values[i * x.cols()]);
            trees.push_back(std::move(tree));
        }
        m.initial_.push_back(f0);
        m.ensembles_.push_back(std::move(trees));
    }
    return m;
}

std::vector<double> QuantileBoostModel::predict_quantiles(const double* x) const {
    std::vector<double> out;
    out.reserve(quantiles_.size());
    for (std::size_t qi = 0; qi < quantiles_.size(); ++qi) {
        double f = initial_[qi];
        for (const auto& tree : ensembles_[qi]) f += learning_rate_ * tree.predict_row(x);
        out.push_back(f);
    }
    return out;
}

PredictiveDistribution QuantileBoostModel::predict(const double* x) const {
    if (quantiles_.size() != 3)
        throw std::logic_error("QuantileBoostModel: interval prediction needs exactly 3 quantiles");
    std::vector<double> q = predict_quantiles(x);
    std::sort(q.begin(), q.end());  // crossed quantiles are reported sorted
    PredictiveDistribution p;
    p.mean = q[1];
    p.lower = q[0];
    p.upper = q[2];
    p.std = (q[2] - q[0]) / (2.0 * 1.96);
    return p;
}

std::vector<PredictiveDistribution> QuantileBoostModel::predict(const Tensor& x) const {
    std::vector<PredictiveDistribution> out;
    out.reserve(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r)
        out.push_back(predict(&x.values[r * x.cols()]));
    return out;
}

double NgboostModel::natural_gradient_mu(double y, double mu) { return mu - y; }

double NgboostModel::natural_gradient_log_sigma(double y, double mu, double sigma) {
    double z = (y - mu) / sigma;
    return (1.0 - z * z) / 2.0;
}

namespace {

double gaussian_nll(const std::vector<double>& y, const std::vector<double>& mu,
                    const std::vector<double>& log_sigma) {
    double nll = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        double s = std::exp(log_sigma[i]);
        double z = (y[i] - mu[i]) / s;
        nll += 0.5 * std::log(2.0 * M_PI) + log_sigma[i] + 0.5 * z * z;
    }
    return nll;
}

}  // namespace

NgboostModel NgboostModel::fit(const Tensor& x, const std::vector<double>& y,
                               const NgboostConfig& cfg) {
    if (y.size() < 2) throw std::invalid_argument("NgboostModel: need at least 2 rows");
    std::size_t n = y.size();

    NgboostModel m;
    m.learning_rate_ = cfg.learning_rate;
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : y) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);  // Gaussian MLE
    double sigma0 = std::max(std::sqrt(var), 1e-6);

    m.initial_mu_ = mean;
    m.initial_log_sigma_ = std::log(sigma0);

    std::vector<double> mu(n, m.initial_mu_);
    std::vector<double> ls(n, m.initial_log_sigma_);
    RegressionTree::Config tree_cfg{cfg.max_depth, cfg.min_leaf};
    m.nll_history_.push_back(gaussian_nll(y, mu, ls));

    std::vector<double> grad_mu(n), grad_ls(n);
    for (int round = 0; round < cfg.rounds; ++round) {
        for (std::size_t i = 0; i < n; ++i) {
            double sigma = std::exp(ls[i]);
            grad_mu[i] = natural_gradient_mu(y[i], mu[i]);
            grad_ls[i] = natural_gradient_log_sigma(y[i], mu[i], sigma);
        }
        RegressionTree t_mu = RegressionTree::fit(x, grad_mu, tree_cfg);
        RegressionTree t_ls = RegressionTree::fit(x, grad_ls, tree_cfg);
        for (std::size_t i = 0; i < n; ++i) {
            const double* row = &x.values[i * x.cols()];
            mu[i] -= cfg.learning_rate * t_mu.predict_row(row);
            ls[i] -= cfg.learning_rate * t_ls.predict_row(row);
        }
        m.mu_trees_.push_back(std::move(t_mu));
        m.log_sigma_trees_.push_back(std::move(t_ls));
        m.nll_history_.push_back(gaussian_nll(y, mu, ls));
    }
    return m;
}

std::pair<double, double> NgboostModel::predict_mean_std(const double* x) const {
    double mu = initial_mu_;
    double ls = initial_log_sigma_;
    for (std::size_t i = 0; i < mu_trees_.size(); ++i) {
        mu -= learning_rate_ * mu_trees_[i].predict_row(x);
        ls -= learning_rate_ * log_sigma_trees_[i].predict_row(x);
    }
    return {mu, std::exp(ls)};
}

PredictiveDistribution NgboostModel::predict(const double* x, double z) const {
    auto [mu, sd] = predict_mean_std(x);
    return make_predictive(mu, sd, z);
}

std::vector<PredictiveDistribution> NgboostModel::predict(const Tensor& x, double z) const {
    std::vector<PredictiveDistribution> out;
    out.reserve(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r)
        out.push_back(predict(&x.values[r * x.cols()], z));
    return out;
}

}  // namespace creepuq
