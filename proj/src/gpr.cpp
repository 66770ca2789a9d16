#include "creepuq/gpr.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

namespace creepuq {

namespace {

Eigen::MatrixXd squared_distances(const Tensor& x) {
    std::size_t n = x.rows(), d = x.cols();
    Eigen::MatrixXd dist(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = 0.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            double s = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
                double diff = x.at(i, c) - x.at(j, c);
                s += diff * diff;
            }
            dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = s;
            dist(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = s;
        }
    }
    return dist;
}

struct CholResult {
    Eigen::MatrixXd l;
    double jitter = 0.0;
    bool ok = false;
};

CholResult cholesky_with_jitter(const Eigen::MatrixXd& k) {
    CholResult res;
    Eigen::LLT<Eigen::MatrixXd> llt(k);
    if (llt.info() == Eigen::Success) {
        res.l = llt.matrixL();
        res.ok = true;
        return res;
    }
    for (double jitter = 1e-10; jitter <= 1e-6 + 1e-18; jitter *= 10.0) {
        Eigen::MatrixXd kj = k;
        kj.diagonal().array() += jitter;
        llt.compute(kj);
        if (llt.info() == Eigen::Success) {
            res.l = llt.matrixL();
            res.jitter = jitter;
            res.ok = true;
            return res;
        }
    }
    return res;
}

/// Log marginal likelihood for given kernel hyperparameters; -inf when the
/// factorization fails even with jitter.
double lml_for(const Eigen::MatrixXd& dist, const Eigen::VectorXd& y,
               const GprHyperparameters& hp) {
    Eigen::Index n = y.size();
    double sf2 = hp.signal_sd * hp.signal_sd;
    double inv2l2 = 1.0 / (2.0 * hp.length_scale * hp.length_scale);
    Eigen::MatrixXd k = sf2 * (-dist * inv2l2).array().exp();
    k.diagonal().array() += hp.noise_sd * hp.noise_sd;
    CholResult ch = cholesky_with_jitter(k);
    if (!ch.ok) return -std::numeric_limits<double>::infinity();
    Eigen::VectorXd alpha = ch.l.triangularView<Eigen::Lower>().solve(y);
    alpha = ch.l.transpose().triangularView<Eigen::Upper>().solve(alpha);
    double quad = y.dot(alpha);
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) logdet += std::log(ch.l(i, i));
    return -0.5 * quad - logdet - 0.5 * static_cast<double>(n) * std::log(2.0 * M_PI);
}

}  // namespace

void GprModel::factorize(const std::vector<double>& y_centered) {
    std::size_t n = x_train_.rows();
    if (hp_.signal_sd <= 0.0 || hp_.length_scale <= 0.0 || hp_.noise_sd < 0.0)
        throw std::invalid_argument("gpr: hyperparameters must be positive (noise >= 0)");
    Eigen::MatrixXd dist = squared_distances(x_train_);
    double sf2 = hp_.signal_sd * hp_.signal_sd;
    double inv2l2 = 1.0 / (2.0 * hp_.length_scale * hp_.length_scale);
    Eigen::MatrixXd k = sf2 * (-dist * inv2l2).array().exp();
    k.diagonal().array() += hp_.noise_sd * hp_.noise_sd;
    CholResult ch = cholesky_with_jitter(k);
    if (!ch.ok)
        throw std::runtime_error("gpr: Cholesky factorization failed after jitter escalation to 1e-6");

    Eigen::Map<const Eigen::VectorXd> y(y_centered.data(), static_cast<Eigen::Index>(n));
    Eigen::VectorXd alpha = ch.l.triangularView<Eigen::Lower>().solve(y);
    alpha = ch.l.transpose().triangularView<Eigen::Upper>().solve(alpha);

    alpha_.assign(alpha.data(), alpha.data() + n);
    chol_.resize(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            chol_[i * n + j] = (j <= i) ? ch.l(static_cast<Eigen::Index>(i),
                                              static_cast<Eigen::Index>(j))
                                         : 0.0;
    double logdet = 0.0;
    for (std::size_t i = 0; i < n; ++i) logdet += std::log(chol_[i * n + i]);
    lml_ = -0.5 * y.dot(alpha) - logdet - 0.5 * static_cast<double>(n) * std::log(2.0 * M_PI);
}

GprModel GprModel::fit_fixed(const Tensor& x, const std::vector<double>& y,
                             const GprHyperparameters& hp, bool center_targets) {
    if (x.rows() != y.size()) throw std::invalid_argument("gpr: feature/target length mismatch");
    if (y.empty()) throw std::invalid_argument("gpr: empty training set");
    GprModel m;
    m.hp_ = hp;
    m.x_train_ = x;
    std::vector<double> yc = y;
    if (center_targets) {
        double s = 0.0;
        for (double v : y) s += v;
        m.y_mean_ = s / static_cast<double>(y.size());
        for (double& v : yc) v -= m.y_mean_;
    }
    m.factorize(yc);
    return m;
}

GprModel GprModel::fit(const Tensor& x, const std::vector<double>& y,
                       const GprSearchConfig& cfg) {
    if (x.rows() != y.size()) throw std::invalid_argument("gpr: feature/target length mismatch");
    if (y.size() < 2) throw std::invalid_argument("gpr: need at least 2 training rows");

    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(y.size());
    std::vector<double> yc = y;
    for (double& v : yc) v -= mean;

    Eigen::MatrixXd dist = squared_distances(x);
    Eigen::Map<const Eigen::VectorXd> yv(yc.data(), static_cast<Eigen::Index>(yc.size()));

    auto log_space = [](double lo, double hi, int m, int i) {
        double t = (m == 1) ? 0.0 : static_cast<double>(i) / static_cast<double>(m - 1);
        return std::pow(10.0, std::log10(lo) + t * (std::log10(hi) - std::log10(lo)));
    };

    GprHyperparameters best;
    double best_lml = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < cfg.grid_points; ++a) {
        for (int b = 0; b < cfg.grid_points; ++b) {
            for (int c = 0; c < cfg.grid_points; ++c) {
                GprHyperparameters hp;
                hp.signal_sd = log_space(cfg.signal_min, cfg.signal_max, cfg.grid_points, a);
                hp.length_scale = log_space(cfg.length_min, cfg.length_max, cfg.grid_points, b);
                hp.noise_sd = log_space(cfg.noise_min, cfg.noise_max, cfg.grid_points, c);
                double lml = lml_for(dist, yv, hp);
                if (lml > best_lml) {
                    best_lml = lml;
                    best = hp;
                }
            }
        }
    }
    if (!std::isfinite(best_lml))
        throw std::runtime_error("gpr: no hyperparameter grid point produced a valid factorization");

    // Coordinate refinement in log10 space, halving the step each round.
    double grid_step = (cfg.grid_points > 1)
        ? (std::log10(cfg.signal_max) - std::log10(cfg.signal_min)) /
              static_cast<double>(cfg.grid_points - 1)
        : 0.5;
    double step = grid_step / 2.0;
    for (int round = 0; round < cfg.refine_rounds; ++round) {
        for (int coord = 0; coord < 3; ++coord) {
            for (double dir : {+1.0, -1.0}) {
                GprHyperparameters cand = best;
                double factor = std::pow(10.0, dir * step);
                if (coord == 0) cand.signal_sd *= factor;
                else if (coord == 1) cand.length_scale *= factor;
                else cand.noise_sd = std::max(1e-6, cand.noise_sd * factor);
                double lml = lml_for(dist, yv, cand);
                if (lml > best_lml) {
                    best_lml = lml;
                    best = cand;
                }
            }
        }
        step /= 2.0;
    }

    GprModel m;
    m.hp_ = best;
    m.x_train_ = x;
    m.y_mean_ = mean;
    m.factorize(yc);
    return m;
}

std::pair<double, double> GprModel::predict_mean_std(const double* x_star) const {
    std::size_t n = x_train_.rows(), d = x_train_.cols();
    double sf2 = hp_.signal_sd * hp_.signal_sd;
    double inv2l2 = 1.0 / (2.0 * hp_.length_scale * hp_.length_scale);

    std::vector<double> kstar(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
            double diff = x_train_.at(i, c) - x_star[c];
            s += diff * diff;
        }
        kstar[i] = sf2 * std::exp(-s * inv2l2);
    }

    double mu = y_mean_;
    for (std::size_t i = 0; i < n; ++i) mu += kstar[i] * alpha_[i];

    // v = L^-1 k*, forward substitution on the stored factor.
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = kstar[i];
        const double* row = chol_.data() + i * n;
        for (std::size_t j = 0; j < i; ++j) s -= row[j] * v[j];
        v[i] = s / row[i];
    }
    double vtv = 0.0;
    for (double c : v) vtv += c * c;

    double var = sf2 - vtv + hp_.noise_sd * hp_.noise_sd;
    if (var < -1e-10)
        throw std::runtime_error("gpr: predictive variance below -1e-10 (numerical fault)");
    if (var < 0.0) var = 0.0;
    return {mu, std::sqrt(var)};
}

PredictiveDistribution GprModel::predict(const double* x_star, double z) const {
    auto [mu, sd] = predict_mean_std(x_star);
    return make_predictive(mu, sd, z);
}

std::vector<PredictiveDistribution> GprModel::predict(const Tensor& x_star, double z) const {
    if (x_star.cols() != x_train_.cols())
        throw std::invalid_argument("gpr: prediction feature dimension mismatch");
    std::vector<PredictiveDistribution> out;
    out.reserve(x_star.rows());
    for (std::size_t r = 0; r < x_star.rows(); ++r)
        out.push_back(predict(&x_star.values[r * x_star.cols()], z));
    return out;
}

}  // namespace creepuq
