#include "creepuq/optim.hpp"

#include <cmath>

namespace creepuq {

Optimizer::Optimizer(OptimizerSpec spec, std::size_t dim) : spec_(spec), dim_(dim) {
    if (spec_.learning_rate <= 0.0) throw std::invalid_argument("optimizer: learning rate must be > 0");
    if (spec_.momentum < 0.0 || spec_.momentum >= 1.0)
        throw std::invalid_argument("optimizer: momentum must be in [0, 1)");
    switch (spec_.kind) {
        case OptimizerKind::kSgd:
        case OptimizerKind::kAdagrad:
        case OptimizerKind::kRmsProp:
            m_.assign(dim_, 0.0);
            break;
        case OptimizerKind::kAdam:
            m_.assign(dim_, 0.0);
            v_.assign(dim_, 0.0);
            break;
    }
}

void Optimizer::step(std::vector<double>& params, const std::vector<double>& grads) {
    if (params.size() != dim_ || grads.size() != dim_)
        throw std::invalid_argument("optimizer: parameter/gradient size mismatch");
    ++step_count_;
    double lr = spec_.learning_rate;
    switch (spec_.kind) {
        case OptimizerKind::kSgd: {
            // Nesterov form: v <- mu*v + g; update = g + mu*v. mu = 0 gives
            // plain SGD.
            double mu = spec_.momentum;
            if (mu == 0.0) {
                for (std::size_t i = 0; i < dim_; ++i) params[i] -= lr * grads[i];
            } else {
                for (std::size_t i = 0; i < dim_; ++i) {
                    m_[i] = mu * m_[i] + grads[i];
                    params[i] -= lr * (grads[i] + mu * m_[i]);
                }
            }
            return;
        }
        case OptimizerKind::kAdam: {
            double b1 = spec_.beta1, b2 = spec_.beta2;
            double c1 = 1.0 - std::pow(b1, static_cast<double>(step_count_));
            double c2 = 1.0 - std::pow(b2, static_cast<double>(step_count_));
            for (std::size_t i = 0; i < dim_; ++i) {
                m_[i] = b1 * m_[i] + (1.0 - b1) * grads[i];
                v_[i] = b2 * v_[i] + (1.0 - b2) * grads[i] * grads[i];
                double mhat = m_[i] / c1;
                double vhat = v_[i] / c2;
                params[i] -= lr * mhat / (std::sqrt(vhat) + spec_.epsilon);
            }
            return;
        }
        case OptimizerKind::kAdagrad: {
            for (std::size_t i = 0; i < dim_; ++i) {
                m_[i] += grads[i] * grads[i];
                params[i] -= lr * grads[i] / (std::sqrt(m_[i]) + spec_.epsilon);
            }
            return;
        }
        case OptimizerKind::kRmsProp: {
            double rho = spec_.rho;
            for (std::size_t i = 0; i < dim_; ++i) {
                m_[i] = rho * m_[i] + (1.0 - rho) * grads[i] * grads[i];
                params[i] -= lr * grads[i] / (std::sqrt(m_[i]) + spec_.epsilon);
            }
            return;
        }
    }
}

OptimizerKind optimizer_kind_from_string(const std::string& s) {
    if (s == "sgd") return OptimizerKind::kSgd;
    if (s == "adam") return OptimizerKind::kAdam;
    if (s == "adagrad") return OptimizerKind::kAdagrad;
    if (s == "rmsprop") return OptimizerKind::kRmsProp;
    throw std::invalid_argument("unknown optimizer: " + s);
}

std::string to_string(OptimizerKind k) {
    switch (k) {
        case OptimizerKind::kSgd: return "sgd";
        case OptimizerKind::kAdam: return "adam";
        case OptimizerKind::kAdagrad: return "adagrad";
        case OptimizerKind::kRmsProp: return "rmsprop";
    }
    return "?";
}

}  // namespace creepuq
