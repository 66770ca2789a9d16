#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace creepuq {

enum class OptimizerKind { kSgd, kAdam, kAdagrad, kRmsProp };

struct OptimizerSpec {
    OptimizerKind kind = OptimizerKind::kAdam;
    double learning_rate = 0.01;
    double momentum = 0.0;      // SGD Nesterov coefficient
    double beta1 = 0.9;         // Adam
    double beta2 = 0.999;       // Adam
    double rho = 0.9;           // RMSprop decay
    double epsilon = 1e-8;
};

/// First-order optimizer over a flat parameter vector. One instance per
/// trained model; state lives here, parameters live with the caller.
class Optimizer {
public:
    Optimizer(OptimizerSpec spec, std::size_t dim);

    /// In-place update of params from grads. Shapes must match `dim`.
    void step(std::vector<double>& params, const std::vector<double>& grads);

    const OptimizerSpec& spec() const { return spec_; }

private:
    OptimizerSpec spec_;
    std::size_t dim_;
    long step_count_ = 0;
    std::vector<double> m_;  // momentum / first moment / accumulator
    std::vector<double> v_;  // second moment (Adam)
};

OptimizerKind optimizer_kind_from_string(const std::string& s);
std::string to_string(OptimizerKind k);

}  // namespace creepuq
