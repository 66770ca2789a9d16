#pragma once

#include <stdexcept>

namespace creepuq {

/// Universal model output: point estimate, uncertainty, and the nominal
/// interval mean +/- z*std. Deterministic point models carry has_std=false.
struct PredictiveDistribution {
    double mean = 0.0;
    double std = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    bool has_std = true;
};

inline PredictiveDistribution make_predictive(double mean, double sd, double z) {
    if (sd < 0.0) throw std::invalid_argument("make_predictive: negative standard deviation");
    PredictiveDistribution p;
    p.mean = mean;
    p.std = sd;
    p.lower = mean - z * sd;
    p.upper = mean + z * sd;
    return p;
}

inline PredictiveDistribution point_prediction(double mean) {
    PredictiveDistribution p;
    p.mean = mean;
    p.lower = mean;
    p.upper = mean;
    p.has_std = false;
    return p;
}

}  // namespace creepuq
