#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "creepuq/dataset.hpp"
#include "creepuq/physics.hpp"
#include "creepuq/regressor.hpp"
#include "creepuq/tensor.hpp"

namespace creepuq {

struct KmeansResult {
    std::vector<std::size_t> assignments;  // per point, in [0, k)
    Tensor centroids;                      // (k, d)
    double inertia = 0.0;
    int iterations = 0;
};

/// Lloyd's algorithm with k-means++ seeding; empty clusters are re-seeded to
/// the point farthest from its centroid. Deterministic per seed.
KmeansResult kmeans(const Tensor& points, std::size_t k, std::uint64_t seed,
                    int max_iters = 300);

/// Hybrid variance-reduction + diversity query: cluster the pool into
/// K = batch clusters, pick the highest-sigma point per cluster (ties to the
/// lowest index). Indices refer to rows of `pool_features`.
std::vector<std::size_t> select_batch_vr_kmeans(const std::vector<double>& pool_sigma,
                                                const Tensor& pool_features,
                                                std::size_t batch, std::uint64_t seed);

/// Labeled / pool / test partition of the dataset indices.
struct AlState {
    std::vector<std::size_t> labeled;
    std::vector<std::size_t> pool;
    std::vector<std::size_t> test;
    std::size_t iteration = 0;
    std::uint64_t seed = 0;
};

struct AlIterationRecord {
    std::size_t labeled_count = 0;
    std::vector<std::size_t> selected;  // indices added to reach this state
    double r2 = 0.0;
    double rmse = 0.0;
};

struct ActiveLearningTrace {
    std::string strategy;
    std::string model;
    std::uint64_t seed = 0;
    std::vector<AlIterationRecord> iterations;
};

struct AlPhysicsSpec {
    bool enabled = false;
    TtpKind ttp_kind = TtpKind::kLarsonMiller;
    bool fit_constants = false;  // Manson-Haferd grid fit when true
    TtpModel ttp;                // constants when not fitting
    ColumnRoles roles;
};

struct AlRunConfig {
    std::string strategy = "vr_kmeans";  // or "random"
    std::size_t batch = 10;
    std::size_t initial_size = 0;  // 0 => 2 * batch
    std::size_t label_budget = 100;
    double test_fraction = 0.2;
    std::uint64_t seed = 0;
    bool normalize = true;
    AlPhysicsSpec physics;
};

using RegressorFactory = std::function<std::unique_ptr<Regressor>()>;
using AlObserver = std::function<void(const AlState&)>;

/// Pool-based batch-mode loop: fixed 20% test hold-out, seeded initial
/// labeled set, fit-record-select-move until the label budget or pool
/// exhaustion. The annotator is an oracle lookup of the known labels.
/// `ds` must carry a log-transformed target but no normalization (the loop
/// normalizes on labeled+pool feature bounds).
ActiveLearningTrace run_al_loop(const Dataset& ds, const RegressorFactory& make_model,
                                const AlRunConfig& cfg, const AlObserver& observer = {});

}  // namespace creepuq
