#include "creepuq/active_learning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "creepuq/metrics.hpp"
#include "creepuq/rng.hpp"

namespace creepuq {

namespace {

double sq_distance(const Tensor& points, std::size_t row, const double* center,
                   std::size_t d) {
    double s = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
        double diff = points.at(row, c) - center[c];
        s += diff * diff;
    }
    return s;
}

}  // namespace

KmeansResult kmeans(const Tensor& points, std::size_t k, std::uint64_t seed, int max_iters) {
    std::size_t n = points.rows(), d = points.cols();
    if (k < 1) throw std::invalid_argument("kmeans: k must be >= 1");
    if (k > n) throw std::invalid_argument("kmeans: k exceeds the number of points");

    Rng rng(derive_seed(seed, "kmeans"));
    KmeansResult res;
    res.centroids = Tensor({k, d});

    // k-means++ seeding.
    std::vector<std::size_t> chosen;
    chosen.push_back(rng.index(n));
    std::vector<double> dist2(n, std::numeric_limits<double>::infinity());
    while (chosen.size() < k) {
        std::size_t last = chosen.back();
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double d2 = sq_distance(points, i, &points.values[last * d], d);
            dist2[i] = std::min(dist2[i], d2);
            total += dist2[i];
        }
        std::size_t pick;
        if (total <= 0.0) {
            pick = rng.index(n);  // all remaining points coincide with centroids
        } else {
            double r = rng.uniform() * total;
            double acc = 0.0;
            pick = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                acc += dist2[i];
                if (acc >= r) {
                    pick = i;
                    break;
                }
            }
        }
        chosen.push_back(pick);
    }
    for (std::size_t c = 0; c < k; ++c)
        for (std::size_t j = 0; j < d; ++j)
            res.centroids.at(c, j) = points.at(chosen[c], j);

    res.assignments.assign(n, 0);
    std::vector<std::size_t> counts(k);
    for (int iter = 0; iter < max_iters; ++iter) {
        res.iterations = iter + 1;
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < k; ++c) {
                double d2 = sq_distance(points, i, &res.centroids.values[c * d], d);
                if (d2 < best_d) {
                    best_d = d2;
                    best = c;
                }
            }
            if (res.assignments[i] != best) {
                res.assignments[i] = best;
                changed = true;
            }
        }
        std::fill(counts.begin(), counts.end(), 0);
        std::fill(res.centroids.values.begin(), res.centroids.values.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t c = res.assignments[i];
            ++counts[c];
            for (std::size_t j = 0; j < d; ++j) res.centroids.at(c, j) += points.at(i, j);
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) continue;
            for (std::size_t j = 0; j < d; ++j)
                res.centroids.at(c, j) /= static_cast<double>(counts[c]);
        }
        // Re-seed empty clusters to the point farthest from its centroid.
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] > 0) continue;
            std::size_t far = 0;
            double far_d = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                double d2 = sq_distance(points, i,
                                        &res.centroids.values[res.assignments[i] * d], d);
                if (d2 > far_d) {
                    far_d = d2;
                    far = i;
                }
            }
            for (std::size_t j = 0; j < d; ++j) res.centroids.at(c, j) = points.at(far, j);
            res.assignments[far] = c;
            counts[c] = 1;
            changed = true;
        }
        if (!changed && iter > 0) break;
    }

    res.inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        res.inertia += sq_distance(points, i, &res.centroids.values[res.assignments[i] * d], d);
    return res;
}

std::vector<std::size_t> select_batch_vr_kmeans(const std::vector<double>& pool_sigma,
                                                const Tensor& pool_features,
                                                std::size_t batch, std::uint64_t seed) {
    std::size_t n = pool_features.rows();
    if (pool_sigma.size() != n)
        throw std::invalid_argument("select_batch_vr_kmeans: sigma/feature count mismatch");
    if (batch > n) throw std::invalid_argument("select_batch_vr_kmeans: batch exceeds pool size");

    KmeansResult km = kmeans(pool_features, batch, seed);
    std::vector<std::ptrdiff_t> best(batch, -1);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t c = km.assignments[i];
        if (best[c] < 0 || pool_sigma[i] > pool_sigma[static_cast<std::size_t>(best[c])])
            best[c] = static_cast<std::ptrdiff_t>(i);
    }
    std::vector<std::size_t> selected;
    selected.reserve(batch);
    for (std::size_t c = 0; c < batch; ++c) {
        if (best[c] < 0)
            throw std::logic_error("select_batch_vr_kmeans: empty cluster after selection");
        selected.push_back(static_cast<std::size_t>(best[c]));
    }
    std::sort(selected.begin(), selected.end());
    return selected;
}

ActiveLearningTrace run_al_loop(const Dataset& ds, const RegressorFactory& make_model,
                                const AlRunConfig& cfg, const AlObserver& observer) {
    std::size_t n = ds.size();
    std::size_t initial = cfg.initial_size > 0 ? cfg.initial_size : 2 * cfg.batch;
    if (cfg.label_budget < initial)
        throw std::invalid_argument("run_al_loop: label budget smaller than the initial set");

    // Fixed test carve-out, then the initial labeled set; both independent of
    // the query strategy so paired runs share them.
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng split_rng(derive_seed(cfg.seed, "al-test"));
    split_rng.shuffle(order);
    std::size_t n_test = static_cast<std::size_t>(std::round(cfg.test_fraction * static_cast<double>(n)));

    AlState state;
    state.seed = cfg.seed;
    state.test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
    std::vector<std::size_t> non_test(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
    if (initial + cfg.batch > non_test.size())
        throw std::invalid_argument("run_al_loop: initial size + batch exceeds the pool");

    Rng init_rng(derive_seed(cfg.seed, "al-init"));
    init_rng.shuffle(non_test);
    state.labeled.assign(non_test.begin(), non_test.begin() + static_cast<std::ptrdiff_t>(initial));
    state.pool.assign(non_test.begin() + static_cast<std::ptrdiff_t>(initial), non_test.end());
    std::sort(state.labeled.begin(), state.labeled.end());
    std::sort(state.pool.begin(), state.pool.end());
    std::sort(state.test.begin(), state.test.end());

    // Physics features: constants fit on the initial labeled rows only (the
    // only labels known at the start), then applied to every row.
    Dataset working = ds;
    if (cfg.physics.enabled) {
        int t_idx = working.feature_index(cfg.physics.roles.temperature);
        int s_idx = working.feature_index(cfg.physics.roles.stress);
        if (t_idx < 0 || s_idx < 0)
            throw std::runtime_error("run_al_loop: physics columns missing");
        std::vector<double> lt, tt, st;
        for (std::size_t i : state.labeled) {
            lt.push_back(working.target[i]);
            tt.push_back(working.features.at(i, static_cast<std::size_t>(t_idx)));
            st.push_back(working.features.at(i, static_cast<std::size_t>(s_idx)));
        }
        TtpModel ttp;
        if (cfg.physics.fit_constants) {
            ttp = fit_manson_haferd(lt, tt, st, cfg.physics.roles.temperature_unit);
        } else {
            ttp = fit_ttp_stress_polynomial(cfg.physics.ttp, lt, tt, st);
        }
        working = augment_features(working, ttp, false, cfg.physics.roles);
    }

    // Normalization bounds from observed feature rows (labeled + pool); pool
    // features are known in pool-based AL, test rows stay out.
    if (cfg.normalize) {
        std::vector<std::size_t> observed = state.labeled;
        observed.insert(observed.end(), state.pool.begin(), state.pool.end());
        std::sort(observed.begin(), observed.end());
        auto bounds = fit_normalization(working.rows(observed));
        working = apply_normalization(working, bounds);
    }

    Tensor x_test = working.rows(state.test).features;
    std::vector<double> y_test;
    for (std::size_t i : state.test) y_test.push_back(working.target[i]);

    ActiveLearningTrace trace;
    trace.strategy = cfg.strategy;
    trace.seed = cfg.seed;

    Rng strategy_rng(derive_seed(cfg.seed, "al-strategy"));
    std::vector<std::size_t> just_added = state.labeled;

    while (true) {
        Dataset train = working.rows(state.labeled);
        auto model = make_model();
        trace.model = model->name();
        model->fit(train.features, train.target, derive_seed(cfg.seed, "fit", state.labeled.size()));

        std::vector<PredictiveDistribution> test_pred = model->predict(x_test);
        std::vector<double> pred_mean;
        pred_mean.reserve(test_pred.size());
        for (const auto& p : test_pred) pred_mean.push_back(p.mean);

        AlIterationRecord rec;
        rec.labeled_count = state.labeled.size();
        rec.selected = just_added;
        rec.r2 = r_squared(y_test, pred_mean);
        rec.rmse = rmse(y_test, pred_mean);
        trace.iterations.push_back(std::move(rec));
        if (observer) observer(state);

        if (state.labeled.size() >= cfg.label_budget || state.pool.empty()) break;

        std::size_t take = std::min({cfg.batch, state.pool.size(),
                                     cfg.label_budget - state.labeled.size()});
        std::vector<std::size_t> picked_local;
        if (cfg.strategy == "random") {
            std::vector<std::size_t> pool_order(state.pool.size());
            for (std::size_t i = 0; i < pool_order.size(); ++i) pool_order[i] = i;
            strategy_rng.shuffle(pool_order);
            picked_local.assign(pool_order.begin(),
                                pool_order.begin() + static_cast<std::ptrdiff_t>(take));
            std::sort(picked_local.begin(), picked_local.end());
        } else if (cfg.strategy == "vr_kmeans") {
            if (!model->has_uncertainty())
                throw std::runtime_error("run_al_loop: vr_kmeans needs a model with uncertainty output");
            Dataset pool_ds = working.rows(state.pool);
            std::vector<PredictiveDistribution> pool_pred = model->predict(pool_ds.features);
            std::vector<double> sigma;
            sigma.reserve(pool_pred.size());
            for (const auto& p : pool_pred) sigma.push_back(p.std);
            picked_local = select_batch_vr_kmeans(sigma, pool_ds.features, take,
                                                  strategy_rng.next_u64());
        } else {
            throw std::invalid_argument("run_al_loop: unknown strategy " + cfg.strategy);
        }

        just_added.clear();
        for (std::size_t li : picked_local) just_added.push_back(state.pool[li]);
        // Move from pool to labeled (the oracle annotator supplies labels).
        std::vector<std::size_t> remaining;
        remaining.reserve(state.pool.size() - take);
        std::size_t pi = 0;
        for (std::size_t i = 0; i < state.pool.size(); ++i) {
            if (pi < picked_local.size() && picked_local[pi] == i) {
                ++pi;
                continue;
            }
            remaining.push_back(state.pool[i]);
        }
        state.pool = std::move(remaining);
        state.labeled.insert(state.labeled.end(), just_added.begin(), just_added.end());
        std::sort(state.labeled.begin(), state.labeled.end());
        ++state.iteration;
    }
    return trace;
}

}  // namespace creepuq
