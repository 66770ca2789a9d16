#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "creepuq/dataset.hpp"
#include "creepuq/models_neural.hpp"
#include "creepuq/physics.hpp"
#include "creepuq/regressor.hpp"

namespace creepuq {

/// Raised for malformed or inconsistent experiment configuration; the CLI
/// maps it to exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ModelSpec {
    std::string name;             // nn | qr | ngboost | gpr | deep_ensemble |
                                  // mc_dropout | bnn_vi | bnn_mcmc
    nlohmann::json overrides;     // per-model hyperparameter overrides
};

struct AlSpec {
    bool enabled = false;
    std::vector<std::string> strategies{"vr_kmeans", "random"};
    std::vector<std::string> models{"gpr"};
    std::size_t batch = 10;
    std::size_t initial_size = 0;  // 0 => 2 * batch
    std::size_t label_budget = 100;
    double test_fraction = 0.2;
    std::vector<std::uint64_t> seeds{1};
};

struct PhysicsConfig {
    bool enabled = false;
    TtpKind ttp_kind = TtpKind::kLarsonMiller;
    bool fit_constants = false;    // Manson-Haferd joint grid fit
    TtpModel ttp;                  // constants when given directly
    bool include_sfe = false;
    PhysicsLossSpec pi_loss;       // attached to neural training objectives
};

struct ExperimentConfig {
    // Dataset source: CSV path or the synthetic generator.
    std::string csv_path;
    bool use_synthetic = false;
    SyntheticSpec synthetic;
    std::string target_column = "rupture_life";
    std::string dataset_id;

    ColumnRoles columns;
    bool log10_target = true;
    bool normalize = true;

    PhysicsConfig physics;
    std::vector<ModelSpec> models;

    std::size_t cv_folds = 5;
    std::uint64_t seed = 13;

    AlSpec al;

    double interval_z = 1.96;
    int threads = 1;
    std::string output_dir = "out";

    nlohmann::json resolved;  // full config with defaults applied
    std::string hash;         // FNV-1a of the resolved serialization

    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig from_file(const std::string& path);

    /// Loads the configured dataset (CSV or synthetic), raw target.
    Dataset load_dataset() const;
};

std::string fnv1a_hex(const std::string& data);

/// Instantiates a model by spec; overrides land on top of the per-variant
/// defaults.
std::unique_ptr<Regressor> make_regressor(const ModelSpec& spec,
                                          const ExperimentConfig& cfg);

}  // namespace creepuq
