#include "creepuq/config.hpp"

#include <fstream>

#include "creepuq/models_classical.hpp"

namespace creepuq {

namespace {

const std::set<std::string>& known_model_names() {
    static const std::set<std::string> names{"nn", "qr", "ngboost", "gpr", "deep_ensemble",
                                             "mc_dropout", "bnn_vi", "bnn_mcmc"};
    return names;
}

template <typename T>
T get_or(const nlohmann::json& j, const std::string& key, T fallback) {
    if (j.contains(key)) return j.at(key).get<T>();
    return fallback;
}

TtpModel ttp_from_json(const nlohmann::json& j, TemperatureUnit unit) {
    TtpModel m;
    m.kind = ttp_kind_from_string(get_or<std::string>(j, "kind", "larson_miller"));
    m.unit = unit;
    m.c_lm = get_or<double>(j, "c_lm", 20.0);
    m.log10_t_in = get_or<double>(j, "log10_t_in", 0.0);
    m.t_in = get_or<double>(j, "t_in", 0.0);
    m.q_over_r = get_or<double>(j, "q_over_r", 0.0);
    if (j.contains("stress_poly")) {
        auto v = j.at("stress_poly").get<std::vector<double>>();
        if (v.size() != 4) throw ConfigError("physics.ttp.stress_poly must have 4 coefficients");
        for (std::size_t i = 0; i < 4; ++i) m.stress_poly[i] = v[i];
    }
    return m;
}

}  // namespace

std::string fnv1a_hex(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return from_json(j);
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    ExperimentConfig cfg;
    try {
        const nlohmann::json dataset = j.value("dataset", nlohmann::json::object());
        if (dataset.contains("csv")) {
            cfg.csv_path = dataset.at("csv").get<std::string>();
        } else if (dataset.contains("synthetic")) {
            cfg.use_synthetic = true;
            const auto& s = dataset.at("synthetic");
            cfg.synthetic.n = get_or<std::size_t>(s, "n", 500);
            cfg.synthetic.noise_sd = get_or<double>(s, "noise_sd", 0.1);
            cfg.synthetic.seed = get_or<std::uint64_t>(s, "seed", 0);
        } else {
            throw ConfigError("dataset requires either 'csv' or 'synthetic'");
        }
        cfg.target_column = get_or<std::string>(dataset, "target", "rupture_life");
        cfg.dataset_id = get_or<std::string>(
            dataset, "id",
            cfg.use_synthetic ? "synthetic-" + std::to_string(cfg.synthetic.n) : cfg.csv_path);

        const nlohmann::json cols = j.value("columns", nlohmann::json::object());
        cfg.columns.temperature = get_or<std::string>(cols, "temperature", "temperature");
        cfg.columns.stress = get_or<std::string>(cols, "stress", "stress");
        cfg.columns.temperature_unit =
            temperature_unit_from_string(get_or<std::string>(cols, "temperature_unit", "kelvin"));
        if (cols.contains("composition"))
            for (auto it = cols.at("composition").begin(); it != cols.at("composition").end(); ++it)
                cfg.columns.composition[it.key()] = it.value().get<std::string>();

        const nlohmann::json pre = j.value("preprocess", nlohmann::json::object());
        cfg.log10_target = get_or<bool>(pre, "log10_target", true);
        cfg.normalize = get_or<bool>(pre, "normalize", true);

        const nlohmann::json phys = j.value("physics", nlohmann::json::object());
        cfg.physics.enabled = get_or<bool>(phys, "enabled", false);
        if (phys.contains("ttp")) {
            cfg.physics.ttp = ttp_from_json(phys.at("ttp"), cfg.columns.temperature_unit);
            cfg.physics.ttp_kind = cfg.physics.ttp.kind;
            cfg.physics.fit_constants = get_or<bool>(phys.at("ttp"), "fit_constants", false);
        }
        cfg.physics.include_sfe = get_or<bool>(phys, "include_sfe", false);
        if (phys.contains("pi_loss")) {
            const auto& pl = phys.at("pi_loss");
            cfg.physics.pi_loss.enabled = get_or<bool>(pl, "enabled", false);
            cfg.physics.pi_loss.lambda1 = get_or<double>(pl, "lambda1", 0.1);
            cfg.physics.pi_loss.lambda2 = get_or<double>(pl, "lambda2", 0.1);
            cfg.physics.pi_loss.upper_bound = get_or<double>(pl, "upper_bound", 0.0);
        }

        if (!j.contains("models") || !j.at("models").is_array() || j.at("models").empty())
            throw ConfigError("config requires a non-empty 'models' array");
        for (const auto& m : j.at("models")) {
            ModelSpec spec;
            if (m.is_string()) {
                spec.name = m.get<std::string>();
                spec.overrides = nlohmann::json::object();
            } else {
                spec.name = m.at("name").get<std::string>();
                spec.overrides = m;
                spec.overrides.erase("name");
            }
            if (!known_model_names().count(spec.name))
                throw ConfigError("unknown model name: " + spec.name);
            cfg.models.push_back(std::move(spec));
        }

        const nlohmann::json cv = j.value("cv", nlohmann::json::object());
        cfg.cv_folds = get_or<std::size_t>(cv, "folds", 5);
        cfg.seed = get_or<std::uint64_t>(cv, "seed", 13);
        if (cfg.cv_folds < 2) throw ConfigError("cv.folds must be >= 2");

        if (j.contains("al")) {
            const auto& al = j.at("al");
            cfg.al.enabled = true;
            cfg.al.strategies = get_or<std::vector<std::string>>(
                al, "strategies", std::vector<std::string>{"vr_kmeans", "random"});
            cfg.al.models =
                get_or<std::vector<std::string>>(al, "models", std::vector<std::string>{"gpr"});
            cfg.al.batch = get_or<std::size_t>(al, "batch", 10);
            cfg.al.initial_size = get_or<std::size_t>(al, "initial_size", 0);
            cfg.al.label_budget = get_or<std::size_t>(al, "label_budget", 100);
            cfg.al.test_fraction = get_or<double>(al, "test_fraction", 0.2);
            cfg.al.seeds = get_or<std::vector<std::uint64_t>>(al, "seeds",
                                                              std::vector<std::uint64_t>{1});
            for (const auto& s : cfg.al.strategies)
                if (s != "vr_kmeans" && s != "random")
                    throw ConfigError("unknown AL strategy: " + s);
            for (const auto& m : cfg.al.models)
                if (!known_model_names().count(m))
                    throw ConfigError("unknown AL model name: " + m);
        }

        cfg.interval_z = get_or<double>(j, "interval_z", 1.96);
        cfg.threads = get_or<int>(j, "threads", 1);
        if (cfg.threads < 1) throw ConfigError("threads must be >= 1");
        cfg.output_dir = get_or<std::string>(j, "output_dir", "out");
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config error: ") + e.what());
    }

    // Resolved config: round-trips losslessly and hashes stably.
    nlohmann::json r;
    if (cfg.use_synthetic)
        r["dataset"] = {{"synthetic",
                         {{"n", cfg.synthetic.n},
                          {"noise_sd", cfg.synthetic.noise_sd},
                          {"seed", cfg.synthetic.seed}}},
                        {"target", cfg.target_column},
                        {"id", cfg.dataset_id}};
    else
        r["dataset"] = {{"csv", cfg.csv_path}, {"target", cfg.target_column}, {"id", cfg.dataset_id}};
    nlohmann::json comp = nlohmann::json::object();
    for (const auto& [k, v] : cfg.columns.composition) comp[k] = v;
    r["columns"] = {{"temperature", cfg.columns.temperature},
                    {"stress", cfg.columns.stress},
                    {"temperature_unit", to_string(cfg.columns.temperature_unit)},
                    {"composition", comp}};
    r["preprocess"] = {{"log10_target", cfg.log10_target}, {"normalize", cfg.normalize}};
    r["physics"] = {{"enabled", cfg.physics.enabled},
                    {"include_sfe", cfg.physics.include_sfe},
                    {"ttp",
                     {{"kind", to_string(cfg.physics.ttp.kind)},
                      {"fit_constants", cfg.physics.fit_constants},
                      {"c_lm", cfg.physics.ttp.c_lm},
                      {"log10_t_in", cfg.physics.ttp.log10_t_in},
                      {"t_in", cfg.physics.ttp.t_in},
                      {"q_over_r", cfg.physics.ttp.q_over_r},
                      {"stress_poly",
                       {cfg.physics.ttp.stress_poly[0], cfg.physics.ttp.stress_poly[1],
                        cfg.physics.ttp.stress_poly[2], cfg.physics.ttp.stress_poly[3]}}}},
                    {"pi_loss",
                     {{"enabled", cfg.physics.pi_loss.enabled},
                      {"lambda1", cfg.physics.pi_loss.lambda1},
                      {"lambda2", cfg.physics.pi_loss.lambda2},
                      {"upper_bound", cfg.physics.pi_loss.upper_bound}}}};
    r["models"] = nlohmann::json::array();
    for (const auto& m : cfg.models) {
        nlohmann::json spec = m.overrides;
        spec["name"] = m.name;
        r["models"].push_back(spec);
    }
    r["cv"] = {{"folds", cfg.cv_folds}, {"seed", cfg.seed}};
    if (cfg.al.enabled)
        r["al"] = {{"strategies", cfg.al.strategies}, {"models", cfg.al.models},
                   {"batch", cfg.al.batch},           {"initial_size", cfg.al.initial_size},
                   {"label_budget", cfg.al.label_budget},
                   {"test_fraction", cfg.al.test_fraction},
                   {"seeds", cfg.al.seeds}};
    r["interval_z"] = cfg.interval_z;
    r["threads"] = cfg.threads;
    r["output_dir"] = cfg.output_dir;

    cfg.resolved = r;
    cfg.hash = fnv1a_hex(r.dump());
    return cfg;
}

Dataset ExperimentConfig::load_dataset() const {
    if (use_synthetic) return generate_synthetic_creep(synthetic);
    return load_csv(csv_path, target_column);
}

std::unique_ptr<Regressor> make_regressor(const ModelSpec& spec, const ExperimentConfig& cfg) {
    const nlohmann::json& o = spec.overrides;
    if (spec.name == "gpr") {
        GprSearchConfig search;
        search.grid_points = get_or<int>(o, "grid_points", search.grid_points);
        search.refine_rounds = get_or<int>(o, "refine_rounds", search.refine_rounds);
        return std::make_unique<GprRegressor>(cfg.interval_z, search);
    }
    if (spec.name == "qr") {
        BoostConfig bc;
        bc.rounds = get_or<int>(o, "rounds", bc.rounds);
        bc.learning_rate = get_or<double>(o, "learning_rate", bc.learning_rate);
        bc.max_depth = get_or<int>(o, "max_depth", bc.max_depth);
        return std::make_unique<QuantileRegressor>(bc);
    }
    if (spec.name == "ngboost") {
        NgboostConfig nc;
        nc.rounds = get_or<int>(o, "rounds", nc.rounds);
        nc.learning_rate = get_or<double>(o, "learning_rate", nc.learning_rate);
        nc.max_depth = get_or<int>(o, "max_depth", nc.max_depth);
        return std::make_unique<NgboostRegressor>(cfg.interval_z, nc);
    }

    NeuralModelConfig nn = NeuralModelConfig::defaults(neural_variant_from_string(spec.name));
    if (o.contains("hidden")) nn.hidden_widths = o.at("hidden").get<std::vector<std::size_t>>();
    if (o.contains("optimizer"))
        nn.optimizer.kind = optimizer_kind_from_string(o.at("optimizer").get<std::string>());
    nn.optimizer.learning_rate = get_or<double>(o, "learning_rate", nn.optimizer.learning_rate);
    nn.optimizer.momentum = get_or<double>(o, "momentum", nn.optimizer.momentum);
    nn.train.max_epochs = get_or<int>(o, "epochs", nn.train.max_epochs);
    nn.train.batch_size = get_or<int>(o, "batch_size", nn.train.batch_size);
    nn.train.patience = get_or<int>(o, "patience", nn.train.patience);
    nn.ensemble_size = get_or<int>(o, "ensemble_size", nn.ensemble_size);
    nn.dropout_rate = get_or<double>(o, "dropout_rate", nn.dropout_rate);
    nn.mc_passes = get_or<int>(o, "mc_passes", nn.mc_passes);
    nn.prior_sd = get_or<double>(o, "prior_sd", nn.prior_sd);
    nn.kl_weight = get_or<double>(o, "kl_weight", nn.kl_weight);
    nn.sigma_obs = get_or<double>(o, "sigma_obs", nn.sigma_obs);
    nn.vi_draws = get_or<int>(o, "vi_draws", nn.vi_draws);
    nn.vi_mc_samples = get_or<int>(o, "vi_mc_samples", nn.vi_mc_samples);
    nn.mcmc_warmup = get_or<int>(o, "warmup", nn.mcmc_warmup);
    nn.mcmc_samples = get_or<int>(o, "samples", nn.mcmc_samples);
    if (cfg.physics.enabled && cfg.physics.pi_loss.enabled) nn.physics = cfg.physics.pi_loss;
    return std::make_unique<NeuralRegressor>(nn, cfg.interval_z);
}

}  // namespace creepuq
