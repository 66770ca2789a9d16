#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>

#include <CLI11.hpp>

#include "creepuq/config.hpp"
#include "creepuq/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 2;
constexpr int kExitRuntimeError = 3;

creepuq::ExperimentConfig load_config(const std::string& path, const std::string& out_dir,
                                      bool seed_set, std::uint64_t seed,
                                      const std::string& models_filter) {
    creepuq::ExperimentConfig cfg = creepuq::ExperimentConfig::from_file(path);
    nlohmann::json j = cfg.resolved;
    if (!out_dir.empty()) j["output_dir"] = out_dir;
    if (seed_set) j["cv"]["seed"] = seed;
    if (!models_filter.empty()) {
        nlohmann::json keep = nlohmann::json::array();
        std::string item;
        std::vector<std::string> wanted;
        for (char c : models_filter + ",") {
            if (c == ',') {
                if (!item.empty()) wanted.push_back(item);
                item.clear();
            } else {
                item += c;
            }
        }
        for (const auto& m : j["models"]) {
            std::string name = m.at("name").get<std::string>();
            for (const auto& w : wanted)
                if (w == name) keep.push_back(m);
        }
        if (keep.empty())
            throw creepuq::ConfigError("--models filter matched no configured model");
        j["models"] = keep;
    }
    return creepuq::ExperimentConfig::from_json(j);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"creepuq — creep rupture life regression with uncertainty quantification"};
    app.require_subcommand(1);

    std::string config_path, out_dir, models_filter;
    std::uint64_t seed = 0;
    bool seed_set = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "experiment config (JSON)")->required();
        cmd->add_option("--out", out_dir, "output directory (overrides config)");
        cmd->add_option("--seed", seed, "root seed (overrides config)")
            ->each([&](const std::string&) { seed_set = true; });
        cmd->add_option("--models", models_filter, "comma-separated model subset");
    };

    CLI::App* bench = app.add_subcommand("bench", "k-fold cross-validated benchmark");
    add_common(bench);
    CLI::App* al = app.add_subcommand("al", "batch-mode active-learning study");
    add_common(al);
    CLI::App* synth = app.add_subcommand("synth", "emit the configured synthetic dataset as CSV");
    add_common(synth);
    std::string synth_out = "synthetic.csv";
    synth->add_option("--csv", synth_out, "destination CSV path");
    CLI::App* plot = app.add_subcommand("plot", "re-render plots from saved reports");
    std::string plot_dir;
    plot->add_option("--dir", plot_dir, "directory with report/trace files")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (plot->parsed()) {
            creepuq::render_saved_outputs(plot_dir);
            std::printf("plots refreshed in %s\n", plot_dir.c_str());
            return kExitOk;
        }

        creepuq::ExperimentConfig cfg =
            load_config(config_path, out_dir, seed_set, seed, models_filter);

        if (bench->parsed()) {
            creepuq::BenchmarkResult result = creepuq::run_benchmark(cfg);
            for (const auto& r : result.reports) {
                creepuq::MetricSummary r2 = r.summary("r2");
                std::printf("%-14s r2 = %.4f ± %.4f\n", r.model.c_str(), r2.mean, r2.sd);
            }
            std::printf("reports written to %s (config hash %s)\n", cfg.output_dir.c_str(),
                        cfg.hash.c_str());
        } else if (al->parsed()) {
            auto traces = creepuq::run_al(cfg);
            std::printf("%zu traces written to %s\n", traces.size(), cfg.output_dir.c_str());
        } else if (synth->parsed()) {
            creepuq::Dataset ds = cfg.load_dataset();
            creepuq::write_csv(ds, synth_out);
            std::printf("synthetic dataset (%zu rows) written to %s\n", ds.size(),
                        synth_out.c_str());
        }
        return kExitOk;
    } catch (const creepuq::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRuntimeError;
    }
}
