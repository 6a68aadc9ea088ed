// Command-line front end: run/evolve/resume experiments, plot metrics,
// validate configs. Every artifact lands in the chosen output directory;
// all stochastic behavior is pinned by the config seed.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pathnet/checkpoint.hpp"
#include "pathnet/config.hpp"
#include "pathnet/curves.hpp"
#include "pathnet/experiment.hpp"
#include "pathnet/io_util.hpp"
#include "pathnet/metrics.hpp"
#include "pathnet/transfer.hpp"

namespace fs = std::filesystem;

namespace {

pathnet::ExperimentConfig load_config(const std::string& path,
                                      const std::optional<std::uint64_t>& seed) {
    pathnet::ExperimentConfig cfg = pathnet::ExperimentConfig::from_file(path);
    if (seed) {
        cfg.seed = *seed;
        cfg.validate();
    }
    return cfg;
}

int cmd_run(const std::string& config_path, const std::string& out_dir,
            const std::optional<std::uint64_t>& seed, std::size_t checkpoint_every, bool timing) {
    const pathnet::ExperimentConfig cfg = load_config(config_path, seed);
    const pathnet::RunOutputs out =
        pathnet::run_experiment_files(cfg, out_dir, checkpoint_every, timing);
    std::cout << "wrote " << out.metrics_csv << "\n"
              << "wrote " << out.report_json << "\n"
              << "wrote " << out.checkpoint_json << "\n";
    if (!out.curves_accuracy_svg.empty()) {
        std::cout << "wrote " << out.curves_accuracy_svg << "\n"
                  << "wrote " << out.curves_loss_svg << "\n";
    }
    return 0;
}

int cmd_evolve(const std::string& config_path, const std::string& out_dir,
               const std::optional<std::uint64_t>& seed,
               const std::optional<std::size_t>& generations, bool timing) {
    const pathnet::ExperimentConfig cfg = load_config(config_path, seed);
    auto [source, destination] = pathnet::materialize_tasks(cfg);
    (void)destination;
    const pathnet::Architecture arch = pathnet::resolve_architecture(cfg, source);

    pathnet::Rng net_rng(pathnet::experiment_net_seed(cfg.seed));
    pathnet::SuperNetwork net(arch, net_rng);
    net.register_head(source.task_id, source.train.num_classes, net_rng);

    const std::size_t budget = generations.value_or(cfg.source_budget());
    const pathnet::RunContext ctx{pathnet::Phase::Source, 1, cfg.seed};

    std::vector<pathnet::MetricsRecord> records;
    auto hook = [&records](const pathnet::MetricsRecord& rec) { records.push_back(rec); };
    const pathnet::StageResult res =
        pathnet::run_stage(net, source, cfg.evolution, budget,
                           pathnet::Rng(pathnet::stage_seed(cfg.seed, 1, pathnet::Phase::Source)),
                           ctx, hook);

    fs::create_directories(out_dir);
    const auto out = [&](const char* name) { return (fs::path(out_dir) / name).string(); };
    pathnet::write_metrics_csv(records, out("metrics.csv"), timing);
    const nlohmann::json summary{{"task_id", res.outcome.task_id},
                                 {"generations", budget},
                                 {"seed", cfg.seed},
                                 {"best_genotype", res.outcome.best_genotype.to_text()},
                                 {"best_fitness", res.outcome.best_fitness},
                                 {"eval_accuracy", res.outcome.final_eval_accuracy},
                                 {"train_loss", res.outcome.final_train_loss}};
    pathnet::write_file_atomic(out("summary.json"), summary.dump(2) + "\n");
    pathnet::render_curves(records, out("curves_accuracy.svg"), pathnet::CurvePanel::Fitness);
    pathnet::render_curves(records, out("curves_loss.svg"), pathnet::CurvePanel::Loss);

    std::cout << "best path " << res.outcome.best_genotype.to_text() << " fitness "
              << res.outcome.best_fitness << " eval accuracy " << res.outcome.final_eval_accuracy
              << "\n";
    return 0;
}

int cmd_resume(const std::string& checkpoint_path, const std::string& out_dir,
               std::size_t checkpoint_every, bool timing) {
    const pathnet::RunOutputs out =
        pathnet::resume_experiment_files(checkpoint_path, out_dir, checkpoint_every, timing);
    std::cout << "wrote " << out.metrics_csv << "\n"
              << "wrote " << out.report_json << "\n"
              << "wrote " << out.checkpoint_json << "\n";
    return 0;
}

int cmd_plot(const std::string& metrics_path, const std::string& out_path) {
    const std::vector<pathnet::MetricsRecord> records = pathnet::read_metrics_csv(metrics_path);
    pathnet::render_curves(records, out_path, pathnet::CurvePanel::Both);
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

int cmd_validate(const std::string& config_path) {
    const pathnet::ExperimentConfig cfg = pathnet::ExperimentConfig::from_file(config_path);
    std::cout << cfg.to_json().dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "pathnet: layered supernetworks with evolved pathways and "
        "freeze-and-reevolve transfer"};
    app.require_subcommand(1);

    std::string config_path, out_dir, checkpoint_path, metrics_path, out_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> generations;
    std::size_t checkpoint_every = 0;
    bool timing = false;

    CLI::App* run = app.add_subcommand("run", "full transfer experiment from a JSON config");
    run->add_option("--config", config_path, "experiment config (JSON)")->required();
    run->add_option("--out", out_dir, "output directory")->required();
    run->add_option("--seed", seed, "override the config's seed");
    run->add_option("--checkpoint-every", checkpoint_every,
                    "refresh checkpoint.json every N tournaments (0: only at the end)");
    run->add_flag("--timing", timing,
                  "include wallclock_ms values in metrics.csv (nondeterministic)");

    CLI::App* evolve = app.add_subcommand("evolve", "single evolution stage on the source task");
    evolve->add_option("--config", config_path, "experiment config (JSON)")->required();
    evolve->add_option("--out", out_dir, "output directory")->required();
    evolve->add_option("--seed", seed, "override the config's seed");
    evolve->add_option("--generations", generations, "override the stage budget");
    evolve->add_flag("--timing", timing,
                     "include wallclock_ms values in metrics.csv (nondeterministic)");

    CLI::App* resume = app.add_subcommand("resume", "continue a checkpointed experiment");
    resume->add_option("--checkpoint", checkpoint_path, "checkpoint.json to resume")->required();
    resume->add_option("--out", out_dir, "output directory")->required();
    resume->add_option("--checkpoint-every", checkpoint_every,
                       "refresh checkpoint.json every N tournaments (0: only at the end)");
    resume->add_flag("--timing", timing,
                     "include wallclock_ms values in metrics.csv (nondeterministic)");

    CLI::App* plot = app.add_subcommand("plot", "render learning curves from a metrics CSV");
    plot->add_option("--metrics", metrics_path, "metrics.csv produced by run/evolve")->required();
    plot->add_option("--out", out_path, "output SVG path")->required();

    CLI::App* validate =
        app.add_subcommand("validate-config", "check a config and print its normalized form");
    validate->add_option("--config", config_path, "experiment config (JSON)")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path, out_dir, seed, checkpoint_every, timing);
        if (evolve->parsed()) return cmd_evolve(config_path, out_dir, seed, generations, timing);
        if (resume->parsed()) return cmd_resume(checkpoint_path, out_dir, checkpoint_every, timing);
        if (plot->parsed()) return cmd_plot(metrics_path, out_path);
        if (validate->parsed()) return cmd_validate(config_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
