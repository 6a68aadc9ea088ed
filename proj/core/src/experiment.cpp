#include "pathnet/experiment.hpp"

#include <filesystem>
#include <stdexcept>

#include "pathnet/curves.hpp"
#include "pathnet/io_util.hpp"
#include "pathnet/metrics.hpp"

namespace pathnet {

namespace fs = std::filesystem;
using nlohmann::json;

ExperimentDriver::ExperimentDriver(ExperimentConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    auto [source, destination] = materialize_tasks(cfg_);
    source_ = std::move(source);
    destination_ = std::move(destination);
    arch_ = resolve_architecture(cfg_, source_);
    params_ = cfg_.evolution;
    plan_ = cfg_.to_plan();
    seed_ = cfg_.seed;

    Rng net_rng(experiment_net_seed(seed_));
    net_ = SuperNetwork(arch_, net_rng);
    net_.register_head(source_.task_id, source_.train.num_classes, net_rng);
    if (destination_.task_id != source_.task_id) {
        net_.register_head(destination_.task_id, destination_.train.num_classes, net_rng);
    }

    init_stage();
}

ExperimentDriver ExperimentDriver::from_checkpoint(const Checkpoint& ck) {
    ExperimentDriver d;
    d.cfg_ = ck.config;
    d.cfg_.validate();
    auto [source, destination] = materialize_tasks(d.cfg_);
    d.source_ = std::move(source);
    d.destination_ = std::move(destination);
    d.arch_ = resolve_architecture(d.cfg_, d.source_);
    d.params_ = d.cfg_.evolution;
    d.plan_ = d.cfg_.to_plan();
    d.seed_ = d.cfg_.seed;

    const Architecture& saved = ck.net.arch();
    if (saved.num_layers != d.arch_.num_layers ||
        saved.modules_per_layer != d.arch_.modules_per_layer ||
        saved.neurons_per_module != d.arch_.neurons_per_module ||
        saved.max_path_width != d.arch_.max_path_width || saved.input_dim != d.arch_.input_dim) {
        throw CheckpointError(
            "checkpoint: stored network architecture disagrees with the configuration "
            "(did a task CSV change since the checkpoint was written?)");
    }

    d.position_ = ck.position;
    d.net_ = ck.net;
    d.scratch_net_ = ck.scratch_net;
    d.current_row_ = ck.current_row;
    d.rows_ = ck.rows;
    d.outcomes_ = ck.stage_outcomes;

    if (!d.position_.done) {
        if (d.position_.stage_index >= d.plan_.stages.size()) {
            throw CheckpointError("checkpoint: stage index " +
                                  std::to_string(d.position_.stage_index) + " out of range");
        }
        if (!ck.stage_state) {
            throw CheckpointError("checkpoint: missing stage state for an unfinished run");
        }
        d.state_ = *ck.stage_state;
        if (d.state_.tournaments_completed != d.position_.tournaments_done) {
            throw CheckpointError("checkpoint: stage state and position disagree on completed "
                                  "tournaments");
        }
        const StagePlanEntry& stage = d.current_stage();
        if (stage.role == Phase::Scratch && !d.scratch_net_) {
            throw CheckpointError("checkpoint: mid-scratch-stage position without a scratch "
                                  "network snapshot");
        }
        d.ctx_ = RunContext{stage.role, d.position_.iteration, d.seed_};
    }
    return d;
}

void ExperimentDriver::init_stage() {
    const StagePlanEntry& stage = current_stage();
    ctx_ = RunContext{stage.role, position_.iteration, seed_};
    position_.tournaments_done = 0;

    if (stage.role == Phase::Scratch) {
        const TaskSpec& task = task_of(stage);
        Rng scratch_rng(scratch_net_seed(seed_, position_.iteration));
        scratch_net_.emplace(arch_, scratch_rng);
        scratch_net_->register_head(task.task_id, task.train.num_classes, scratch_rng);
    }

    state_ = make_initial_state(arch_, params_,
                                Rng(stage_seed(seed_, position_.iteration, stage.role)));
}

void ExperimentDriver::step(const MetricsHook& hook) {
    if (position_.done) throw std::logic_error("experiment already complete");

    const StagePlanEntry& stage = current_stage();
    state_ = evolve(net_of(stage), task_of(stage), params_, std::move(state_), 1, hook, ctx_);
    ++position_.tournaments_done;
    if (position_.tournaments_done == stage.budget) close_stage(hook);
}

void ExperimentDriver::close_stage(const MetricsHook& hook) {
    const StagePlanEntry& stage = current_stage();
    const TaskSpec& task = task_of(stage);
    StageOutcome outcome = finalize_stage(net_of(stage), task, state_, ctx_, hook);

    if (stage.role == Phase::Destination) {
        current_row_.transfer_acc = outcome.final_eval_accuracy;
        current_row_.transfer_loss = outcome.final_train_loss;
    } else if (stage.role == Phase::Scratch) {
        current_row_.scratch_acc = outcome.final_eval_accuracy;
        current_row_.scratch_loss = outcome.final_train_loss;
        current_row_.has_scratch = true;
    }

    const bool do_consolidate =
        stage.role == Phase::Source ||
        (stage.role == Phase::Destination && plan_.consolidate_destination);
    if (do_consolidate) {
        Rng reinit_rng(consolidate_seed(seed_, position_.iteration, stage.role));
        consolidate(net_, outcome, reinit_rng);
    }
    if (stage.role == Phase::Scratch) scratch_net_.reset();
    outcomes_.push_back(std::move(outcome));

    ++position_.stage_index;
    if (position_.stage_index == plan_.stages.size()) {
        current_row_.iteration = position_.iteration;
        current_row_.delta_acc =
            current_row_.has_scratch ? current_row_.transfer_acc - current_row_.scratch_acc : 0.0;
        rows_.push_back(current_row_);
        current_row_ = IterationRow{};

        position_.stage_index = 0;
        ++position_.iteration;
        if (position_.iteration > static_cast<int>(plan_.iterations)) {
            position_.done = true;
            position_.tournaments_done = 0;
            state_ = EvolutionState{};
            return;
        }
    }
    init_stage();
}

void ExperimentDriver::run(const MetricsHook& hook) {
    while (!position_.done) step(hook);
}

Checkpoint ExperimentDriver::make_checkpoint() const {
    Checkpoint ck;
    ck.config = cfg_;
    ck.position = position_;
    ck.net = net_;
    ck.scratch_net = scratch_net_;
    if (!position_.done) ck.stage_state = state_;
    ck.current_row = current_row_;
    ck.rows = rows_;
    ck.stage_outcomes = outcomes_;
    return ck;
}

ExperimentReport ExperimentDriver::report() const {
    if (!position_.done) throw std::logic_error("experiment still running; no report yet");
    ExperimentReport report;
    report.seed = seed_;
    report.source_task = source_.task_id;
    report.destination_task = destination_.task_id;
    report.iterations = plan_.iterations;
    report.rows = rows_;
    report.best_iteration = best_iteration_of(rows_);
    report.stage_outcomes = outcomes_;
    return report;
}

json report_summary(const ExperimentReport& report) {
    json rows = json::array();
    for (const IterationRow& r : report.rows) {
        json row;
        row["iteration"] = r.iteration;
        row["transfer_acc"] = r.transfer_acc;
        row["transfer_loss"] = r.transfer_loss;
        row["scratch_acc"] = r.has_scratch ? json(r.scratch_acc) : json(nullptr);
        row["scratch_loss"] = r.has_scratch ? json(r.scratch_loss) : json(nullptr);
        row["delta_acc"] = r.has_scratch ? json(r.delta_acc) : json(nullptr);
        rows.push_back(std::move(row));
    }

    json stages = json::array();
    for (const StageOutcome& o : report.stage_outcomes) {
        stages.push_back(json{{"iteration", o.iteration},
                              {"phase", to_string(o.role)},
                              {"task_id", o.task_id},
                              {"best_genotype", o.best_genotype.to_text()},
                              {"best_fitness", o.best_fitness},
                              {"eval_accuracy", o.final_eval_accuracy},
                              {"train_loss", o.final_train_loss}});
    }

    return json{{"seed", report.seed},
                {"source_task", report.source_task},
                {"destination_task", report.destination_task},
                {"iterations", report.iterations},
                {"best_iteration", report.best_iteration},
                {"budget_note",
                 "budgets count tournament generations per stage; wall-clock time is never part "
                 "of the budget"},
                {"rows", std::move(rows)},
                {"stages", std::move(stages)}};
}

namespace {

RunOutputs drive_and_write(ExperimentDriver& driver, const std::string& out_dir,
                           std::size_t checkpoint_every, bool include_wallclock) {
    fs::create_directories(out_dir);
    const auto out = [&](const char* name) { return (fs::path(out_dir) / name).string(); };

    RunOutputs paths;
    paths.metrics_csv = out("metrics.csv");
    paths.report_json = out("report.json");
    paths.checkpoint_json = out("checkpoint.json");

    std::vector<MetricsRecord> records;
    auto hook = [&records](const MetricsRecord& rec) { records.push_back(rec); };

    std::size_t since_checkpoint = 0;
    while (!driver.done()) {
        driver.step(hook);
        if (checkpoint_every > 0 && ++since_checkpoint >= checkpoint_every && !driver.done()) {
            save_checkpoint(driver.make_checkpoint(), paths.checkpoint_json);
            since_checkpoint = 0;
        }
    }

    write_metrics_csv(records, paths.metrics_csv, include_wallclock);
    write_file_atomic(paths.report_json, report_summary(driver.report()).dump(2) + "\n");
    save_checkpoint(driver.make_checkpoint(), paths.checkpoint_json);

    const bool any_eval_rows = [&] {
        for (const auto& r : records) {
            if (r.path_index.has_value()) return true;
        }
        return false;
    }();
    if (any_eval_rows) {
        paths.curves_accuracy_svg = out("curves_accuracy.svg");
        paths.curves_loss_svg = out("curves_loss.svg");
        render_curves(records, paths.curves_accuracy_svg, CurvePanel::Fitness);
        render_curves(records, paths.curves_loss_svg, CurvePanel::Loss);
    }
    return paths;
}

}  // namespace

RunOutputs run_experiment_files(const ExperimentConfig& cfg, const std::string& out_dir,
                                std::size_t checkpoint_every, bool include_wallclock) {
    ExperimentDriver driver(cfg);
    return drive_and_write(driver, out_dir, checkpoint_every, include_wallclock);
}

RunOutputs resume_experiment_files(const std::string& checkpoint_path, const std::string& out_dir,
                                   std::size_t checkpoint_every, bool include_wallclock) {
    ExperimentDriver driver = ExperimentDriver::from_checkpoint(load_checkpoint(checkpoint_path));
    return drive_and_write(driver, out_dir, checkpoint_every, include_wallclock);
}

}  // namespace pathnet
