#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pathnet/checkpoint.hpp"
#include "pathnet/config.hpp"
#include "pathnet/transfer.hpp"

namespace pathnet {

/// The transfer protocol advanced one tournament at a time, so a
/// checkpoint can be cut between any two tournaments and resumed exactly.
/// A full run produces the same metrics stream as run_transfer_experiment
/// on the same config — stage seeds, consolidation, and scratch handling
/// are shared.
class ExperimentDriver {
public:
    explicit ExperimentDriver(ExperimentConfig cfg);
    static ExperimentDriver from_checkpoint(const Checkpoint& ck);

    bool done() const noexcept { return position_.done; }
    const CheckpointPosition& position() const noexcept { return position_; }
    const ExperimentConfig& config() const noexcept { return cfg_; }
    const TaskSpec& source() const noexcept { return source_; }
    const TaskSpec& destination() const noexcept { return destination_; }
    const TransferPlan& plan() const noexcept { return plan_; }

    /// One tournament. When it is the stage's last, also emits the stage
    /// summary row, consolidates, and initializes the next stage.
    void step(const MetricsHook& hook = {});

    void run(const MetricsHook& hook = {});

    Checkpoint make_checkpoint() const;

    /// Valid once done(); metrics are streamed through the hooks and not
    /// repeated here.
    ExperimentReport report() const;

private:
    ExperimentDriver() = default;

    const StagePlanEntry& current_stage() const { return plan_.stages[position_.stage_index]; }
    const TaskSpec& task_of(const StagePlanEntry& stage) const {
        return stage.task_id == source_.task_id ? source_ : destination_;
    }
    SuperNetwork& net_of(const StagePlanEntry& stage) {
        return stage.role == Phase::Scratch ? *scratch_net_ : net_;
    }
    void init_stage();
    void close_stage(const MetricsHook& hook);

    ExperimentConfig cfg_;
    TaskSpec source_;
    TaskSpec destination_;
    Architecture arch_;
    EvolutionParams params_;
    TransferPlan plan_;
    std::uint64_t seed_ = 0;

    SuperNetwork net_;
    std::optional<SuperNetwork> scratch_net_;
    EvolutionState state_;
    RunContext ctx_;
    CheckpointPosition position_;
    IterationRow current_row_;
    std::vector<IterationRow> rows_;
    std::vector<StageOutcome> outcomes_;
};

/// Per-iteration table plus the best iteration and per-stage summaries.
/// Scratch columns are null when the baseline was disabled.
nlohmann::json report_summary(const ExperimentReport& report);

struct RunOutputs {
    std::string metrics_csv;
    std::string report_json;
    std::string checkpoint_json;
    std::string curves_accuracy_svg;  // empty when nothing was plotted
    std::string curves_loss_svg;
};

/// Drives the experiment to completion and writes metrics.csv,
/// report.json, checkpoint.json, curves_accuracy.svg, and curves_loss.svg
/// into out_dir (created if needed; all writes atomic). checkpoint_every
/// > 0 refreshes checkpoint.json every that many tournaments.
/// include_wallclock opts the nondeterministic timing column into the CSV.
RunOutputs run_experiment_files(const ExperimentConfig& cfg, const std::string& out_dir,
                                std::size_t checkpoint_every = 0, bool include_wallclock = false);

/// Same, but starting from a saved checkpoint. The metrics CSV contains
/// only the rows produced after the checkpoint's position.
RunOutputs resume_experiment_files(const std::string& checkpoint_path, const std::string& out_dir,
                                   std::size_t checkpoint_every = 0,
                                   bool include_wallclock = false);

}  // namespace pathnet
