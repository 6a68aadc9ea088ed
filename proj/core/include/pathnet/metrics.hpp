#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace pathnet {

enum class Phase { Source, Destination, Scratch };

std::string to_string(Phase phase);
Phase phase_from_string(const std::string& s);

/// One row of the learning-curve log: either a path evaluation
/// (path_index 0/1, no eval_accuracy) or an end-of-stage summary
/// (eval_accuracy set, no path_index).
struct MetricsRecord {
    Phase phase = Phase::Source;
    int iteration = 1;                    // 1-based
    std::size_t generation = 0;           // 1-based tournament number within the stage
    std::optional<int> path_index;        // 0 = first drawn, 1 = second drawn
    std::string genotype;                 // canonical text form
    double fitness = 0.0;
    double mean_train_loss = 0.0;
    std::optional<double> eval_accuracy;  // end-of-stage rows only
    double wallclock_ms = 0.0;
    std::uint64_t seed = 0;
};

using MetricsHook = std::function<void(const MetricsRecord&)>;

/// Fixed header: phase,iteration,generation,path_index,genotype,fitness,
/// mean_train_loss,eval_accuracy,wallclock_ms,seed. The genotype field is
/// quoted (it contains commas). Doubles use 17 significant digits so all
/// non-timing fields round-trip exactly. wallclock_ms is written only when
/// include_wallclock is set; by default the column is left blank so the
/// file is byte-identical across repeated runs of the same (config, seed).
std::string metrics_csv_header();
std::string metrics_to_csv(const std::vector<MetricsRecord>& records,
                           bool include_wallclock = false);
void write_metrics_csv(const std::vector<MetricsRecord>& records, const std::string& path,
                       bool include_wallclock = false);

/// Parse errors name the 1-based line.
std::vector<MetricsRecord> metrics_from_csv(const std::string& text);
std::vector<MetricsRecord> read_metrics_csv(const std::string& path);

}  // namespace pathnet
