#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include <nlohmann/json.hpp>

#include "pathnet/evolution.hpp"
#include "pathnet/supernet.hpp"
#include "pathnet/tasks.hpp"
#include "pathnet/transfer.hpp"

namespace pathnet {

/// Invalid or malformed configuration; the message names the offending
/// field by its dotted path (e.g. "evolution.batch_size").
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct GeneratorSpec {
    std::size_t classes = 6;
    std::size_t dim = 100;
    std::size_t per_class = 200;
    double spread = 1.0;
    /// Unset: derived from the experiment seed (new data every seed).
    std::optional<std::uint64_t> seed;
};

struct CsvSpec {
    std::string path;
    std::size_t label_column = 0;  // resolved to the last column when unset in JSON
    bool label_column_set = false;
    bool has_header = false;
};

struct DeriveSpec {
    RelatedKind kind = RelatedKind::FixedRotation;
    std::optional<std::uint64_t> seed;
    std::size_t subset_classes = 0;  // 0: ceil(C/2), at least 2
};

/// Exactly one of generator/csv (source) or generator/csv/derive/same
/// (destination) is given.
struct TaskConfig {
    std::string id;
    std::optional<GeneratorSpec> generator;
    std::optional<CsvSpec> csv;
    std::optional<DeriveSpec> derive;  // destination only: derived from the source
    bool same_as_source = false;       // destination only: the source task itself
};

struct TasksConfig {
    TaskConfig source{"source", GeneratorSpec{}, std::nullopt, std::nullopt, false};
    TaskConfig destination{"destination", std::nullopt, std::nullopt, DeriveSpec{}, false};
    double eval_fraction = 0.2;
    /// Unset: derived from the experiment seed.
    std::optional<std::uint64_t> split_seed;
};

struct PlanConfig {
    std::size_t iterations = 4;
    /// Tournaments per stage; unset falls back to evolution.generations.
    std::optional<std::size_t> source_budget;
    std::optional<std::size_t> destination_budget;
    bool scratch_baseline = true;
    bool consolidate_destination = true;
};

struct ExperimentConfig {
    std::uint64_t seed = 0;
    Architecture architecture{};  // input_dim 0: inferred from the source task
    EvolutionParams evolution{};
    TasksConfig tasks{};
    PlanConfig plan{};

    void validate() const;
    std::size_t source_budget() const;
    std::size_t destination_budget() const;
    TransferPlan to_plan() const;

    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig from_file(const std::string& path);
    /// Fully normalized: every field explicit, suitable for checkpoints.
    nlohmann::json to_json() const;
};

/// Builds the source and destination TaskSpecs: generate or load, derive
/// the destination if requested, then split each with seeds drawn from
/// dedicated streams of the experiment seed.
std::pair<TaskSpec, TaskSpec> materialize_tasks(const ExperimentConfig& cfg);

/// architecture with input_dim filled in from the task data when 0.
Architecture resolve_architecture(const ExperimentConfig& cfg, const TaskSpec& source);

}  // namespace pathnet
