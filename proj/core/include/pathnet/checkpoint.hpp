#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pathnet/config.hpp"
#include "pathnet/evolution.hpp"
#include "pathnet/supernet.hpp"
#include "pathnet/transfer.hpp"

namespace pathnet {

class CheckpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kCheckpointFormatVersion = 1;

/// Where to pick the experiment back up: the next tournament to run is
/// (iteration, stage_index, tournaments_done + 1). Stage boundaries
/// (summary row, consolidation, next-stage init) always complete before a
/// checkpoint can be taken, so no partial transition is ever stored.
struct CheckpointPosition {
    int iteration = 1;               // 1-based
    std::size_t stage_index = 0;     // into the plan's stage list
    std::size_t tournaments_done = 0;
    bool done = false;
};

struct Checkpoint {
    int format_version = kCheckpointFormatVersion;
    ExperimentConfig config;
    CheckpointPosition position;
    SuperNetwork net;                          // the long-lived transfer network
    std::optional<SuperNetwork> scratch_net;   // present mid-scratch-stage only
    std::optional<EvolutionState> stage_state; // absent once done
    IterationRow current_row;                  // partially filled current iteration
    std::vector<IterationRow> rows;            // completed iterations
    std::vector<StageOutcome> stage_outcomes;  // summaries only; metrics not stored
};

/// Numbers round-trip bitwise: doubles are emitted in shortest form that
/// parses back to the same IEEE-754 value, integers as exact 64-bit values.
nlohmann::json checkpoint_to_json(const Checkpoint& ck);
Checkpoint checkpoint_from_json(const nlohmann::json& j);

void save_checkpoint(const Checkpoint& ck, const std::string& path);  // atomic write
Checkpoint load_checkpoint(const std::string& path);

}  // namespace pathnet
