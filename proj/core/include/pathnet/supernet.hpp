#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pathnet/genotype.hpp"
#include "pathnet/matrix.hpp"
#include "pathnet/rng.hpp"

namespace pathnet {

/// Static shape of the supernetwork: L layers of M modules, each module an
/// affine map into neurons_per_module units followed by ReLU. A pathway may
/// activate at most max_path_width distinct modules per layer.
struct Architecture {
    std::size_t num_layers = 3;
    std::size_t modules_per_layer = 20;
    std::size_t neurons_per_module = 20;
    std::size_t max_path_width = 5;
    std::size_t input_dim = 0;

    void validate() const;
    std::size_t layer_input_dim(std::size_t layer) const {
        return layer == 0 ? input_dim : neurons_per_module;
    }
};

struct AffineParams {
    Matrix w;
    Matrix b;
};

using ModuleUnit = AffineParams;

/// Task-specific final layer; never shared between tasks.
struct ReadoutHead {
    std::string task_id;
    std::size_t num_classes = 0;
    AffineParams params;
};

/// Everything forward() needs to run backward(): per-layer inputs and the
/// post-ReLU output of each active module, aligned with the genotype.
struct ForwardTrace {
    Matrix logits;
    std::vector<Matrix> layer_inputs;                  // h_0 .. h_L (h_0 = x)
    std::vector<std::vector<Matrix>> module_outputs;   // [layer][active slot]
};

struct PathGradients {
    double loss = 0.0;
    std::size_t correct = 0;
    std::size_t batch = 0;
    std::vector<std::vector<AffineParams>> modules;    // aligned with genotype layers
    AffineParams head;

    double accuracy() const {
        return batch == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(batch);
    }
};

struct StepStats {
    double loss = 0.0;
    std::size_t correct = 0;
    std::size_t batch = 0;

    double accuracy() const {
        return batch == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(batch);
    }
};

/// The shared parameter pool: an L x M grid of modules, a per-module freeze
/// mask, and one readout head per registered task. Single-writer contract:
/// at most one update in flight; forward() is const and freely concurrent.
class SuperNetwork {
public:
    SuperNetwork() = default;

    /// Weights uniform in +-sqrt(6 / (fan_in + fan_out)), biases zero,
    /// drawn layer-major then module-major so a seed pins every bit.
    SuperNetwork(const Architecture& arch, Rng& rng);

    const Architecture& arch() const noexcept { return arch_; }

    /// Fresh head with num_classes outputs; other parameters untouched.
    /// Throws on duplicate task_id.
    void register_head(const std::string& task_id, std::size_t num_classes, Rng& rng);
    bool has_head(const std::string& task_id) const;
    const ReadoutHead& head(const std::string& task_id) const;
    ReadoutHead& head(const std::string& task_id);
    const std::vector<ReadoutHead>& heads() const noexcept { return heads_; }
    std::vector<ReadoutHead>& heads() noexcept { return heads_; }

    const ModuleUnit& module(std::size_t layer, std::size_t index) const {
        return modules_[layer][index];
    }
    ModuleUnit& module(std::size_t layer, std::size_t index) { return modules_[layer][index]; }

    bool frozen(std::size_t layer, std::size_t index) const {
        return frozen_[layer][index] != 0;
    }
    const std::vector<std::vector<std::uint8_t>>& freeze_mask() const noexcept { return frozen_; }
    void set_freeze_mask(std::vector<std::vector<std::uint8_t>> mask);

    /// h_l = mean over active modules m of relu(affine(h_{l-1}, W_lm, b_lm));
    /// logits = affine(h_L, head). Only active modules and the named task's
    /// head touch the output.
    ForwardTrace forward(const Genotype& path, const std::string& task_id,
                         const Matrix& x) const;

    /// Reverse-mode gradients through the averaging aggregation for every
    /// active module and the task head. Pure; nothing is updated.
    PathGradients compute_gradients(const Genotype& path, const std::string& task_id,
                                    const Matrix& x, const std::vector<int>& labels) const;

    /// compute_gradients + one SGD step on active unfrozen modules and the
    /// task head. Frozen active modules carry signal but receive no update.
    StepStats backward_and_update(const Genotype& path, const std::string& task_id,
                                  const Matrix& x, const std::vector<int>& labels, double lr);

    /// Marks every module on the path frozen. Accumulates: previously
    /// frozen modules stay frozen.
    void freeze_path(const Genotype& path);

    /// Redraws every unfrozen module from the initializer; frozen modules
    /// and heads keep their exact bits.
    void reinit_unfrozen(Rng& rng);

    std::size_t frozen_count() const;

private:
    void init_module(std::size_t layer, std::size_t index, Rng& rng);
    const ReadoutHead& head_checked(const std::string& task_id) const;

    Architecture arch_;
    std::vector<std::vector<ModuleUnit>> modules_;     // [L][M]
    std::vector<std::vector<std::uint8_t>> frozen_;    // [L][M]
    std::vector<ReadoutHead> heads_;
};

}  // namespace pathnet
