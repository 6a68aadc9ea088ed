#include "pathnet/supernet.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pathnet/nn.hpp"

namespace pathnet {

void Architecture::validate() const {
    if (num_layers < 1) throw std::invalid_argument("architecture: num_layers must be >= 1");
    if (modules_per_layer < 1) {
        throw std::invalid_argument("architecture: modules_per_layer must be >= 1");
    }
    if (neurons_per_module < 1) {
        throw std::invalid_argument("architecture: neurons_per_module must be >= 1");
    }
    if (max_path_width < 1 || max_path_width > modules_per_layer) {
        throw std::invalid_argument("architecture: max_path_width must be in [1, " +
                                    std::to_string(modules_per_layer) + "]");
    }
    if (input_dim < 1) throw std::invalid_argument("architecture: input_dim must be >= 1");
}

namespace {

Matrix uniform_fan_init(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Matrix w(fan_in, fan_out);
    for (double& v : w.data()) v = rng.uniform(-bound, bound);
    return w;
}

}  // namespace

SuperNetwork::SuperNetwork(const Architecture& arch, Rng& rng) : arch_(arch) {
    arch_.validate();
    modules_.resize(arch_.num_layers);
    frozen_.resize(arch_.num_layers);
    for (std::size_t l = 0; l < arch_.num_layers; ++l) {
        modules_[l].resize(arch_.modules_per_layer);
        frozen_[l].assign(arch_.modules_per_layer, 0);
        for (std::size_t m = 0; m < arch_.modules_per_layer; ++m) init_module(l, m, rng);
    }
}

void SuperNetwork::init_module(std::size_t layer, std::size_t index, Rng& rng) {
    const std::size_t fan_in = arch_.layer_input_dim(layer);
    const std::size_t fan_out = arch_.neurons_per_module;
    modules_[layer][index].w = uniform_fan_init(fan_in, fan_out, rng);
    modules_[layer][index].b = Matrix(1, fan_out);
}

void SuperNetwork::register_head(const std::string& task_id, std::size_t num_classes, Rng& rng) {
    if (has_head(task_id)) {
        throw std::invalid_argument("register_head: task \"" + task_id + "\" already registered");
    }
    if (num_classes < 1) throw std::invalid_argument("register_head: num_classes must be >= 1");
    ReadoutHead h;
    h.task_id = task_id;
    h.num_classes = num_classes;
    h.params.w = uniform_fan_init(arch_.neurons_per_module, num_classes, rng);
    h.params.b = Matrix(1, num_classes);
    heads_.push_back(std::move(h));
}

bool SuperNetwork::has_head(const std::string& task_id) const {
    for (const auto& h : heads_) {
        if (h.task_id == task_id) return true;
    }
    return false;
}

const ReadoutHead& SuperNetwork::head_checked(const std::string& task_id) const {
    for (const auto& h : heads_) {
        if (h.task_id == task_id) return h;
    }
    throw std::invalid_argument("unknown task \"" + task_id + "\": no registered head");
}

const ReadoutHead& SuperNetwork::head(const std::string& task_id) const {
    return head_checked(task_id);
}

ReadoutHead& SuperNetwork::head(const std::string& task_id) {
    return const_cast<ReadoutHead&>(head_checked(task_id));
}

void SuperNetwork::set_freeze_mask(std::vector<std::vector<std::uint8_t>> mask) {
    if (mask.size() != arch_.num_layers) {
        throw std::invalid_argument("freeze mask: wrong number of layers");
    }
    for (const auto& row : mask) {
        if (row.size() != arch_.modules_per_layer) {
            throw std::invalid_argument("freeze mask: wrong number of modules");
        }
    }
    frozen_ = std::move(mask);
}

ForwardTrace SuperNetwork::forward(const Genotype& path, const std::string& task_id,
                                   const Matrix& x) const {
    path.validate_for(arch_);
    const ReadoutHead& h = head_checked(task_id);
    if (x.cols() != arch_.input_dim) {
        throw ShapeError("forward: input " + x.shape_str() + " does not match input_dim " +
                         std::to_string(arch_.input_dim));
    }

    ForwardTrace trace;
    trace.layer_inputs.reserve(arch_.num_layers + 1);
    trace.module_outputs.resize(arch_.num_layers);
    trace.layer_inputs.push_back(x);

    for (std::size_t l = 0; l < arch_.num_layers; ++l) {
        const Matrix& in = trace.layer_inputs.back();
        const auto& genes = path.layer(l);
        auto& outs = trace.module_outputs[l];
        outs.reserve(genes.size());
        Matrix mean(in.rows(), arch_.neurons_per_module);
        for (int m : genes) {
            const ModuleUnit& unit = modules_[l][static_cast<std::size_t>(m)];
            outs.push_back(relu(affine(in, unit.w, unit.b)));
            add_inplace(mean, outs.back());
        }
        scale_inplace(mean, 1.0 / static_cast<double>(genes.size()));
        trace.layer_inputs.push_back(std::move(mean));
    }

    trace.logits = affine(trace.layer_inputs.back(), h.params.w, h.params.b);
    return trace;
}

PathGradients SuperNetwork::compute_gradients(const Genotype& path, const std::string& task_id,
                                              const Matrix& x,
                                              const std::vector<int>& labels) const {
    const ForwardTrace trace = forward(path, task_id, x);
    const ReadoutHead& h = head_checked(task_id);

    const LossGrad lg = softmax_cross_entropy(trace.logits, labels);

    PathGradients grads;
    grads.loss = lg.loss;
    grads.correct = lg.correct;
    grads.batch = x.rows();
    grads.modules.resize(arch_.num_layers);

    const Matrix& h_last = trace.layer_inputs.back();
    grads.head.w = matmul_at_b(h_last, lg.grad_logits);
    grads.head.b = column_sums(lg.grad_logits);

    // d loss / d h_l, walked backwards through the averaging aggregation.
    Matrix d_h = matmul_a_bt(lg.grad_logits, h.params.w);

    for (std::size_t l = arch_.num_layers; l-- > 0;) {
        const auto& genes = path.layer(l);
        const Matrix& in = trace.layer_inputs[l];
        const double inv_k = 1.0 / static_cast<double>(genes.size());

        Matrix d_in(in.rows(), in.cols());
        grads.modules[l].resize(genes.size());
        for (std::size_t slot = 0; slot < genes.size(); ++slot) {
            const ModuleUnit& unit = modules_[l][static_cast<std::size_t>(genes[slot])];
            const Matrix& act = trace.module_outputs[l][slot];

            // dz = (d_h / k) gated by the ReLU.
            Matrix dz(act.rows(), act.cols());
            for (std::size_t i = 0; i < dz.size(); ++i) {
                dz.data()[i] = act.data()[i] > 0.0 ? d_h.data()[i] * inv_k : 0.0;
            }

            grads.modules[l][slot].w = matmul_at_b(in, dz);
            grads.modules[l][slot].b = column_sums(dz);
            add_inplace(d_in, matmul_a_bt(dz, unit.w));
        }
        d_h = std::move(d_in);
    }
    return grads;
}

StepStats SuperNetwork::backward_and_update(const Genotype& path, const std::string& task_id,
                                            const Matrix& x, const std::vector<int>& labels,
                                            double lr) {
    const PathGradients grads = compute_gradients(path, task_id, x, labels);

    for (std::size_t l = 0; l < arch_.num_layers; ++l) {
        const auto& genes = path.layer(l);
        for (std::size_t slot = 0; slot < genes.size(); ++slot) {
            const std::size_t m = static_cast<std::size_t>(genes[slot]);
            if (frozen_[l][m]) continue;
            sgd_step_inplace(modules_[l][m].w, grads.modules[l][slot].w, lr);
            sgd_step_inplace(modules_[l][m].b, grads.modules[l][slot].b, lr);
        }
    }
    ReadoutHead& h = head(task_id);
    sgd_step_inplace(h.params.w, grads.head.w, lr);
    sgd_step_inplace(h.params.b, grads.head.b, lr);

    return StepStats{grads.loss, grads.correct, grads.batch};
}

void SuperNetwork::freeze_path(const Genotype& path) {
    path.validate_for(arch_);
    for (std::size_t l = 0; l < arch_.num_layers; ++l) {
        for (int m : path.layer(l)) frozen_[l][static_cast<std::size_t>(m)] = 1;
    }
}

void SuperNetwork::reinit_unfrozen(Rng& rng) {
    for (std::size_t l = 0; l < arch_.num_layers; ++l) {
        for (std::size_t m = 0; m < arch_.modules_per_layer; ++m) {
            if (!frozen_[l][m]) init_module(l, m, rng);
        }
    }
}

std::size_t SuperNetwork::frozen_count() const {
    std::size_t n = 0;
    for (const auto& row : frozen_) n += static_cast<std::size_t>(std::count(row.begin(), row.end(), 1));
    return n;
}

}  // namespace pathnet
