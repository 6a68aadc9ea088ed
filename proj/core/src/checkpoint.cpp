#include "pathnet/checkpoint.hpp"

#include "pathnet/io_util.hpp"

namespace pathnet {

namespace {

using nlohmann::json;

json matrix_to_json(const Matrix& m, const std::string& what) {
    if (!all_finite(m)) {
        throw CheckpointError("checkpoint: " + what + " contains a non-finite value");
    }
    json data = json::array();
    for (std::size_t i = 0; i < m.size(); ++i) data.push_back(m.data()[i]);
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Matrix matrix_from_json(const json& j, const std::string& what) {
    const std::size_t rows = j.at("rows").get<std::size_t>();
    const std::size_t cols = j.at("cols").get<std::size_t>();
    const json& data = j.at("data");
    if (!data.is_array() || data.size() != rows * cols) {
        throw CheckpointError("checkpoint: " + what + ": data length " +
                              std::to_string(data.size()) + " does not match " +
                              std::to_string(rows) + "x" + std::to_string(cols));
    }
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = data[i].get<double>();
    return m;
}

json arch_to_json(const Architecture& a) {
    return json{{"layers", a.num_layers},
                {"modules_per_layer", a.modules_per_layer},
                {"neurons_per_module", a.neurons_per_module},
                {"max_path_width", a.max_path_width},
                {"input_dim", a.input_dim}};
}

Architecture arch_from_json(const json& j) {
    Architecture a;
    a.num_layers = j.at("layers").get<std::size_t>();
    a.modules_per_layer = j.at("modules_per_layer").get<std::size_t>();
    a.neurons_per_module = j.at("neurons_per_module").get<std::size_t>();
    a.max_path_width = j.at("max_path_width").get<std::size_t>();
    a.input_dim = j.at("input_dim").get<std::size_t>();
    a.validate();
    return a;
}

json net_to_json(const SuperNetwork& net) {
    const Architecture& a = net.arch();
    json modules = json::array();
    for (std::size_t l = 0; l < a.num_layers; ++l) {
        json layer = json::array();
        for (std::size_t m = 0; m < a.modules_per_layer; ++m) {
            const ModuleUnit& u = net.module(l, m);
            const std::string what =
                "module[" + std::to_string(l) + "][" + std::to_string(m) + "]";
            layer.push_back(json{{"w", matrix_to_json(u.w, what + ".w")},
                                 {"b", matrix_to_json(u.b, what + ".b")}});
        }
        modules.push_back(std::move(layer));
    }

    json frozen = json::array();
    for (const auto& layer : net.freeze_mask()) {
        json row = json::array();
        for (auto f : layer) row.push_back(static_cast<int>(f));
        frozen.push_back(std::move(row));
    }

    json heads = json::array();
    for (const ReadoutHead& h : net.heads()) {
        const std::string what = "head \"" + h.task_id + "\"";
        heads.push_back(json{{"task_id", h.task_id},
                             {"num_classes", h.num_classes},
                             {"w", matrix_to_json(h.params.w, what + ".w")},
                             {"b", matrix_to_json(h.params.b, what + ".b")}});
    }

    return json{{"architecture", arch_to_json(a)},
                {"modules", std::move(modules)},
                {"frozen", std::move(frozen)},
                {"heads", std::move(heads)}};
}

SuperNetwork net_from_json(const json& j) {
    const Architecture a = arch_from_json(j.at("architecture"));
    Rng scratch(0);  // placeholder draws; every parameter is overwritten below
    SuperNetwork net(a, scratch);

    const json& modules = j.at("modules");
    if (modules.size() != a.num_layers) {
        throw CheckpointError("checkpoint: expected " + std::to_string(a.num_layers) +
                              " module layers, found " + std::to_string(modules.size()));
    }
    for (std::size_t l = 0; l < a.num_layers; ++l) {
        const json& layer = modules[l];
        if (layer.size() != a.modules_per_layer) {
            throw CheckpointError("checkpoint: layer " + std::to_string(l) + " holds " +
                                  std::to_string(layer.size()) + " modules, expected " +
                                  std::to_string(a.modules_per_layer));
        }
        for (std::size_t m = 0; m < a.modules_per_layer; ++m) {
            const std::string what =
                "module[" + std::to_string(l) + "][" + std::to_string(m) + "]";
            ModuleUnit& u = net.module(l, m);
            u.w = matrix_from_json(layer[m].at("w"), what + ".w");
            u.b = matrix_from_json(layer[m].at("b"), what + ".b");
            if (u.w.rows() != a.layer_input_dim(l) || u.w.cols() != a.neurons_per_module) {
                throw CheckpointError("checkpoint: " + what + " has shape " + u.w.shape_str() +
                                      ", architecture expects " +
                                      std::to_string(a.layer_input_dim(l)) + "x" +
                                      std::to_string(a.neurons_per_module));
            }
        }
    }

    const json& frozen = j.at("frozen");
    std::vector<std::vector<std::uint8_t>> mask;
    for (const json& row : frozen) {
        std::vector<std::uint8_t> r;
        for (const json& v : row) r.push_back(static_cast<std::uint8_t>(v.get<int>() != 0));
        mask.push_back(std::move(r));
    }
    net.set_freeze_mask(std::move(mask));

    for (const json& hj : j.at("heads")) {
        const std::string task_id = hj.at("task_id").get<std::string>();
        net.register_head(task_id, hj.at("num_classes").get<std::size_t>(), scratch);
        ReadoutHead& h = net.head(task_id);
        const std::string what = "head \"" + task_id + "\"";
        h.params.w = matrix_from_json(hj.at("w"), what + ".w");
        h.params.b = matrix_from_json(hj.at("b"), what + ".b");
    }
    return net;
}

json genotype_to_json(const Genotype& g) { return g.to_text(); }

Genotype genotype_from_json(const json& j) {
    return Genotype::from_text(j.get<std::string>());
}

json state_to_json(const EvolutionState& s) {
    json population = json::array();
    for (const Genotype& g : s.population) population.push_back(genotype_to_json(g));
    json best = nullptr;
    if (s.best_seen) {
        best = json{{"genotype", genotype_to_json(s.best_seen->genotype)},
                    {"fitness", s.best_seen->fitness}};
    }
    return json{{"population", std::move(population)},
                {"rng_state", s.rng.state()},
                {"tournaments_completed", s.tournaments_completed},
                {"paths_evaluated", s.paths_evaluated},
                {"best_seen", std::move(best)}};
}

EvolutionState state_from_json(const json& j) {
    EvolutionState s;
    for (const json& g : j.at("population")) s.population.push_back(genotype_from_json(g));
    s.rng.set_state(j.at("rng_state").get<std::uint64_t>());
    s.tournaments_completed = j.at("tournaments_completed").get<std::size_t>();
    s.paths_evaluated = j.at("paths_evaluated").get<std::size_t>();
    const json& best = j.at("best_seen");
    if (!best.is_null()) {
        s.best_seen = BestSeen{genotype_from_json(best.at("genotype")),
                               best.at("fitness").get<double>()};
    }
    return s;
}

json row_to_json(const IterationRow& r) {
    return json{{"iteration", r.iteration},
                {"transfer_acc", r.transfer_acc},
                {"scratch_acc", r.scratch_acc},
                {"transfer_loss", r.transfer_loss},
                {"scratch_loss", r.scratch_loss},
                {"delta_acc", r.delta_acc},
                {"has_scratch", r.has_scratch}};
}

IterationRow row_from_json(const json& j) {
    IterationRow r;
    r.iteration = j.at("iteration").get<int>();
    r.transfer_acc = j.at("transfer_acc").get<double>();
    r.scratch_acc = j.at("scratch_acc").get<double>();
    r.transfer_loss = j.at("transfer_loss").get<double>();
    r.scratch_loss = j.at("scratch_loss").get<double>();
    r.delta_acc = j.at("delta_acc").get<double>();
    r.has_scratch = j.at("has_scratch").get<bool>();
    return r;
}

json outcome_to_json(const StageOutcome& o) {
    return json{{"task_id", o.task_id},
                {"phase", to_string(o.role)},
                {"iteration", o.iteration},
                {"best_genotype", genotype_to_json(o.best_genotype)},
                {"best_fitness", o.best_fitness},
                {"final_eval_accuracy", o.final_eval_accuracy},
                {"final_train_loss", o.final_train_loss}};
}

StageOutcome outcome_from_json(const json& j) {
    StageOutcome o;
    o.task_id = j.at("task_id").get<std::string>();
    o.role = phase_from_string(j.at("phase").get<std::string>());
    o.iteration = j.at("iteration").get<int>();
    o.best_genotype = genotype_from_json(j.at("best_genotype"));
    o.best_fitness = j.at("best_fitness").get<double>();
    o.final_eval_accuracy = j.at("final_eval_accuracy").get<double>();
    o.final_train_loss = j.at("final_train_loss").get<double>();
    return o;
}

}  // namespace

json checkpoint_to_json(const Checkpoint& ck) {
    json j;
    j["format_version"] = ck.format_version;
    j["config"] = ck.config.to_json();
    j["position"] = json{{"iteration", ck.position.iteration},
                         {"stage_index", ck.position.stage_index},
                         {"tournaments_done", ck.position.tournaments_done},
                         {"done", ck.position.done}};
    j["net"] = net_to_json(ck.net);
    j["scratch_net"] = ck.scratch_net ? net_to_json(*ck.scratch_net) : json(nullptr);
    j["stage_state"] = ck.stage_state ? state_to_json(*ck.stage_state) : json(nullptr);
    j["current_row"] = row_to_json(ck.current_row);
    json rows = json::array();
    for (const IterationRow& r : ck.rows) rows.push_back(row_to_json(r));
    j["rows"] = std::move(rows);
    json outcomes = json::array();
    for (const StageOutcome& o : ck.stage_outcomes) outcomes.push_back(outcome_to_json(o));
    j["stage_outcomes"] = std::move(outcomes);
    return j;
}

Checkpoint checkpoint_from_json(const json& j) {
    if (!j.is_object() || !j.contains("format_version")) {
        throw CheckpointError("checkpoint: missing format_version field");
    }
    const json& ver = j.at("format_version");
    if (!ver.is_number_integer() || ver.get<int>() != kCheckpointFormatVersion) {
        throw CheckpointError("checkpoint: unsupported format version " + ver.dump() +
                              " (this build reads version " +
                              std::to_string(kCheckpointFormatVersion) + ")");
    }

    try {
        Checkpoint ck;
        ck.format_version = ver.get<int>();
        ck.config = ExperimentConfig::from_json(j.at("config"));

        const json& pos = j.at("position");
        ck.position.iteration = pos.at("iteration").get<int>();
        ck.position.stage_index = pos.at("stage_index").get<std::size_t>();
        ck.position.tournaments_done = pos.at("tournaments_done").get<std::size_t>();
        ck.position.done = pos.at("done").get<bool>();

        ck.net = net_from_json(j.at("net"));
        if (!j.at("scratch_net").is_null()) ck.scratch_net = net_from_json(j.at("scratch_net"));
        if (!j.at("stage_state").is_null()) ck.stage_state = state_from_json(j.at("stage_state"));
        ck.current_row = row_from_json(j.at("current_row"));
        for (const json& r : j.at("rows")) ck.rows.push_back(row_from_json(r));
        for (const json& o : j.at("stage_outcomes")) {
            ck.stage_outcomes.push_back(outcome_from_json(o));
        }
        return ck;
    } catch (const json::exception& e) {
        throw CheckpointError(std::string("checkpoint: malformed document: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw CheckpointError(std::string("checkpoint: invalid content: ") + e.what());
    }
}

void save_checkpoint(const Checkpoint& ck, const std::string& path) {
    write_file_atomic(path, checkpoint_to_json(ck).dump(2) + "\n");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const std::exception& e) {
        throw CheckpointError("checkpoint: cannot read \"" + path + "\": " + e.what());
    }
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw CheckpointError("checkpoint: \"" + path + "\" is not valid JSON: " + e.what());
    }
    return checkpoint_from_json(j);
}

}  // namespace pathnet
