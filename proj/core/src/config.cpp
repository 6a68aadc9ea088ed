#include "pathnet/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "pathnet/io_util.hpp"

namespace pathnet {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError("config: " + (path.empty() ? std::string("<root>") : path) + ": " + what);
}

std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

/// Typed field access with dotted-path diagnostics and unknown-key
/// detection. Null values count as absent.
class ObjectReader {
public:
    ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j.is_object()) fail(path_, std::string("expected an object, got ") + j.type_name());
    }

    bool has(const std::string& key) {
        used_.insert(key);
        return j_.contains(key) && !j_.at(key).is_null();
    }

    const json& raw(const std::string& key) { return j_.at(key); }

    const std::string& path() const { return path_; }

    std::string field_path(const std::string& key) const { return join(path_, key); }

    std::uint64_t u64(const std::string& key, std::uint64_t fallback) {
        if (!has(key)) return fallback;
        const json& v = raw(key);
        if (v.is_number_unsigned()) return v.get<std::uint64_t>();
        if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
            return static_cast<std::uint64_t>(v.get<std::int64_t>());
        }
        fail(field_path(key), std::string("expected a nonnegative integer, got ") + v.type_name());
    }

    std::size_t size(const std::string& key, std::size_t fallback) {
        return static_cast<std::size_t>(u64(key, static_cast<std::uint64_t>(fallback)));
    }

    double number(const std::string& key, double fallback) {
        if (!has(key)) return fallback;
        const json& v = raw(key);
        if (v.is_number()) return v.get<double>();
        fail(field_path(key), std::string("expected a number, got ") + v.type_name());
    }

    bool boolean(const std::string& key, bool fallback) {
        if (!has(key)) return fallback;
        const json& v = raw(key);
        if (v.is_boolean()) return v.get<bool>();
        fail(field_path(key), std::string("expected a boolean, got ") + v.type_name());
    }

    std::string string(const std::string& key, const std::string& fallback) {
        if (!has(key)) return fallback;
        const json& v = raw(key);
        if (v.is_string()) return v.get<std::string>();
        fail(field_path(key), std::string("expected a string, got ") + v.type_name());
    }

    ObjectReader object(const std::string& key) {
        return ObjectReader(raw(key), field_path(key));
    }

    /// Call last: rejects keys no accessor asked about (typo guard).
    void finish() const {
        for (const auto& item : j_.items()) {
            if (!used_.count(item.key())) fail(join(path_, item.key()), "unknown field");
        }
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

GeneratorSpec parse_generator(ObjectReader r) {
    GeneratorSpec g;
    g.classes = r.size("classes", g.classes);
    g.dim = r.size("dim", g.dim);
    g.per_class = r.size("per_class", g.per_class);
    g.spread = r.number("spread", g.spread);
    if (r.has("seed")) g.seed = r.u64("seed", 0);
    r.finish();
    return g;
}

CsvSpec parse_csv(ObjectReader r) {
    CsvSpec c;
    c.path = r.string("path", "");
    if (c.path.empty()) fail(r.field_path("path"), "required (path to a CSV file)");
    if (r.has("label_column")) {
        c.label_column = r.size("label_column", 0);
        c.label_column_set = true;
    }
    c.has_header = r.boolean("has_header", false);
    r.finish();
    return c;
}

RelatedKind related_kind_from_string(const std::string& s, const std::string& path) {
    if (s == "label_permutation") return RelatedKind::LabelPermutation;
    if (s == "fixed_rotation") return RelatedKind::FixedRotation;
    if (s == "class_subset") return RelatedKind::ClassSubset;
    fail(path, "expected one of \"label_permutation\", \"fixed_rotation\", \"class_subset\"; got \"" +
                   s + "\"");
}

std::string related_kind_to_string(RelatedKind kind) {
    switch (kind) {
        case RelatedKind::LabelPermutation: return "label_permutation";
        case RelatedKind::FixedRotation: return "fixed_rotation";
        case RelatedKind::ClassSubset: return "class_subset";
    }
    return "?";
}

DeriveSpec parse_derive(ObjectReader r) {
    DeriveSpec d;
    d.kind = related_kind_from_string(r.string("kind", "fixed_rotation"), r.field_path("kind"));
    if (r.has("seed")) d.seed = r.u64("seed", 0);
    d.subset_classes = r.size("subset_classes", 0);
    r.finish();
    return d;
}

TaskConfig parse_task(ObjectReader r, const std::string& default_id, bool is_destination) {
    TaskConfig t;
    t.id = r.string("id", default_id);
    if (r.has("generator")) t.generator = parse_generator(r.object("generator"));
    if (r.has("csv")) t.csv = parse_csv(r.object("csv"));
    if (r.has("derive")) {
        if (!is_destination) fail(r.field_path("derive"), "only the destination task can be derived");
        t.derive = parse_derive(r.object("derive"));
    }
    if (r.has("same")) {
        if (!is_destination) fail(r.field_path("same"), "only valid on the destination task");
        t.same_as_source = r.boolean("same", false);
    }
    r.finish();

    const int kinds = int(t.generator.has_value()) + int(t.csv.has_value()) +
                      int(t.derive.has_value()) + int(t.same_as_source);
    if (kinds > 1) fail(r.path(), "give exactly one of generator, csv, derive, same");
    if (kinds == 0) {
        // Defaults: blobs for the source task, rotated-source destination.
        if (is_destination) t.derive = DeriveSpec{};
        else t.generator = GeneratorSpec{};
    }
    return t;
}

json generator_to_json(const GeneratorSpec& g) {
    json j;
    j["classes"] = g.classes;
    j["dim"] = g.dim;
    j["per_class"] = g.per_class;
    j["spread"] = g.spread;
    j["seed"] = g.seed.has_value() ? json(*g.seed) : json(nullptr);
    return j;
}

json csv_to_json(const CsvSpec& c) {
    json j;
    j["path"] = c.path;
    j["label_column"] = c.label_column_set ? json(c.label_column) : json(nullptr);
    j["has_header"] = c.has_header;
    return j;
}

json derive_to_json(const DeriveSpec& d) {
    json j;
    j["kind"] = related_kind_to_string(d.kind);
    j["seed"] = d.seed.has_value() ? json(*d.seed) : json(nullptr);
    j["subset_classes"] = d.subset_classes;
    return j;
}

json task_to_json(const TaskConfig& t) {
    json j;
    j["id"] = t.id;
    if (t.generator) j["generator"] = generator_to_json(*t.generator);
    if (t.csv) j["csv"] = csv_to_json(*t.csv);
    if (t.derive) j["derive"] = derive_to_json(*t.derive);
    if (t.same_as_source) j["same"] = true;
    return j;
}

void validate_generator(const GeneratorSpec& g, const std::string& path) {
    if (g.classes < 2) fail(path + ".classes", "need at least 2 classes");
    if (g.dim < 1) fail(path + ".dim", "need at least 1 feature dimension");
    if (g.per_class < 1) fail(path + ".per_class", "need at least 1 sample per class");
    if (!(g.spread >= 0.0)) fail(path + ".spread", "must be a nonnegative number");
}

// Seed streams for task materialization; the experiment protocol owns
// streams 0 and 1000+ (see transfer.cpp).
constexpr std::uint64_t kStreamSourceData = 10;
constexpr std::uint64_t kStreamDestinationData = 11;
constexpr std::uint64_t kStreamSourceSplit = 12;
constexpr std::uint64_t kStreamDestinationSplit = 13;

std::size_t csv_column_count(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open CSV file \"" + path + "\"");
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("config: CSV file \"" + path + "\" is empty");
    std::size_t cols = 1;
    for (char ch : line) cols += ch == ',';
    return cols;
}

Dataset load_task_csv(const CsvSpec& c) {
    std::size_t label = c.label_column;
    if (!c.label_column_set) {
        const std::size_t cols = csv_column_count(c.path);
        if (cols < 2) {
            throw ConfigError("config: CSV file \"" + c.path +
                              "\" needs at least one feature column plus the label column");
        }
        label = cols - 1;
    }
    return load_csv(c.path, label, c.has_header);
}

}  // namespace

void ExperimentConfig::validate() const {
    const auto& a = architecture;
    if (a.num_layers < 1) fail("architecture.layers", "need at least 1 layer");
    if (a.modules_per_layer < 1) fail("architecture.modules_per_layer", "need at least 1 module");
    if (a.neurons_per_module < 1) fail("architecture.neurons_per_module", "need at least 1 neuron");
    if (a.max_path_width < 1 || a.max_path_width > a.modules_per_layer) {
        fail("architecture.max_path_width",
             "must be in [1, modules_per_layer=" + std::to_string(a.modules_per_layer) + "]");
    }

    try {
        evolution.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: evolution: ") + e.what());
    }

    if (!(tasks.eval_fraction > 0.0 && tasks.eval_fraction < 1.0)) {
        fail("tasks.eval_fraction", "must lie strictly between 0 and 1");
    }
    if (tasks.source.generator) validate_generator(*tasks.source.generator, "tasks.source.generator");
    if (tasks.destination.generator) {
        validate_generator(*tasks.destination.generator, "tasks.destination.generator");
    }
    if (tasks.source.derive || tasks.source.same_as_source) {
        fail("tasks.source", "must be a generator or csv task");
    }
    if (tasks.destination.derive) {
        const auto sc = tasks.destination.derive->subset_classes;
        if (sc == 1) fail("tasks.destination.derive.subset_classes", "a subset needs at least 2 classes");
    }

    if (plan.iterations < 1) fail("plan.iterations", "need at least 1 iteration");
    if (source_budget() < 1) fail("plan.source_budget", "need at least 1 generation");
    if (destination_budget() < 1) fail("plan.destination_budget", "need at least 1 generation");
}

std::size_t ExperimentConfig::source_budget() const {
    return plan.source_budget.value_or(evolution.generations);
}

std::size_t ExperimentConfig::destination_budget() const {
    return plan.destination_budget.value_or(evolution.generations);
}

TransferPlan ExperimentConfig::to_plan() const {
    const std::string dest_id =
        tasks.destination.same_as_source ? tasks.source.id : tasks.destination.id;
    return make_transfer_plan(tasks.source.id, dest_id, source_budget(), destination_budget(),
                              plan.iterations, plan.scratch_baseline, plan.consolidate_destination);
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    ExperimentConfig cfg;
    ObjectReader root(j, "");

    cfg.seed = root.u64("seed", 0);

    if (root.has("architecture")) {
        ObjectReader r = root.object("architecture");
        cfg.architecture.num_layers = r.size("layers", cfg.architecture.num_layers);
        cfg.architecture.modules_per_layer =
            r.size("modules_per_layer", cfg.architecture.modules_per_layer);
        cfg.architecture.neurons_per_module =
            r.size("neurons_per_module", cfg.architecture.neurons_per_module);
        cfg.architecture.max_path_width = r.size("max_path_width", cfg.architecture.max_path_width);
        cfg.architecture.input_dim = r.size("input_dim", 0);  // 0: infer from the task
        r.finish();
    }

    if (root.has("evolution")) {
        ObjectReader r = root.object("evolution");
        auto& e = cfg.evolution;
        e.population_size = r.size("population_size", e.population_size);
        e.generations = r.size("generations", e.generations);
        e.epochs_per_eval = r.size("epochs_per_eval", e.epochs_per_eval);
        e.minibatches_per_epoch = r.size("minibatches_per_epoch", e.minibatches_per_epoch);
        e.batch_size = r.size("batch_size", e.batch_size);
        e.learning_rate = r.number("learning_rate", e.learning_rate);
        e.infection_rate = r.number("infection_rate", e.infection_rate);
        if (r.has("mutation_rate")) e.mutation_rate = r.number("mutation_rate", 0.0);
        r.finish();
    }

    if (root.has("tasks")) {
        ObjectReader r = root.object("tasks");
        if (r.has("source")) cfg.tasks.source = parse_task(r.object("source"), "source", false);
        if (r.has("destination")) {
            cfg.tasks.destination = parse_task(r.object("destination"), "destination", true);
        }
        cfg.tasks.eval_fraction = r.number("eval_fraction", cfg.tasks.eval_fraction);
        if (r.has("split_seed")) cfg.tasks.split_seed = r.u64("split_seed", 0);
        r.finish();
    }

    if (root.has("plan")) {
        ObjectReader r = root.object("plan");
        auto& p = cfg.plan;
        p.iterations = r.size("iterations", p.iterations);
        if (r.has("source_budget")) p.source_budget = r.size("source_budget", 0);
        if (r.has("destination_budget")) p.destination_budget = r.size("destination_budget", 0);
        p.scratch_baseline = r.boolean("scratch_baseline", p.scratch_baseline);
        p.consolidate_destination = r.boolean("consolidate_destination", p.consolidate_destination);
        r.finish();
    }

    root.finish();
    cfg.validate();
    return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const std::exception& e) {
        throw ConfigError("config: cannot read \"" + path + "\": " + e.what());
    }
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("config: \"" + path + "\" is not valid JSON: " + e.what());
    }
    return from_json(j);
}

json ExperimentConfig::to_json() const {
    json j;
    j["seed"] = seed;
    j["architecture"] = {{"layers", architecture.num_layers},
                         {"modules_per_layer", architecture.modules_per_layer},
                         {"neurons_per_module", architecture.neurons_per_module},
                         {"max_path_width", architecture.max_path_width},
                         {"input_dim", architecture.input_dim}};
    j["evolution"] = {{"population_size", evolution.population_size},
                      {"generations", evolution.generations},
                      {"epochs_per_eval", evolution.epochs_per_eval},
                      {"minibatches_per_epoch", evolution.minibatches_per_epoch},
                      {"batch_size", evolution.batch_size},
                      {"learning_rate", evolution.learning_rate},
                      {"infection_rate", evolution.infection_rate},
                      {"mutation_rate", evolution.mutation_rate.has_value()
                                            ? json(*evolution.mutation_rate)
                                            : json(nullptr)}};
    j["tasks"] = {{"source", task_to_json(tasks.source)},
                  {"destination", task_to_json(tasks.destination)},
                  {"eval_fraction", tasks.eval_fraction},
                  {"split_seed",
                   tasks.split_seed.has_value() ? json(*tasks.split_seed) : json(nullptr)}};
    j["plan"] = {{"iterations", plan.iterations},
                 {"source_budget", source_budget()},
                 {"destination_budget", destination_budget()},
                 {"scratch_baseline", plan.scratch_baseline},
                 {"consolidate_destination", plan.consolidate_destination}};
    return j;
}

std::pair<TaskSpec, TaskSpec> materialize_tasks(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto& tc = cfg.tasks;

    Dataset source_full;
    std::string source_prov;
    if (tc.source.generator) {
        const auto& g = *tc.source.generator;
        source_full = make_blobs(g.classes, g.dim, g.per_class, g.spread,
                                 g.seed.value_or(derive_seed(cfg.seed, kStreamSourceData)));
        source_prov = "generated: " + source_full.name;
    } else {
        source_full = load_task_csv(*tc.source.csv);
        source_prov = "loaded: " + tc.source.csv->path;
    }

    Dataset dest_full;
    std::string dest_prov;
    std::string dest_id = tc.destination.id;
    if (tc.destination.same_as_source) {
        dest_full = source_full;
        dest_prov = "same task as \"" + tc.source.id + "\"";
        dest_id = tc.source.id;
    } else if (tc.destination.derive) {
        const auto& d = *tc.destination.derive;
        dest_full = derive_related_task(source_full, d.kind,
                                        d.seed.value_or(derive_seed(cfg.seed, kStreamDestinationData)),
                                        d.subset_classes);
        dest_prov = related_kind_to_string(d.kind) + " of \"" + tc.source.id + "\"";
    } else if (tc.destination.generator) {
        const auto& g = *tc.destination.generator;
        dest_full = make_blobs(g.classes, g.dim, g.per_class, g.spread,
                               g.seed.value_or(derive_seed(cfg.seed, kStreamDestinationData)));
        dest_prov = "generated: " + dest_full.name;
    } else {
        dest_full = load_task_csv(*tc.destination.csv);
        dest_prov = "loaded: " + tc.destination.csv->path;
    }

    if (dest_full.dim() != source_full.dim()) {
        throw ConfigError("config: tasks: feature dimensions differ (source " +
                          std::to_string(source_full.dim()) + ", destination " +
                          std::to_string(dest_full.dim()) + "); one network serves both tasks");
    }

    const std::uint64_t src_split =
        tc.split_seed.value_or(derive_seed(cfg.seed, kStreamSourceSplit));
    const std::uint64_t dst_split = tc.split_seed.has_value()
                                        ? *tc.split_seed + 1
                                        : derive_seed(cfg.seed, kStreamDestinationSplit);

    TaskSpec source = make_task(tc.source.id, source_full, tc.eval_fraction, src_split, source_prov);
    TaskSpec destination;
    if (tc.destination.same_as_source) {
        destination = source;
    } else {
        destination = make_task(dest_id, dest_full, tc.eval_fraction, dst_split, dest_prov);
    }
    return {std::move(source), std::move(destination)};
}

Architecture resolve_architecture(const ExperimentConfig& cfg, const TaskSpec& source) {
    Architecture arch = cfg.architecture;
    if (arch.input_dim == 0) {
        arch.input_dim = source.train.dim();
    } else if (arch.input_dim != source.train.dim()) {
        throw ConfigError("config: architecture.input_dim: " + std::to_string(arch.input_dim) +
                          " does not match the task feature dimension " +
                          std::to_string(source.train.dim()));
    }
    arch.validate();
    return arch;
}

}  // namespace pathnet
