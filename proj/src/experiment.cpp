#include "padnet/experiment.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

#include "padnet/checkpoint.hpp"
#include "padnet/dataset_io.hpp"

namespace padnet {
namespace {

using nlohmann::json;

// Walks one JSON object, insisting every requested key exists with the right
// type and that no unrequested key is left over.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw SchemaError(path_, "expected an object");
    }

    [[nodiscard]] std::string path(std::string_view key) const {
        return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
    }

    const json& get(std::string_view key) {
        seen_.insert(std::string(key));
        auto it = j_.find(std::string(key));
        if (it == j_.end()) throw SchemaError(path(key), "missing required field");
        return *it;
    }

    bool has(std::string_view key) const { return j_.contains(std::string(key)); }

    Section section(std::string_view key) { return Section(get(key), path(key)); }

    std::size_t count(std::string_view key) {
        const json& v = get(key);
        if (!v.is_number_unsigned()) throw SchemaError(path(key), "expected a non-negative integer");
        return v.get<std::size_t>();
    }

    double number(std::string_view key) {
        const json& v = get(key);
        if (!v.is_number()) throw SchemaError(path(key), "expected a number");
        return v.get<double>();
    }

    bool flag(std::string_view key) {
        const json& v = get(key);
        if (!v.is_boolean()) throw SchemaError(path(key), "expected true or false");
        return v.get<bool>();
    }

    std::string text(std::string_view key) {
        const json& v = get(key);
        if (!v.is_string()) throw SchemaError(path(key), "expected a string");
        return v.get<std::string>();
    }

    std::vector<std::size_t> counts(std::string_view key) {
        const json& v = get(key);
        if (!v.is_array()) throw SchemaError(path(key), "expected an array");
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number_unsigned()) {
                throw SchemaError(path(key) + "[" + std::to_string(i) + "]", "expected a non-negative integer");
            }
            out.push_back(v[i].get<std::size_t>());
        }
        return out;
    }

    std::vector<Task> tasks(std::string_view key) {
        const json& v = get(key);
        if (!v.is_array()) throw SchemaError(path(key), "expected an array");
        std::vector<Task> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            const std::string where = path(key) + "[" + std::to_string(i) + "]";
            if (!v[i].is_string()) throw SchemaError(where, "expected a task name");
            auto t = parse_task(v[i].get<std::string>());
            if (!t) throw SchemaError(where, "unknown task '" + v[i].get<std::string>() + "'");
            out.push_back(*t);
        }
        return out;
    }

    void finish() const {
        for (const auto& [key, value] : j_.items()) {
            if (!seen_.contains(key)) throw SchemaError(path(key), "unknown field");
        }
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

json parse_text(std::string_view text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw SchemaError("<document>", std::string("invalid JSON: ") + e.what());
    }
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Re-roots a scene validation error under the section it was read from.
void validate_scene_at(const SceneConfig& scene, const std::string& prefix) {
    try {
        scene.validate();
    } catch (const SchemaError& e) {
        const std::string msg = e.what();
        const std::string detail = msg.substr(std::min(msg.size(), e.path().size() + 2));
        const std::string field = e.path().substr(std::string_view("scene.").size());
        throw SchemaError(prefix + field, detail);
    }
}

SceneConfig read_scene(Section s) {
    SceneConfig c;
    c.height = s.count("height");
    c.width = s.count("width");
    c.min_objects = s.count("min_objects");
    c.max_objects = s.count("max_objects");
    c.num_classes = s.count("num_classes");
    c.near_depth = s.number("near_depth");
    c.far_depth = s.number("far_depth");
    c.camera_constant = s.number("camera_constant");
    c.dropout = s.number("dropout");
    c.noise = s.number("noise");
    s.finish();
    return c;
}

json scene_json(const SceneConfig& c) {
    return json{{"height", c.height},
                {"width", c.width},
                {"min_objects", c.min_objects},
                {"max_objects", c.max_objects},
                {"num_classes", c.num_classes},
                {"near_depth", c.near_depth},
                {"far_depth", c.far_depth},
                {"camera_constant", c.camera_constant},
                {"dropout", c.dropout},
                {"noise", c.noise}};
}

NetworkConfig read_architecture(Section s) {
    NetworkConfig a;
    a.num_classes = s.count("num_classes");
    a.encoder_stage_channels = s.counts("encoder_stage_channels");
    a.dilation_rates = s.counts("dilation_rates");
    a.head_channels = s.count("head_channels");
    a.distill_channels = s.count("distill_channels");
    const std::string variant = s.text("distill_variant");
    auto v = parse_variant(variant);
    if (!v) throw SchemaError(s.path("distill_variant"), "expected one of none, A, B, C");
    a.distill_variant = *v;
    a.active_inputs = s.tasks("active_inputs");
    a.final_tasks = s.tasks("final_tasks");
    a.deep_supervision = s.flag("deep_supervision");
    a.distill_messages = s.flag("distill_messages");
    const std::string act = s.text("activation");
    if (act == "elu") {
        a.activation = Activation::elu;
    } else if (act == "relu") {
        a.activation = Activation::relu;
    } else {
        throw SchemaError(s.path("activation"), "expected elu or relu");
    }
    s.finish();
    return a;
}

json tasks_json(const std::vector<Task>& tasks) {
    json out = json::array();
    for (Task t : tasks) out.push_back(std::string(task_name(t)));
    return out;
}

json architecture_json(const NetworkConfig& a) {
    return json{{"num_classes", a.num_classes},
                {"encoder_stage_channels", a.encoder_stage_channels},
                {"dilation_rates", a.dilation_rates},
                {"head_channels", a.head_channels},
                {"distill_channels", a.distill_channels},
                {"distill_variant", std::string(variant_name(a.distill_variant))},
                {"active_inputs", tasks_json(a.active_inputs)},
                {"final_tasks", tasks_json(a.final_tasks)},
                {"deep_supervision", a.deep_supervision},
                {"distill_messages", a.distill_messages},
                {"activation", a.activation == Activation::elu ? "elu" : "relu"}};
}

PhaseSchedule read_phase(Section s) {
    PhaseSchedule p;
    p.epochs = s.count("epochs");
    p.learning_rate = s.number("learning_rate");
    if (!(p.learning_rate > 0.0)) throw SchemaError(s.path("learning_rate"), "must be positive");
    s.finish();
    return p;
}

TrainingConfig read_training(Section s) {
    TrainingConfig t;
    {
        Section w = s.section("loss_weights");
        for (std::size_t i = 0; i < kNumLossTerms; ++i) {
            const std::string_view name = loss_term_name(static_cast<LossTerm>(i));
            t.loss_weights[i] = w.number(name);
            if (!(t.loss_weights[i] >= 0.0)) throw SchemaError(w.path(name), "must be non-negative");
        }
        w.finish();
    }
    t.phase1 = read_phase(s.section("phase1"));
    t.phase2 = read_phase(s.section("phase2"));
    t.momentum = s.number("momentum");
    if (!(t.momentum >= 0.0 && t.momentum < 1.0)) throw SchemaError(s.path("momentum"), "must be in [0, 1)");
    t.weight_decay = s.number("weight_decay");
    if (!(t.weight_decay >= 0.0)) throw SchemaError(s.path("weight_decay"), "must be non-negative");
    t.batch_size = s.count("batch_size");
    if (t.batch_size == 0) throw SchemaError(s.path("batch_size"), "must be positive");
    t.augment = s.flag("augment");
    {
        const json& r = s.get("augment_ratios");
        const std::string where = s.path("augment_ratios");
        if (!r.is_array() || r.empty()) throw SchemaError(where, "expected a non-empty array of numbers");
        t.augment_ratios.clear();
        for (const json& v : r) {
            if (!v.is_number() || !(v.get<double>() > 0.0)) throw SchemaError(where, "ratios must be positive");
            t.augment_ratios.push_back(v.get<double>());
        }
    }
    s.finish();
    return t;
}

json training_json(const TrainingConfig& t) {
    json w = json::object();
    for (std::size_t i = 0; i < kNumLossTerms; ++i) {
        w[std::string(loss_term_name(static_cast<LossTerm>(i)))] = t.loss_weights[i];
    }
    auto phase = [](const PhaseSchedule& p) { return json{{"epochs", p.epochs}, {"learning_rate", p.learning_rate}}; };
    return json{{"loss_weights", w},
                {"phase1", phase(t.phase1)},
                {"phase2", phase(t.phase2)},
                {"momentum", t.momentum},
                {"weight_decay", t.weight_decay},
                {"batch_size", t.batch_size},
                {"augment", t.augment},
                {"augment_ratios", t.augment_ratios}};
}

DataConfig read_data(Section s) {
    DataConfig d;
    d.scene = read_scene(s.section("scene"));
    d.train_count = s.count("train_count");
    d.train_seed = s.count("train_seed");
    d.val_count = s.count("val_count");
    d.val_seed = s.count("val_seed");
    // The two file overrides are the only optional fields.
    if (s.has("train_file")) d.train_file = s.text("train_file");
    if (s.has("val_file")) d.val_file = s.text("val_file");
    s.finish();
    return d;
}

json data_json(const DataConfig& d) {
    json out{{"scene", scene_json(d.scene)},
             {"train_count", d.train_count},
             {"train_seed", d.train_seed},
             {"val_count", d.val_count},
             {"val_seed", d.val_seed}};
    if (d.train_file) out["train_file"] = d.train_file->string();
    if (d.val_file) out["val_file"] = d.val_file->string();
    return out;
}

}  // namespace

void ExperimentConfig::validate() const {
    architecture.validate();
    validate_scene_at(data.scene, "data.scene.");
    if (data.scene.num_classes != architecture.num_classes) {
        throw SchemaError("data.scene.num_classes", "must equal architecture.num_classes");
    }
    if (data.train_count == 0 && !data.train_file) {
        throw SchemaError("data.train_count", "must be positive");
    }
}

ExperimentConfig parse_experiment(std::string_view json_text) {
    const json j = parse_text(json_text);
    Section root(j, "");
    ExperimentConfig cfg;
    cfg.architecture = read_architecture(root.section("architecture"));
    cfg.training = read_training(root.section("training"));
    cfg.data = read_data(root.section("data"));
    root.finish();
    cfg.training.camera_constant = cfg.data.scene.camera_constant;
    cfg.validate();
    return cfg;
}

ExperimentConfig load_experiment(const std::filesystem::path& path) { return parse_experiment(read_text(path)); }

SceneConfig parse_scene(std::string_view json_text) {
    const json j = parse_text(json_text);
    SceneConfig scene = read_scene(Section(j, ""));
    validate_scene_at(scene, "");
    return scene;
}

SceneConfig load_scene(const std::filesystem::path& path) { return parse_scene(read_text(path)); }

std::string experiment_to_json(const ExperimentConfig& cfg) {
    const json j{{"architecture", architecture_json(cfg.architecture)},
                 {"training", training_json(cfg.training)},
                 {"data", data_json(cfg.data)}};
    return j.dump(2) + "\n";
}

std::string scene_to_json(const SceneConfig& cfg) { return scene_json(cfg).dump(2) + "\n"; }

std::string canonical_architecture(const NetworkConfig& arch) {
    // nlohmann objects keep keys sorted, so dump() without indent is canonical.
    return architecture_json(arch).dump();
}

std::uint64_t architecture_digest(const NetworkConfig& arch) { return sha256_u64(canonical_architecture(arch)); }

ExperimentConfig desk_experiment() {
    ExperimentConfig cfg;
    cfg.training.phase1 = {25, 3e-3};
    cfg.training.phase2 = {125, 5e-4};
    cfg.training.augment = false;
    return cfg;
}

ExperimentConfig paper_schedule_experiment() {
    ExperimentConfig cfg = desk_experiment();
    cfg.training.phase1.learning_rate = 1e-3;
    cfg.training.phase2.learning_rate = 1e-5;
    return cfg;
}

NetworkConfig tiny_architecture() {
    NetworkConfig a;
    a.num_classes = 3;
    a.encoder_stage_channels = {4, 8, 8};
    a.head_channels = 8;
    a.distill_channels = 4;
    return a;
}

std::vector<Sample> generate_dataset(const SceneConfig& scene, std::uint64_t first_seed, std::size_t count) {
    std::vector<Sample> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(generate_scene(first_seed + i, scene));
    return out;
}

std::vector<Sample> training_split(const DataConfig& data) {
    if (data.train_file) return read_dataset(*data.train_file, data.scene.camera_constant);
    return generate_dataset(data.scene, data.train_seed, data.train_count);
}

std::vector<Sample> validation_split(const DataConfig& data) {
    if (data.val_file) return read_dataset(*data.val_file, data.scene.camera_constant);
    return generate_dataset(data.scene, data.val_seed, data.val_count);
}

}  // namespace padnet
