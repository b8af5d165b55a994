#include "padnet/variants.hpp"

#include <map>

namespace padnet {
namespace {

constexpr Task D = Task::depth;
constexpr Task P = Task::parsing;
constexpr Task N = Task::normal;
constexpr Task C = Task::contour;

const std::vector<Task> kFour{D, P, N, C};

ExperimentVariant baseline(std::string name, std::vector<Task> finals) {
    return {std::move(name), DistillVariant::none, std::move(finals), {}, false, true, ""};
}

ExperimentVariant distilled(std::string name, DistillVariant v, std::vector<Task> finals,
                            std::vector<Task> inputs = kFour) {
    return {std::move(name), v, std::move(finals), std::move(inputs), true, true, ""};
}

std::vector<ExperimentVariant> build_registry() {
    std::vector<ExperimentVariant> r;
    r.push_back(baseline("Front-end + DE", {D}));
    r.push_back(baseline("Front-end + SP", {P}));
    r.push_back(baseline("Front-end + DE + SP", {D, P}));
    r.push_back(distilled("PAD-Net (Distillation A + DE)", DistillVariant::A, {D}));
    r.push_back(distilled("PAD-Net (Distillation B + DE)", DistillVariant::B, {D}));
    r.push_back(distilled("PAD-Net (Distillation C + DE)", DistillVariant::C, {D}));
    r.push_back(distilled("PAD-Net (Distillation A + SP)", DistillVariant::A, {P}));
    r.push_back(distilled("PAD-Net (Distillation B + SP)", DistillVariant::B, {P}));
    r.push_back(distilled("PAD-Net (Distillation C + SP)", DistillVariant::C, {P}));
    r.push_back(distilled("PAD-Net (Distillation C + DE + SP)", DistillVariant::C, {D, P}));

    // Deep supervision on all four heads, decoders on front-end features.
    ExperimentVariant inp0{"MTDN-inp0", DistillVariant::none, {D, P}, {}, true, true, ""};
    r.push_back(inp0);
    r.push_back(distilled("MTDN-inp2", DistillVariant::C, {D, P}, {D, P}));
    r.push_back(distilled("MTDN-inp3", DistillVariant::C, {D, P}, {D, P, N}));
    r.push_back(distilled("MTDN-full", DistillVariant::C, {D, P}));
    ExperimentVariant mds = distilled("MTDN-mds", DistillVariant::C, {D, P});
    mds.distill_messages = false;
    mds.note = "interpretation: distillation parameters kept, cross-task messages disabled";
    r.push_back(mds);
    return r;
}

// Other spellings used for the same rows.
const std::map<std::string, std::string, std::less<>>& aliases() {
    static const std::map<std::string, std::string, std::less<>> a{
        {"Front-end + SP + DE", "Front-end + DE + SP"},
        {"MTDN-full (4 inputs)", "MTDN-full"},
    };
    return a;
}

const std::map<std::string, std::vector<std::string>, std::less<>>& grids() {
    static const std::map<std::string, std::vector<std::string>, std::less<>> g{
        {"baselines", {"Front-end + DE", "Front-end + SP", "Front-end + DE + SP"}},
        {"distill-modules",
         {"Front-end + DE", "Front-end + DE + SP", "PAD-Net (Distillation A + DE)", "PAD-Net (Distillation B + DE)",
          "PAD-Net (Distillation C + DE)", "PAD-Net (Distillation C + DE + SP)"}},
        {"parsing-modules",
         {"Front-end + SP", "Front-end + SP + DE", "PAD-Net (Distillation A + SP)", "PAD-Net (Distillation B + SP)",
          "PAD-Net (Distillation C + SP)", "PAD-Net (Distillation C + DE + SP)"}},
        {"input-count", {"MTDN-inp0", "MTDN-inp2", "MTDN-inp3", "MTDN-full"}},
        {"supervision", {"Front-end + DE + SP", "MTDN-inp0", "MTDN-mds", "MTDN-full"}},
        {"trend", {"Front-end + DE", "Front-end + SP", "PAD-Net (Distillation C + DE + SP)"}},
    };
    return g;
}

}  // namespace

const std::vector<ExperimentVariant>& variant_registry() {
    static const std::vector<ExperimentVariant> r = build_registry();
    return r;
}

const ExperimentVariant& find_variant(std::string_view name) {
    std::string_view key = name;
    if (auto it = aliases().find(name); it != aliases().end()) key = it->second;
    for (const ExperimentVariant& v : variant_registry()) {
        if (v.name == key) return v;
    }
    throw ConfigError("unknown variant '" + std::string(name) + "'");
}

const std::vector<std::string>& grid_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& [name, rows] : grids()) out.push_back(name);
        return out;
    }();
    return names;
}

std::vector<std::string> grid_rows(std::string_view grid) {
    auto it = grids().find(grid);
    if (it == grids().end()) {
        std::string known;
        for (const std::string& n : grid_names()) known += (known.empty() ? "" : ", ") + n;
        throw ConfigError("unknown grid '" + std::string(grid) + "' (known: " + known + ")");
    }
    return it->second;
}

NetworkConfig apply_variant(NetworkConfig base, const ExperimentVariant& v) {
    base.distill_variant = v.uses_distillation;
    base.final_tasks = v.final_tasks;
    base.active_inputs = v.active_inputs;
    base.deep_supervision = v.deep_supervision;
    base.distill_messages = v.distill_messages;
    return base;
}

}  // namespace padnet
