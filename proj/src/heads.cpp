#include "padnet/heads.hpp"

#include <string>

#include "padnet/ops.hpp"

namespace padnet {
namespace {

std::string head_prefix(Task t) { return "heads." + std::string(task_name(t)); }
std::string transform_prefix(Task t) { return "transform." + std::string(task_name(t)); }

constexpr ConvSpec kHeadUpsample{2, 1, 1};  // 4x4 kernel: exact 2x
constexpr ConvSpec kSame3x3{1, 1, 1};

}  // namespace

Var IntermediatePredictions::operator[](Task t) const {
    const auto& s = slot(scores, t);
    if (!s) throw ConfigError("no intermediate prediction for task '" + std::string(task_name(t)) + "'");
    return *s;
}

const Var* DistillationFeatures::find(Task t) const {
    for (std::size_t i = 0; i < tasks.size(); ++i)
        if (tasks[i] == t) return &maps[i];
    return nullptr;
}

std::vector<Task> head_tasks(const NetworkConfig& config) {
    if (config.deep_supervision) return {kAllTasks.begin(), kAllTasks.end()};
    return {Task::parsing};
}

ParameterSet build_heads(const NetworkConfig& config, std::uint64_t seed) {
    config.validate();
    Rng rng = make_rng(seed, 2);
    ParameterSet params;
    const std::size_t in = config.aggregated_channels();
    for (Task t : head_tasks(config)) {
        const std::size_t width = config.head_feature_channels(t);
        add_deconv(params, head_prefix(t) + ".up", in, width, 4, 2, rng);
        // Score layers start at zero so a task's loss cannot swamp the shared
        // features before it has learned anything. Normals stay random: their
        // loss normalizes the prediction and is singular at zero.
        add_conv(params, head_prefix(t) + ".score", width, config.score_channels(t), 3, rng, t != Task::normal);
    }
    if (config.distill_variant != DistillVariant::none) {
        for (Task t : config.active_inputs) {
            add_conv(params, transform_prefix(t), config.score_channels(t), config.distill_channels, 3, rng);
        }
    }
    return params;
}

IntermediatePredictions heads_forward(const Binding& params, const NetworkConfig& config,
                                      const AggregatedFeatures& features, std::span<const Task> tasks,
                                      std::size_t out_h, std::size_t out_w) {
    IntermediatePredictions preds;
    for (Task t : tasks) {
        const std::string p = head_prefix(t);
        Var f = activate(conv_transpose2d(features.tensor, params(p + ".up.weight"), params(p + ".up.bias"),
                                          kHeadUpsample),
                         config.activation);
        Var s = conv2d(f, params(p + ".score.weight"), params(p + ".score.bias"), kSame3x3);
        slot(preds.features, t) = f;
        slot(preds.scores, t) = bilinear_resize(s, out_h, out_w);
    }
    return preds;
}

DistillationFeatures predictions_to_features(const Binding& params, const NetworkConfig& config,
                                             const IntermediatePredictions& preds) {
    if (config.active_inputs.empty() && config.distill_variant != DistillVariant::none) {
        throw SchemaError("architecture.active_inputs", "distillation needs at least one intermediate input");
    }
    DistillationFeatures out;
    for (Task t : kAllTasks) {
        if (!config.has_active_input(t)) continue;
        const std::string p = transform_prefix(t);
        out.tasks.push_back(t);
        out.maps.push_back(activate(conv2d(preds[t], params(p + ".weight"), params(p + ".bias"), kSame3x3),
                                    config.activation));
    }
    return out;
}

}  // namespace padnet
