#include "padnet/model.hpp"

#include "padnet/ops.hpp"

namespace padnet {

ParameterSet build_padnet(const NetworkConfig& config, std::uint64_t seed) {
    config.validate();
    ParameterSet params = build_frontend(config, seed);
    params.merge(build_heads(config, seed));
    params.merge(build_distillation(config, seed));
    params.merge(build_decoders(config, seed));
    return params;
}

bool is_phase1_parameter(std::string_view name) {
    return name.starts_with("encoder.") || name.starts_with("aggregate.") || name.starts_with("heads.parsing.");
}

void set_depth_prior(ParameterSet& params, double depth) {
    for (const char* name : {"heads.depth.score.bias", "decoders.depth.score.bias"}) {
        if (params.contains(name)) params.at(name).fill(depth);
    }
}

PadNetOutputs padnet_forward(const Binding& params, const NetworkConfig& config, Var image, ForwardScope scope) {
    const std::size_t h = image.shape().h, w = image.shape().w;
    const std::vector<Var> stages = encoder_stages(params, config, image);
    const AggregatedFeatures agg = aggregate_scales(params, stages);

    PadNetOutputs out;
    if (scope == ForwardScope::phase1) {
        const Task parsing[] = {Task::parsing};
        out.intermediate = heads_forward(params, config, agg, parsing, h / 4, w / 4);
        return out;
    }
    if (config.deep_supervision) {
        const std::vector<Task> tasks = head_tasks(config);
        out.intermediate = heads_forward(params, config, agg, tasks, h / 4, w / 4);
    }

    if (config.distill_variant == DistillVariant::none) {
        // Decoders read the front-end features, brought to 1/4 resolution.
        Var base = bilinear_resize(agg.tensor, h / 4, w / 4);
        for (Task k : config.final_tasks) slot(out.final, k) = decode(params, config, base, k);
        return out;
    }
    const DistillationFeatures feats = predictions_to_features(params, config, out.intermediate);
    const FusedFeatures fused = distill(feats, params, config);
    for (Task k : config.final_tasks) slot(out.final, k) = decode(params, config, fused[k], k);
    return out;
}

}  // namespace padnet
