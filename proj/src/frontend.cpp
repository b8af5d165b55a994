#include "padnet/frontend.hpp"

#include <string>

#include "padnet/ops.hpp"

namespace padnet {
namespace {

std::string stage_prefix(std::size_t s) { return "encoder.s" + std::to_string(s + 1); }
std::string reduce_prefix(std::size_t s) { return "aggregate.reduce" + std::to_string(s + 1); }

}  // namespace

Var activate(Var x, Activation a) { return a == Activation::relu ? relu(x) : elu(x); }

ParameterSet build_frontend(const NetworkConfig& config, std::uint64_t seed) {
    if (config.encoder_stage_channels.empty()) {
        throw SchemaError("architecture.encoder_stage_channels", "at least one encoder stage is required");
    }
    config.validate();
    Rng rng = make_rng(seed, 1);
    ParameterSet params;
    std::size_t in = 3;
    for (std::size_t s = 0; s < config.encoder_stage_channels.size(); ++s) {
        const std::size_t out = config.encoder_stage_channels[s];
        add_conv(params, stage_prefix(s) + ".down", in, out, 3, rng);
        add_conv(params, stage_prefix(s) + ".conv", out, out, 3, rng);
        in = out;
    }
    for (std::size_t s = 0; s + 1 < config.encoder_stage_channels.size(); ++s) {
        add_conv(params, reduce_prefix(s), config.encoder_stage_channels[s], config.reduced_channels(s), 1, rng);
    }
    return params;
}

std::vector<Var> encoder_stages(const Binding& params, const NetworkConfig& config, Var image) {
    const Shape is = image.shape();
    if (is.c != 3) throw ConfigError("encoder: expected a 3-channel image, got " + is.str());
    if (is.h % 8 != 0 || is.w % 8 != 0 || is.h == 0 || is.w == 0) {
        throw UsageError("encoder: image size " + std::to_string(is.h) + "x" + std::to_string(is.w) +
                         " is not divisible by 8");
    }
    std::vector<Var> maps;
    Var x = image;
    for (std::size_t s = 0; s < config.encoder_stage_channels.size(); ++s) {
        const std::string p = stage_prefix(s);
        x = activate(conv2d(x, params(p + ".down.weight"), params(p + ".down.bias"), ConvSpec{2, 1, 1}),
                     config.activation);
        const std::size_t d = config.dilation_rates.at(s);
        x = activate(conv2d(x, params(p + ".conv.weight"), params(p + ".conv.bias"), ConvSpec{1, d, d}),
                     config.activation);
        maps.push_back(x);
    }
    return maps;
}

AggregatedFeatures aggregate_scales(const Binding& params, std::span<const Var> stage_maps) {
    if (stage_maps.empty()) throw ConfigError("aggregate_scales: no stage maps");
    const Var last = stage_maps.back();
    const std::size_t h = last.shape().h, w = last.shape().w;
    std::vector<Var> parts;
    AggregatedFeatures out;
    for (std::size_t s = 0; s + 1 < stage_maps.size(); ++s) {
        const std::string p = reduce_prefix(s);
        Var reduced = conv2d(stage_maps[s], params(p + ".weight"), params(p + ".bias"), ConvSpec{});
        parts.push_back(bilinear_resize(reduced, h, w));
        out.source_scales.push_back(s + 1);
    }
    parts.push_back(last);
    out.source_scales.push_back(stage_maps.size());
    out.tensor = parts.size() == 1 ? last : concat_channels(parts);
    return out;
}

}  // namespace padnet
