#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "padnet/config.hpp"
#include "padnet/params.hpp"

namespace padnet {

/// Shared deep representation at 1/8 of the input resolution.
struct AggregatedFeatures {
    Var tensor;
    std::vector<std::size_t> source_scales;
};

/// Encoder stages ("encoder.s<i>.down|conv") and shallow-stage reductions
/// ("aggregate.reduce<i>"). Kaiming weights, zero biases.
[[nodiscard]] ParameterSet build_frontend(const NetworkConfig& config, std::uint64_t seed);

/// Stage s (1-based) halves the resolution with a stride-2 conv, then applies
/// a dilated 3x3 conv at that resolution.
[[nodiscard]] std::vector<Var> encoder_stages(const Binding& params, const NetworkConfig& config, Var image);

/// Reduces each shallower map with its 1x1 conv, resizes it to the last
/// stage's resolution and concatenates everything with the last map.
[[nodiscard]] AggregatedFeatures aggregate_scales(const Binding& params, std::span<const Var> stage_maps);

/// Applies the configured nonlinearity.
[[nodiscard]] Var activate(Var x, Activation a);

}  // namespace padnet
