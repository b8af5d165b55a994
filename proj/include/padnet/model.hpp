#pragma once

#include <cstdint>
#include <string_view>

#include "padnet/decoders.hpp"

namespace padnet {

/// Which part of the graph a forward pass evaluates.
enum class ForwardScope {
    full,    // everything the config trains in phase 2
    phase1,  // front-end + intermediate parsing head only
};

struct PadNetOutputs {
    IntermediatePredictions intermediate;
    TaskMap<Var> final;
};

/// All parameters of the configured network.
[[nodiscard]] ParameterSet build_padnet(const NetworkConfig& config, std::uint64_t seed);

/// Parameters trained in phase 1 (front-end and intermediate parsing head).
[[nodiscard]] bool is_phase1_parameter(std::string_view name);

/// Sets the bias of every depth score layer so untrained depth outputs start
/// at `depth` meters instead of zero.
void set_depth_prior(ParameterSet& params, double depth);

/// Forward pass from an RGB batch (N x 3 x H x W, H and W divisible by 8).
[[nodiscard]] PadNetOutputs padnet_forward(const Binding& params, const NetworkConfig& config, Var image,
                                           ForwardScope scope = ForwardScope::full);

}  // namespace padnet
