#pragma once

#include <cstdint>

#include "padnet/distillation.hpp"

namespace padnet {

/// "decoders.<task>.up1|up2|score" for each final task. Each 4x4 stride-2
/// deconv doubles the resolution and halves the channels.
[[nodiscard]] ParameterSet build_decoders(const NetworkConfig& config, std::uint64_t seed);

/// Full-resolution score map for final task k from 1/4-resolution features.
[[nodiscard]] Var decode(const Binding& params, const NetworkConfig& config, Var fused, Task k);

}  // namespace padnet
