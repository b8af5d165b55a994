#pragma once

#include <cstdint>

#include "padnet/heads.hpp"

namespace padnet {

/// Fused features consumed by the final decoders. Module A produces one
/// shared map; B and C produce one per final task.
struct FusedFeatures {
    TaskMap<Var> per_task;

    [[nodiscard]] Var operator[](Task k) const;
};

/// Module B: "distill.B.msg.<t>_to_<k>" for every ordered pair t != k over
/// active inputs and final tasks k. Module C: "distill.C.att.<k>" per final
/// task and "distill.C.msg.<t>" per source task. Message kernels start at zero.
[[nodiscard]] ParameterSet build_distillation(const NetworkConfig& config, std::uint64_t seed);

/// Channel concatenation of every F^t.
[[nodiscard]] Var distill_A(const DistillationFeatures& features);

/// F^k + sum_{t != k} W_{t,k} * F^t.
[[nodiscard]] Var distill_B(const DistillationFeatures& features, const Binding& params, Task k);

/// sigmoid(W_g * F_k + b_g).
[[nodiscard]] Var attention_map(Var feature, Var weight, Var bias);

/// F^k + sum_{t != k} G^k . (W_t * F^t), with G^k = attention_map(F^k).
/// `messages` = false returns F^k (capacity-matched control without messages).
[[nodiscard]] Var distill_C(const DistillationFeatures& features, const Binding& params, Task k,
                            bool messages = true);

/// Dispatches on config.distill_variant for every final task.
[[nodiscard]] FusedFeatures distill(const DistillationFeatures& features, const Binding& params,
                                    const NetworkConfig& config);

}  // namespace padnet
