#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "padnet/frontend.hpp"

namespace padnet {

/// Intermediate score maps at 1/4 input resolution, plus the head features
/// (2x front-end resolution) they were computed from.
struct IntermediatePredictions {
    TaskMap<Var> scores;
    TaskMap<Var> features;

    [[nodiscard]] bool has(Task t) const { return slot(scores, t).has_value(); }
    [[nodiscard]] Var operator[](Task t) const;
};

/// Per-task features F^t fed to the distillation module, all the same shape.
struct DistillationFeatures {
    std::vector<Task> tasks;
    std::vector<Var> maps;

    [[nodiscard]] std::size_t size() const { return maps.size(); }
    [[nodiscard]] const Var* find(Task t) const;
};

/// Tasks whose intermediate head is built: all four with deep supervision,
/// otherwise only the parsing head used by the first training phase.
[[nodiscard]] std::vector<Task> head_tasks(const NetworkConfig& config);

/// "heads.<task>.up" (deconv to N or N/2 channels), "heads.<task>.score" and,
/// when distillation is enabled, "transform.<task>" for every active input.
[[nodiscard]] ParameterSet build_heads(const NetworkConfig& config, std::uint64_t seed);

/// Runs the heads for `tasks` and resizes score maps to (out_h, out_w).
[[nodiscard]] IntermediatePredictions heads_forward(const Binding& params, const NetworkConfig& config,
                                                    const AggregatedFeatures& features,
                                                    std::span<const Task> tasks, std::size_t out_h,
                                                    std::size_t out_w);

/// 3x3 conv + nonlinearity per active input, widening each score map to C_f channels.
[[nodiscard]] DistillationFeatures predictions_to_features(const Binding& params, const NetworkConfig& config,
                                                           const IntermediatePredictions& preds);

}  // namespace padnet
