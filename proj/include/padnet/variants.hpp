#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "padnet/config.hpp"

namespace padnet {

/// One row of an ablation table.
struct ExperimentVariant {
    std::string name;
    DistillVariant uses_distillation = DistillVariant::none;
    std::vector<Task> final_tasks;
    std::vector<Task> active_inputs;
    bool deep_supervision = false;
    bool distill_messages = true;
    // Non-empty when the row's meaning is our reading of an undefined method.
    std::string note;
};

[[nodiscard]] const std::vector<ExperimentVariant>& variant_registry();
/// Looks up a registered name or alias; throws ConfigError otherwise.
[[nodiscard]] const ExperimentVariant& find_variant(std::string_view name);

[[nodiscard]] const std::vector<std::string>& grid_names();
/// Row names of a grid, in table order; throws ConfigError for unknown grids.
[[nodiscard]] std::vector<std::string> grid_rows(std::string_view grid);

/// The base architecture with the variant's task and distillation choices.
[[nodiscard]] NetworkConfig apply_variant(NetworkConfig base, const ExperimentVariant& v);

}  // namespace padnet
