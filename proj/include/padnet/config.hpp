#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "padnet/tensor.hpp"

namespace padnet {

/// The four intermediate prediction tasks, in canonical order.
enum class Task : std::uint8_t { depth = 0, parsing = 1, normal = 2, contour = 3 };

inline constexpr std::array<Task, 4> kAllTasks{Task::depth, Task::parsing, Task::normal, Task::contour};
inline constexpr std::size_t kNumTasks = kAllTasks.size();

[[nodiscard]] std::string_view task_name(Task t);
[[nodiscard]] std::optional<Task> parse_task(std::string_view name);

/// One optional value per task.
template <typename T>
using TaskMap = std::array<std::optional<T>, kNumTasks>;

template <typename T>
std::optional<T>& slot(TaskMap<T>& m, Task t) {
    return m[static_cast<std::size_t>(t)];
}
template <typename T>
const std::optional<T>& slot(const TaskMap<T>& m, Task t) {
    return m[static_cast<std::size_t>(t)];
}

enum class DistillVariant : std::uint8_t { none, A, B, C };

[[nodiscard]] std::string_view variant_name(DistillVariant v);
[[nodiscard]] std::optional<DistillVariant> parse_variant(std::string_view name);

enum class Activation : std::uint8_t { elu, relu };

/// A config field failed validation; `path` names it (e.g. "architecture.head_channels").
class SchemaError : public ConfigError {
public:
    SchemaError(std::string path, const std::string& what)
        : ConfigError(path + ": " + what), path_(std::move(path)) {}
    [[nodiscard]] const std::string& path() const { return path_; }

private:
    std::string path_;
};

/// Architectural hyperparameters. Everything here feeds the checkpoint digest.
struct NetworkConfig {
    std::size_t num_classes = 5;
    std::vector<std::size_t> encoder_stage_channels{16, 32, 64};
    std::vector<std::size_t> dilation_rates{1, 1, 2};
    std::size_t head_channels = 32;     // N
    std::size_t distill_channels = 16;  // C_f
    DistillVariant distill_variant = DistillVariant::C;
    std::vector<Task> active_inputs{kAllTasks.begin(), kAllTasks.end()};
    std::vector<Task> final_tasks{Task::depth, Task::parsing};
    bool deep_supervision = true;
    // false keeps module parameters but drops cross-task messages (capacity control).
    bool distill_messages = true;
    Activation activation = Activation::elu;

    /// Throws SchemaError naming the first offending field.
    void validate() const;

    [[nodiscard]] bool has_final(Task t) const;
    [[nodiscard]] bool has_active_input(Task t) const;
    /// Channels produced by the multi-scale aggregation.
    [[nodiscard]] std::size_t aggregated_channels() const;
    /// Channel count of the shallow-stage reduction for stage i (not the last).
    [[nodiscard]] std::size_t reduced_channels(std::size_t stage) const;
    /// Channels of the map the decoders consume.
    [[nodiscard]] std::size_t decoder_input_channels() const;
    /// Output channels of the intermediate head / score map for a task.
    [[nodiscard]] std::size_t head_feature_channels(Task t) const;
    [[nodiscard]] std::size_t score_channels(Task t) const;

    /// Tiny architecture used by the gradient checker (every dim <= 8).
    [[nodiscard]] bool is_tiny() const;
};

}  // namespace padnet
