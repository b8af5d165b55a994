#include "padnet/config.hpp"

#include <algorithm>

namespace padnet {

std::string_view task_name(Task t) {
    switch (t) {
        case Task::depth: return "depth";
        case Task::parsing: return "parsing";
        case Task::normal: return "normal";
        case Task::contour: return "contour";
    }
    return "?";
}

std::optional<Task> parse_task(std::string_view name) {
    for (Task t : kAllTasks)
        if (task_name(t) == name) return t;
    return std::nullopt;
}

std::string_view variant_name(DistillVariant v) {
    switch (v) {
        case DistillVariant::none: return "none";
        case DistillVariant::A: return "A";
        case DistillVariant::B: return "B";
        case DistillVariant::C: return "C";
    }
    return "?";
}

std::optional<DistillVariant> parse_variant(std::string_view name) {
    for (auto v : {DistillVariant::none, DistillVariant::A, DistillVariant::B, DistillVariant::C})
        if (variant_name(v) == name) return v;
    return std::nullopt;
}

bool NetworkConfig::has_final(Task t) const {
    return std::find(final_tasks.begin(), final_tasks.end(), t) != final_tasks.end();
}

bool NetworkConfig::has_active_input(Task t) const {
    return std::find(active_inputs.begin(), active_inputs.end(), t) != active_inputs.end();
}

std::size_t NetworkConfig::reduced_channels(std::size_t stage) const {
    const std::size_t last = encoder_stage_channels.back();
    return std::max<std::size_t>(8, std::min(encoder_stage_channels.at(stage), last) / 4);
}

std::size_t NetworkConfig::aggregated_channels() const {
    std::size_t total = encoder_stage_channels.back();
    for (std::size_t s = 0; s + 1 < encoder_stage_channels.size(); ++s) total += reduced_channels(s);
    return total;
}

std::size_t NetworkConfig::decoder_input_channels() const {
    switch (distill_variant) {
        case DistillVariant::none: return aggregated_channels();
        case DistillVariant::A: return active_inputs.size() * distill_channels;
        case DistillVariant::B:
        case DistillVariant::C: return distill_channels;
    }
    return 0;
}

std::size_t NetworkConfig::head_feature_channels(Task t) const {
    return (t == Task::depth || t == Task::parsing) ? head_channels : head_channels / 2;
}

std::size_t NetworkConfig::score_channels(Task t) const {
    switch (t) {
        case Task::depth: return 1;
        case Task::parsing: return num_classes;
        case Task::normal: return 3;
        case Task::contour: return 1;
    }
    return 0;
}

bool NetworkConfig::is_tiny() const {
    auto le8 = [](std::size_t v) { return v <= 8; };
    return le8(num_classes) && std::all_of(encoder_stage_channels.begin(), encoder_stage_channels.end(), le8) &&
           le8(head_channels) && le8(distill_channels);
}

void NetworkConfig::validate() const {
    const std::string p = "architecture.";
    if (num_classes < 2 || num_classes > 255) {
        throw SchemaError(p + "num_classes", "must be in [2, 255]");
    }
    if (encoder_stage_channels.empty()) {
        throw SchemaError(p + "encoder_stage_channels", "at least one encoder stage is required");
    }
    if (encoder_stage_channels.size() != 3) {
        throw SchemaError(p + "encoder_stage_channels", "exactly three stages are required (output stride 8)");
    }
    if (std::find(encoder_stage_channels.begin(), encoder_stage_channels.end(), 0u) != encoder_stage_channels.end()) {
        throw SchemaError(p + "encoder_stage_channels", "stage widths must be positive");
    }
    if (dilation_rates.size() != encoder_stage_channels.size()) {
        throw SchemaError(p + "dilation_rates", "need one dilation rate per encoder stage");
    }
    if (std::find(dilation_rates.begin(), dilation_rates.end(), 0u) != dilation_rates.end()) {
        throw SchemaError(p + "dilation_rates", "dilation rates must be positive");
    }
    if (head_channels == 0 || head_channels % 2 != 0) {
        throw SchemaError(p + "head_channels", "must be a positive even number");
    }
    if (distill_channels == 0) throw SchemaError(p + "distill_channels", "must be positive");
    if (final_tasks.empty()) throw SchemaError(p + "final_tasks", "at least one final task is required");
    for (Task t : final_tasks) {
        if (t != Task::depth && t != Task::parsing) {
            throw SchemaError(p + "final_tasks", "final tasks are depth and parsing only");
        }
    }
    auto unique = [](std::vector<Task> v) {
        std::sort(v.begin(), v.end());
        return std::adjacent_find(v.begin(), v.end()) == v.end();
    };
    if (!unique(final_tasks)) throw SchemaError(p + "final_tasks", "duplicate task");
    if (!unique(active_inputs)) throw SchemaError(p + "active_inputs", "duplicate task");
    if (distill_variant != DistillVariant::none) {
        if (active_inputs.empty()) {
            throw SchemaError(p + "active_inputs", "distillation needs at least one intermediate input");
        }
        if (!deep_supervision) {
            throw SchemaError(p + "deep_supervision", "distillation requires the intermediate heads");
        }
    }
    if (distill_variant == DistillVariant::B || distill_variant == DistillVariant::C) {
        for (Task t : final_tasks) {
            if (!has_active_input(t)) {
                throw SchemaError(p + "active_inputs",
                                  "final task '" + std::string(task_name(t)) + "' missing from distillation inputs");
            }
        }
    }
    if (decoder_input_channels() < 4) {
        throw SchemaError(p + "distill_channels", "decoder input has fewer than 4 channels");
    }
}

}  // namespace padnet
