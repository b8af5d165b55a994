#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "padnet/trainer.hpp"

namespace padnet {

struct GradcheckOptions {
    double step = 1e-3;       // central-difference step
    double tolerance = 1e-4;  // max relative error per group
    std::size_t batch = 2;
    TapeFault fault = TapeFault::none;  // test hook
};

/// Worst agreement seen for one layer (".weight" and ".bias" together).
struct GroupError {
    std::string group;
    std::size_t entries = 0;
    double max_relative_error = 0.0;
    std::string worst_loss;
};

struct GradcheckReport {
    std::vector<GroupError> groups;
    std::vector<std::string> losses;  // loss terms that were checked
    double tolerance = 0.0;
    double seconds = 0.0;

    [[nodiscard]] std::vector<std::string> failing_groups() const;
    [[nodiscard]] bool passed() const { return failing_groups().empty(); }
};

/// Layer name of a parameter: "heads.depth.up.weight" -> "heads.depth.up".
[[nodiscard]] std::string parameter_group(std::string_view name);

/// Freshly initialised network with zero-initialised tensors (message
/// kernels, biases) replaced by small random values so every path carries gradient.
[[nodiscard]] ParameterSet gradcheck_parameters(const NetworkConfig& config, std::uint64_t seed);

/// Compares tape gradients with central differences for every parameter
/// entry and every loss term. Per group and loss the error is
/// max|analytic - numeric| / max(max|analytic|, max|numeric|, 1e-6);
/// the reported value is the worst over losses.
[[nodiscard]] GradcheckReport run_gradcheck(const NetworkConfig& config, std::uint64_t seed,
                                            const GradcheckOptions& options = {});

}  // namespace padnet
