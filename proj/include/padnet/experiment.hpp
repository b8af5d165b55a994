#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "padnet/config.hpp"
#include "padnet/data.hpp"
#include "padnet/trainer.hpp"

namespace padnet {

/// Where training and held-out samples come from.
struct DataConfig {
    SceneConfig scene;
    std::size_t train_count = 8;
    std::uint64_t train_seed = 1000;
    std::size_t val_count = 16;
    std::uint64_t val_seed = 5000;
    // Optional PADS files that replace the generated splits.
    std::optional<std::filesystem::path> train_file;
    std::optional<std::filesystem::path> val_file;
};

struct ExperimentConfig {
    NetworkConfig architecture;
    TrainingConfig training;
    DataConfig data;

    /// Cross-section checks on top of each section's own validation.
    void validate() const;
};

/// Parses the JSON text of a config file. Every field is required; unknown
/// fields are rejected. Errors are SchemaError carrying the field path.
[[nodiscard]] ExperimentConfig parse_experiment(std::string_view json_text);
[[nodiscard]] ExperimentConfig load_experiment(const std::filesystem::path& path);
[[nodiscard]] SceneConfig parse_scene(std::string_view json_text);
[[nodiscard]] SceneConfig load_scene(const std::filesystem::path& path);

[[nodiscard]] std::string experiment_to_json(const ExperimentConfig& cfg);
[[nodiscard]] std::string scene_to_json(const SceneConfig& cfg);
/// Sorted-key, whitespace-free JSON of the architecture section.
[[nodiscard]] std::string canonical_architecture(const NetworkConfig& arch);
/// Identifies an architecture; stored in every checkpoint.
[[nodiscard]] std::uint64_t architecture_digest(const NetworkConfig& arch);

/// Built-in configurations.
[[nodiscard]] ExperimentConfig desk_experiment();
/// Desk network with the paper's phase learning rates.
[[nodiscard]] ExperimentConfig paper_schedule_experiment();
/// Every dimension at most 8, for gradient checking.
[[nodiscard]] NetworkConfig tiny_architecture();

/// Generated or file-backed splits.
[[nodiscard]] std::vector<Sample> training_split(const DataConfig& data);
[[nodiscard]] std::vector<Sample> validation_split(const DataConfig& data);
[[nodiscard]] std::vector<Sample> generate_dataset(const SceneConfig& scene, std::uint64_t first_seed,
                                                   std::size_t count);

}  // namespace padnet
