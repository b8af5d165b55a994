#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "padnet/experiment.hpp"
#include "padnet/variants.hpp"

namespace padnet {

/// Column names of every metric table.
[[nodiscard]] const std::vector<std::string>& metric_columns();

/// One cell per column. "-" when the network has no such output,
/// "undefined" when it does but nothing could be scored.
[[nodiscard]] std::vector<std::string> metric_cells(const EvalResult& result, const NetworkConfig& config);
/// Numeric view of the same cells; nullopt for "-" and "undefined".
[[nodiscard]] std::vector<std::optional<double>> metric_values(const EvalResult& result);

/// Two-line table: header, then values.
void write_metrics_table(std::ostream& out, const EvalResult& result, const NetworkConfig& config);

[[nodiscard]] double median(std::vector<double> values);

struct VariantRun {
    std::uint64_t seed = 0;
    std::optional<EvalResult> eval;  // nullopt when training failed
    std::string failure;
};

struct AblationRow {
    ExperimentVariant variant;
    NetworkConfig config;
    std::vector<VariantRun> runs;

    /// Median over the seeds that produced a value.
    [[nodiscard]] std::vector<std::optional<double>> medians() const;
    [[nodiscard]] bool failed() const;
};

/// Called after each finished run; may be invoked from worker threads.
using AblationProgress = std::function<void(const AblationRow&, const VariantRun&)>;

/// Trains one variant per seed on the base experiment's data and training schedule.
[[nodiscard]] AblationRow run_variant(const ExperimentConfig& base, const ExperimentVariant& variant,
                                      std::span<const std::uint64_t> seeds, std::span<const Sample> train,
                                      std::span<const Sample> val, const AblationProgress& progress = nullptr);

/// Runs every row of a grid. `jobs` > 1 trains rows concurrently.
[[nodiscard]] std::vector<AblationRow> run_grid(const ExperimentConfig& base, std::string_view grid,
                                                std::span<const std::uint64_t> seeds, std::size_t jobs = 1,
                                                const AblationProgress& progress = nullptr);

/// Rows = variants, columns = metrics, cells = medians over seeds.
void write_ablation_table(std::ostream& out, std::span<const AblationRow> rows);

/// Desk experiment used for ablations: 64 training and 16 held-out scenes.
[[nodiscard]] ExperimentConfig ablation_experiment();

}  // namespace padnet
