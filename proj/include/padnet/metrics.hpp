#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "padnet/losses.hpp"

namespace padnet {

struct DepthMetrics {
    double rel = 0.0;
    double rms = 0.0;
    double log10 = 0.0;
    double delta1 = 0.0;
    double delta2 = 0.0;
    double delta3 = 0.0;
};

enum class RelDenominator { ground_truth, prediction };

inline constexpr double kDepthFloor = 1e-3;

/// Running sums over valid pixels; mergeable across batches.
class DepthAccumulator {
public:
    explicit DepthAccumulator(RelDenominator denom = RelDenominator::ground_truth) : denom_(denom) {}

    /// Adds every pixel with mask != 0 and gt > 0. Predictions are clamped to >= 1e-3.
    void add(const Tensor4& pred, const Tensor4& gt, const Tensor4& mask);
    void merge(const DepthAccumulator& other);

    [[nodiscard]] std::size_t count() const { return count_; }
    /// nullopt when no pixel was valid.
    [[nodiscard]] std::optional<DepthMetrics> result() const;

private:
    RelDenominator denom_;
    std::size_t count_ = 0;
    double rel_ = 0.0, sq_ = 0.0, log10_ = 0.0;
    std::size_t within_[3] = {0, 0, 0};
};

[[nodiscard]] std::optional<DepthMetrics> depth_metrics(const Tensor4& pred, const Tensor4& gt, const Tensor4& mask,
                                                        RelDenominator denom = RelDenominator::ground_truth);

struct ParsingMetrics {
    double mean_iou = 0.0;
    double mean_accuracy = 0.0;
    double pixel_accuracy = 0.0;
    // nullopt for classes absent from both prediction and ground truth.
    std::vector<std::optional<double>> per_class_iou;
};

/// Rows are ground truth, columns are predictions.
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(std::size_t num_classes, std::uint8_t ignore_index = kIgnoreLabel);

    /// Pixels whose ground truth is ignore_index are skipped; any other
    /// out-of-range label throws DataError naming the pixel.
    void add(const LabelMap& pred, const LabelMap& gt);
    void merge(const ConfusionMatrix& other);

    [[nodiscard]] std::uint64_t at(std::size_t gt, std::size_t pred) const { return counts_[gt * classes_ + pred]; }
    [[nodiscard]] std::size_t num_classes() const { return classes_; }
    [[nodiscard]] std::uint64_t total() const;
    [[nodiscard]] std::optional<ParsingMetrics> result() const;

private:
    std::size_t classes_;
    std::uint8_t ignore_;
    std::vector<std::uint64_t> counts_;
};

[[nodiscard]] std::optional<ParsingMetrics> parsing_metrics(const LabelMap& pred, const LabelMap& gt,
                                                            std::size_t num_classes,
                                                            std::uint8_t ignore_index = kIgnoreLabel);

/// Per-pixel argmax over channels.
[[nodiscard]] LabelMap argmax_labels(const Tensor4& logits);

}  // namespace padnet
