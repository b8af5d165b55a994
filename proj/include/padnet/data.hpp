#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "padnet/losses.hpp"
#include "padnet/params.hpp"

namespace padnet {

/// One training example. Derived maps (normal, normal_mask, contour,
/// valid_mask) are always recomputable from depth and labels.
struct Sample {
    Tensor4 image;        // 1x3xHxW, values in [0,1]
    Tensor4 depth;        // 1x1xHxW, meters, 0 = invalid
    LabelMap labels;      // 1xHxW, 255 = ignore
    std::size_t num_classes = 0;
    Tensor4 normal;       // 1x3xHxW
    Tensor4 normal_mask;  // 1x1xHxW
    Tensor4 contour;      // 1x1xHxW in {0,1}
    Tensor4 valid_mask;   // 1x1xHxW, depth > 0

    [[nodiscard]] std::size_t height() const { return depth.shape().h; }
    [[nodiscard]] std::size_t width() const { return depth.shape().w; }

    friend bool operator==(const Sample&, const Sample&) = default;
};

struct SceneConfig {
    std::size_t height = 64;
    std::size_t width = 64;
    std::size_t min_objects = 1;
    std::size_t max_objects = 4;
    std::size_t num_classes = 5;
    double near_depth = 1.0;  // meters at the first image row
    double far_depth = 6.0;   // meters at the last image row
    // Pixels per meter when depth is read as a height field for normals.
    double camera_constant = 8.0;
    double dropout = 0.02;
    double noise = 0.08;

    /// Throws SchemaError naming the offending field.
    void validate() const;
};

/// Ground plane plus axis-aligned objects occluding by nearness.
[[nodiscard]] Sample generate_scene(std::uint64_t seed, const SceneConfig& cfg);

struct NormalMap {
    Tensor4 normal;  // Nx3xHxW, zero where invalid
    Tensor4 mask;    // Nx1xHxW
};

/// n ~ (-dz/dx, -dz/dy, 1) with z = scale * depth, central differences
/// (one-sided at borders), unit-normalized. Pixels whose stencil touches
/// invalid depth are masked out.
[[nodiscard]] NormalMap normals_from_depth(const Tensor4& depth, const Tensor4& valid_mask, double scale = 1.0);

/// 1 where any 4-neighbor carries a different non-ignore label.
[[nodiscard]] Tensor4 contours_from_semantics(const LabelMap& labels, std::uint8_t ignore_index = kIgnoreLabel);

/// Recomputes valid_mask, normal, normal_mask and contour in place.
void derive_targets(Sample& sample, double camera_constant);

inline constexpr double kNyudRatios[] = {1.0, 1.2, 1.5};
inline constexpr double kCityscapesRatios[] = {0.5, 0.75, 1.0, 1.25, 1.75};

struct AugmentParams {
    double ratio = 1.0;
    bool flip = false;
    // Top-left of the output window in the rescaled image; negative pads.
    long crop_y = 0;
    long crop_x = 0;
};

/// Rescale by ratio (bilinear image/depth, nearest labels), divide depth by
/// the ratio, optionally mirror, then crop or pad back to the original size.
[[nodiscard]] Sample augment_with(const Sample& sample, const AugmentParams& params, double camera_constant);

/// Draws a ratio from `ratios`, a flip with probability 0.5 and a crop offset.
[[nodiscard]] AugmentParams draw_augment(const Sample& sample, Rng& rng, std::span<const double> ratios);

[[nodiscard]] Sample augment(const Sample& sample, Rng& rng, std::span<const double> ratios,
                             double camera_constant);

/// Stacked tensors for a minibatch, plus 1/4-resolution targets for the
/// intermediate heads.
struct Batch {
    Tensor4 image;
    Tensor4 depth, valid_mask, normal, normal_mask, contour;
    LabelMap labels;
    Tensor4 q_depth, q_valid_mask, q_normal, q_normal_mask, q_contour;
    LabelMap q_labels;
};

[[nodiscard]] Batch make_batch(std::span<const Sample* const> samples);

/// Nearest-neighbour resampling on the corner-aligned grid.
[[nodiscard]] Tensor4 resize_nearest(const Tensor4& t, std::size_t out_h, std::size_t out_w);
[[nodiscard]] LabelMap resize_nearest(const LabelMap& labels, std::size_t out_h, std::size_t out_w);
[[nodiscard]] Tensor4 resize_bilinear(const Tensor4& t, std::size_t out_h, std::size_t out_w);

}  // namespace padnet
