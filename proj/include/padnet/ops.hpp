#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "padnet/tape.hpp"

namespace padnet {

/// Geometry of a 2-D convolution. Weights are (out_ch, in_ch, kh, kw) for
/// conv2d and (in_ch, out_ch, kh, kw) for conv_transpose2d.
struct ConvSpec {
    std::size_t stride = 1;
    std::size_t padding = 0;
    std::size_t dilation = 1;
};

/// floor((in + 2p - d(k-1) - 1) / s) + 1; throws when not strictly positive.
[[nodiscard]] std::size_t conv_output_size(std::size_t in, std::size_t kernel, const ConvSpec& spec);

/// (in - 1) s - 2p + d(k-1) + 1 + output_padding; throws when not strictly positive.
[[nodiscard]] std::size_t conv_transpose_output_size(std::size_t in, std::size_t kernel,
                                                     const ConvSpec& spec,
                                                     std::size_t output_padding = 0);

Var conv2d(Var input, Var weight, std::optional<Var> bias, const ConvSpec& spec);

/// Adjoint of conv2d with the same weight and spec.
Var conv_transpose2d(Var input, Var weight, std::optional<Var> bias, const ConvSpec& spec,
                     std::size_t output_padding = 0);

/// Bilinear interpolation on a corner-aligned grid (output corners sample
/// input corners exactly).
Var bilinear_resize(Var input, std::size_t out_h, std::size_t out_w);

Var sigmoid(Var input);
Var relu(Var input);
Var elu(Var input);

Var concat_channels(std::span<const Var> inputs);

Var add(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);

/// Sum of all elements as a 1x1x1x1 tensor.
Var sum(Var a);

/// sum_i weights[i] * terms[i] over scalar nodes.
Var weighted_sum(std::span<const Var> terms, std::span<const double> weights);

/// Numerically safe logistic function for plain doubles.
[[nodiscard]] double stable_sigmoid(double x);

}  // namespace padnet
