#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "padnet/tape.hpp"

namespace padnet {

inline constexpr std::uint8_t kIgnoreLabel = 255;

/// Integer class map, (n, h, w) row-major.
struct LabelMap {
    std::size_t n = 0, h = 0, w = 0;
    std::vector<std::uint8_t> data;

    LabelMap() = default;
    LabelMap(std::size_t n_, std::size_t h_, std::size_t w_, std::uint8_t fill = 0)
        : n(n_), h(h_), w(w_), data(n_ * h_ * w_, fill) {}

    std::uint8_t& at(std::size_t b, std::size_t y, std::size_t x) { return data[(b * h + y) * w + x]; }
    [[nodiscard]] std::uint8_t at(std::size_t b, std::size_t y, std::size_t x) const {
        return data[(b * h + y) * w + x];
    }
    friend bool operator==(const LabelMap&, const LabelMap&) = default;
};

/// The six terms of the joint objective, in weight order w1..w6.
enum class LossTerm : std::uint8_t {
    intermediate_depth = 0,
    intermediate_parsing,
    normal,
    contour,
    final_depth,
    final_parsing,
};
inline constexpr std::size_t kNumLossTerms = 6;

[[nodiscard]] std::string_view loss_term_name(LossTerm t);

using LossWeights = std::array<double, kNumLossTerms>;

/// Contour and normal at 0.8, everything else 1.0.
inline constexpr LossWeights kDefaultLossWeights{1.0, 1.0, 0.8, 0.8, 1.0, 1.0};

/// A loss became NaN or infinite.
class DivergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// sum mask (pred - target)^2 / max(sum mask, 1).
Var loss_depth(Var pred, const Tensor4& target, const Tensor4& mask);

/// Masked squared error between the unit-normalized prediction and the
/// target, summed over components and averaged over valid pixels.
Var loss_normal(Var pred, const Tensor4& target, const Tensor4& mask);

/// Mean softmax cross-entropy over non-ignored pixels (0 when none).
Var loss_parsing(Var logits, const LabelMap& labels, std::uint8_t ignore_index = kIgnoreLabel);

/// Mean sigmoid cross-entropy with positives weighted by pos_weight.
Var loss_contour(Var logit, const Tensor4& target, double pos_weight);

/// negatives / positives, clamped to [1, 20] (1 when there are no positives).
[[nodiscard]] double contour_pos_weight(const Tensor4& target);

struct LossReport {
    std::array<std::optional<double>, kNumLossTerms> values{};
    LossWeights weights = kDefaultLossWeights;
    double total = 0.0;
};

/// L_all = sum of w_i L_i over the present terms. Throws DivergenceError
/// naming the first non-finite term.
Var combine_losses(const std::array<std::optional<Var>, kNumLossTerms>& terms, const LossWeights& weights,
                   LossReport* report = nullptr);

}  // namespace padnet
