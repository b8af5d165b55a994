#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>

#include "padnet/tape.hpp"

namespace padnet {

using Rng = std::mt19937_64;

/// Deterministic RNG for one (seed, stream) pair.
[[nodiscard]] Rng make_rng(std::uint64_t seed, std::uint64_t stream);

/// Named parameter tensors, iterated in lexicographic name order.
class ParameterSet {
public:
    using Map = std::map<std::string, Tensor4, std::less<>>;

    void add(std::string name, Tensor4 value);
    void merge(ParameterSet other);

    [[nodiscard]] bool contains(std::string_view name) const { return tensors_.find(name) != tensors_.end(); }
    [[nodiscard]] Tensor4& at(std::string_view name);
    [[nodiscard]] const Tensor4& at(std::string_view name) const;

    [[nodiscard]] std::size_t size() const { return tensors_.size(); }
    /// Total scalar count.
    [[nodiscard]] std::size_t numel() const;

    [[nodiscard]] Map::iterator begin() { return tensors_.begin(); }
    [[nodiscard]] Map::iterator end() { return tensors_.end(); }
    [[nodiscard]] Map::const_iterator begin() const { return tensors_.begin(); }
    [[nodiscard]] Map::const_iterator end() const { return tensors_.end(); }

    friend bool operator==(const ParameterSet&, const ParameterSet&) = default;

private:
    Map tensors_;
};

/// Gaussian weights with std sqrt(2 / fan_in).
[[nodiscard]] Tensor4 kaiming_normal(Shape shape, std::size_t fan_in, Rng& rng);

/// Adds "<prefix>.weight" (out, in, k, k) and "<prefix>.bias" (1, out, 1, 1).
void add_conv(ParameterSet& params, const std::string& prefix, std::size_t in, std::size_t out,
              std::size_t k, Rng& rng, bool zero_weights = false);

/// Transposed-conv weights are (in, out, k, k); fan-in counts taps per output pixel.
void add_deconv(ParameterSet& params, const std::string& prefix, std::size_t in, std::size_t out,
                std::size_t k, std::size_t stride, Rng& rng);

using TrainablePredicate = std::function<bool(std::string_view)>;

/// Lazily places parameters on a tape. Only parameters actually read by the
/// forward pass become tape nodes; the rest receive zero gradient.
class Binding {
public:
    Binding(Tape& tape, const ParameterSet& params, TrainablePredicate trainable = nullptr);

    [[nodiscard]] Var operator()(std::string_view name) const;
    [[nodiscard]] bool contains(std::string_view name) const { return params_->contains(name); }
    [[nodiscard]] Tape& tape() const { return *tape_; }
    [[nodiscard]] const ParameterSet& params() const { return *params_; }
    [[nodiscard]] bool trainable(std::string_view name) const;

    /// Gradients for every trainable parameter (zero when unused).
    [[nodiscard]] ParameterSet gradients(const Gradients& grads) const;

private:
    Tape* tape_;
    const ParameterSet* params_;
    TrainablePredicate trainable_;
    mutable std::unordered_map<std::string, Var> bound_;
};

}  // namespace padnet
