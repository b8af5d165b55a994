#include "padnet/params.hpp"

#include <cmath>

namespace padnet {

Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return Rng(seq);
}

void ParameterSet::add(std::string name, Tensor4 value) {
    auto [it, inserted] = tensors_.emplace(std::move(name), std::move(value));
    if (!inserted) throw ConfigError("duplicate parameter '" + it->first + "'");
}

void ParameterSet::merge(ParameterSet other) {
    for (auto& [name, value] : other.tensors_) add(name, std::move(value));
}

Tensor4& ParameterSet::at(std::string_view name) {
    auto it = tensors_.find(name);
    if (it == tensors_.end()) throw ConfigError("unknown parameter '" + std::string(name) + "'");
    return it->second;
}

const Tensor4& ParameterSet::at(std::string_view name) const {
    auto it = tensors_.find(name);
    if (it == tensors_.end()) throw ConfigError("unknown parameter '" + std::string(name) + "'");
    return it->second;
}

std::size_t ParameterSet::numel() const {
    std::size_t n = 0;
    for (const auto& [name, t] : tensors_) n += t.size();
    return n;
}

Tensor4 kaiming_normal(Shape shape, std::size_t fan_in, Rng& rng) {
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
    Tensor4 t(shape);
    for (double& v : t.data()) v = dist(rng);
    return t;
}

void add_conv(ParameterSet& params, const std::string& prefix, std::size_t in, std::size_t out,
              std::size_t k, Rng& rng, bool zero_weights) {
    const Shape ws{out, in, k, k};
    params.add(prefix + ".weight", zero_weights ? Tensor4::zeros(ws) : kaiming_normal(ws, in * k * k, rng));
    params.add(prefix + ".bias", Tensor4::zeros(Shape{1, out, 1, 1}));
}

void add_deconv(ParameterSet& params, const std::string& prefix, std::size_t in, std::size_t out,
                std::size_t k, std::size_t stride, Rng& rng) {
    const std::size_t taps = std::max<std::size_t>(1, (k / stride) * (k / stride));
    params.add(prefix + ".weight", kaiming_normal(Shape{in, out, k, k}, in * taps, rng));
    params.add(prefix + ".bias", Tensor4::zeros(Shape{1, out, 1, 1}));
}

Binding::Binding(Tape& tape, const ParameterSet& params, TrainablePredicate trainable)
    : tape_(&tape), params_(&params), trainable_(std::move(trainable)) {}

bool Binding::trainable(std::string_view name) const { return !trainable_ || trainable_(name); }

Var Binding::operator()(std::string_view name) const {
    std::string key(name);
    auto it = bound_.find(key);
    if (it != bound_.end()) return it->second;
    Var v = tape_->leaf(params_->at(name), trainable(name));
    bound_.emplace(std::move(key), v);
    return v;
}

ParameterSet Binding::gradients(const Gradients& grads) const {
    ParameterSet out;
    for (const auto& [name, value] : *params_) {
        if (!trainable(name)) continue;
        auto it = bound_.find(name);
        if (it != bound_.end() && grads.has(it->second)) {
            out.add(name, grads[it->second]);
        } else {
            out.add(name, Tensor4::zeros(value.shape()));
        }
    }
    return out;
}

}  // namespace padnet
