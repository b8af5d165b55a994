#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "padnet/tensor.hpp"

namespace padnet {

class Tape;

using NodeId = std::size_t;

/// Handle to a value recorded on a tape.
struct Var {
    Tape* tape = nullptr;
    NodeId id = 0;

    [[nodiscard]] const Tensor4& value() const;
    [[nodiscard]] const Shape& shape() const { return value().shape(); }
    [[nodiscard]] bool requires_grad() const;
};

/// Accumulates d(loss)/d(input_i) into grad_inputs[i]. Entries are null for
/// inputs that do not require gradients.
using BackwardFn =
    std::function<void(const Tensor4& grad_out, std::span<Tensor4* const> grad_inputs)>;

/// Test-only switches that deliberately break a backward rule.
enum class TapeFault { none, conv_weight_grad };

/// Gradients produced by Tape::backward, indexed by node.
class Gradients {
public:
    Gradients() = default;
    explicit Gradients(std::vector<Tensor4> by_node) : by_node_(std::move(by_node)) {}

    /// Gradient of a requires_grad node. Throws for nodes without one.
    [[nodiscard]] const Tensor4& operator[](Var v) const;
    [[nodiscard]] bool has(Var v) const { return v.id < by_node_.size() && !by_node_[v.id].empty(); }

private:
    std::vector<Tensor4> by_node_;
};

/// Append-only record of a forward computation. Confined to one thread.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var constant(Tensor4 value);
    Var variable(Tensor4 value);
    Var leaf(Tensor4 value, bool requires_grad);

    /// Records an operation result. The node requires grad iff any input does;
    /// `backward` is dropped otherwise.
    Var record(Tensor4 value, std::vector<Var> inputs, BackwardFn backward, std::string kind);

    [[nodiscard]] const Tensor4& value(NodeId id) const { return nodes_.at(id).value; }
    [[nodiscard]] bool requires_grad(NodeId id) const { return nodes_.at(id).requires_grad; }
    [[nodiscard]] const std::string& kind(NodeId id) const { return nodes_.at(id).kind; }
    [[nodiscard]] std::span<const NodeId> inputs(NodeId id) const { return nodes_.at(id).inputs; }
    [[nodiscard]] std::size_t size() const { return nodes_.size(); }

    /// Reverse-mode sweep from a scalar node. Every requires_grad leaf gets a
    /// gradient, zero when it does not reach the loss.
    [[nodiscard]] Gradients backward(Var loss) const;

    void inject_fault(TapeFault f) { fault_ = f; }
    [[nodiscard]] TapeFault fault() const { return fault_; }

private:
    struct Node {
        Tensor4 value;
        std::vector<NodeId> inputs;
        BackwardFn backward;
        std::string kind;
        bool requires_grad = false;
    };

    std::vector<Node> nodes_;
    TapeFault fault_ = TapeFault::none;
};

}  // namespace padnet
