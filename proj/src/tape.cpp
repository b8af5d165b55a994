#include "padnet/tape.hpp"

#include <algorithm>

namespace padnet {

const Tensor4& Var::value() const {
    if (tape == nullptr) throw UsageError("unbound Var");
    return tape->value(id);
}

bool Var::requires_grad() const { return tape != nullptr && tape->requires_grad(id); }

const Tensor4& Gradients::operator[](Var v) const {
    if (!has(v)) throw UsageError("no gradient recorded for node " + std::to_string(v.id));
    return by_node_[v.id];
}

Var Tape::constant(Tensor4 value) { return leaf(std::move(value), false); }

Var Tape::variable(Tensor4 value) { return leaf(std::move(value), true); }

Var Tape::leaf(Tensor4 value, bool requires_grad) {
    nodes_.push_back(Node{std::move(value), {}, nullptr, "leaf", requires_grad});
    return Var{this, nodes_.size() - 1};
}

Var Tape::record(Tensor4 value, std::vector<Var> inputs, BackwardFn backward, std::string kind) {
    Node node;
    node.value = std::move(value);
    node.kind = std::move(kind);
    node.inputs.reserve(inputs.size());
    for (const Var& in : inputs) {
        if (in.tape != this) throw UsageError("input of '" + node.kind + "' is on another tape");
        node.inputs.push_back(in.id);
        node.requires_grad = node.requires_grad || nodes_[in.id].requires_grad;
    }
    if (node.requires_grad) node.backward = std::move(backward);
    nodes_.push_back(std::move(node));
    return Var{this, nodes_.size() - 1};
}

Gradients Tape::backward(Var loss) const {
    if (loss.tape != this) throw UsageError("loss node belongs to another tape");
    const Tensor4& lv = nodes_.at(loss.id).value;
    if (lv.shape() != Shape{1, 1, 1, 1}) {
        throw UsageError("backward requires a scalar loss, got " + lv.shape().str());
    }

    std::vector<Tensor4> grads(nodes_.size());
    if (nodes_[loss.id].requires_grad) grads[loss.id] = Tensor4::scalar(1.0);

    std::vector<Tensor4*> slots;
    for (NodeId id = loss.id + 1; id-- > 0;) {
        const Node& node = nodes_[id];
        if (!node.requires_grad || node.inputs.empty() || grads[id].empty()) continue;
        slots.assign(node.inputs.size(), nullptr);
        for (std::size_t i = 0; i < node.inputs.size(); ++i) {
            const NodeId in = node.inputs[i];
            if (!nodes_[in].requires_grad) continue;
            if (grads[in].empty()) grads[in] = Tensor4::zeros(nodes_[in].value.shape());
            slots[i] = &grads[in];
        }
        node.backward(grads[id], slots);
        // Interior gradients are no longer needed once propagated.
        if (id != loss.id) grads[id] = Tensor4{};
    }

    for (NodeId id = 0; id < nodes_.size(); ++id) {
        const Node& node = nodes_[id];
        if (!node.requires_grad) continue;
        if (!node.inputs.empty() && id != loss.id) continue;
        if (grads[id].empty()) grads[id] = Tensor4::zeros(node.value.shape());
    }
    return Gradients(std::move(grads));
}

}  // namespace padnet
