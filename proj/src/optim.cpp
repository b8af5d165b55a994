#include "padnet/optim.hpp"

namespace padnet {

void sgd_step(ParameterSet& params, const ParameterSet& grads, OptimState& state) {
    for (const auto& [name, g] : grads) {
        Tensor4& p = params.at(name);
        if (g.shape() != p.shape()) {
            throw ConfigError("sgd_step: gradient shape " + g.shape().str() + " does not match parameter '" + name +
                              "' " + p.shape().str());
        }
        if (!state.velocity.contains(name)) state.velocity.add(name, Tensor4::zeros(p.shape()));
        Tensor4& v = state.velocity.at(name);
        for (std::size_t i = 0; i < p.size(); ++i) {
            v[i] = state.momentum * v[i] + g[i] + state.weight_decay * p[i];
            p[i] -= state.learning_rate * v[i];
        }
    }
}

}  // namespace padnet
