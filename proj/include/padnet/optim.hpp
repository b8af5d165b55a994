#pragma once

#include "padnet/params.hpp"

namespace padnet {

/// Classical momentum SGD state with coupled weight decay.
struct OptimState {
    ParameterSet velocity;
    double learning_rate = 1e-3;
    double momentum = 0.99;
    double weight_decay = 0.0005;
    int phase = 1;
};

/// For every parameter with a gradient: v <- m v + g + wd p; p <- p - lr v.
/// Parameters absent from `grads` are left untouched.
void sgd_step(ParameterSet& params, const ParameterSet& grads, OptimState& state);

}  // namespace padnet
