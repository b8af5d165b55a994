#include "padnet/distillation.hpp"

#include <string>

#include "padnet/ops.hpp"

namespace padnet {
namespace {

std::string b_message(Task from, Task to) {
    return "distill.B.msg." + std::string(task_name(from)) + "_to_" + std::string(task_name(to));
}
std::string c_attention(Task k) { return "distill.C.att." + std::string(task_name(k)); }
std::string c_message(Task from) { return "distill.C.msg." + std::string(task_name(from)); }

// Shape-preserving convolution for any odd square kernel.
Var same_conv(Var x, Var weight, Var bias) {
    const std::size_t k = weight.shape().h;
    return conv2d(x, weight, bias, ConvSpec{1, (k - 1) / 2, 1});
}

const Var& require_task(const DistillationFeatures& features, Task k) {
    const Var* f = features.find(k);
    if (f == nullptr) {
        throw ConfigError("distillation: final task '" + std::string(task_name(k)) +
                          "' is not among the distillation inputs");
    }
    return *f;
}

// Sum of messages from every source t != k, or nullopt when there are none.
template <typename MessageFn>
std::optional<Var> message_sum(const DistillationFeatures& features, Task k, MessageFn message) {
    std::optional<Var> acc;
    for (std::size_t i = 0; i < features.size(); ++i) {
        const Task t = features.tasks[i];
        if (t == k) continue;
        Var m = message(t, features.maps[i]);
        acc = acc ? add(*acc, m) : m;
    }
    return acc;
}

}  // namespace

Var FusedFeatures::operator[](Task k) const {
    const auto& s = slot(per_task, k);
    if (!s) throw ConfigError("no fused features for task '" + std::string(task_name(k)) + "'");
    return *s;
}

ParameterSet build_distillation(const NetworkConfig& config, std::uint64_t seed) {
    config.validate();
    Rng rng = make_rng(seed, 3);
    ParameterSet params;
    const std::size_t cf = config.distill_channels;
    if (config.distill_variant == DistillVariant::B) {
        for (Task k : config.final_tasks)
            for (Task t : config.active_inputs)
                if (t != k) add_conv(params, b_message(t, k), cf, cf, 3, rng, /*zero_weights=*/true);
    } else if (config.distill_variant == DistillVariant::C) {
        for (Task k : config.final_tasks) add_conv(params, c_attention(k), cf, cf, 3, rng);
        for (Task t : config.active_inputs) add_conv(params, c_message(t), cf, cf, 3, rng, /*zero_weights=*/true);
    }
    return params;
}

Var distill_A(const DistillationFeatures& features) {
    if (features.maps.empty()) throw ConfigError("distill_A: no feature maps");
    if (features.maps.size() == 1) return features.maps.front();
    return concat_channels(features.maps);
}

Var distill_B(const DistillationFeatures& features, const Binding& params, Task k) {
    const Var fk = require_task(features, k);
    auto msg = message_sum(features, k, [&](Task t, Var ft) {
        const std::string p = b_message(t, k);
        return same_conv(ft, params(p + ".weight"), params(p + ".bias"));
    });
    return msg ? add(fk, *msg) : fk;
}

Var attention_map(Var feature, Var weight, Var bias) { return sigmoid(same_conv(feature, weight, bias)); }

Var distill_C(const DistillationFeatures& features, const Binding& params, Task k, bool messages) {
    const Var fk = require_task(features, k);
    if (!messages) return fk;
    auto msg = message_sum(features, k, [&](Task t, Var ft) {
        const std::string p = c_message(t);
        return same_conv(ft, params(p + ".weight"), params(p + ".bias"));
    });
    if (!msg) return fk;
    const std::string a = c_attention(k);
    Var gate = attention_map(fk, params(a + ".weight"), params(a + ".bias"));
    return add(fk, mul(gate, *msg));
}

FusedFeatures distill(const DistillationFeatures& features, const Binding& params, const NetworkConfig& config) {
    FusedFeatures out;
    switch (config.distill_variant) {
        case DistillVariant::none:
            throw ConfigError("distill: variant 'none' has no distillation module");
        case DistillVariant::A: {
            Var shared = distill_A(features);
            for (Task k : config.final_tasks) slot(out.per_task, k) = shared;
            break;
        }
        case DistillVariant::B:
            for (Task k : config.final_tasks) slot(out.per_task, k) = distill_B(features, params, k);
            break;
        case DistillVariant::C:
            for (Task k : config.final_tasks)
                slot(out.per_task, k) = distill_C(features, params, k, config.distill_messages);
            break;
    }
    return out;
}

}  // namespace padnet
