#include "padnet/decoders.hpp"

#include <string>

#include "padnet/ops.hpp"

namespace padnet {
namespace {

std::string decoder_prefix(Task k) { return "decoders." + std::string(task_name(k)); }

constexpr ConvSpec kUpsample{2, 1, 1};
constexpr ConvSpec kSame3x3{1, 1, 1};

}  // namespace

ParameterSet build_decoders(const NetworkConfig& config, std::uint64_t seed) {
    config.validate();
    Rng rng = make_rng(seed, 4);
    ParameterSet params;
    const std::size_t in = config.decoder_input_channels();
    for (Task k : config.final_tasks) {
        const std::string p = decoder_prefix(k);
        add_deconv(params, p + ".up1", in, in / 2, 4, 2, rng);
        add_deconv(params, p + ".up2", in / 2, in / 4, 4, 2, rng);
        add_conv(params, p + ".score", in / 4, config.score_channels(k), 3, rng, /*zero_weights=*/true);
    }
    return params;
}

Var decode(const Binding& params, const NetworkConfig& config, Var fused, Task k) {
    const std::size_t c = fused.shape().c;
    if (c < 4) {
        throw ConfigError("decode: fused features have " + std::to_string(c) + " channels; need at least 4");
    }
    const std::string p = decoder_prefix(k);
    Var x = activate(conv_transpose2d(fused, params(p + ".up1.weight"), params(p + ".up1.bias"), kUpsample),
                     config.activation);
    x = activate(conv_transpose2d(x, params(p + ".up2.weight"), params(p + ".up2.bias"), kUpsample),
                 config.activation);
    return conv2d(x, params(p + ".score.weight"), params(p + ".score.bias"), kSame3x3);
}

}  // namespace padnet
