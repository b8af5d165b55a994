#include <gtest/gtest.h>

#include "padnet/decoders.hpp"
#include "support.hpp"

using namespace padnet;
using namespace padnet::testing;

namespace {

NetworkConfig wide_config() {
    NetworkConfig cfg;
    cfg.distill_channels = 64;
    return cfg;
}

ParameterSet randomised_decoders(const NetworkConfig& cfg, std::uint64_t seed) {
    ParameterSet p = build_decoders(cfg, seed);
    std::mt19937_64 rng(seed);
    for (auto& [name, t] : p) {
        if (max_abs(t) == 0.0 && name.ends_with(".weight")) t = random_tensor(t.shape(), rng, -0.2, 0.2);
    }
    return p;
}

}  // namespace

TEST(BuildDecoders, EachDeconvHalvesChannels) {
    const NetworkConfig cfg = wide_config();
    const ParameterSet p = build_decoders(cfg, 1);
    EXPECT_EQ(p.at("decoders.depth.up1.weight").shape(), (Shape{64, 32, 4, 4}));
    EXPECT_EQ(p.at("decoders.depth.up2.weight").shape(), (Shape{32, 16, 4, 4}));
    EXPECT_EQ(p.at("decoders.depth.score.weight").shape(), (Shape{1, 16, 3, 3}));
    EXPECT_EQ(p.at("decoders.parsing.score.weight").shape(), (Shape{cfg.num_classes, 16, 3, 3}));
}

TEST(BuildDecoders, InputWidthFollowsVariant) {
    NetworkConfig cfg;
    cfg.distill_variant = DistillVariant::A;
    EXPECT_EQ(build_decoders(cfg, 1).at("decoders.depth.up1.weight").shape().n, 4 * cfg.distill_channels);
    cfg.distill_variant = DistillVariant::none;
    EXPECT_EQ(build_decoders(cfg, 1).at("decoders.depth.up1.weight").shape().n, cfg.aggregated_channels());
}

TEST(BuildDecoders, OnlyConfiguredFinalTasks) {
    NetworkConfig cfg;
    cfg.final_tasks = {Task::parsing};
    const ParameterSet p = build_decoders(cfg, 1);
    EXPECT_TRUE(p.contains("decoders.parsing.up1.weight"));
    EXPECT_FALSE(p.contains("decoders.depth.up1.weight"));
}

TEST(Decode, QuadruplesResolution) {
    const NetworkConfig cfg = wide_config();
    const ParameterSet p = build_decoders(cfg, 2);
    std::mt19937_64 rng(2);
    for (Task k : cfg.final_tasks) {
        Tape tape;
        const Binding b(tape, p);
        const Var out = decode(b, cfg, tape.constant(random_tensor(Shape{2, 64, 16, 12}, rng)), k);
        EXPECT_EQ(out.shape(), (Shape{2, cfg.score_channels(k), 64, 48}));
    }
}

TEST(Decode, FreshDecoderOutputsItsBias) {
    const NetworkConfig cfg = wide_config();
    ParameterSet p = build_decoders(cfg, 3);
    p.at("decoders.depth.score.bias").fill(4.0);
    std::mt19937_64 rng(3);
    Tape tape;
    const Binding b(tape, p);
    const Tensor4 out = decode(b, cfg, tape.constant(random_tensor(Shape{1, 64, 4, 4}, rng)), Task::depth).value();
    for (double v : out.data()) EXPECT_EQ(v, 4.0);
}

TEST(Decode, FewerThanFourChannelsIsConfigError) {
    NetworkConfig cfg;
    cfg.distill_channels = 3;
    EXPECT_THROW(cfg.validate(), SchemaError);
    const ParameterSet none;
    Tape tape;
    const Binding b(tape, none);
    EXPECT_THROW((void)decode(b, NetworkConfig{}, tape.constant(Tensor4(Shape{1, 3, 4, 4})), Task::depth),
                 ConfigError);
}

TEST(Decode, DecodersAreIsolated) {
    const NetworkConfig cfg = wide_config();
    const ParameterSet p = randomised_decoders(cfg, 4);
    std::mt19937_64 rng(4);
    const Tensor4 fused = random_tensor(Shape{1, 64, 4, 4}, rng);
    for (Task k : cfg.final_tasks) {
        Tape tape;
        const Binding b(tape, p);
        const ParameterSet g = b.gradients(tape.backward(project(decode(b, cfg, tape.constant(fused), k))));
        const std::string own = "decoders." + std::string(task_name(k)) + ".";
        for (const auto& [name, t] : g) {
            if (name.starts_with(own)) {
                EXPECT_GT(max_abs(t), 0.0) << name;
            } else {
                EXPECT_EQ(max_abs(t), 0.0) << name;
            }
        }
    }
}

TEST(Decode, GradientsMatchFiniteDifferences) {
    NetworkConfig cfg;
    cfg.distill_channels = 4;
    const ParameterSet p = randomised_decoders(cfg, 5);
    std::mt19937_64 rng(5);
    const ScalarFn fn = [&](Tape& tape, const std::vector<Var>& v) {
        const Binding b(tape, p);
        return project(decode(b, cfg, v[0], Task::parsing));
    };
    EXPECT_LT(finite_difference_error(fn, {random_tensor(Shape{1, 4, 3, 3}, rng)}), 1e-6);
}
