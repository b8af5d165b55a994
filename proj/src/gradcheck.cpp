#include "padnet/gradcheck.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <random>

namespace padnet {
namespace {

constexpr double kScaleFloor = 1e-6;

using LossValues = std::array<std::optional<double>, kNumLossTerms>;

Batch gradcheck_batch(const NetworkConfig& config, std::uint64_t seed, std::size_t count) {
    SceneConfig scene;
    scene.height = 8;
    scene.width = 8;
    scene.min_objects = 1;
    scene.max_objects = 2;
    scene.num_classes = config.num_classes;
    scene.dropout = 0.1;
    std::vector<Sample> samples;
    for (std::size_t i = 0; i < count; ++i) samples.push_back(generate_scene(seed * 1000 + i, scene));
    std::vector<const Sample*> members;
    for (const Sample& s : samples) members.push_back(&s);
    return make_batch(members);
}

LossValues forward_losses(const ParameterSet& params, const NetworkConfig& config, const Batch& batch) {
    Tape tape;
    Binding bound(tape, params, [](std::string_view) { return false; });
    const PadNetOutputs out = padnet_forward(bound, config, tape.constant(batch.image));
    LossValues values;
    const auto terms = loss_terms(out, batch, config, ForwardScope::full);
    for (std::size_t i = 0; i < kNumLossTerms; ++i) {
        if (terms[i]) values[i] = terms[i]->value().item();
    }
    return values;
}

}  // namespace

std::vector<std::string> GradcheckReport::failing_groups() const {
    std::vector<std::string> out;
    for (const GroupError& g : groups) {
        if (!(g.max_relative_error < tolerance)) out.push_back(g.group);
    }
    return out;
}

std::string parameter_group(std::string_view name) {
    for (std::string_view suffix : {".weight", ".bias"}) {
        if (name.ends_with(suffix)) return std::string(name.substr(0, name.size() - suffix.size()));
    }
    return std::string(name);
}

ParameterSet gradcheck_parameters(const NetworkConfig& config, std::uint64_t seed) {
    ParameterSet params = build_padnet(config, seed);
    Rng rng = make_rng(seed, 300);
    std::normal_distribution<double> noise(0.0, 0.1);
    ParameterSet out;
    for (const auto& [name, t] : params) {
        Tensor4 copy = t;
        if (max_abs(copy) == 0.0) {
            for (double& v : copy.data()) v = noise(rng);
        }
        out.add(name, std::move(copy));
    }
    return out;
}

GradcheckReport run_gradcheck(const NetworkConfig& config, std::uint64_t seed, const GradcheckOptions& options) {
    const auto start = std::chrono::steady_clock::now();
    config.validate();
    ParameterSet params = gradcheck_parameters(config, seed);
    const Batch batch = gradcheck_batch(config, seed, options.batch);

    // Tape gradients of each loss term separately.
    std::array<std::optional<ParameterSet>, kNumLossTerms> analytic;
    {
        Tape tape;
        tape.inject_fault(options.fault);
        Binding bound(tape, params);
        const PadNetOutputs out = padnet_forward(bound, config, tape.constant(batch.image));
        const auto terms = loss_terms(out, batch, config, ForwardScope::full);
        for (std::size_t i = 0; i < kNumLossTerms; ++i) {
            if (terms[i]) analytic[i] = bound.gradients(tape.backward(*terms[i]));
        }
    }

    GradcheckReport report;
    report.tolerance = options.tolerance;
    for (std::size_t i = 0; i < kNumLossTerms; ++i) {
        if (analytic[i]) report.losses.emplace_back(loss_term_name(static_cast<LossTerm>(i)));
    }

    // Per (group, loss): running max |a - n| and max scale.
    struct Acc {
        double diff = 0.0;
        double scale = 0.0;
    };
    std::map<std::string, std::array<Acc, kNumLossTerms>> acc;
    std::map<std::string, std::size_t> entries;

    const std::vector<std::string> names = [&] {
        std::vector<std::string> n;
        for (const auto& [name, t] : params) n.push_back(name);
        return n;
    }();
    for (const std::string& name : names) {
        const std::string group = parameter_group(name);
        auto& slot_acc = acc[group];
        Tensor4& p = params.at(name);
        entries[group] += p.size();
        for (std::size_t j = 0; j < p.size(); ++j) {
            const double original = p[j];
            p[j] = original + options.step;
            const LossValues plus = forward_losses(params, config, batch);
            p[j] = original - options.step;
            const LossValues minus = forward_losses(params, config, batch);
            p[j] = original;
            for (std::size_t i = 0; i < kNumLossTerms; ++i) {
                if (!analytic[i]) continue;
                const double numeric = (*plus[i] - *minus[i]) / (2.0 * options.step);
                const double a = analytic[i]->at(name)[j];
                slot_acc[i].diff = std::max(slot_acc[i].diff, std::abs(a - numeric));
                slot_acc[i].scale = std::max({slot_acc[i].scale, std::abs(a), std::abs(numeric)});
            }
        }
    }

    for (const auto& [group, per_loss] : acc) {
        GroupError g;
        g.group = group;
        g.entries = entries[group];
        for (std::size_t i = 0; i < kNumLossTerms; ++i) {
            if (!analytic[i]) continue;
            const double err = per_loss[i].diff / std::max(per_loss[i].scale, kScaleFloor);
            // NaN compares false, so it always wins and is reported as infinite.
            if (g.worst_loss.empty() || !(err <= g.max_relative_error)) {
                g.max_relative_error = std::isnan(err) ? INFINITY : err;
                g.worst_loss = loss_term_name(static_cast<LossTerm>(i));
            }
        }
        report.groups.push_back(g);
    }
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

}  // namespace padnet
