#include "padnet/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>

namespace padnet {
namespace {

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

bool all_finite(const ParameterSet& tensors, std::string* which) {
    for (const auto& [name, g] : tensors) {
        if (!g.all_finite()) {
            *which = name;
            return false;
        }
    }
    return true;
}

// Weights must survive the f32 checkpoint encoding.
bool storable(const ParameterSet& params, std::string* which) {
    constexpr double limit = std::numeric_limits<float>::max();
    for (const auto& [name, t] : params) {
        for (double v : t.data()) {
            if (!(std::abs(v) <= limit)) {
                *which = name;
                return false;
            }
        }
    }
    return true;
}

}  // namespace

std::optional<double> mean_valid_depth(std::span<const Sample> dataset) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const Sample& s : dataset) {
        for (std::size_t i = 0; i < s.depth.size(); ++i) {
            if (s.valid_mask[i] != 0.0) {
                sum += s.depth[i];
                ++count;
            }
        }
    }
    if (count == 0) return std::nullopt;
    return sum / static_cast<double>(count);
}

std::array<std::optional<Var>, kNumLossTerms> loss_terms(const PadNetOutputs& outputs, const Batch& batch,
                                                         const NetworkConfig& config, ForwardScope scope) {
    std::array<std::optional<Var>, kNumLossTerms> terms;
    auto set = [&](LossTerm t, Var v) { terms[static_cast<std::size_t>(t)] = v; };
    const IntermediatePredictions& inter = outputs.intermediate;
    if (scope == ForwardScope::phase1) {
        set(LossTerm::intermediate_parsing, loss_parsing(inter[Task::parsing], batch.q_labels));
        return terms;
    }
    if (config.deep_supervision) {
        set(LossTerm::intermediate_depth, loss_depth(inter[Task::depth], batch.q_depth, batch.q_valid_mask));
        set(LossTerm::intermediate_parsing, loss_parsing(inter[Task::parsing], batch.q_labels));
        set(LossTerm::normal, loss_normal(inter[Task::normal], batch.q_normal, batch.q_normal_mask));
        set(LossTerm::contour,
            loss_contour(inter[Task::contour], batch.q_contour, contour_pos_weight(batch.q_contour)));
    }
    if (const auto& d = slot(outputs.final, Task::depth)) {
        set(LossTerm::final_depth, loss_depth(*d, batch.depth, batch.valid_mask));
    }
    if (const auto& p = slot(outputs.final, Task::parsing)) {
        set(LossTerm::final_parsing, loss_parsing(*p, batch.labels));
    }
    return terms;
}

StepResult compute_gradients(const ParameterSet& params, const NetworkConfig& config, const LossWeights& weights,
                             const Batch& batch, ForwardScope scope) {
    Tape tape;
    TrainablePredicate trainable = nullptr;
    if (scope == ForwardScope::phase1) trainable = is_phase1_parameter;
    Binding bound(tape, params, trainable);
    const PadNetOutputs out = padnet_forward(bound, config, tape.constant(batch.image), scope);
    StepResult result;
    const Var total = combine_losses(loss_terms(out, batch, config, scope), weights, &result.report);
    result.grads = bound.gradients(tape.backward(total));
    return result;
}

TrainResult two_phase_train(const NetworkConfig& config, const TrainingConfig& training,
                            std::span<const Sample> dataset, std::uint64_t seed, TrainObserver* observer) {
    if (dataset.empty()) throw UsageError("two_phase_train: empty dataset");
    if (training.batch_size == 0) throw SchemaError("training.batch_size", "must be positive");
    config.validate();

    TrainResult result;
    TrainState& state = result.state;
    state.params = build_padnet(config, seed);
    if (const auto prior = mean_valid_depth(dataset)) set_depth_prior(state.params, *prior);
    state.optim.momentum = training.momentum;
    state.optim.weight_decay = training.weight_decay;
    TrainState last_good = state;

    Rng rng = make_rng(seed, 200);
    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), 0);

    const PhaseSchedule phases[2] = {training.phase1, training.phase2};
    std::size_t epoch_counter = 0;
    for (int phase = 1; phase <= 2; ++phase) {
        const PhaseSchedule& sched = phases[phase - 1];
        const ForwardScope scope = phase == 1 ? ForwardScope::phase1 : ForwardScope::full;
        state.phase = phase;
        state.optim.phase = phase;
        state.optim.learning_rate = sched.learning_rate;
        for (std::size_t epoch = 0; epoch < sched.epochs; ++epoch, ++epoch_counter) {
            std::shuffle(order.begin(), order.end(), rng);
            for (std::size_t start = 0; start < order.size(); start += training.batch_size) {
                const std::size_t end = std::min(order.size(), start + training.batch_size);
                std::vector<Sample> augmented;
                std::vector<const Sample*> members;
                if (training.augment) {
                    for (std::size_t i = start; i < end; ++i) {
                        augmented.push_back(augment(dataset[order[i]], rng, training.augment_ratios,
                                                    training.camera_constant));
                    }
                    for (const Sample& s : augmented) members.push_back(&s);
                } else {
                    for (std::size_t i = start; i < end; ++i) members.push_back(&dataset[order[i]]);
                }
                const Batch batch = make_batch(members);

                StepResult step;
                try {
                    step = compute_gradients(state.params, config, training.loss_weights, batch, scope);
                } catch (const DivergenceError& e) {
                    result.diverged = true;
                    result.diagnostic = "iteration " + std::to_string(state.iteration) + ": " + e.what();
                }
                std::string bad;
                if (!result.diverged && !all_finite(step.grads, &bad)) {
                    result.diverged = true;
                    result.diagnostic = "iteration " + std::to_string(state.iteration) +
                                        ": non-finite gradient for '" + bad + "'";
                }
                if (result.diverged) {
                    result.state = std::move(last_good);
                    return result;
                }
                sgd_step(state.params, step.grads, state.optim);
                // Finite but huge gradients can still overflow the weights.
                if (!storable(state.params, &bad)) {
                    result.diverged = true;
                    result.diagnostic = "iteration " + std::to_string(state.iteration) +
                                        ": parameter '" + bad + "' overflowed";
                    result.state = std::move(last_good);
                    return result;
                }
                ++state.iteration;

                LossCurveRow row{state.iteration, phase, step.report, sched.learning_rate};
                result.curve.push_back(row);
                if (observer != nullptr) observer->on_iteration(row);
            }
            last_good = state;
            if (observer != nullptr) observer->on_epoch_end(state, epoch_counter);
        }
    }
    return result;
}

Prediction predict(const ParameterSet& params, const NetworkConfig& config, const Tensor4& image) {
    Tape tape;
    Binding bound(tape, params, [](std::string_view) { return false; });
    const PadNetOutputs out = padnet_forward(bound, config, tape.constant(image));
    Prediction p;
    if (const auto& d = slot(out.final, Task::depth)) p.depth = d->value();
    if (const auto& s = slot(out.final, Task::parsing)) p.parsing = s->value();
    return p;
}

EvalResult evaluate(const ParameterSet& params, const NetworkConfig& config, std::span<const Sample> dataset,
                    RelDenominator rel_denominator, const PredictionSink& sink) {
    DepthAccumulator depth(rel_denominator);
    ConfusionMatrix confusion(config.num_classes);
    EvalResult result;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const Sample& s = dataset[i];
        const Prediction p = predict(params, config, s.image);
        if (p.depth) depth.add(*p.depth, s.depth, s.valid_mask);
        if (p.parsing) confusion.add(argmax_labels(*p.parsing), s.labels);
        if (sink) sink(i, p);
        ++result.samples;
    }
    if (config.has_final(Task::depth)) result.depth = depth.result();
    if (config.has_final(Task::parsing)) result.parsing = confusion.result();
    return result;
}

void write_loss_curve_header(std::ostream& out) {
    out << "iteration\tphase";
    for (std::size_t i = 0; i < kNumLossTerms; ++i) out << '\t' << loss_term_name(static_cast<LossTerm>(i));
    out << "\tL_all\tlr\n";
}

void write_loss_curve_row(std::ostream& out, const LossCurveRow& row) {
    out << row.iteration << '\t' << row.phase;
    for (const auto& v : row.report.values) out << '\t' << (v ? format_number(*v) : std::string("NA"));
    out << '\t' << format_number(row.report.total) << '\t' << format_number(row.learning_rate) << '\n';
}

}  // namespace padnet
