#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "padnet/data.hpp"
#include "padnet/metrics.hpp"
#include "padnet/model.hpp"
#include "padnet/optim.hpp"

namespace padnet {

struct PhaseSchedule {
    std::size_t epochs = 0;
    double learning_rate = 0.0;
};

struct TrainingConfig {
    LossWeights loss_weights = kDefaultLossWeights;
    PhaseSchedule phase1{10, 1e-3};
    PhaseSchedule phase2{10, 1e-5};
    double momentum = 0.99;
    double weight_decay = 0.0005;
    std::size_t batch_size = 2;
    bool augment = true;
    std::vector<double> augment_ratios{std::begin(kNyudRatios), std::end(kNyudRatios)};
    double camera_constant = SceneConfig{}.camera_constant;
};

/// Everything needed to resume or evaluate a run.
struct TrainState {
    ParameterSet params;
    OptimState optim;
    std::uint64_t iteration = 0;
    int phase = 1;
};

struct LossCurveRow {
    std::uint64_t iteration = 0;
    int phase = 1;
    LossReport report;
    double learning_rate = 0.0;
};

/// Loss terms for one batch. Phase 1 only has the intermediate parsing term.
[[nodiscard]] std::array<std::optional<Var>, kNumLossTerms> loss_terms(const PadNetOutputs& outputs,
                                                                       const Batch& batch,
                                                                       const NetworkConfig& config,
                                                                       ForwardScope scope);

struct StepResult {
    LossReport report;
    ParameterSet grads;  // one entry per trainable parameter
};

/// Forward + backward over one batch for the parameters trainable in `scope`.
[[nodiscard]] StepResult compute_gradients(const ParameterSet& params, const NetworkConfig& config,
                                           const LossWeights& weights, const Batch& batch, ForwardScope scope);

/// Hooks for persistence; called on the training thread.
class TrainObserver {
public:
    virtual ~TrainObserver() = default;
    virtual void on_iteration(const LossCurveRow& /*row*/) {}
    virtual void on_epoch_end(const TrainState& /*state*/, std::size_t /*epoch*/) {}
};

struct TrainResult {
    TrainState state;  // last good state
    std::vector<LossCurveRow> curve;
    bool diverged = false;
    std::string diagnostic;
};

/// Mean ground-truth depth over valid pixels; used as the initial depth output.
[[nodiscard]] std::optional<double> mean_valid_depth(std::span<const Sample> dataset);

/// Phase 1: front-end + intermediate parsing head on the parsing loss.
/// Phase 2: the whole network on every configured loss.
[[nodiscard]] TrainResult two_phase_train(const NetworkConfig& config, const TrainingConfig& training,
                                          std::span<const Sample> dataset, std::uint64_t seed,
                                          TrainObserver* observer = nullptr);

/// Inference from the RGB image alone.
struct Prediction {
    std::optional<Tensor4> depth;    // Nx1xHxW
    std::optional<Tensor4> parsing;  // NxCxHxW logits
};

[[nodiscard]] Prediction predict(const ParameterSet& params, const NetworkConfig& config, const Tensor4& image);

struct EvalResult {
    std::optional<DepthMetrics> depth;
    std::optional<ParsingMetrics> parsing;
    std::size_t samples = 0;
};

/// Called with each sample's prediction (for dumps).
using PredictionSink = std::function<void(std::size_t index, const Prediction&)>;

[[nodiscard]] EvalResult evaluate(const ParameterSet& params, const NetworkConfig& config,
                                  std::span<const Sample> dataset,
                                  RelDenominator rel_denominator = RelDenominator::ground_truth,
                                  const PredictionSink& sink = nullptr);

/// Tab-separated loss curve: iteration, phase, L1..L6, L_all, lr.
void write_loss_curve_header(std::ostream& out);
void write_loss_curve_row(std::ostream& out, const LossCurveRow& row);

}  // namespace padnet
