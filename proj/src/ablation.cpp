#include "padnet/ablation.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <mutex>
#include <ostream>
#include <thread>

namespace padnet {
namespace {

std::string format_metric(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace

const std::vector<std::string>& metric_columns() {
    static const std::vector<std::string> cols{"rel",       "rms",      "log10",         "delta1",        "delta2",
                                               "delta3",    "mean_iou", "mean_accuracy", "pixel_accuracy"};
    return cols;
}

std::vector<std::optional<double>> metric_values(const EvalResult& result) {
    std::vector<std::optional<double>> v(metric_columns().size());
    if (result.depth) {
        const DepthMetrics& d = *result.depth;
        v[0] = d.rel;
        v[1] = d.rms;
        v[2] = d.log10;
        v[3] = d.delta1;
        v[4] = d.delta2;
        v[5] = d.delta3;
    }
    if (result.parsing) {
        v[6] = result.parsing->mean_iou;
        v[7] = result.parsing->mean_accuracy;
        v[8] = result.parsing->pixel_accuracy;
    }
    return v;
}

std::vector<std::string> metric_cells(const EvalResult& result, const NetworkConfig& config) {
    const auto values = metric_values(result);
    std::vector<std::string> cells;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const bool is_depth = i < 6;
        const bool produced = config.has_final(is_depth ? Task::depth : Task::parsing);
        if (!produced) {
            cells.emplace_back("-");
        } else if (!values[i]) {
            cells.emplace_back("undefined");
        } else {
            cells.push_back(format_metric(*values[i]));
        }
    }
    return cells;
}

void write_metrics_table(std::ostream& out, const EvalResult& result, const NetworkConfig& config) {
    out << "samples";
    for (const std::string& c : metric_columns()) out << '\t' << c;
    out << '\n' << result.samples;
    for (const std::string& c : metric_cells(result, config)) out << '\t' << c;
    out << '\n';
}

double median(std::vector<double> values) {
    if (values.empty()) throw UsageError("median of an empty set");
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    if (values.size() % 2 == 1) return values[mid];
    return 0.5 * (values[mid - 1] + values[mid]);
}

std::vector<std::optional<double>> AblationRow::medians() const {
    std::vector<std::optional<double>> out(metric_columns().size());
    for (std::size_t c = 0; c < out.size(); ++c) {
        std::vector<double> seen;
        for (const VariantRun& r : runs) {
            if (!r.eval) continue;
            if (auto v = metric_values(*r.eval)[c]) seen.push_back(*v);
        }
        if (!seen.empty()) out[c] = median(std::move(seen));
    }
    return out;
}

bool AblationRow::failed() const {
    return std::any_of(runs.begin(), runs.end(), [](const VariantRun& r) { return !r.eval.has_value(); });
}

AblationRow run_variant(const ExperimentConfig& base, const ExperimentVariant& variant,
                        std::span<const std::uint64_t> seeds, std::span<const Sample> train,
                        std::span<const Sample> val, const AblationProgress& progress) {
    AblationRow row;
    row.variant = variant;
    row.config = apply_variant(base.architecture, variant);
    for (std::uint64_t seed : seeds) {
        VariantRun run;
        run.seed = seed;
        try {
            row.config.validate();
            TrainResult trained = two_phase_train(row.config, base.training, train, seed);
            if (trained.diverged) {
                run.failure = "diverged: " + trained.diagnostic;
            } else {
                run.eval = evaluate(trained.state.params, row.config, val);
            }
        } catch (const std::exception& e) {
            run.failure = e.what();
        }
        row.runs.push_back(run);
        if (progress) progress(row, run);
    }
    return row;
}

std::vector<AblationRow> run_grid(const ExperimentConfig& base, std::string_view grid,
                                  std::span<const std::uint64_t> seeds, std::size_t jobs,
                                  const AblationProgress& progress) {
    const std::vector<std::string> names = grid_rows(grid);
    const std::vector<Sample> train = training_split(base.data);
    const std::vector<Sample> val = validation_split(base.data);

    std::vector<AblationRow> rows(names.size());
    std::mutex progress_lock;
    AblationProgress guarded = nullptr;
    if (progress) {
        guarded = [&](const AblationRow& r, const VariantRun& run) {
            std::lock_guard lock(progress_lock);
            progress(r, run);
        };
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < names.size(); i = next++) {
            rows[i] = run_variant(base, find_variant(names[i]), seeds, train, val, guarded);
            // Keep the row label as listed in the grid (aliases included).
            rows[i].variant.name = names[i];
        }
    };
    const std::size_t threads = std::clamp<std::size_t>(jobs, 1, names.size());
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (std::thread& t : pool) t.join();
    return rows;
}

void write_ablation_table(std::ostream& out, std::span<const AblationRow> rows) {
    out << "method\tseeds";
    for (const std::string& c : metric_columns()) out << '\t' << c;
    out << "\tnote\n";
    for (const AblationRow& row : rows) {
        std::size_t ok = 0;
        for (const VariantRun& r : row.runs) ok += r.eval ? 1 : 0;
        out << row.variant.name << '\t' << ok << '/' << row.runs.size();
        const auto med = row.medians();
        for (std::size_t c = 0; c < med.size(); ++c) {
            const bool produced = row.config.has_final(c < 6 ? Task::depth : Task::parsing);
            if (!produced) {
                out << "\t-";
            } else if (med[c]) {
                out << '\t' << format_metric(*med[c]);
            } else {
                out << "\tundefined";
            }
        }
        std::string note = row.variant.note;
        for (const VariantRun& r : row.runs) {
            if (r.eval) continue;
            if (!note.empty()) note += "; ";
            note += "seed " + std::to_string(r.seed) + " failed: " + r.failure;
        }
        for (char& ch : note) {
            if (ch == '\t' || ch == '\n') ch = ' ';
        }
        out << '\t' << (note.empty() ? "-" : note) << '\n';
    }
}

ExperimentConfig ablation_experiment() {
    ExperimentConfig cfg = desk_experiment();
    cfg.data.train_count = 64;
    cfg.data.val_count = 16;
    cfg.architecture.distill_channels = 32;
    cfg.training.augment = true;
    cfg.training.phase1 = {5, 3e-3};
    cfg.training.phase2 = {40, 5e-4};
    return cfg;
}

}  // namespace padnet
