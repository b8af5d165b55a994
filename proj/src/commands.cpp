#include "padnet/commands.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>

#include "padnet/ablation.hpp"
#include "padnet/checkpoint.hpp"
#include "padnet/dataset_io.hpp"
#include "padnet/experiment.hpp"
#include "padnet/gradcheck.hpp"

namespace padnet {
namespace {

namespace fs = std::filesystem;

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << text;
    if (!f) throw std::runtime_error("write failed for " + path.string());
}

// Write to a sibling and rename so a crash never leaves a torn checkpoint.
void save_atomically(const fs::path& path, const Checkpoint& ckpt) {
    fs::path tmp = path;
    tmp += ".tmp";
    save_checkpoint(tmp, ckpt);
    fs::rename(tmp, path);
}

std::string file_digest(const fs::path& path) { return sha256_hex(read_file(path)); }

class RunRecorder : public TrainObserver {
public:
    RunRecorder(const fs::path& dir, std::uint64_t digest) : dir_(dir), digest_(digest), curve_(dir / "loss_curve.tsv") {
        if (!curve_) throw std::runtime_error("cannot write " + (dir / "loss_curve.tsv").string());
        write_loss_curve_header(curve_);
    }

    void on_iteration(const LossCurveRow& row) override {
        write_loss_curve_row(curve_, row);
        curve_.flush();
    }

    void on_epoch_end(const TrainState& state, std::size_t /*epoch*/) override {
        save_atomically(dir_ / "last.padc", make_checkpoint(state, digest_));
    }

private:
    fs::path dir_;
    std::uint64_t digest_;
    std::ofstream curve_;
};

int config_failure(std::ostream& err, const std::exception& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
}

}  // namespace

int run_train(const TrainCommand& cmd, std::ostream& out, std::ostream& err) {
    ExperimentConfig cfg;
    try {
        cfg = load_experiment(cmd.config);
    } catch (const ConfigError& e) {
        return config_failure(err, e);
    }
    try {
        fs::create_directories(cmd.out_dir);
        write_text(cmd.out_dir / "config.json", experiment_to_json(cfg));
        const std::uint64_t digest = architecture_digest(cfg.architecture);
        const std::vector<Sample> train = training_split(cfg.data);
        const std::vector<Sample> val = validation_split(cfg.data);

        TrainResult result;
        {
            RunRecorder recorder(cmd.out_dir, digest);
            result = two_phase_train(cfg.architecture, cfg.training, train, cmd.seed, &recorder);
        }
        if (result.diverged) {
            save_atomically(cmd.out_dir / "last.padc", make_checkpoint(result.state, digest));
            err << "training diverged at " << result.diagnostic << "; last good state in "
                << (cmd.out_dir / "last.padc").string() << '\n';
            return kExitDiverged;
        }
        const fs::path final_path = cmd.out_dir / "final.padc";
        save_atomically(final_path, make_checkpoint(result.state, digest));

        const EvalResult eval = evaluate(result.state.params, cfg.architecture, val);
        {
            std::ofstream metrics(cmd.out_dir / "metrics.tsv");
            write_metrics_table(metrics, eval, cfg.architecture);
        }
        out << "iterations\t" << result.state.iteration << '\n';
        out << "checkpoint\t" << final_path.string() << '\n';
        out << "checkpoint_sha256\t" << file_digest(final_path) << '\n';
        out << "held-out metrics:\n";
        write_metrics_table(out, eval, cfg.architecture);
        return kExitOk;
    } catch (const SchemaError& e) {
        return config_failure(err, e);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

int run_eval(const EvalCommand& cmd, std::ostream& out, std::ostream& err) {
    RelDenominator denom = RelDenominator::ground_truth;
    if (cmd.rel_denominator == "pred") {
        denom = RelDenominator::prediction;
    } else if (cmd.rel_denominator != "gt") {
        err << "config error: --rel-denominator must be gt or pred\n";
        return kExitConfig;
    }
    const fs::path config_path = cmd.config.value_or(cmd.checkpoint.parent_path() / "config.json");
    ExperimentConfig cfg;
    try {
        cfg = load_experiment(config_path);
    } catch (const ConfigError& e) {
        return config_failure(err, e);
    }
    try {
        const Checkpoint ckpt = load_checkpoint(cmd.checkpoint);
        const std::uint64_t expected = architecture_digest(cfg.architecture);
        if (ckpt.config_digest != expected) {
            char buf[96];
            std::snprintf(buf, sizeof buf, "checkpoint digest %016llx does not match config digest %016llx",
                          static_cast<unsigned long long>(ckpt.config_digest),
                          static_cast<unsigned long long>(expected));
            err << buf << '\n';
            return kExitDigestMismatch;
        }
        const std::vector<Sample> data = read_dataset(cmd.data, cfg.data.scene.camera_constant);

        PredictionSink sink = nullptr;
        std::ofstream index;
        if (cmd.dump_dir) {
            fs::create_directories(*cmd.dump_dir);
            index.open(*cmd.dump_dir / "index.tsv");
            index << "sample\theight\twidth\tdepth_file\tlabels_file\n";
            sink = [&](std::size_t i, const Prediction& p) {
                char stem[32];
                std::snprintf(stem, sizeof stem, "sample_%05zu", i);
                std::string depth_file = "-", labels_file = "-";
                std::size_t h = 0, w = 0;
                if (p.depth) {
                    ByteWriter bw;
                    for (double v : p.depth->data()) bw.f32(static_cast<float>(v));
                    depth_file = std::string(stem) + ".depth.f32";
                    write_file(*cmd.dump_dir / depth_file, bw.buffer());
                    h = p.depth->shape().h;
                    w = p.depth->shape().w;
                }
                if (p.parsing) {
                    const LabelMap labels = argmax_labels(*p.parsing);
                    labels_file = std::string(stem) + ".labels.u8";
                    write_file(*cmd.dump_dir / labels_file, labels.data);
                    h = labels.h;
                    w = labels.w;
                }
                index << i << '\t' << h << '\t' << w << '\t' << depth_file << '\t' << labels_file << '\n';
            };
        }
        const EvalResult eval = evaluate(ckpt.params, cfg.architecture, data, denom, sink);
        write_metrics_table(out, eval, cfg.architecture);
        return kExitOk;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

int run_ablate(const AblateCommand& cmd, std::ostream& out, std::ostream& err) {
    ExperimentConfig base = ablation_experiment();
    try {
        if (cmd.config) base = load_experiment(*cmd.config);
        (void)grid_rows(cmd.grid);
        if (cmd.seeds == 0) throw SchemaError("--seeds", "must be positive");
    } catch (const ConfigError& e) {
        return config_failure(err, e);
    }
    try {
        fs::create_directories(cmd.out_dir);
        write_text(cmd.out_dir / "config.json", experiment_to_json(base));
        std::vector<std::uint64_t> seeds;
        for (std::size_t s = 1; s <= cmd.seeds; ++s) seeds.push_back(s);

        std::ofstream runs(cmd.out_dir / "runs.tsv");
        runs << "method\tseed";
        for (const std::string& c : metric_columns()) runs << '\t' << c;
        runs << "\tstatus\n";
        auto progress = [&](const AblationRow& row, const VariantRun& run) {
            runs << row.variant.name << '\t' << run.seed;
            if (run.eval) {
                for (const std::string& c : metric_cells(*run.eval, row.config)) runs << '\t' << c;
                runs << "\tok\n";
            } else {
                for (std::size_t i = 0; i < metric_columns().size(); ++i) runs << "\t-";
                runs << "\tfailed\n";
            }
            runs.flush();
            err << row.variant.name << " seed " << run.seed << (run.eval ? " done" : " failed: " + run.failure)
                << '\n';
        };
        const std::vector<AblationRow> rows = run_grid(base, cmd.grid, seeds, cmd.jobs, progress);
        {
            std::ofstream table(cmd.out_dir / "ablation.tsv");
            write_ablation_table(table, rows);
        }
        write_ablation_table(out, rows);
        return kExitOk;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

int run_gradcheck(const GradcheckCommand& cmd, std::ostream& out, std::ostream& err) {
    ExperimentConfig cfg;
    try {
        cfg = load_experiment(cmd.config);
        if (!cfg.architecture.is_tiny()) {
            throw SchemaError("architecture", "gradcheck needs a tiny architecture (every width at most 8)");
        }
    } catch (const ConfigError& e) {
        return config_failure(err, e);
    }
    try {
        const GradcheckReport report = run_gradcheck(cfg.architecture, cmd.seed);
        out << "group\tentries\tmax_rel_error\tworst_loss\tstatus\n";
        for (const GroupError& g : report.groups) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.3e", g.max_relative_error);
            out << g.group << '\t' << g.entries << '\t' << buf << '\t' << g.worst_loss << '\t'
                << (g.max_relative_error < report.tolerance ? "ok" : "FAIL") << '\n';
        }
        const auto failing = report.failing_groups();
        if (!failing.empty()) {
            err << "gradient check failed for:";
            for (const std::string& g : failing) err << ' ' << g;
            err << '\n';
            return kExitGradcheck;
        }
        char secs[32];
        std::snprintf(secs, sizeof secs, "%.1f", report.seconds);
        out << "passed: " << report.groups.size() << " groups below " << report.tolerance << " in " << secs << " s\n";
        return kExitOk;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

int run_gen_data(const GenDataCommand& cmd, std::ostream& out, std::ostream& err) {
    SceneConfig scene;
    try {
        scene = load_scene(cmd.scene_config);
    } catch (const ConfigError& e) {
        return config_failure(err, e);
    }
    try {
        const std::vector<Sample> samples = generate_dataset(scene, cmd.seed, cmd.count);
        write_dataset(cmd.out, samples);
        out << "wrote " << samples.size() << " samples to " << cmd.out.string() << '\n';
        return kExitOk;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

}  // namespace padnet
