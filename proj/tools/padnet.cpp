#include <CLI11.hpp>

#include <iostream>

#include "padnet/commands.hpp"

int main(int argc, char** argv) {
    using namespace padnet;
    CLI::App app{"Multi-task depth and scene parsing network with multi-modal distillation"};
    app.require_subcommand(1);

    TrainCommand train;
    auto* train_cmd = app.add_subcommand("train", "Two-phase training; writes checkpoints, loss curve and metrics");
    train_cmd->add_option("--config", train.config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    train_cmd->add_option("--seed", train.seed, "Initialisation and shuffling seed")->required();
    train_cmd->add_option("--out", train.out_dir, "Output directory")->required();

    EvalCommand eval;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset file");
    eval_cmd->add_option("--ckpt", eval.checkpoint, "Checkpoint (.padc)")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--data", eval.data, "Dataset (.pads)")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--dump-dir", eval.dump_dir, "Write per-sample predictions here");
    eval_cmd->add_option("--rel-denominator", eval.rel_denominator, "Denominator of rel: gt or pred")
        ->check(CLI::IsMember({"gt", "pred"}));
    eval_cmd->add_option("--config", eval.config, "Experiment config (default: config.json beside the checkpoint)");

    AblateCommand ablate;
    auto* ablate_cmd = app.add_subcommand("ablate", "Train and compare the variants of an ablation grid");
    ablate_cmd->add_option("--grid", ablate.grid, "Grid name")->required();
    ablate_cmd->add_option("--seeds", ablate.seeds, "Seeds per variant (1..K)")->required();
    ablate_cmd->add_option("--out", ablate.out_dir, "Output directory")->required();
    ablate_cmd->add_option("--jobs", ablate.jobs, "Variants trained concurrently");
    ablate_cmd->add_option("--config", ablate.config, "Experiment config replacing the built-in ablation setup");

    GradcheckCommand gradcheck;
    auto* gradcheck_cmd = app.add_subcommand("gradcheck", "Finite-difference check of every parameter gradient");
    gradcheck_cmd->add_option("--config", gradcheck.config, "Experiment config with a tiny architecture")
        ->required()
        ->check(CLI::ExistingFile);
    gradcheck_cmd->add_option("--seed", gradcheck.seed, "Initialisation seed")->required();

    GenDataCommand gen;
    auto* gen_cmd = app.add_subcommand("gen-data", "Generate a synthetic dataset file");
    gen_cmd->add_option("--scene-config", gen.scene_config, "Scene config (JSON)")->required()->check(CLI::ExistingFile);
    gen_cmd->add_option("--count", gen.count, "Number of samples")->required();
    gen_cmd->add_option("--out", gen.out, "Output file (.pads)")->required();
    gen_cmd->add_option("--seed", gen.seed, "Seed of the first sample");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    if (*train_cmd) return run_train(train, std::cout, std::cerr);
    if (*eval_cmd) return run_eval(eval, std::cout, std::cerr);
    if (*ablate_cmd) return run_ablate(ablate, std::cout, std::cerr);
    if (*gradcheck_cmd) return run_gradcheck(gradcheck, std::cout, std::cerr);
    if (*gen_cmd) return run_gen_data(gen, std::cout, std::cerr);
    return kExitFailure;
}
