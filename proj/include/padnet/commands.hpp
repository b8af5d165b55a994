#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace padnet {

enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,
    kExitConfig = 2,
    kExitDiverged = 3,
    kExitDigestMismatch = 4,
    kExitGradcheck = 5,
};

struct TrainCommand {
    std::filesystem::path config;
    std::uint64_t seed = 0;
    std::filesystem::path out_dir;
};

struct EvalCommand {
    std::filesystem::path checkpoint;
    std::filesystem::path data;
    std::optional<std::filesystem::path> dump_dir;
    std::string rel_denominator = "gt";
    // Defaults to config.json next to the checkpoint.
    std::optional<std::filesystem::path> config;
};

struct AblateCommand {
    std::string grid;
    std::size_t seeds = 1;
    std::filesystem::path out_dir;
    std::size_t jobs = 1;
    std::optional<std::filesystem::path> config;  // defaults to the built-in ablation setup
};

struct GradcheckCommand {
    std::filesystem::path config;
    std::uint64_t seed = 0;
};

struct GenDataCommand {
    std::filesystem::path scene_config;
    std::size_t count = 0;
    std::filesystem::path out;
    std::uint64_t seed = 1;
};

// Each command reports results on `out`, diagnostics on `err`, and returns an ExitCode.
int run_train(const TrainCommand& cmd, std::ostream& out, std::ostream& err);
int run_eval(const EvalCommand& cmd, std::ostream& out, std::ostream& err);
int run_ablate(const AblateCommand& cmd, std::ostream& out, std::ostream& err);
int run_gradcheck(const GradcheckCommand& cmd, std::ostream& out, std::ostream& err);
int run_gen_data(const GenDataCommand& cmd, std::ostream& out, std::ostream& err);

}  // namespace padnet
