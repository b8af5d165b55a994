#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "padnet/trainer.hpp"

namespace padnet {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Parameters and optimizer velocities of a run. Values are rounded to f32
/// when encoded; decoding widens back to f64.
struct Checkpoint {
    std::uint64_t config_digest = 0;
    std::uint64_t iteration = 0;
    std::uint8_t phase = 1;
    ParameterSet params;
    ParameterSet velocity;

    friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

/// "PADC" | u32 version | u64 digest | u64 iteration | u8 phase | u32 count |
/// per tensor: u16 name length, name, u8 rank, u32 dims[rank], f32 data.
/// Velocities are stored as tensors named "velocity/<param>".
[[nodiscard]] std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
[[nodiscard]] Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
[[nodiscard]] Checkpoint load_checkpoint(const std::filesystem::path& path);

[[nodiscard]] Checkpoint make_checkpoint(const TrainState& state, std::uint64_t config_digest);
[[nodiscard]] TrainState restore_state(const Checkpoint& ckpt);

/// Lowercase hex SHA-256 of a byte string.
[[nodiscard]] std::string sha256_hex(std::span<const std::uint8_t> bytes);
/// First eight SHA-256 bytes, little-endian.
[[nodiscard]] std::uint64_t sha256_u64(std::string_view text);

}  // namespace padnet
