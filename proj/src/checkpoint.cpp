#include "padnet/checkpoint.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstring>

#include "padnet/dataset_io.hpp"

namespace padnet {
namespace {

constexpr std::uint8_t kMagic[4] = {'P', 'A', 'D', 'C'};
constexpr std::string_view kVelocityPrefix = "velocity/";

std::array<std::uint8_t, 32> sha256(std::span<const std::uint8_t> bytes) {
    std::array<std::uint8_t, 32> out{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 || len != out.size()) {
        throw std::runtime_error("SHA-256 computation failed");
    }
    return out;
}

void write_tensor(ByteWriter& w, const std::string& name, const Tensor4& t) {
    if (name.size() > 0xFFFF) throw ConfigError("parameter name too long: " + name);
    w.u16(static_cast<std::uint16_t>(name.size()));
    w.bytes({reinterpret_cast<const std::uint8_t*>(name.data()), name.size()});
    const Shape s = t.shape();
    w.u8(4);
    for (std::size_t d : {s.n, s.c, s.h, s.w}) w.u32(static_cast<std::uint32_t>(d));
    for (double v : t.data()) w.f32(static_cast<float>(v));
}

}  // namespace

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    for (std::uint8_t b : sha256(bytes)) {
        out.push_back(kHex[b >> 4]);
        out.push_back(kHex[b & 0xF]);
    }
    return out;
}

std::uint64_t sha256_u64(std::string_view text) {
    const auto digest = sha256({reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | digest[static_cast<std::size_t>(i)];
    return v;
}

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
    ByteWriter w;
    w.bytes(kMagic);
    w.u32(kCheckpointVersion);
    w.u64(ckpt.config_digest);
    w.u64(ckpt.iteration);
    w.u8(ckpt.phase);
    w.u32(static_cast<std::uint32_t>(ckpt.params.size() + ckpt.velocity.size()));
    for (const auto& [name, t] : ckpt.params) write_tensor(w, name, t);
    for (const auto& [name, t] : ckpt.velocity) write_tensor(w, std::string(kVelocityPrefix) + name, t);
    return std::move(w.buffer());
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    auto magic = r.bytes(4, "magic");
    if (std::memcmp(magic.data(), kMagic, 4) != 0) throw FormatError("bad checkpoint magic", 0);
    const std::size_t version_at = r.offset();
    const std::uint32_t version = r.u32("version");
    if (version != kCheckpointVersion) {
        throw FormatError("unsupported checkpoint version " + std::to_string(version), version_at);
    }
    Checkpoint ckpt;
    ckpt.config_digest = r.u64("config digest");
    ckpt.iteration = r.u64("iteration");
    ckpt.phase = r.u8("phase");
    const std::uint32_t count = r.u32("tensor count");
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::size_t name_len = r.u16("name length");
        auto raw = r.bytes(name_len, "tensor name");
        std::string name(raw.begin(), raw.end());
        const std::size_t rank_at = r.offset();
        const std::uint8_t rank = r.u8("rank");
        if (rank == 0 || rank > 4) throw FormatError("unsupported tensor rank " + std::to_string(rank), rank_at);
        std::array<std::size_t, 4> dims{1, 1, 1, 1};
        for (std::size_t d = 0; d < rank; ++d) dims[4 - rank + d] = r.u32("dimension");
        const Shape shape{dims[0], dims[1], dims[2], dims[3]};
        // Reject absurd sizes before allocating.
        if (shape.numel() > (bytes.size() - r.offset()) / 4) {
            throw FormatError("tensor '" + name + "' extends past end of file", r.offset());
        }
        Tensor4 t(shape);
        for (double& v : t.data()) v = r.f32("tensor data");
        const std::size_t entry_at = rank_at;
        try {
            if (name.starts_with(kVelocityPrefix)) {
                ckpt.velocity.add(name.substr(kVelocityPrefix.size()), std::move(t));
            } else {
                ckpt.params.add(std::move(name), std::move(t));
            }
        } catch (const ConfigError& e) {
            throw FormatError(e.what(), entry_at);
        }
    }
    if (!r.at_end()) throw FormatError("trailing bytes after last tensor", r.offset());
    return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    write_file(path, encode_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(read_file(path)); }

Checkpoint make_checkpoint(const TrainState& state, std::uint64_t config_digest) {
    Checkpoint c;
    c.config_digest = config_digest;
    c.iteration = state.iteration;
    c.phase = static_cast<std::uint8_t>(state.phase);
    c.params = state.params;
    c.velocity = state.optim.velocity;
    return c;
}

TrainState restore_state(const Checkpoint& ckpt) {
    TrainState s;
    s.params = ckpt.params;
    s.optim.velocity = ckpt.velocity;
    s.iteration = ckpt.iteration;
    s.phase = ckpt.phase;
    s.optim.phase = ckpt.phase;
    return s;
}

}  // namespace padnet
