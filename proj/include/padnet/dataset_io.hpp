#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "padnet/data.hpp"

namespace padnet {

/// Malformed dataset or checkpoint file; `offset` is the byte position where
/// decoding failed.
class FormatError : public DataError {
public:
    FormatError(const std::string& what, std::size_t offset)
        : DataError(what + " (byte offset " + std::to_string(offset) + ")"), offset_(offset) {}
    [[nodiscard]] std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

inline constexpr std::uint32_t kDatasetVersion = 1;

/// "PADS" | u32 version | u32 count | per sample: u32 H, u32 W, u32 classes,
/// f32 image[3HW], f32 depth[HW], u8 labels[HW]. Little-endian throughout.
[[nodiscard]] std::vector<std::uint8_t> encode_dataset(std::span<const Sample> samples);

/// Derived maps are recomputed with `camera_constant`. Never returns a
/// partial sample set.
[[nodiscard]] std::vector<Sample> decode_dataset(std::span<const std::uint8_t> bytes, double camera_constant);

void write_dataset(const std::filesystem::path& path, std::span<const Sample> samples);
[[nodiscard]] std::vector<Sample> read_dataset(const std::filesystem::path& path,
                                               double camera_constant = SceneConfig{}.camera_constant);

/// Little-endian byte writer/reader shared by the binary formats.
class ByteWriter {
public:
    void bytes(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }
    void u8(std::uint8_t v) { out_.push_back(v); }
    void u16(std::uint16_t v);
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void f32(float v);
    [[nodiscard]] std::vector<std::uint8_t>& buffer() { return out_; }

private:
    std::vector<std::uint8_t> out_;
};

class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}
    std::span<const std::uint8_t> bytes(std::size_t n, const char* what);
    std::uint8_t u8(const char* what);
    std::uint16_t u16(const char* what);
    std::uint32_t u32(const char* what);
    std::uint64_t u64(const char* what);
    float f32(const char* what);
    [[nodiscard]] std::size_t offset() const { return pos_; }
    [[nodiscard]] bool at_end() const { return pos_ == in_.size(); }

private:
    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
};

[[nodiscard]] std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace padnet
