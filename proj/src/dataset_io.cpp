#include "padnet/dataset_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace padnet {
namespace {

constexpr std::uint8_t kMagic[4] = {'P', 'A', 'D', 'S'};

}  // namespace

void ByteWriter::u16(std::uint16_t v) {
    for (int i = 0; i < 2; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void ByteWriter::u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void ByteWriter::u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void ByteWriter::f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }

std::span<const std::uint8_t> ByteReader::bytes(std::size_t n, const char* what) {
    if (in_.size() - pos_ < n) {
        throw FormatError(std::string("truncated while reading ") + what, pos_);
    }
    auto out = in_.subspan(pos_, n);
    pos_ += n;
    return out;
}
std::uint8_t ByteReader::u8(const char* what) { return bytes(1, what)[0]; }
std::uint16_t ByteReader::u16(const char* what) {
    auto b = bytes(2, what);
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}
std::uint32_t ByteReader::u32(const char* what) {
    auto b = bytes(4, what);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[static_cast<std::size_t>(i)];
    return v;
}
std::uint64_t ByteReader::u64(const char* what) {
    auto b = bytes(8, what);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[static_cast<std::size_t>(i)];
    return v;
}
float ByteReader::f32(const char* what) { return std::bit_cast<float>(u32(what)); }

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("short write to '" + path.string() + "'");
}

std::vector<std::uint8_t> encode_dataset(std::span<const Sample> samples) {
    ByteWriter w;
    w.bytes(kMagic);
    w.u32(kDatasetVersion);
    w.u32(static_cast<std::uint32_t>(samples.size()));
    for (const Sample& s : samples) {
        w.u32(static_cast<std::uint32_t>(s.height()));
        w.u32(static_cast<std::uint32_t>(s.width()));
        w.u32(static_cast<std::uint32_t>(s.num_classes));
        for (double v : s.image.data()) w.f32(static_cast<float>(v));
        for (double v : s.depth.data()) w.f32(static_cast<float>(v));
        w.bytes(s.labels.data);
    }
    return std::move(w.buffer());
}

std::vector<Sample> decode_dataset(std::span<const std::uint8_t> bytes, double camera_constant) {
    ByteReader r(bytes);
    auto magic = r.bytes(4, "magic");
    if (std::memcmp(magic.data(), kMagic, 4) != 0) throw FormatError("bad dataset magic", 0);
    const std::size_t version_at = r.offset();
    const std::uint32_t version = r.u32("version");
    if (version != kDatasetVersion) {
        throw FormatError("unsupported dataset version " + std::to_string(version), version_at);
    }
    const std::uint32_t count = r.u32("sample count");
    std::vector<Sample> samples;
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::size_t header_at = r.offset();
        const std::uint32_t h = r.u32("sample height");
        const std::uint32_t w = r.u32("sample width");
        const std::uint32_t classes = r.u32("class count");
        if (h == 0 || w == 0 || classes == 0 || classes > 255) {
            throw FormatError("invalid header for sample " + std::to_string(i), header_at);
        }
        Sample s;
        s.num_classes = classes;
        s.image = Tensor4(Shape{1, 3, h, w});
        for (double& v : s.image.data()) v = r.f32("image");
        s.depth = Tensor4(Shape{1, 1, h, w});
        for (double& v : s.depth.data()) v = r.f32("depth");
        const std::size_t labels_at = r.offset();
        auto raw = r.bytes(static_cast<std::size_t>(h) * w, "labels");
        s.labels = LabelMap(1, h, w);
        std::copy(raw.begin(), raw.end(), s.labels.data.begin());
        for (std::size_t k = 0; k < raw.size(); ++k) {
            if (raw[k] >= classes && raw[k] != kIgnoreLabel) {
                throw FormatError("label " + std::to_string(raw[k]) + " out of range in sample " + std::to_string(i),
                                  labels_at + k);
            }
        }
        derive_targets(s, camera_constant);
        samples.push_back(std::move(s));
    }
    if (!r.at_end()) throw FormatError("trailing bytes after last sample", r.offset());
    return samples;
}

void write_dataset(const std::filesystem::path& path, std::span<const Sample> samples) {
    write_file(path, encode_dataset(samples));
}

std::vector<Sample> read_dataset(const std::filesystem::path& path, double camera_constant) {
    return decode_dataset(read_file(path), camera_constant);
}

}  // namespace padnet
