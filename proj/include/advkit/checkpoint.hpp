#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mlp.hpp"

namespace advkit {

struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed, truncated, or incompatible checkpoint contents.
struct checkpoint_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CheckpointMeta {
    std::uint64_t seed = 0;
    std::uint32_t epochs = 0;
    double train_accuracy = 0.0;
    double test_accuracy = 0.0;
};

// Checkpoint layout (all integers and doubles little-endian):
//
//   bytes 0..7   magic "ADVKCKPT"
//   u32          format version (currently 1)
//   u32          layer count
//   per layer:   u32 in, u32 out, u8 activation (0 = relu, 1 = identity)
//   u64 seed, u32 epochs, f64 train_accuracy, f64 test_accuracy
//   per layer:   f64[out*in] weights row-major, f64[out] bias
//
// Writes go to "<path>.tmp" and are renamed into place, so a crash cannot
// leave a half-written file under the final name.

namespace detail {

inline constexpr char kCheckpointMagic[8] = {'A', 'D', 'V', 'K', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

inline void put_u32(std::string& b, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_u64(std::string& b, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) b.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_f64(std::string& b, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    put_u64(b, bits);
}

struct ByteReader {
    const unsigned char* p;
    std::size_t n;
    std::size_t off = 0;

    void need(std::size_t k) const {
        if (off + k > n) {
            throw checkpoint_error("checkpoint: truncated file");
        }
    }
    std::uint8_t u8() {
        need(1);
        return p[off++];
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[off + static_cast<std::size_t>(i)]) << (8 * i);
        off += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[off + static_cast<std::size_t>(i)]) << (8 * i);
        off += 8;
        return v;
    }
    double f64() {
        std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, sizeof v);
        return v;
    }
};

} // namespace detail

inline void save_checkpoint(const MlpClassifier& model, const CheckpointMeta& meta,
                            const std::string& path) {
    std::string buf;
    buf.append(detail::kCheckpointMagic, sizeof detail::kCheckpointMagic);
    detail::put_u32(buf, detail::kCheckpointVersion);
    detail::put_u32(buf, static_cast<std::uint32_t>(model.layers().size()));
    for (const DenseLayer& l : model.layers()) {
        detail::put_u32(buf, static_cast<std::uint32_t>(l.in));
        detail::put_u32(buf, static_cast<std::uint32_t>(l.out));
        buf.push_back(static_cast<char>(l.act));
    }
    detail::put_u64(buf, meta.seed);
    detail::put_u32(buf, meta.epochs);
    detail::put_f64(buf, meta.train_accuracy);
    detail::put_f64(buf, meta.test_accuracy);
    for (const DenseLayer& l : model.layers()) {
        for (double w : l.weights) detail::put_f64(buf, w);
        for (double b : l.bias) detail::put_f64(buf, b);
    }

    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw io_error("checkpoint: cannot open " + tmp + " for writing");
        }
        out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
        if (!out) {
            throw io_error("checkpoint: write failed for " + tmp);
        }
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        throw io_error("checkpoint: rename to " + path + " failed");
    }
}

struct LoadedCheckpoint {
    MlpClassifier model;
    CheckpointMeta meta;
};

inline LoadedCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw io_error("checkpoint: cannot open " + path);
    }
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) {
        throw io_error("checkpoint: read failed for " + path);
    }

    detail::ByteReader r{reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size()};
    r.need(sizeof detail::kCheckpointMagic);
    if (std::memcmp(bytes.data(), detail::kCheckpointMagic, sizeof detail::kCheckpointMagic) != 0) {
        throw checkpoint_error("checkpoint: corrupt file (bad magic)");
    }
    r.off = sizeof detail::kCheckpointMagic;
    std::uint32_t version = r.u32();
    if (version != detail::kCheckpointVersion) {
        throw checkpoint_error("checkpoint: unsupported version " + std::to_string(version));
    }
    std::uint32_t layer_count = r.u32();
    if (layer_count == 0 || layer_count > 1024) {
        throw checkpoint_error("checkpoint: corrupt file (layer count)");
    }

    std::vector<DenseLayer> layers(layer_count);
    for (DenseLayer& l : layers) {
        l.in = r.u32();
        l.out = r.u32();
        std::uint8_t act = r.u8();
        if (l.in == 0 || l.out == 0 || act > 1) {
            throw checkpoint_error("checkpoint: corrupt file (layer header)");
        }
        l.act = static_cast<Activation>(act);
    }

    LoadedCheckpoint result;
    result.meta.seed = r.u64();
    result.meta.epochs = r.u32();
    result.meta.train_accuracy = r.f64();
    result.meta.test_accuracy = r.f64();

    for (DenseLayer& l : layers) {
        l.weights.resize(l.in * l.out);
        for (double& w : l.weights) w = r.f64();
        l.bias.resize(l.out);
        for (double& b : l.bias) b = r.f64();
    }
    if (r.off != bytes.size()) {
        throw checkpoint_error("checkpoint: corrupt file (trailing bytes)");
    }

    result.model = MlpClassifier(std::move(layers));
    return result;
}

} // namespace advkit
