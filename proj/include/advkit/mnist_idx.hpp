#pragma once

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <zlib.h>

#include "checkpoint.hpp" // io_error
#include "dataset.hpp"

namespace advkit {

// Malformed IDX content (bad magic, truncation, count mismatch).
struct idx_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::vector<unsigned char> read_binary_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw io_error("idx: cannot open " + path);
    }
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    if (in.bad()) {
        throw io_error("idx: read failed for " + path);
    }
    return bytes;
}

inline bool is_gzip(const std::vector<unsigned char>& b) {
    return b.size() >= 2 && b[0] == 0x1f && b[1] == 0x8b;
}

inline std::vector<unsigned char> gunzip(const std::vector<unsigned char>& in) {
    z_stream strm{};
    if (inflateInit2(&strm, 16 + MAX_WBITS) != Z_OK) {
        throw idx_error("idx: zlib init failed");
    }
    std::vector<unsigned char> out;
    out.resize(in.size() * 4 + 1024);
    strm.next_in = const_cast<Bytef*>(in.data());
    strm.avail_in = static_cast<uInt>(in.size());
    std::size_t written = 0;
    int rc = Z_OK;
    while (rc != Z_STREAM_END) {
        if (written == out.size()) out.resize(out.size() * 2);
        strm.next_out = out.data() + written;
        strm.avail_out = static_cast<uInt>(out.size() - written);
        rc = inflate(&strm, Z_NO_FLUSH);
        written = out.size() - strm.avail_out;
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&strm);
            throw idx_error("idx: corrupt gzip stream");
        }
    }
    inflateEnd(&strm);
    out.resize(written);
    return out;
}

inline std::uint32_t be_u32(const std::vector<unsigned char>& b, std::size_t off) {
    if (off + 4 > b.size()) {
        throw idx_error("idx: truncated header");
    }
    return (static_cast<std::uint32_t>(b[off]) << 24) |
           (static_cast<std::uint32_t>(b[off + 1]) << 16) |
           (static_cast<std::uint32_t>(b[off + 2]) << 8) |
           static_cast<std::uint32_t>(b[off + 3]);
}

} // namespace detail

// Loads an MNIST-format IDX image/label file pair into a Dataset. Both files
// may be gzip-compressed (detected by magic bytes). Headers are big-endian:
// images carry magic 0x00000803 then count, rows, cols; labels carry magic
// 0x00000801 then count. Pixels are bytes mapped to [0, 1] as byte / 255.
// `limit` keeps only the first examples.
inline Dataset load_mnist_idx(const std::string& images_path, const std::string& labels_path,
                              std::size_t limit = static_cast<std::size_t>(-1)) {
    std::vector<unsigned char> img = detail::read_binary_file(images_path);
    if (detail::is_gzip(img)) img = detail::gunzip(img);
    std::vector<unsigned char> lab = detail::read_binary_file(labels_path);
    if (detail::is_gzip(lab)) lab = detail::gunzip(lab);

    if (detail::be_u32(img, 0) != 0x00000803u) {
        throw idx_error("idx: bad image magic in " + images_path);
    }
    if (detail::be_u32(lab, 0) != 0x00000801u) {
        throw idx_error("idx: bad label magic in " + labels_path);
    }
    std::uint32_t n_img = detail::be_u32(img, 4);
    std::uint32_t rows = detail::be_u32(img, 8);
    std::uint32_t cols = detail::be_u32(img, 12);
    std::uint32_t n_lab = detail::be_u32(lab, 4);
    if (n_img != n_lab) {
        throw idx_error("idx: image/label count mismatch (" + std::to_string(n_img) +
                        " vs " + std::to_string(n_lab) + ")");
    }
    if (rows == 0 || cols == 0) {
        throw idx_error("idx: zero image dimensions");
    }
    std::size_t px = static_cast<std::size_t>(rows) * cols;
    std::size_t take = std::min<std::size_t>(limit, n_img);
    if (img.size() < 16 + static_cast<std::size_t>(n_img) * px) {
        throw idx_error("idx: truncated image payload in " + images_path);
    }
    if (lab.size() < 8 + n_lab) {
        throw idx_error("idx: truncated label payload in " + labels_path);
    }

    Dataset ds;
    ds.name = "mnist";
    ds.num_classes = 10;
    ds.input_shape = {rows, cols};
    ds.examples.reserve(take);
    for (std::size_t j = 0; j < take; ++j) {
        unsigned char label = lab[8 + j];
        if (label > 9) {
            throw idx_error("idx: label " + std::to_string(int(label)) + " out of range");
        }
        Tensor t({rows, cols});
        const unsigned char* src = img.data() + 16 + j * px;
        for (std::size_t i = 0; i < px; ++i) {
            t[i] = static_cast<double>(src[i]) / 255.0;
        }
        ds.examples.push_back({std::move(t), static_cast<int>(label)});
    }
    return ds;
}

} // namespace advkit
