#include "hosgd/dataset_io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace hosgd {
namespace {

constexpr char kMagic[4] = {'H', 'O', 'S', 'G'};
constexpr std::uint32_t kVersion = 1;

void write_bytes(std::ofstream& out, const void* p, std::size_t n) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

void read_bytes(std::ifstream& in, void* p, std::size_t n, const std::string& what) {
    in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n) {
        throw std::runtime_error("dataset file truncated while reading " + what);
    }
}

}  // namespace

void save_dataset(const std::string& path, const Dataset& data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    const std::uint64_t K = data.rows();
    const std::uint64_t d = data.cols;
    write_bytes(out, kMagic, sizeof(kMagic));
    write_bytes(out, &kVersion, sizeof(kVersion));
    write_bytes(out, &K, sizeof(K));
    write_bytes(out, &d, sizeof(d));
    write_bytes(out, data.features.data(), data.features.size() * sizeof(double));
    write_bytes(out, data.targets.data(), data.targets.size() * sizeof(double));
    if (!out) throw std::runtime_error("write failed: " + path);
}

Dataset load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open dataset: " + path);
    char magic[4];
    read_bytes(in, magic, sizeof(magic), "magic");
    if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw std::runtime_error("not a HOSG dataset: " + path);
    }
    std::uint32_t version = 0;
    read_bytes(in, &version, sizeof(version), "version");
    if (version != kVersion) {
        throw std::runtime_error("unsupported HOSG version " + std::to_string(version));
    }
    std::uint64_t K = 0, d = 0;
    read_bytes(in, &K, sizeof(K), "row count");
    read_bytes(in, &d, sizeof(d), "column count");
    if (K == 0 || d == 0 || K > (1ull << 32) || d > (1ull << 24)) {
        throw std::runtime_error("implausible HOSG dimensions in " + path);
    }
    Dataset data;
    data.cols = static_cast<std::size_t>(d);
    data.features.resize(static_cast<std::size_t>(K * d));
    data.targets.resize(static_cast<std::size_t>(K));
    read_bytes(in, data.features.data(), data.features.size() * sizeof(double), "features");
    read_bytes(in, data.targets.data(), data.targets.size() * sizeof(double), "targets");
    return data;
}

}  // namespace hosgd
