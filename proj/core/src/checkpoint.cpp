#include "gdvae/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <set>
#include <stdexcept>

namespace gdvae {

static const char kMagic[6] = {'G', 'D', 'V', 'A', 'E', '1'};

static void write_u32(std::ostream& out, uint32_t x) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(x >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 4);
}

static void write_u64(std::ostream& out, uint64_t x) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(x >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

static void write_f64(std::ostream& out, double x) {
    uint64_t bits;
    std::memcpy(&bits, &x, 8);
    write_u64(out, bits);
}

static uint32_t read_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw std::runtime_error("checkpoint truncated");
    uint32_t x = 0;
    for (int i = 0; i < 4; ++i) x |= static_cast<uint32_t>(b[i]) << (8 * i);
    return x;
}

static uint64_t read_u64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (!in) throw std::runtime_error("checkpoint truncated");
    uint64_t x = 0;
    for (int i = 0; i < 8; ++i) x |= static_cast<uint64_t>(b[i]) << (8 * i);
    return x;
}

static double read_f64(std::istream& in) {
    uint64_t bits = read_u64(in);
    double x;
    std::memcpy(&x, &bits, 8);
    return x;
}

void save_checkpoint(const std::string& path, const ParameterStore& params,
                     const std::string& config_digest) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    out.write(kMagic, sizeof(kMagic));
    for (const Parameter* p : params.list()) {
        write_u32(out, static_cast<uint32_t>(p->name.size()));
        out.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
        write_u32(out, 2);
        write_u64(out, static_cast<uint64_t>(p->value.rows));
        write_u64(out, static_cast<uint64_t>(p->value.cols));
        for (double x : p->value.v) write_f64(out, x);
    }
    write_u32(out, 0);
    write_u32(out, static_cast<uint32_t>(config_digest.size()));
    out.write(config_digest.data(), static_cast<std::streamsize>(config_digest.size()));
    if (!out) throw std::runtime_error("failed writing checkpoint: " + path);
}

void load_checkpoint(const std::string& path, ParameterStore& params,
                     const std::string& expected_config_digest) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    char magic[6];
    in.read(magic, 6);
    if (!in || std::memcmp(magic, kMagic, 6) != 0)
        throw std::runtime_error("not a checkpoint file: " + path);
    std::set<std::string> seen;
    for (;;) {
        uint32_t name_len = read_u32(in);
        if (name_len == 0) break;
        std::string name(name_len, '\0');
        in.read(name.data(), name_len);
        if (!in) throw std::runtime_error("checkpoint truncated");
        uint32_t rank = read_u32(in);
        if (rank != 2) throw std::runtime_error("checkpoint tensor " + name + " has rank " +
                                                std::to_string(rank) + ", expected 2");
        uint64_t rows = read_u64(in);
        uint64_t cols = read_u64(in);
        Parameter* p = params.find(name);
        if (p == nullptr) throw std::runtime_error("checkpoint has unknown tensor: " + name);
        if (rows != static_cast<uint64_t>(p->value.rows) ||
            cols != static_cast<uint64_t>(p->value.cols))
            throw std::runtime_error("checkpoint tensor " + name + " is " + std::to_string(rows) +
                                     "x" + std::to_string(cols) + ", expected " +
                                     p->value.shape_str());
        for (double& x : p->value.v) x = read_f64(in);
        if (!seen.insert(name).second)
            throw std::runtime_error("checkpoint repeats tensor: " + name);
    }
    uint32_t dig_len = read_u32(in);
    std::string digest(dig_len, '\0');
    in.read(digest.data(), dig_len);
    if (!in) throw std::runtime_error("checkpoint truncated");
    for (const Parameter* p : params.list())
        if (!seen.count(p->name))
            throw std::runtime_error("checkpoint is missing tensor: " + p->name);
    if (!expected_config_digest.empty() && digest != expected_config_digest)
        throw std::runtime_error("checkpoint was written under config digest " + digest +
                                 ", expected " + expected_config_digest);
}

std::string checkpoint_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    char magic[6];
    in.read(magic, 6);
    if (!in || std::memcmp(magic, kMagic, 6) != 0)
        throw std::runtime_error("not a checkpoint file: " + path);
    for (;;) {
        uint32_t name_len = read_u32(in);
        if (name_len == 0) break;
        in.seekg(name_len, std::ios::cur);
        uint32_t rank = read_u32(in);
        if (rank != 2) throw std::runtime_error("unexpected tensor rank in checkpoint");
        uint64_t rows = read_u64(in);
        uint64_t cols = read_u64(in);
        in.seekg(static_cast<std::streamoff>(rows * cols * 8), std::ios::cur);
        if (!in) throw std::runtime_error("checkpoint truncated");
    }
    uint32_t dig_len = read_u32(in);
    std::string digest(dig_len, '\0');
    in.read(digest.data(), dig_len);
    if (!in) throw std::runtime_error("checkpoint truncated");
    return digest;
}

}  // namespace gdvae
