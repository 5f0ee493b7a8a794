#include "gdvae/digest.hpp"

#include "gdvae/rng.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace gdvae {

std::string Fnv1a::hex() const { return hex64(h_); }

uint64_t fnv1a64(std::string_view s) {
    Fnv1a f;
    f.update(s);
    return f.value();
}

std::string hex64(uint64_t x) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(x));
    return std::string(buf);
}

std::string digest_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file for digest: " + path);
    Fnv1a f;
    std::vector<char> buf(1 << 16);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        f.update(buf.data(), static_cast<size_t>(in.gcount()));
    }
    return f.hex();
}

uint64_t derive_seed(uint64_t base, std::string_view stream) {
    Fnv1a f;
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(base >> (8 * i));
    f.update(b, 8);
    f.update(stream);
    // avalanche so that nearby base seeds do not give nearby streams
    uint64_t x = f.value();
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdull;
    x ^= x >> 33;
    x *= 0xc4ceb9fe1a85ec53ull;
    x ^= x >> 33;
    return x;
}

}  // namespace gdvae
