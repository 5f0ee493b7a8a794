#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace gdvae {

// FNV-1a, 64 bit. Used for config/corpus/split digests where we need a
// stable fingerprint, not cryptographic strength.
class Fnv1a {
public:
    void update(const void* data, size_t n) {
        const unsigned char* p = static_cast<const unsigned char*>(data);
        for (size_t i = 0; i < n; ++i) {
            h_ ^= p[i];
            h_ *= 1099511628211ull;
        }
    }
    void update(std::string_view s) { update(s.data(), s.size()); }
    uint64_t value() const { return h_; }
    std::string hex() const;

private:
    uint64_t h_ = 14695981039346656037ull;
};

uint64_t fnv1a64(std::string_view s);
std::string hex64(uint64_t x);

// Digest of a file's raw bytes. Throws if the file cannot be read.
std::string digest_file(const std::string& path);

}  // namespace gdvae
