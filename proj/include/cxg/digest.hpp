#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <string_view>

#include "cxg/error.hpp"

namespace cxg {

// FNV-1a 64-bit. Used for content digests in manifests and grammar metadata;
// not cryptographic, just a stable fingerprint.
class Fnv1a64 {
public:
    Fnv1a64& update(const void* data, std::size_t len) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < len; ++i) {
            state_ ^= p[i];
            state_ *= 0x100000001b3ULL;
        }
        return *this;
    }
    Fnv1a64& update(std::string_view s) { return update(s.data(), s.size()); }
    Fnv1a64& update_u64(std::uint64_t v) {
        unsigned char b[8];
        for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
        return update(b, 8);
    }

    std::uint64_t value() const { return state_; }

    std::string hex() const {
        static const char* digits = "0123456789abcdef";
        std::string out(16, '0');
        std::uint64_t v = state_;
        for (int i = 15; i >= 0; --i) {
            out[static_cast<std::size_t>(i)] = digits[v & 0xf];
            v >>= 4;
        }
        return out;
    }

private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

inline std::string digest_bytes(std::string_view bytes) {
    return Fnv1a64{}.update(bytes).hex();
}

inline std::string digest_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open file for digest: " + path);
    Fnv1a64 h;
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0)
        h.update(buf, static_cast<std::size_t>(in.gcount()));
    return h.hex();
}

}  // namespace cxg
