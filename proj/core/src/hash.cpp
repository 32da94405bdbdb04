#include "enrichbench/hash.hpp"

#include <openssl/evp.h>

#include <array>
#include <stdexcept>

namespace enrichbench {

namespace {

std::string sha256_hex(const void* data, std::size_t size) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(data, size, md.data(), &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("EVP_Digest(sha256) failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(kHex[md[i] >> 4]);
        out.push_back(kHex[md[i] & 0x0f]);
    }
    return out;
}

}  // namespace

Digest Digest::of(std::string_view bytes) { return Digest(sha256_hex(bytes.data(), bytes.size())); }

Digest Digest::of(std::span<const std::byte> bytes) {
    return Digest(sha256_hex(bytes.data(), bytes.size()));
}

Digest Digest::from_hex(std::string_view hex) {
    if (hex.size() != 64) throw std::invalid_argument("digest must be 64 hex characters");
    for (char c : hex) {
        const bool ok = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
        if (!ok) throw std::invalid_argument("digest must be lowercase hex");
    }
    return Digest(std::string(hex));
}

}  // namespace enrichbench
