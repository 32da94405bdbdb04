#pragma once

#include <compare>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>

namespace enrichbench {

// Lowercase hex SHA-256 digest. Used for content addressing and payload
// integrity; always 64 characters.
class Digest {
public:
    Digest() = default;

    static Digest of(std::string_view bytes);
    static Digest of(std::span<const std::byte> bytes);
    // Accepts only 64 lowercase hex characters; throws std::invalid_argument.
    static Digest from_hex(std::string_view hex);

    const std::string& hex() const noexcept { return hex_; }
    bool empty() const noexcept { return hex_.empty(); }

    auto operator<=>(const Digest&) const = default;

private:
    explicit Digest(std::string hex) : hex_(std::move(hex)) {}
    std::string hex_;
};

}  // namespace enrichbench
