#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace veldt::crypto {

using Bytes = std::vector<std::uint8_t>;
using Hash256 = std::array<std::uint8_t, 32>;

struct CryptoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Hash256 sha256(std::span<const std::uint8_t> data);
Hash256 sha256(std::string_view data);
Hash256 hmac_sha256(std::span<const std::uint8_t> key, std::span<const std::uint8_t> data);

std::string to_hex(std::span<const std::uint8_t> data);
std::optional<Bytes> from_hex(std::string_view hex);
std::string base64_encode(std::span<const std::uint8_t> data);
std::optional<Bytes> base64_decode(std::string_view text);

Bytes random_bytes(std::size_t n);

// Ed25519 with raw 32-byte keys and 64-byte detached signatures.
struct Ed25519KeyPair {
    Bytes public_key;   // 32 bytes
    Bytes private_key;  // 32-byte seed
};

Ed25519KeyPair ed25519_generate();
Bytes ed25519_sign(std::span<const std::uint8_t> private_key, std::span<const std::uint8_t> message);
bool ed25519_verify(std::span<const std::uint8_t> public_key, std::span<const std::uint8_t> message,
                    std::span<const std::uint8_t> signature);

inline std::span<const std::uint8_t> as_bytes(std::string_view s) {
    return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

}  // namespace veldt::crypto
