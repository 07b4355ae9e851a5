#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace skillproof::crypto {

using Sha256Digest = std::array<std::uint8_t, 32>;

Sha256Digest sha256(std::span<const std::uint8_t> bytes);
Sha256Digest sha256(std::string_view bytes);

/// Lowercase hex of SHA-256.
std::string sha256_hex(std::string_view bytes);

std::string to_hex(std::span<const std::uint8_t> bytes);
std::optional<std::vector<std::uint8_t>> from_hex(std::string_view hex);

/// Standard-alphabet, padded base64.
std::string base64_encode(std::span<const std::uint8_t> bytes);
/// Strict decode: rejects non-alphabet characters and bad padding.
std::optional<std::vector<std::uint8_t>> base64_decode(std::string_view text);

using Ed25519PublicKey = std::array<std::uint8_t, 32>;
using Ed25519Signature = std::array<std::uint8_t, 64>;

// Owns a 32-byte RFC 8032 seed. Copyable value; the seed is wiped on
// destruction.
class Ed25519PrivateKey {
 public:
  static Ed25519PrivateKey from_seed(std::span<const std::uint8_t, 32> seed);
  /// Throws Error(kEntropyUnavailable) if the RNG cannot be seeded.
  static Ed25519PrivateKey generate();
  /// Reads a PKCS#8 PEM file. Throws Error(kKeyError) / Error(kIoError).
  static Ed25519PrivateKey from_pem_file(const std::filesystem::path& path);
  static Ed25519PrivateKey from_pem(std::string_view pem);

  Ed25519PrivateKey(const Ed25519PrivateKey&) = default;
  Ed25519PrivateKey& operator=(const Ed25519PrivateKey&) = default;
  ~Ed25519PrivateKey();

  Ed25519PublicKey public_key() const;
  Ed25519Signature sign(std::string_view message) const;
  std::string to_pem() const;

 private:
  explicit Ed25519PrivateKey(std::array<std::uint8_t, 32> seed) : seed_(seed) {}
  std::array<std::uint8_t, 32> seed_;
};

bool ed25519_verify(const Ed25519PublicKey& key, std::string_view message,
                    std::span<const std::uint8_t> signature);

/// Generates a fresh keypair.
struct KeyPair {
  Ed25519PrivateKey private_key;
  Ed25519PublicKey public_key;
};
KeyPair mint_ephemeral_key();

}  // namespace skillproof::crypto
