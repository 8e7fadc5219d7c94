#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nlab/bitseq.hpp"

namespace nlab {

/// Addresses are the SHA-256 commitment to a tagged public key.
using Address = Hash256;
using ByteVec = std::vector<std::uint8_t>;

enum class SignatureScheme : std::uint8_t {
    /// Deterministic Schnorr over Z_p^*, p = 2^61 - 1. Toy strength.
    toy = 1,
    /// Ed25519 through libsodium.
    ed25519 = 2,
};

std::string_view to_string(SignatureScheme scheme);
/// Throws std::invalid_argument for an unknown name.
SignatureScheme scheme_from_string(std::string_view name);

struct Signature {
    SignatureScheme scheme = SignatureScheme::toy;
    ByteVec public_key;
    ByteVec data;

    friend bool operator==(const Signature&, const Signature&) = default;
};

struct KeyPair {
    SignatureScheme scheme = SignatureScheme::toy;
    ByteVec public_key;
    ByteVec secret_key;
    Address address; ///< the k of a transfer
};

Address address_of(SignatureScheme scheme, std::span<const std::uint8_t> public_key);

/// Deterministic key generation. Throws std::invalid_argument on an empty seed.
KeyPair keygen(std::span<const std::uint8_t> seed, SignatureScheme scheme = SignatureScheme::toy);
KeyPair keygen(std::string_view seed, SignatureScheme scheme = SignatureScheme::toy);

/// Throws std::invalid_argument when the secret key is malformed.
Signature sign(const KeyPair& keys, std::span<const std::uint8_t> message);

/// False on tampered message, wrong address, or malformed signature.
bool verify(const Address& address, std::span<const std::uint8_t> message, const Signature& sig);

} // namespace nlab
