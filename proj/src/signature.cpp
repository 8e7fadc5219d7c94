#include "nlab/signature.hpp"

#include <mutex>
#include <stdexcept>

#include <sodium.h>

#include "nlab/sha256.hpp"

namespace nlab {

namespace {

// Toy group: multiplicative group modulo the Mersenne prime 2^61 - 1.
constexpr std::uint64_t kPrime = (std::uint64_t{1} << 61) - 1;
constexpr std::uint64_t kOrder = kPrime - 1;
constexpr std::uint64_t kGenerator = 37;

std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t m)
{
    return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

std::uint64_t pow_mod(std::uint64_t base, std::uint64_t exp)
{
    std::uint64_t result = 1;
    base %= kPrime;
    while (exp > 0) {
        if (exp & 1U) result = mul_mod(result, base, kPrime);
        base = mul_mod(base, base, kPrime);
        exp >>= 1;
    }
    return result;
}

void put_u64(ByteVec& out, std::uint64_t v)
{
    for (int i = 7; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_u64(std::span<const std::uint8_t> in)
{
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | in[i];
    return v;
}

std::uint64_t hash_to_u64(const Hash256& h)
{
    return get_u64(h.span());
}

void ensure_sodium()
{
    static std::once_flag once;
    std::call_once(once, [] {
        if (sodium_init() < 0) throw std::runtime_error("libsodium initialisation failed");
    });
}

KeyPair toy_keygen(std::span<const std::uint8_t> seed)
{
    const auto h = Sha256().update("nlab/toy/sk").update(seed).finish();
    const std::uint64_t x = hash_to_u64(h) % (kOrder - 1) + 1;
    KeyPair keys;
    keys.scheme = SignatureScheme::toy;
    put_u64(keys.secret_key, x);
    put_u64(keys.public_key, pow_mod(kGenerator, x));
    keys.address = address_of(keys.scheme, keys.public_key);
    return keys;
}

std::uint64_t toy_challenge(std::uint64_t commitment, std::span<const std::uint8_t> public_key,
                            std::span<const std::uint8_t> message)
{
    ByteVec r;
    put_u64(r, commitment);
    return hash_to_u64(Sha256().update("nlab/toy/e").update(r).update(public_key).update(message).finish()) % kOrder;
}

Signature toy_sign(const KeyPair& keys, std::span<const std::uint8_t> message)
{
    if (keys.secret_key.size() != 8) throw std::invalid_argument("toy secret key must be 8 bytes");
    const std::uint64_t x = get_u64(keys.secret_key);
    if (x == 0 || x >= kOrder) throw std::invalid_argument("toy secret key out of range");
    std::uint64_t nonce = hash_to_u64(Sha256().update("nlab/toy/k").update(keys.secret_key).update(message).finish()) % kOrder;
    if (nonce == 0) nonce = 1;
    const std::uint64_t commitment = pow_mod(kGenerator, nonce);
    const std::uint64_t e = toy_challenge(commitment, keys.public_key, message);
    const std::uint64_t s = (nonce + mul_mod(e, x, kOrder)) % kOrder;
    Signature sig{SignatureScheme::toy, keys.public_key, {}};
    put_u64(sig.data, commitment);
    put_u64(sig.data, s);
    return sig;
}

bool toy_verify(std::span<const std::uint8_t> message, const Signature& sig)
{
    if (sig.public_key.size() != 8 || sig.data.size() != 16) return false;
    const std::uint64_t y = get_u64(sig.public_key);
    const std::uint64_t commitment = get_u64(std::span(sig.data).first(8));
    const std::uint64_t s = get_u64(std::span(sig.data).last(8));
    if (y == 0 || y >= kPrime || commitment == 0 || commitment >= kPrime || s >= kOrder) return false;
    const std::uint64_t e = toy_challenge(commitment, sig.public_key, message);
    return pow_mod(kGenerator, s) == mul_mod(commitment, pow_mod(y, e), kPrime);
}

KeyPair ed25519_keygen(std::span<const std::uint8_t> seed)
{
    ensure_sodium();
    const auto h = Sha256().update("nlab/ed25519/seed").update(seed).finish();
    KeyPair keys;
    keys.scheme = SignatureScheme::ed25519;
    keys.public_key.resize(crypto_sign_PUBLICKEYBYTES);
    keys.secret_key.resize(crypto_sign_SECRETKEYBYTES);
    crypto_sign_seed_keypair(keys.public_key.data(), keys.secret_key.data(), h.bytes().data());
    keys.address = address_of(keys.scheme, keys.public_key);
    return keys;
}

Signature ed25519_sign(const KeyPair& keys, std::span<const std::uint8_t> message)
{
    ensure_sodium();
    if (keys.secret_key.size() != crypto_sign_SECRETKEYBYTES) throw std::invalid_argument("ed25519 secret key size");
    Signature sig{SignatureScheme::ed25519, keys.public_key, ByteVec(crypto_sign_BYTES)};
    crypto_sign_detached(sig.data.data(), nullptr, message.data(), message.size(), keys.secret_key.data());
    return sig;
}

bool ed25519_verify(std::span<const std::uint8_t> message, const Signature& sig)
{
    ensure_sodium();
    if (sig.public_key.size() != crypto_sign_PUBLICKEYBYTES || sig.data.size() != crypto_sign_BYTES) return false;
    return crypto_sign_verify_detached(sig.data.data(), message.data(), message.size(), sig.public_key.data()) == 0;
}

} // namespace

std::string_view to_string(SignatureScheme scheme)
{
    switch (scheme) {
    case SignatureScheme::toy: return "toy";
    case SignatureScheme::ed25519: return "ed25519";
    }
    return "unknown";
}

SignatureScheme scheme_from_string(std::string_view name)
{
    if (name == "toy") return SignatureScheme::toy;
    if (name == "ed25519") return SignatureScheme::ed25519;
    throw std::invalid_argument("unknown signature scheme: " + std::string(name));
}

Address address_of(SignatureScheme scheme, std::span<const std::uint8_t> public_key)
{
    const std::uint8_t tag = static_cast<std::uint8_t>(scheme);
    return Sha256().update(std::span(&tag, 1)).update(public_key).finish();
}

KeyPair keygen(std::span<const std::uint8_t> seed, SignatureScheme scheme)
{
    if (seed.empty()) throw std::invalid_argument("keygen: empty seed");
    switch (scheme) {
    case SignatureScheme::toy: return toy_keygen(seed);
    case SignatureScheme::ed25519: return ed25519_keygen(seed);
    }
    throw std::invalid_argument("keygen: unknown scheme");
}

KeyPair keygen(std::string_view seed, SignatureScheme scheme)
{
    return keygen(std::span(reinterpret_cast<const std::uint8_t*>(seed.data()), seed.size()), scheme);
}

Signature sign(const KeyPair& keys, std::span<const std::uint8_t> message)
{
    switch (keys.scheme) {
    case SignatureScheme::toy: return toy_sign(keys, message);
    case SignatureScheme::ed25519: return ed25519_sign(keys, message);
    }
    throw std::invalid_argument("sign: unknown scheme");
}

bool verify(const Address& address, std::span<const std::uint8_t> message, const Signature& sig)
{
    if (address_of(sig.scheme, sig.public_key) != address) return false;
    switch (sig.scheme) {
    case SignatureScheme::toy: return toy_verify(message, sig);
    case SignatureScheme::ed25519: return ed25519_verify(message, sig);
    }
    return false;
}

} // namespace nlab
