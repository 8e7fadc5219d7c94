#include "nlab/wallet.hpp"

#include <algorithm>

#include "nlab/json.hpp"
#include "nlab/rng.hpp"
#include "nlab/sha256.hpp"

namespace nlab {

namespace {

ByteVec random_bytes(CounterRng& rng, std::size_t n)
{
    ByteVec out(n);
    for (auto& b : out) b = static_cast<std::uint8_t>(rng() >> 56);
    return out;
}

ByteVec index_seed(const ByteVec& seed, std::uint64_t index)
{
    ByteVec out = seed;
    for (int i = 7; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(index >> (8 * i)));
    return out;
}

// SHA-256 in counter mode; encryption and decryption are the same XOR.
ByteVec keystream_xor(const Hash256& key, std::span<const std::uint8_t> nonce, std::span<const std::uint8_t> data)
{
    ByteVec out(data.begin(), data.end());
    for (std::size_t block = 0; block * 32 < out.size(); ++block) {
        std::array<std::uint8_t, 8> counter;
        for (int i = 0; i < 8; ++i) counter[i] = static_cast<std::uint8_t>(block >> (56 - 8 * i));
        const auto pad = Sha256().update(key.span()).update(nonce).update(counter).finish();
        for (std::size_t i = 0; i < 32 && block * 32 + i < out.size(); ++i) out[block * 32 + i] ^= pad.bytes()[i];
    }
    return out;
}

Hash256 mac(const Hash256& key, std::span<const std::uint8_t> nonce, std::span<const std::uint8_t> ciphertext)
{
    return Sha256().update("nlab/wallet/mac").update(key.span()).update(nonce).update(ciphertext).finish();
}

Json entry_json(const WalletLogEntry& e)
{
    Json j{{"instruction", e.instruction}, {"id", e.id}, {"status", std::string(to_string(e.status))}, {"height", e.height}};
    if (e.block) j["block"] = *e.block;
    return j;
}

TxStatus status_from_string(const std::string& s)
{
    if (s == "issued") return TxStatus::issued;
    if (s == "confirmed") return TxStatus::confirmed;
    if (s == "orphaned") return TxStatus::orphaned;
    throw WalletError(WalletErrc::corrupt, "unknown status " + s);
}

} // namespace

std::string_view to_string(TxStatus status)
{
    switch (status) {
    case TxStatus::issued: return "issued";
    case TxStatus::confirmed: return "confirmed";
    case TxStatus::orphaned: return "orphaned";
    }
    return "unknown";
}

Hash256 stretch_passphrase(std::string_view tag, std::span<const std::uint8_t> salt, std::string_view passphrase,
                           unsigned rounds)
{
    Hash256 h = Sha256().update(tag).update(salt).update(passphrase).finish();
    for (unsigned i = 1; i < rounds; ++i) h = Sha256().update(h.span()).update(salt).finish();
    return h;
}

Wallet Wallet::create(std::string_view passphrase, std::uint64_t seed, SignatureScheme scheme)
{
    CounterRng rng(seed, 0x3a11e7);
    Wallet w;
    w.seed_ = random_bytes(rng, 32);
    w.salt_ = random_bytes(rng, 16);
    w.scheme_ = scheme;
    w.commitment_ = stretch_passphrase("nlab/wallet/commit", w.salt_, passphrase);
    w.storage_key_ = stretch_passphrase("nlab/wallet/key", w.salt_, passphrase);
    return w;
}

void Wallet::check(std::string_view passphrase) const
{
    if (stretch_passphrase("nlab/wallet/commit", salt_, passphrase) != commitment_)
        throw WalletError(WalletErrc::wrong_passphrase, "wrong passphrase");
}

Address Wallet::new_address(std::string_view passphrase)
{
    check(passphrase);
    keys_.push_back(keygen(index_seed(seed_, keys_.size()), scheme_));
    return keys_.back().address;
}

const KeyPair* Wallet::find(const Address& k) const
{
    const auto it = std::find_if(keys_.begin(), keys_.end(), [&](const KeyPair& kp) { return kp.address == k; });
    return it == keys_.end() ? nullptr : &*it;
}

bool Wallet::owns(const Address& k) const
{
    return find(k) != nullptr;
}

std::vector<Address> Wallet::addresses() const
{
    std::vector<Address> out;
    for (const auto& kp : keys_) out.push_back(kp.address);
    return out;
}

TransferInstruction Wallet::sign_transfer(std::string_view passphrase, const Address& k, Amount r, const Address& l)
{
    check(passphrase);
    const KeyPair* keys = find(k);
    if (!keys) throw WalletError(WalletErrc::unknown_address, "address not owned by wallet: " + k.hex());
    auto t = make_transfer(*keys, r, l);
    append({t, transfer_id(t), TxStatus::issued, 0, std::nullopt});
    return t;
}

void Wallet::append(const WalletLogEntry& entry)
{
    log_.push_back(entry);
}

std::optional<TxStatus> Wallet::status(const Hash256& id) const
{
    for (auto it = log_.rbegin(); it != log_.rend(); ++it)
        if (it->id == id) return it->status;
    return std::nullopt;
}

void Wallet::watch(const TransferInstruction& t)
{
    const auto id = transfer_id(t);
    if (!status(id)) append({t, id, TxStatus::issued, 0, std::nullopt});
}

void Wallet::scan_block(const Block& b)
{
    const auto hash = block_hash(b);
    for (const auto& t : b.transfers) {
        const auto id = transfer_id(t);
        const auto current = status(id);
        if (!current || *current == TxStatus::confirmed) continue;
        append({t, id, TxStatus::confirmed, b.height, hash});
    }
}

void Wallet::scan_disconnected(const Block& b)
{
    const auto hash = block_hash(b);
    for (const auto& t : b.transfers) {
        const auto id = transfer_id(t);
        for (auto it = log_.rbegin(); it != log_.rend(); ++it) {
            if (it->id != id) continue;
            if (it->status == TxStatus::confirmed && it->block == hash)
                append({t, id, TxStatus::orphaned, b.height, hash});
            break;
        }
    }
}

std::string Wallet::save() const
{
    Json plain{{"seed", to_hex(seed_)}, {"scheme", std::string(to_string(scheme_))}, {"key_count", keys_.size()}};
    Json log = Json::array();
    for (const auto& e : log_) log.push_back(entry_json(e));
    plain["log"] = log;

    const auto text = plain.dump();
    // Deterministic nonce so identical wallets serialize identically.
    const auto nonce_hash = Sha256().update("nlab/wallet/nonce").update(text).finish();
    const std::span<const std::uint8_t> nonce = nonce_hash.span().first(16);
    const auto cipher = keystream_xor(storage_key_, nonce,
                                      std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
    Json blob{{"version", 1},
              {"kdf_rounds", 4096},
              {"salt", to_hex(salt_)},
              {"commitment", commitment_},
              {"nonce", to_hex(nonce)},
              {"ciphertext", to_hex(cipher)},
              {"mac", mac(storage_key_, nonce, cipher)}};
    return blob.dump(2) + "\n";
}

Wallet Wallet::load(std::string_view blob, std::string_view passphrase)
{
    Json doc;
    try {
        doc = Json::parse(blob);
    } catch (const Json::exception& e) {
        throw WalletError(WalletErrc::corrupt, e.what());
    }
    Wallet w;
    try {
        w.salt_ = from_hex(doc.at("salt").get<std::string>());
        w.commitment_ = doc.at("commitment").get<Hash256>();
        w.check(passphrase);
        w.storage_key_ = stretch_passphrase("nlab/wallet/key", w.salt_, passphrase);
        const auto nonce = from_hex(doc.at("nonce").get<std::string>());
        const auto cipher = from_hex(doc.at("ciphertext").get<std::string>());
        if (mac(w.storage_key_, nonce, cipher) != doc.at("mac").get<Hash256>())
            throw WalletError(WalletErrc::corrupt, "wallet authentication failed");
        const auto text = keystream_xor(w.storage_key_, nonce, cipher);
        const auto plain = Json::parse(text.begin(), text.end());
        w.seed_ = from_hex(plain.at("seed").get<std::string>());
        w.scheme_ = scheme_from_string(plain.at("scheme").get<std::string>());
        const auto key_count = plain.at("key_count").get<std::size_t>();
        for (std::size_t i = 0; i < key_count; ++i) w.keys_.push_back(keygen(index_seed(w.seed_, i), w.scheme_));
        for (const auto& e : plain.at("log")) {
            WalletLogEntry entry{e.at("instruction").get<TransferInstruction>(), e.at("id").get<Hash256>(),
                                 status_from_string(e.at("status").get<std::string>()),
                                 e.at("height").get<std::uint64_t>(), std::nullopt};
            if (e.contains("block")) entry.block = e.at("block").get<Hash256>();
            w.log_.push_back(entry);
        }
    } catch (const WalletError&) {
        throw;
    } catch (const std::exception& e) {
        throw WalletError(WalletErrc::corrupt, e.what());
    }
    return w;
}

} // namespace nlab
