#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "nlab/chain.hpp"
#include "nlab/ledger.hpp"
#include "nlab/signature.hpp"

namespace nlab {

enum class WalletErrc { wrong_passphrase, unknown_address, corrupt };

class WalletError : public std::runtime_error {
public:
    WalletError(WalletErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    WalletErrc code() const { return code_; }

private:
    WalletErrc code_;
};

enum class TxStatus { issued, confirmed, orphaned };

std::string_view to_string(TxStatus status);

struct WalletLogEntry {
    TransferInstruction instruction;
    Hash256 id;
    TxStatus status = TxStatus::issued;
    std::uint64_t height = 0;     ///< block height for confirmed/orphaned entries
    std::optional<Hash256> block; ///< containing block for confirmed/orphaned entries
};

/// Password protected key store with an append-only transaction log.
/// Status changes append a new entry; the latest entry per instruction id
/// is its current status.
class Wallet {
public:
    static Wallet create(std::string_view passphrase, std::uint64_t seed,
                         SignatureScheme scheme = SignatureScheme::toy);

    /// Derives the next key from the wallet seed. Throws WalletError.
    Address new_address(std::string_view passphrase);

    /// Signs sign(s, (k, r, l)) with the key for k and logs it as issued.
    /// Throws WalletError(wrong_passphrase | unknown_address) without
    /// changing state.
    TransferInstruction sign_transfer(std::string_view passphrase, const Address& k, Amount r, const Address& l);

    /// Logs an instruction signed elsewhere as issued so scans follow it.
    void watch(const TransferInstruction& t);

    /// Marks logged instructions contained in b as confirmed.
    void scan_block(const Block& b);
    /// Marks entries confirmed in b as orphaned (b left the best chain).
    void scan_disconnected(const Block& b);

    std::optional<TxStatus> status(const Hash256& id) const;
    const std::vector<WalletLogEntry>& log() const { return log_; }
    std::vector<Address> addresses() const;
    bool owns(const Address& k) const;

    /// Encrypted at-rest form (JSON text).
    std::string save() const;
    /// Throws WalletError(wrong_passphrase | corrupt).
    static Wallet load(std::string_view blob, std::string_view passphrase);

private:
    Wallet() = default;
    void check(std::string_view passphrase) const;
    const KeyPair* find(const Address& k) const;
    void append(const WalletLogEntry& entry);

    ByteVec seed_;
    ByteVec salt_;
    Hash256 commitment_;
    Hash256 storage_key_;
    SignatureScheme scheme_ = SignatureScheme::toy;
    std::vector<KeyPair> keys_;
    std::vector<WalletLogEntry> log_;
};

/// Iterated SHA-256 over (tag, salt, passphrase).
Hash256 stretch_passphrase(std::string_view tag, std::span<const std::uint8_t> salt, std::string_view passphrase,
                           unsigned rounds = 4096);

} // namespace nlab
