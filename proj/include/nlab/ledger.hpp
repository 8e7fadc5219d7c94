#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nlab/bitseq.hpp"
#include "nlab/signature.hpp"

namespace nlab {

/// Non-negative count of base units. Arithmetic is checked.
class Amount {
public:
    constexpr Amount() = default;
    constexpr explicit Amount(std::uint64_t value) : value_(value) {}

    constexpr std::uint64_t value() const { return value_; }

    /// Throws std::overflow_error.
    Amount operator+(Amount other) const;
    /// Throws std::underflow_error when other > *this.
    Amount operator-(Amount other) const;
    Amount& operator+=(Amount other) { return *this = *this + other; }
    Amount& operator-=(Amount other) { return *this = *this - other; }

    friend constexpr auto operator<=>(Amount, Amount) = default;

private:
    std::uint64_t value_ = 0;
};

enum class LedgerErrc {
    invalid_signature,
    insufficient_balance,
    destination_blocked,
    self_transfer,
    insufficient_balance_for_fee,
    already_blocked,
    duplicate_address,
    height_regression,
};

std::string_view to_string(LedgerErrc code);

class LedgerError : public std::runtime_error {
public:
    LedgerError(LedgerErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    LedgerErrc code() const { return code_; }

private:
    LedgerErrc code_;
};

/// sign(s, (k, r, l)).
struct TransferInstruction {
    Address from;
    Amount amount;
    Address to;
    Signature signature;

    friend bool operator==(const TransferInstruction&, const TransferInstruction&) = default;
};

/// Canonical bytes of (k, r, l): 32-byte k, 8-byte big-endian r, 32-byte l.
ByteVec transfer_message(const Address& from, Amount amount, const Address& to);

TransferInstruction make_transfer(const KeyPair& keys, Amount amount, const Address& to);

/// Digest of the canonical serialization including the signature.
Hash256 transfer_id(const TransferInstruction& t);

struct TransferReceipt {
    Amount amount;
    Amount fee;
    Address fee_recipient;
    bool fee_to_sink = true;
    std::uint64_t height = 0;
};

enum class BlockMode : std::uint8_t { temporary = 1, indefinite = 2 };

struct BlockRecord {
    BlockMode mode = BlockMode::indefinite;
    std::uint64_t expiry = 0; ///< temporary only: active while height < expiry

    friend bool operator==(const BlockRecord&, const BlockRecord&) = default;
};

/// Canonical bytes of the blocking request (k, mode, expiry).
ByteVec blocking_message(const Address& address, const BlockRecord& record);

struct BlockingReceipt {
    Address address;
    BlockRecord record;
    Amount fee;
    std::uint64_t height = 0;
};

/// Account-based ground truth ledger. Every mutating call either applies all
/// of its effects or throws LedgerError leaving the state untouched.
///
/// Zero balances are not stored, so two states holding the same balances
/// compare equal regardless of history.
class LedgerState {
public:
    LedgerState() = default;

    /// Throws LedgerError(duplicate_address).
    static LedgerState genesis(const std::vector<std::pair<Address, Amount>>& allocations, const Address& fee_sink);

    Amount balance(const Address& k) const;
    const std::map<Address, Amount>& balances() const { return balances_; }

    /// Moves r to l; everything else on k (the full residual q(k) - r) is the
    /// fee. The fee goes to fee_recipient when given, else accrues to the
    /// fee sink.
    TransferReceipt submit_transfer(const TransferInstruction& t,
                                    const std::optional<Address>& fee_recipient = std::nullopt);

    /// Address blocking service. The proof is a signature by k over
    /// blocking_message(k, record). The fee leaves q(k) for the fee sink.
    BlockingReceipt block_address(const Address& k, const BlockRecord& record, const Signature& proof, Amount fee);

    bool is_blocked(const Address& k) const;
    const std::map<Address, BlockRecord>& blocking_table() const { return blocked_; }

    /// New coins issued to k (block subsidy or external deposit).
    void credit_subsidy(const Address& k, Amount amount);

    std::uint64_t height() const { return height_; }
    void advance_height(std::uint64_t by = 1);
    /// Throws LedgerError(height_regression) when h < height().
    void set_height(std::uint64_t h);

    const Address& fee_sink() const { return fee_sink_; }
    const std::map<Address, Amount>& fee_accruals() const { return fee_accruals_; }

    Amount genesis_supply() const { return genesis_supply_; }
    Amount subsidies_issued() const { return subsidies_; }
    Amount total_balances() const;
    Amount total_fee_accruals() const;
    /// Sum of balances plus fee accruals equals genesis plus subsidies.
    bool conserved() const;

    friend bool operator==(const LedgerState&, const LedgerState&) = default;

private:
    void set_balance(const Address& k, Amount value);

    std::map<Address, Amount> balances_;
    std::map<Address, BlockRecord> blocked_;
    std::map<Address, Amount> fee_accruals_;
    Address fee_sink_;
    std::uint64_t height_ = 0;
    Amount genesis_supply_;
    Amount subsidies_;
};

/// 256-bit random challenge for proving control of an address.
using Challenge = BitSeq256;

Challenge issue_challenge(std::uint64_t rng_seed);
Signature prove_control(const KeyPair& keys, const Challenge& c);
bool verify_control(const Address& k, const Challenge& c, const Signature& sig);

} // namespace nlab
