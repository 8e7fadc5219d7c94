#include "nlab/ledger.hpp"

#include <numeric>
#include <set>

#include "nlab/rng.hpp"
#include "nlab/sha256.hpp"

namespace nlab {

Amount Amount::operator+(Amount other) const
{
    if (value_ > UINT64_MAX - other.value_) throw std::overflow_error("amount overflow");
    return Amount(value_ + other.value_);
}

Amount Amount::operator-(Amount other) const
{
    if (other.value_ > value_) throw std::underflow_error("amount underflow");
    return Amount(value_ - other.value_);
}

std::string_view to_string(LedgerErrc code)
{
    switch (code) {
    case LedgerErrc::invalid_signature: return "InvalidSignature";
    case LedgerErrc::insufficient_balance: return "InsufficientBalance";
    case LedgerErrc::destination_blocked: return "DestinationBlocked";
    case LedgerErrc::self_transfer: return "SelfTransfer";
    case LedgerErrc::insufficient_balance_for_fee: return "InsufficientBalanceForFee";
    case LedgerErrc::already_blocked: return "AlreadyBlocked";
    case LedgerErrc::duplicate_address: return "DuplicateAddress";
    case LedgerErrc::height_regression: return "HeightRegression";
    }
    return "Unknown";
}

namespace {

void put_u64(ByteVec& out, std::uint64_t v)
{
    for (int i = 7; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put(ByteVec& out, const Hash256& h)
{
    out.insert(out.end(), h.bytes().begin(), h.bytes().end());
}

} // namespace

ByteVec transfer_message(const Address& from, Amount amount, const Address& to)
{
    ByteVec out;
    out.reserve(72);
    put(out, from);
    put_u64(out, amount.value());
    put(out, to);
    return out;
}

TransferInstruction make_transfer(const KeyPair& keys, Amount amount, const Address& to)
{
    return {keys.address, amount, to, sign(keys, transfer_message(keys.address, amount, to))};
}

Hash256 transfer_id(const TransferInstruction& t)
{
    const auto body = transfer_message(t.from, t.amount, t.to);
    const std::uint8_t scheme = static_cast<std::uint8_t>(t.signature.scheme);
    ByteVec lengths;
    put_u64(lengths, t.signature.public_key.size());
    put_u64(lengths, t.signature.data.size());
    return Sha256()
        .update(body)
        .update(std::span(&scheme, 1))
        .update(lengths)
        .update(t.signature.public_key)
        .update(t.signature.data)
        .finish();
}

ByteVec blocking_message(const Address& address, const BlockRecord& record)
{
    ByteVec out;
    out.reserve(41);
    put(out, address);
    out.push_back(static_cast<std::uint8_t>(record.mode));
    put_u64(out, record.mode == BlockMode::temporary ? record.expiry : 0);
    return out;
}

LedgerState LedgerState::genesis(const std::vector<std::pair<Address, Amount>>& allocations, const Address& fee_sink)
{
    LedgerState state;
    state.fee_sink_ = fee_sink;
    std::set<Address> seen;
    for (const auto& [address, amount] : allocations) {
        if (!seen.insert(address).second)
            throw LedgerError(LedgerErrc::duplicate_address, "duplicate genesis address " + address.hex());
        state.set_balance(address, amount);
        state.genesis_supply_ += amount;
    }
    return state;
}

Amount LedgerState::balance(const Address& k) const
{
    const auto it = balances_.find(k);
    return it == balances_.end() ? Amount{} : it->second;
}

void LedgerState::set_balance(const Address& k, Amount value)
{
    if (value.value() == 0)
        balances_.erase(k);
    else
        balances_[k] = value;
}

bool LedgerState::is_blocked(const Address& k) const
{
    const auto it = blocked_.find(k);
    if (it == blocked_.end()) return false;
    return it->second.mode == BlockMode::indefinite || height_ < it->second.expiry;
}

TransferReceipt LedgerState::submit_transfer(const TransferInstruction& t, const std::optional<Address>& fee_recipient)
{
    if (t.from == t.to) throw LedgerError(LedgerErrc::self_transfer, "transfer to its own source address");
    if (!verify(t.from, transfer_message(t.from, t.amount, t.to), t.signature))
        throw LedgerError(LedgerErrc::invalid_signature, "transfer signature does not verify under source");
    const Amount available = balance(t.from);
    if (t.amount > available)
        throw LedgerError(LedgerErrc::insufficient_balance, "transfer exceeds source balance");
    if (is_blocked(t.to)) throw LedgerError(LedgerErrc::destination_blocked, "destination is blocked");

    const Amount fee = available - t.amount;
    if (fee_recipient && fee.value() > 0 && is_blocked(*fee_recipient))
        throw LedgerError(LedgerErrc::destination_blocked, "fee recipient is blocked");

    // Stage every new value first so an overflow cannot leave a partial update.
    std::map<Address, Amount> staged{{t.from, Amount{}}};
    staged[t.to] = balance(t.to) + t.amount;
    Amount sink_total = fee_accruals_.count(fee_sink_) ? fee_accruals_.at(fee_sink_) : Amount{};
    if (fee_recipient) {
        const Amount before = staged.count(*fee_recipient) ? staged.at(*fee_recipient) : balance(*fee_recipient);
        staged[*fee_recipient] = before + fee;
    } else {
        sink_total += fee;
    }

    for (const auto& [address, value] : staged) set_balance(address, value);
    if (!fee_recipient && fee.value() > 0) fee_accruals_[fee_sink_] = sink_total;
    return {t.amount, fee, fee_recipient.value_or(fee_sink_), !fee_recipient.has_value(), height_};
}

BlockingReceipt LedgerState::block_address(const Address& k, const BlockRecord& record, const Signature& proof,
                                           Amount fee)
{
    if (!verify(k, blocking_message(k, record), proof))
        throw LedgerError(LedgerErrc::invalid_signature, "blocking proof does not verify");
    if (is_blocked(k)) throw LedgerError(LedgerErrc::already_blocked, "address already blocked");
    if (fee > balance(k)) throw LedgerError(LedgerErrc::insufficient_balance_for_fee, "cannot pay blocking fee");

    if (fee.value() > 0) {
        const Amount sink_total = (fee_accruals_.count(fee_sink_) ? fee_accruals_.at(fee_sink_) : Amount{}) + fee;
        fee_accruals_[fee_sink_] = sink_total;
    }
    set_balance(k, balance(k) - fee);
    blocked_[k] = record;
    return {k, record, fee, height_};
}

void LedgerState::credit_subsidy(const Address& k, Amount amount)
{
    if (amount.value() == 0) return;
    if (is_blocked(k)) throw LedgerError(LedgerErrc::destination_blocked, "subsidy recipient is blocked");
    const Amount updated = balance(k) + amount;
    const Amount issued = subsidies_ + amount;
    set_balance(k, updated);
    subsidies_ = issued;
}

void LedgerState::advance_height(std::uint64_t by)
{
    height_ += by;
}

void LedgerState::set_height(std::uint64_t h)
{
    if (h < height_) throw LedgerError(LedgerErrc::height_regression, "ledger height cannot decrease");
    height_ = h;
}

Amount LedgerState::total_balances() const
{
    Amount total;
    for (const auto& [_, amount] : balances_) total += amount;
    return total;
}

Amount LedgerState::total_fee_accruals() const
{
    Amount total;
    for (const auto& [_, amount] : fee_accruals_) total += amount;
    return total;
}

bool LedgerState::conserved() const
{
    return total_balances() + total_fee_accruals() == genesis_supply_ + subsidies_;
}

Challenge issue_challenge(std::uint64_t rng_seed)
{
    CounterRng rng(rng_seed, 0xc4a11e46e);
    Challenge c;
    for (std::size_t i = 0; i < 4; ++i) {
        const auto word = rng();
        for (std::size_t j = 0; j < 8; ++j) c.bytes()[8 * i + j] = static_cast<std::uint8_t>(word >> (56 - 8 * j));
    }
    return c;
}

Signature prove_control(const KeyPair& keys, const Challenge& c)
{
    return sign(keys, c.span());
}

bool verify_control(const Address& k, const Challenge& c, const Signature& sig)
{
    return verify(k, c.span(), sig);
}

} // namespace nlab
