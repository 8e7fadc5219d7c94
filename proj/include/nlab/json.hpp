#pragma once

#include <string>

#include <json.hpp>

#include "nlab/chain.hpp"
#include "nlab/ledger.hpp"
#include "nlab/signature.hpp"

namespace nlab {

using Json = nlohmann::json;

// Hex (lowercase, no prefix) for bit sequences and byte strings; decimal
// strings for amounts.

template <std::size_t Bits>
void to_json(Json& j, const BitSeq<Bits>& b)
{
    j = b.hex();
}

template <std::size_t Bits>
void from_json(const Json& j, BitSeq<Bits>& b)
{
    b = BitSeq<Bits>::from_hex(j.get<std::string>());
}

void to_json(Json& j, const Amount& a);
/// Accepts a decimal string or a non-negative integer.
void from_json(const Json& j, Amount& a);

void to_json(Json& j, const Signature& s);
void from_json(const Json& j, Signature& s);

void to_json(Json& j, const TransferInstruction& t);
void from_json(const Json& j, TransferInstruction& t);

void to_json(Json& j, const TransferReceipt& r);
void to_json(Json& j, const BlockRecord& r);
void from_json(const Json& j, BlockRecord& r);

void to_json(Json& j, const Block& b);
void from_json(const Json& j, Block& b);

/// Snapshot: balances, blocking table, fee accruals, height, supply totals.
void to_json(Json& j, const LedgerState& s);

/// Balance map as {address-hex: "amount"}.
Json balances_json(const std::map<Address, Amount>& balances);

/// Parses JSON rejecting duplicate object keys at any depth. Throws
/// std::invalid_argument naming the duplicate.
Json parse_strict(const std::string& text);

/// Genesis file: {address-hex: amount}. Duplicates raise
/// LedgerError(duplicate_address).
std::vector<std::pair<Address, Amount>> parse_genesis(const std::string& text);

} // namespace nlab
