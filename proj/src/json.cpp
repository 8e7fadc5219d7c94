#include "nlab/json.hpp"

#include <charconv>
#include <set>
#include <vector>

namespace nlab {

void to_json(Json& j, const Amount& a)
{
    j = std::to_string(a.value());
}

void from_json(const Json& j, Amount& a)
{
    if (j.is_number_unsigned()) {
        a = Amount(j.get<std::uint64_t>());
        return;
    }
    if (j.is_number_integer()) {
        const auto v = j.get<std::int64_t>();
        if (v < 0) throw std::invalid_argument("amount must be non-negative");
        a = Amount(static_cast<std::uint64_t>(v));
        return;
    }
    const auto text = j.get<std::string>();
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size())
        throw std::invalid_argument("amount must be a decimal string: " + text);
    a = Amount(v);
}

void to_json(Json& j, const Signature& s)
{
    j = Json{{"scheme", std::string(to_string(s.scheme))}, {"public_key", to_hex(s.public_key)}, {"sig", to_hex(s.data)}};
}

void from_json(const Json& j, Signature& s)
{
    s.scheme = scheme_from_string(j.at("scheme").get<std::string>());
    s.public_key = from_hex(j.at("public_key").get<std::string>());
    s.data = from_hex(j.at("sig").get<std::string>());
}

void to_json(Json& j, const TransferInstruction& t)
{
    j = Json{{"from", t.from}, {"amount", t.amount}, {"to", t.to}, {"signature", t.signature}};
}

void from_json(const Json& j, TransferInstruction& t)
{
    t.from = j.at("from").get<Address>();
    t.amount = j.at("amount").get<Amount>();
    t.to = j.at("to").get<Address>();
    t.signature = j.at("signature").get<Signature>();
}

void to_json(Json& j, const TransferReceipt& r)
{
    j = Json{{"amount", r.amount},
             {"fee", r.fee},
             {"fee_recipient", r.fee_recipient},
             {"fee_to_sink", r.fee_to_sink},
             {"height", r.height}};
}

void to_json(Json& j, const BlockRecord& r)
{
    if (r.mode == BlockMode::indefinite)
        j = Json{{"mode", "indefinite"}};
    else
        j = Json{{"mode", "temporary"}, {"expiry", r.expiry}};
}

void from_json(const Json& j, BlockRecord& r)
{
    const auto mode = j.at("mode").get<std::string>();
    if (mode == "indefinite") {
        r = {BlockMode::indefinite, 0};
    } else if (mode == "temporary") {
        r = {BlockMode::temporary, j.at("expiry").get<std::uint64_t>()};
    } else {
        throw std::invalid_argument("unknown blocking mode: " + mode);
    }
}

void to_json(Json& j, const Block& b)
{
    j = Json{{"prev_hash", b.prev_hash}, {"tx_digest", b.tx_digest}, {"nonce", b.nonce},
             {"miner", b.miner},         {"height", b.height},        {"transfers", b.transfers}};
}

void from_json(const Json& j, Block& b)
{
    b.prev_hash = j.at("prev_hash").get<Hash256>();
    b.tx_digest = j.at("tx_digest").get<Hash256>();
    b.nonce = j.at("nonce").get<BitSeq256>();
    b.miner = j.at("miner").get<Address>();
    b.height = j.at("height").get<std::uint64_t>();
    b.transfers = j.at("transfers").get<std::vector<TransferInstruction>>();
}

Json balances_json(const std::map<Address, Amount>& balances)
{
    Json out = Json::object();
    for (const auto& [address, amount] : balances) out[address.hex()] = amount;
    return out;
}

void to_json(Json& j, const LedgerState& s)
{
    Json blocked = Json::object();
    for (const auto& [address, record] : s.blocking_table()) blocked[address.hex()] = record;
    j = Json{{"height", s.height()},
             {"fee_sink", s.fee_sink()},
             {"balances", balances_json(s.balances())},
             {"fee_accruals", balances_json(s.fee_accruals())},
             {"blocked", blocked},
             {"genesis_supply", s.genesis_supply()},
             {"subsidies_issued", s.subsidies_issued()},
             {"conserved", s.conserved()}};
}

Json parse_strict(const std::string& text)
{
    // One key set per open object; the parser callback reports keys before
    // their values, so duplicates surface at the point they occur.
    std::vector<std::set<std::string>> open;
    auto callback = [&](int, Json::parse_event_t event, Json& parsed) {
        switch (event) {
        case Json::parse_event_t::object_start: open.emplace_back(); break;
        case Json::parse_event_t::object_end: open.pop_back(); break;
        case Json::parse_event_t::key: {
            const auto key = parsed.get<std::string>();
            if (!open.back().insert(key).second) throw std::invalid_argument("duplicate key: " + key);
            break;
        }
        default: break;
        }
        return true;
    };
    return Json::parse(text, callback);
}

std::vector<std::pair<Address, Amount>> parse_genesis(const std::string& text)
{
    Json doc;
    try {
        doc = parse_strict(text);
    } catch (const std::invalid_argument& e) {
        throw LedgerError(LedgerErrc::duplicate_address, e.what());
    }
    if (!doc.is_object()) throw std::invalid_argument("genesis must be a JSON object");
    std::vector<std::pair<Address, Amount>> out;
    for (const auto& [key, value] : doc.items()) out.emplace_back(Address::from_hex(key), value.get<Amount>());
    return out;
}

} // namespace nlab
