#include "nlab/config.hpp"

#include <set>

#include "nlab/scenarios.hpp"

namespace nlab {

namespace {

void allow_only(const Json& j, const std::string& field, std::initializer_list<const char*> keys)
{
    if (!j.is_object()) throw ConfigInvalid(field, "expected an object");
    const std::set<std::string> known(keys.begin(), keys.end());
    for (const auto& [key, _] : j.items())
        if (!known.count(key)) throw ConfigInvalid(field.empty() ? key : field + "." + key, "unknown field");
}

std::string path(const std::string& parent, const std::string& key)
{
    return parent.empty() ? key : parent + "." + key;
}

template <class T>
T number(const Json& j, const std::string& parent, const char* key, T fallback)
{
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) throw ConfigInvalid(path(parent, key), "expected a number");
    } else if constexpr (std::is_unsigned_v<T>) {
        if (!v.is_number_unsigned()) throw ConfigInvalid(path(parent, key), "expected a non-negative integer");
    } else {
        if (!v.is_number_integer()) throw ConfigInvalid(path(parent, key), "expected an integer");
    }
    return v.get<T>();
}

Amount amount(const Json& j, const std::string& field)
{
    try {
        return j.get<Amount>();
    } catch (const std::exception& e) {
        throw ConfigInvalid(field, e.what());
    }
}

std::string text(const Json& j, const std::string& parent, const char* key)
{
    if (!j.contains(key) || !j.at(key).is_string()) throw ConfigInvalid(path(parent, key), "expected a string");
    return j.at(key).get<std::string>();
}

bool is_hex_address(const std::string& s)
{
    return s.size() == 64 && s.find_first_not_of("0123456789abcdefABCDEF") == std::string::npos;
}

TransferInstruction parse_transfer(const Json& j, const std::string& field)
{
    if (!j.is_object()) throw ConfigInvalid(field, "expected an object");
    if (j.contains("signature")) {
        try {
            TransferInstruction t = j.get<TransferInstruction>();
            return t;
        } catch (const std::exception& e) {
            throw ConfigInvalid(field, e.what());
        }
    }
    const auto from = text(j, field, "from");
    if (is_hex_address(from)) throw ConfigInvalid(path(field, "from"), "unsigned transfers must name an account");
    if (!j.contains("amount")) throw ConfigInvalid(path(field, "amount"), "missing");
    return make_transfer(account_keys(from), amount(j.at("amount"), path(field, "amount")),
                         resolve_address(text(j, field, "to")));
}

} // namespace

Address resolve_address(const std::string& name_or_hex)
{
    if (is_hex_address(name_or_hex)) return Address::from_hex(name_or_hex);
    if (name_or_hex.empty()) throw ConfigInvalid("address", "empty account name");
    return account_keys(name_or_hex).address;
}

std::vector<std::pair<Address, Amount>> parse_allocation(const Json& j, const std::string& field)
{
    if (!j.is_object()) throw ConfigInvalid(field, "expected an object of name or address to amount");
    std::vector<std::pair<Address, Amount>> out;
    std::set<Address> seen;
    for (const auto& [key, value] : j.items()) {
        const auto address = resolve_address(key);
        if (!seen.insert(address).second) throw ConfigInvalid(path(field, key), "duplicate address");
        out.emplace_back(address, amount(value, path(field, key)));
    }
    return out;
}

std::vector<TransferInstruction> parse_transfers(const Json& j, const std::string& field)
{
    if (!j.is_array()) throw ConfigInvalid(field, "expected an array");
    std::vector<TransferInstruction> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(parse_transfer(j[i], field + "[" + std::to_string(i) + "]"));
    return out;
}

SimJob parse_sim_config(const Json& j)
{
    allow_only(j, "",
               {"seed", "races", "difficulty_k", "block_subsidy", "max_events", "block_interval_ms", "horizon_ms",
                "max_blocks", "max_block_transfers", "stop_when_attack_resolved", "latency", "genesis", "peers",
                "transfers"});
    SimJob job;
    auto& c = job.config;
    c.rng_seed = number<std::uint64_t>(j, "", "seed", 0);
    job.races = number<std::uint64_t>(j, "", "races", 0);
    c.difficulty_k = number<unsigned>(j, "", "difficulty_k", c.difficulty_k);
    if (j.contains("block_subsidy")) c.block_subsidy = amount(j.at("block_subsidy"), "block_subsidy");
    c.max_events = number<std::uint64_t>(j, "", "max_events", c.max_events);
    c.block_interval_ms = number<std::int64_t>(j, "", "block_interval_ms", c.block_interval_ms);
    c.horizon_ms = number<std::int64_t>(j, "", "horizon_ms", c.horizon_ms);
    c.max_blocks = number<std::uint64_t>(j, "", "max_blocks", c.max_blocks);
    c.max_block_transfers = number<std::size_t>(j, "", "max_block_transfers", c.max_block_transfers);
    if (j.contains("stop_when_attack_resolved")) {
        if (!j.at("stop_when_attack_resolved").is_boolean())
            throw ConfigInvalid("stop_when_attack_resolved", "expected true or false");
        c.stop_when_attack_resolved = j.at("stop_when_attack_resolved").get<bool>();
    }
    if (j.contains("latency")) {
        const auto& l = j.at("latency");
        allow_only(l, "latency", {"min_ms", "max_ms"});
        c.latency.min_ms = number<std::int64_t>(l, "latency", "min_ms", 0);
        c.latency.max_ms = number<std::int64_t>(l, "latency", "max_ms", c.latency.min_ms);
    }
    if (j.contains("genesis")) c.genesis = parse_allocation(j.at("genesis"));

    if (!j.contains("peers") || !j.at("peers").is_array()) throw ConfigInvalid("peers", "expected an array");
    std::map<std::string, std::size_t> peer_index;
    for (std::size_t i = 0; i < j.at("peers").size(); ++i) {
        const auto& p = j.at("peers")[i];
        const auto field = "peers[" + std::to_string(i) + "]";
        allow_only(p, field, {"name", "behavior", "hashpower_share", "attack"});
        PeerConfig peer;
        peer.name = text(p, field, "name");
        const auto behavior = p.value("behavior", std::string("honest"));
        if (behavior == "honest")
            peer.behavior = Behavior::honest;
        else if (behavior == "double_spender")
            peer.behavior = Behavior::double_spender;
        else if (behavior == "reverse_miner")
            peer.behavior = Behavior::reverse_miner;
        else
            throw ConfigInvalid(field + ".behavior", "expected honest, double_spender or reverse_miner");
        if (!p.contains("hashpower_share")) throw ConfigInvalid(field + ".hashpower_share", "missing");
        peer.hashpower_share = number<double>(p, field, "hashpower_share", 0.0);
        if (p.contains("attack")) {
            const auto& a = p.at("attack");
            const auto af = field + ".attack";
            allow_only(a, af,
                       {"target", "conflict", "confirmations", "erase_depth", "trigger_height", "give_up_deficit"});
            peer.attack.target_index = number<std::size_t>(a, af, "target", 0);
            if (a.contains("conflict")) peer.attack.conflict = parse_transfer(a.at("conflict"), af + ".conflict");
            peer.attack.confirmations = number<std::uint64_t>(a, af, "confirmations", peer.attack.confirmations);
            peer.attack.erase_depth = number<std::uint64_t>(a, af, "erase_depth", peer.attack.erase_depth);
            peer.attack.trigger_height = number<std::uint64_t>(a, af, "trigger_height", 0);
            peer.attack.give_up_deficit = number<std::uint64_t>(a, af, "give_up_deficit", peer.attack.give_up_deficit);
        }
        peer_index[peer.name] = i;
        c.peers.push_back(std::move(peer));
    }

    if (j.contains("transfers")) {
        const auto& ts = j.at("transfers");
        if (!ts.is_array()) throw ConfigInvalid("transfers", "expected an array");
        for (std::size_t i = 0; i < ts.size(); ++i) {
            const auto field = "transfers[" + std::to_string(i) + "]";
            const auto& t = ts[i];
            if (!t.is_object()) throw ConfigInvalid(field, "expected an object");
            ScheduledTransfer s;
            s.time_ms = number<std::int64_t>(t, field, "time_ms", 0);
            if (t.contains("origin")) {
                const auto& o = t.at("origin");
                if (o.is_string()) {
                    const auto it = peer_index.find(o.get<std::string>());
                    if (it == peer_index.end()) throw ConfigInvalid(field + ".origin", "no such peer");
                    s.origin = it->second;
                } else {
                    s.origin = number<std::size_t>(t, field, "origin", 0);
                }
            }
            Json body = t;
            body.erase("time_ms");
            body.erase("origin");
            s.transfer = parse_transfer(body, field);
            c.transfers.push_back(std::move(s));
        }
    }
    validate_config(c);
    return job;
}

} // namespace nlab
