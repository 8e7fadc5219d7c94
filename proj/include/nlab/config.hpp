#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nlab/json.hpp"
#include "nlab/sim.hpp"

namespace nlab {

/// 64 hex digits are taken as an address; anything else names an account
/// whose keys come from account_keys(name).
Address resolve_address(const std::string& name_or_hex);

/// {"<name or address>": "<amount>", ...}. Throws ConfigInvalid.
std::vector<std::pair<Address, Amount>> parse_allocation(const Json& j, const std::string& field = "genesis");

/// Array of transfers. Entries with a "signature" are taken as signed
/// instructions; entries without one must name the source account and are
/// signed with its deterministic keys. Throws ConfigInvalid.
std::vector<TransferInstruction> parse_transfers(const Json& j, const std::string& field = "transfers");

struct SimJob {
    SimConfig config;
    std::uint64_t races = 0; ///< > 0: repeat with per-race seeds and report the attack success frequency
};

/// Simulation config file (see README). Every error names the offending
/// field. Throws ConfigInvalid.
SimJob parse_sim_config(const Json& j);

} // namespace nlab
