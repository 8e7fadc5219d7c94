#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "nlab/sim.hpp"

namespace nlab {

using Allocation = std::vector<std::pair<Address, Amount>>;

/// Deterministic keys for named accounts in configs and scenarios.
KeyPair account_keys(const std::string& name);

struct Check {
    std::string name;
    std::string expected;
    std::string actual;
    bool ok = false;
};

struct OabdReport {
    Amount q, r, g;
    Amount miner_fee_income;
    Amount source_final;
    Amount destination_final;
    std::vector<Check> checks;
    bool ok = false;
    SimReport sim;
};

/// Source k holds q; a donor sends g to k, then k signs (k, r, l). Both land
/// in the first block of a single honest miner, donation first. Throws
/// std::invalid_argument if r > q.
OabdReport run_oabd_scenario(Amount q, Amount r, Amount g);

/// Two peers: the honest victim (peer 0) with 1 - alpha and a double
/// spender with alpha. The attacker pays the victim its whole balance and
/// races a fork paying itself instead.
SimConfig double_spend_config(double alpha, std::uint64_t confirmations, std::uint64_t seed);

struct RaceSummary {
    double alpha = 0;
    std::uint64_t confirmations = 0;
    std::uint64_t races = 0;
    std::uint64_t triggered = 0;
    std::uint64_t published = 0;
    std::uint64_t abandoned = 0;
    std::uint64_t successes = 0;
    double success_frequency = 0;
    bool conserved = true; ///< every race
    std::vector<bool> outcomes; ///< per race, by index
};

/// Race i uses seed CounterRng(seed).at(i); races run on `jobs` threads and
/// are merged by index, so the result does not depend on jobs.
RaceSummary run_double_spend(double alpha, std::uint64_t confirmations, std::uint64_t races, std::uint64_t seed,
                             unsigned jobs = 1);

SimConfig reverse_mining_config(std::uint64_t erase_depth, double alpha, std::uint64_t seed);

struct ReverseMiningReport {
    std::uint64_t erase_depth = 0;
    double alpha = 0;
    AttackOutcome outcome;
    SimReport sim;
};

ReverseMiningReport run_reverse_mining(std::uint64_t erase_depth, double alpha, std::uint64_t seed);

/// Accounts "acct-0" .. "acct-{n-1}" with `each` apiece.
std::vector<KeyPair> scenario_accounts(std::size_t n);
Allocation equal_allocation(const std::vector<KeyPair>& accounts, Amount each);

/// Transfers between the given accounts, drawn against a running ledger so
/// most are valid; about `invalid_fraction` of them are made invalid (bad
/// signature or overspend).
std::vector<TransferInstruction> random_transfer_stream(const std::vector<KeyPair>& accounts,
                                                        const Allocation& genesis, std::size_t count,
                                                        std::uint64_t seed, double invalid_fraction = 0.0);

struct EquivalenceReport {
    bool equal = false;
    std::size_t submitted = 0;
    std::size_t accepted_chain = 0;
    std::size_t accepted_oracle = 0;
    std::uint64_t height = 0;
    bool conserved = false; ///< the simulation's own conservation check
    std::string mismatch;
};

/// Runs the stream through a single honest miner and, independently,
/// straight through a LedgerState in submission order with fees to the
/// miner and the subsidy for every block; compares the balance maps.
EquivalenceReport oracle_equivalence(const Allocation& genesis, const std::vector<TransferInstruction>& stream,
                                     std::uint64_t seed);

} // namespace nlab
