#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlab/chain.hpp"
#include "nlab/json.hpp"
#include "nlab/ledger.hpp"

namespace nlab {

enum class Behavior { honest, double_spender, reverse_miner };

std::string_view to_string(Behavior b);

/// Private-fork attacker parameters. A double spender withholds a fork
/// holding `conflict` from the moment the transfer at `target_index` is
/// broadcast; a reverse miner forks `erase_depth` blocks behind its tip once
/// that tip reaches `trigger_height`. Both publish as soon as the private
/// fork is strictly longer (the double spender only after the victim saw
/// `confirmations` blocks) and give up once `give_up_deficit` blocks behind.
struct AttackParams {
    std::size_t target_index = 0;
    std::optional<TransferInstruction> conflict;
    std::uint64_t confirmations = 6;
    std::uint64_t erase_depth = 1;
    std::uint64_t trigger_height = 0; ///< 0 means erase_depth + 1
    std::uint64_t give_up_deficit = 12;
};

struct PeerConfig {
    std::string name;
    Behavior behavior = Behavior::honest;
    double hashpower_share = 1.0;
    AttackParams attack;
};

/// Per-message delay, uniform in [min_ms, max_ms].
struct LatencyModel {
    std::int64_t min_ms = 0;
    std::int64_t max_ms = 0;
};

struct ScheduledTransfer {
    std::int64_t time_ms = 0;
    TransferInstruction transfer;
    std::size_t origin = 0; ///< peer that first hears of it
};

struct SimConfig {
    std::vector<PeerConfig> peers;
    LatencyModel latency;
    unsigned difficulty_k = 4;
    Amount block_subsidy{50};
    std::uint64_t rng_seed = 0;
    std::uint64_t max_events = 1'000'000;
    std::int64_t block_interval_ms = 10'000; ///< mean time between blocks network-wide
    std::int64_t horizon_ms = 600'000;      ///< no new mining rounds start after this unless unsettled
    std::uint64_t max_blocks = 0;           ///< 0 means unbounded
    std::size_t max_block_transfers = 100;
    bool stop_when_attack_resolved = false;
    std::vector<std::pair<Address, Amount>> genesis;
    std::vector<ScheduledTransfer> transfers;
};

class ConfigInvalid : public std::invalid_argument {
public:
    ConfigInvalid(std::string field, const std::string& what)
        : std::invalid_argument(field + ": " + what), field_(std::move(field))
    {
    }
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

/// Throws ConfigInvalid naming the offending field.
void validate_config(const SimConfig& config);

/// Peer mining address, derived from its name.
KeyPair peer_keys(const std::string& name);

struct TraceRecord {
    std::int64_t time_ms = 0;
    std::int64_t peer = -1; ///< -1 for network-wide events
    std::string event;
    Json payload;
};

struct TipChange {
    std::int64_t time_ms = 0;
    std::size_t peer = 0;
    std::vector<Hash256> disconnected; ///< old tip first
    std::vector<Hash256> connected;    ///< lowest first
};

struct AttackOutcome {
    std::size_t peer = 0;
    Behavior behavior = Behavior::honest;
    bool triggered = false;
    bool victim_confirmed = false; ///< double spend: the victim (peer 0) saw the confirmations
    bool published = false;
    bool abandoned = false;
    bool adopted = false; ///< every honest peer ended on the attacker's fork
    bool success = false;
    std::uint64_t fork_height = 0;
    std::vector<Hash256> orphaned_transfers; ///< confirmed at peer 0, dropped by the rewrite
};

struct PeerSummary {
    std::string name;
    Behavior behavior = Behavior::honest;
    Hash256 tip;
    std::uint64_t height = 0;
    std::vector<Hash256> chain; ///< block hashes, genesis child first
};

struct SimReport {
    std::uint64_t seed = 0;
    std::vector<PeerSummary> peers;
    std::vector<Hash256> orphaned_blocks; ///< mined but not on peer 0's final chain
    std::uint64_t blocks_mined = 0;
    std::uint64_t fork_heights = 0; ///< heights at which more than one block was mined
    std::uint64_t events_processed = 0;
    bool converged = false;      ///< all honest peers share one tip
    bool hit_event_limit = false;
    std::vector<AttackOutcome> attacks;
    LedgerState final_state; ///< peer 0's best chain state
    bool conserved = false;  ///< balances + accruals == genesis + height * subsidy
    std::map<Hash256, Block> blocks; ///< every mined block
    std::vector<TipChange> tip_changes;
    std::vector<TraceRecord> trace;
};

/// Seeded discrete-event run. Deterministic: equal configs give equal
/// reports. Throws ConfigInvalid.
SimReport run_simulation(const SimConfig& config);

/// Blocks on peer `peer`'s final chain, genesis child first.
std::vector<Block> final_chain(const SimReport& report, std::size_t peer = 0);

/// Line-delimited JSON trace, one {time, peer, event, payload} per line.
std::string trace_jsonl(const SimReport& report);

/// Report body as JSON (trace summarized by count and digest).
Json report_json(const SimReport& report);

} // namespace nlab
