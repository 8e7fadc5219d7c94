#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "nlab/json.hpp"
#include "nlab/ledger.hpp"

namespace nlab::misuse {

using AgentId = std::string;
using KeyId = std::string;

/// Ordered by strength of the breach: a downgrade moves right.
enum class PresenceBelief { pseudomonopresent, almost_pseudomonopresent, multipresent, absent };
enum class Legality { legal, illegal };
enum class Tag { donation, extortion };
enum class MoneyMode { exim, non_exim };
enum class PatternLabel { CoA_only, CoA_SCC, CoA_DoA, pseudo_theft, incidentally_legalized_pseudo_theft, theft };

std::string_view to_string(PresenceBelief b);
std::string_view to_string(Legality l);
std::string_view to_string(Tag t);
std::string_view to_string(MoneyMode m);
std::string_view to_string(PatternLabel p);
MoneyMode mode_from_string(std::string_view s);

struct CoA {
    AgentId actor;
    KeyId key;
};
/// Secret coin capture: actor signs a transfer of `amount` from key to dest.
struct SCC {
    AgentId actor;
    KeyId key;
    KeyId dest;
    Amount amount;
};
struct DoA {
    AgentId actor; ///< who caused it; pairs with an earlier CoA by the same actor
    AgentId victim;
    KeyId key;
    BlockMode mode = BlockMode::indefinite;
};
/// Ends a temporary DoA.
struct Restore {
    AgentId victim;
    KeyId key;
};
/// actor makes observer believe `purported` controls key, contrary to fact.
struct ML {
    AgentId actor;
    AgentId observer;
    AgentId purported;
    KeyId key;
};
/// actor clears observer's true link for key.
struct MU {
    AgentId actor;
    AgentId observer;
    KeyId key;
};
struct ContaminatingDonation {
    AgentId actor;
    KeyId key;
    Amount amount;
};
struct ContaminatingExtortion {
    AgentId actor;
    KeyId key;
    Amount amount; ///< may be zero: the demand alone contaminates
};

// Defensive actions by the key's controller.
struct Announce {
    AgentId agent;
    KeyId key;
};
struct DenyLink {
    AgentId agent;
    KeyId key;
};
struct StoreBackup {
    AgentId agent;
    KeyId key;
};
struct Safeguard {
    AgentId agent;
    KeyId key;
};
/// Undoes the ML or MU at history index `event`.
struct Remediate {
    AgentId agent;
    std::size_t event = 0;
};

using EventBody = std::variant<CoA, SCC, DoA, Restore, ML, MU, ContaminatingDonation, ContaminatingExtortion,
                               Announce, DenyLink, StoreBackup, Safeguard, Remediate>;

struct MisuseEvent {
    EventBody body;
    Legality legality = Legality::legal;
};

std::string describe(const MisuseEvent& e);

class PreconditionViolated : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class InvalidSequence : public std::invalid_argument {
public:
    InvalidSequence(std::size_t index, const std::string& what)
        : std::invalid_argument("event " + std::to_string(index) + ": " + what), index_(index)
    {
    }
    std::size_t index() const { return index_; }

private:
    std::size_t index_;
};

struct KeySetup {
    KeyId id;
    std::optional<AgentId> owner;
    Amount balance;
    bool announced = false;
};

/// Value-semantic custody state. Every key id has a real key pair and a
/// ledger address, so SCC goes through signed ledger transfers.
class CustodyWorld {
public:
    CustodyWorld(std::vector<AgentId> agents, const std::vector<KeySetup>& keys);

    /// Throws PreconditionViolated and leaves the world unchanged.
    void apply(const MisuseEvent& e);

    const std::vector<AgentId>& agents() const { return agents_; }
    std::vector<KeyId> keys() const;
    const std::set<AgentId>& holders(const KeyId& k) const;
    std::optional<PresenceBelief> belief(const AgentId& a, const KeyId& k) const;
    std::optional<AgentId> link(const AgentId& observer, const KeyId& k) const;
    std::set<Tag> contamination(const KeyId& k) const;
    bool suspended(const AgentId& a, const KeyId& k) const;
    bool unrecoverable(const KeyId& k) const { return unrecoverable_.count(k) > 0; }
    bool announcement_active(const AgentId& a, const KeyId& k) const { return announced_.count({a, k}) > 0; }
    bool remedied(std::size_t event) const { return remedied_.count(event) > 0; }
    /// Agent whose true link the MU at history index `event` cleared.
    std::optional<AgentId> mu_target(std::size_t event) const;
    Amount balance(const KeyId& k) const;
    /// Sum of q(k) over keys the agent can currently use.
    Amount accessible_balance(const AgentId& a) const;
    const Address& address(const KeyId& k) const;
    const LedgerState& ledger() const { return ledger_; }
    const std::vector<MisuseEvent>& history() const { return history_; }

    /// Snapshot for reports and comparisons.
    Json to_json() const;

private:
    void require_agent(const AgentId& a) const;
    void require_key(const KeyId& k) const;
    void lower_belief(const AgentId& a, const KeyId& k, PresenceBelief to);

    std::vector<AgentId> agents_;
    std::map<KeyId, KeyPair> key_pairs_;
    std::map<KeyId, std::set<AgentId>> holders_;
    std::map<std::pair<AgentId, KeyId>, PresenceBelief> beliefs_;
    std::map<std::pair<AgentId, KeyId>, AgentId> links_;
    std::map<KeyId, std::set<Tag>> contamination_;
    std::set<std::pair<AgentId, KeyId>> suspended_;
    std::set<std::pair<AgentId, KeyId>> announced_;
    std::set<KeyId> unrecoverable_;
    std::set<std::size_t> remedied_;
    std::map<std::size_t, AgentId> mu_targets_;
    LedgerState ledger_;
    std::vector<MisuseEvent> history_;
};

struct Classification {
    PatternLabel label;
    std::vector<std::size_t> events; ///< triggering history indices

    friend bool operator==(const Classification&, const Classification&) = default;
};

/// Patterns over an applied history. An SCC or DoA by C on k pairs with the
/// latest earlier CoA by C on k; the composite is illegal when either part
/// is. Sorted by event indices, then label.
std::vector<Classification> classify_history(const std::vector<MisuseEvent>& history, MoneyMode mode);

/// Applies events to a copy of `initial` first. Throws InvalidSequence.
std::vector<Classification> classify(const CustodyWorld& initial, const std::vector<MisuseEvent>& events,
                                     MoneyMode mode);

/// Violated items (1..10) of the defensive policy for `agent` on `k`.
/// Items 8-10 count an ML/MU as remedied only if `agent` remediated it
/// within `deadline` later events.
std::vector<int> check_defensive_policy(const CustodyWorld& world, const AgentId& agent, const KeyId& k,
                                        std::size_t deadline = 10);

/// Scenario files: {mode, agents, keys: [{id, owner, balance, announced}],
/// events: [{type, ..., legality}]}. Throws std::invalid_argument.
struct Scenario {
    MoneyMode mode = MoneyMode::exim;
    std::vector<AgentId> agents;
    std::vector<KeySetup> keys;
    std::vector<MisuseEvent> events;
};
Scenario parse_scenario(const Json& j);
Json event_to_json(const MisuseEvent& e);

/// Runs a scenario: classification labels with event indices, the final
/// world, and policy violations for every (owner, key).
Json run_scenario(const Scenario& s);

} // namespace nlab::misuse
