#include "nlab/sim.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <queue>
#include <set>

#include "nlab/rng.hpp"
#include "nlab/sha256.hpp"

namespace nlab {

std::string_view to_string(Behavior b)
{
    switch (b) {
    case Behavior::honest: return "honest";
    case Behavior::double_spender: return "double_spender";
    case Behavior::reverse_miner: return "reverse_miner";
    }
    return "unknown";
}

KeyPair peer_keys(const std::string& name)
{
    return keygen("nlab/peer/" + name);
}

void validate_config(const SimConfig& config)
{
    if (config.peers.empty()) throw ConfigInvalid("peers", "at least one peer is required");
    double total = 0;
    std::set<std::string> names;
    for (std::size_t i = 0; i < config.peers.size(); ++i) {
        const auto& p = config.peers[i];
        const auto field = "peers[" + std::to_string(i) + "]";
        if (!(p.hashpower_share > 0) || !std::isfinite(p.hashpower_share))
            throw ConfigInvalid(field + ".hashpower_share", "must be positive");
        if (!names.insert(p.name).second) throw ConfigInvalid(field + ".name", "duplicate peer name");
        total += p.hashpower_share;
        if (p.behavior == Behavior::double_spender) {
            if (p.attack.target_index >= config.transfers.size())
                throw ConfigInvalid(field + ".attack.target", "no such transfer");
            if (!p.attack.conflict) throw ConfigInvalid(field + ".attack.conflict", "double spender needs a conflict");
            if (p.attack.conflict->from != config.transfers[p.attack.target_index].transfer.from)
                throw ConfigInvalid(field + ".attack.conflict", "must spend the target's source address");
        }
        if (p.behavior == Behavior::reverse_miner && p.attack.erase_depth == 0)
            throw ConfigInvalid(field + ".attack.erase_depth", "must be at least 1");
        if (p.behavior != Behavior::honest && p.attack.give_up_deficit == 0)
            throw ConfigInvalid(field + ".attack.give_up_deficit", "must be at least 1");
    }
    if (std::abs(total - 1.0) > 1e-9) throw ConfigInvalid("peers", "hashpower shares must sum to 1");
    if (config.peers.front().behavior != Behavior::honest)
        throw ConfigInvalid("peers[0].behavior", "peer 0 is the observing victim and must be honest");
    if (config.latency.min_ms < 0 || config.latency.max_ms < config.latency.min_ms)
        throw ConfigInvalid("latency", "need 0 <= min_ms <= max_ms");
    if (config.difficulty_k > 20) throw ConfigInvalid("difficulty_k", "must be at most 20");
    if (config.block_interval_ms <= 0) throw ConfigInvalid("block_interval_ms", "must be positive");
    if (config.max_events == 0) throw ConfigInvalid("max_events", "must be positive");
    if (config.max_block_transfers == 0) throw ConfigInvalid("max_block_transfers", "must be positive");
    for (std::size_t i = 0; i < config.transfers.size(); ++i) {
        const auto& t = config.transfers[i];
        if (t.origin >= config.peers.size())
            throw ConfigInvalid("transfers[" + std::to_string(i) + "].origin", "no such peer");
        if (t.time_ms < 0) throw ConfigInvalid("transfers[" + std::to_string(i) + "].time_ms", "must be >= 0");
    }
    try {
        LedgerState::genesis(config.genesis, Address{});
    } catch (const LedgerError& e) {
        throw ConfigInvalid("genesis", e.what());
    }
}

namespace {

constexpr std::size_t kNone = static_cast<std::size_t>(-1);

using IdSet = std::set<Hash256>;

struct Node {
    Block block;
    Hash256 hash;
    std::size_t parent = kNone;
    std::uint64_t height = 0;
    std::shared_ptr<const LedgerState> state;
    std::shared_ptr<const IdSet> included; ///< transfer ids from genesis to here
    std::size_t creator = kNone;
};

struct MempoolEntry {
    Hash256 id;
    TransferInstruction transfer;
};

enum class Phase { idle, withholding, published, done };

struct Peer {
    PeerConfig config;
    KeyPair keys;
    std::vector<std::int64_t> arrival; ///< per node; -1 when unknown
    std::int64_t next_arrival = 0;
    std::size_t best = 0;
    std::map<Hash256, std::vector<std::size_t>> waiting; ///< blocks whose parent is unknown here
    std::vector<MempoolEntry> mempool;
    IdSet mempool_ids;

    // Attackers only.
    Phase phase = Phase::idle;
    bool target_seen = false;
    std::size_t private_tip = kNone;
    std::size_t fork_first = kNone; ///< first block of the private fork
    std::vector<std::size_t> withheld;
    IdSet excluded;
    std::optional<Hash256> target_id;
    std::optional<MempoolEntry> conflict;
    std::size_t outcome = kNone;

    bool honest() const { return config.behavior == Behavior::honest; }
    bool knows(std::size_t node) const { return node < arrival.size() && arrival[node] >= 0; }
};

enum class EventKind { mine, deliver_block, deliver_transfer };

struct Event {
    std::int64_t time = 0;
    std::uint64_t seq = 0;
    EventKind kind = EventKind::mine;
    std::size_t peer = 0;
    std::size_t item = 0;

    bool operator>(const Event& o) const { return time != o.time ? time > o.time : seq > o.seq; }
};

class Simulation {
public:
    explicit Simulation(const SimConfig& config)
        : config_(config), rng_(config.rng_seed), target_(target_for_leading_zeros(config.difficulty_k))
    {
        validate_config(config);
    }

    SimReport run();

private:
    // Setup and plumbing.
    void schedule(std::int64_t time, EventKind kind, std::size_t peer, std::size_t item);
    std::int64_t latency();
    void trace(std::int64_t peer, std::string event, Json payload);

    // Chain helpers.
    bool descends_from(std::size_t node, std::size_t ancestor) const;
    std::size_t ancestor_at(std::size_t node, std::uint64_t height) const;
    std::size_t containing_block(std::size_t tip, const Hash256& id) const;
    std::vector<std::size_t> path_to(std::size_t tip) const;

    // Event handlers.
    void handle_mine();
    void handle_block(std::size_t peer, std::size_t node);
    void handle_transfer(std::size_t peer, std::size_t index);

    std::size_t mine_block(std::size_t peer);
    void accept_block(std::size_t peer, std::size_t node);
    void update_best(std::size_t peer, const std::vector<std::size_t>& fresh);
    void broadcast(std::size_t from, std::size_t node);
    void evaluate_attack(std::size_t peer);
    void publish(std::size_t peer);
    void check_resolution();

    bool settled() const;
    bool attacks_resolved() const;
    std::size_t pick_miner();

    const SimConfig& config_;
    CounterRng rng_;
    BitSeq256 target_;
    std::vector<Node> nodes_;
    std::map<Hash256, std::size_t> index_;
    std::vector<Peer> peers_;
    std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
    std::vector<MempoolEntry> transfers_;
    std::uint64_t seq_ = 0;
    std::int64_t now_ = 0;
    std::uint64_t in_flight_ = 0;
    bool mining_stopped_ = false;
    SimReport report_;
};

void Simulation::schedule(std::int64_t time, EventKind kind, std::size_t peer, std::size_t item)
{
    if (kind != EventKind::mine) ++in_flight_;
    queue_.push({time, seq_++, kind, peer, item});
}

std::int64_t Simulation::latency()
{
    if (config_.latency.max_ms == config_.latency.min_ms) return config_.latency.min_ms;
    return rng_.between(config_.latency.min_ms, config_.latency.max_ms);
}

void Simulation::trace(std::int64_t peer, std::string event, Json payload)
{
    report_.trace.push_back({now_, peer, std::move(event), std::move(payload)});
}

bool Simulation::descends_from(std::size_t node, std::size_t ancestor) const
{
    if (ancestor == kNone) return false;
    const auto h = nodes_[ancestor].height;
    while (node != kNone && nodes_[node].height > h) node = nodes_[node].parent;
    return node == ancestor;
}

std::size_t Simulation::ancestor_at(std::size_t node, std::uint64_t height) const
{
    while (nodes_[node].height > height) node = nodes_[node].parent;
    return node;
}

std::size_t Simulation::containing_block(std::size_t tip, const Hash256& id) const
{
    if (!nodes_[tip].included->count(id)) return kNone;
    std::size_t node = tip;
    while (nodes_[node].parent != kNone && nodes_[nodes_[node].parent].included->count(id)) node = nodes_[node].parent;
    return node;
}

std::vector<std::size_t> Simulation::path_to(std::size_t tip) const
{
    std::vector<std::size_t> path;
    for (std::size_t n = tip; n != 0 && n != kNone; n = nodes_[n].parent) path.push_back(n);
    std::reverse(path.begin(), path.end());
    return path;
}

std::size_t Simulation::pick_miner()
{
    const double u = rng_.unit();
    double cumulative = 0;
    for (std::size_t i = 0; i < peers_.size(); ++i) {
        cumulative += peers_[i].config.hashpower_share;
        if (u < cumulative) return i;
    }
    return peers_.size() - 1;
}

bool Simulation::attacks_resolved() const
{
    for (const auto& p : peers_)
        if (!p.honest() && p.phase != Phase::done && (p.phase != Phase::idle || p.config.behavior == Behavior::reverse_miner ||
                                                      !p.target_seen))
            return false;
    return true;
}

bool Simulation::settled() const
{
    if (in_flight_ > 0) return false;
    std::optional<std::size_t> tip;
    for (const auto& p : peers_) {
        if (!p.honest()) {
            if (p.phase == Phase::withholding || p.phase == Phase::published) return false;
            continue;
        }
        if (tip && *tip != p.best) return false;
        tip = p.best;
        const auto& included = *nodes_[p.best].included;
        for (const auto& e : p.mempool)
            if (!included.count(e.id)) return false;
    }
    return true;
}

std::size_t Simulation::mine_block(std::size_t miner)
{
    auto& peer = peers_[miner];
    const bool private_mode = peer.phase == Phase::withholding || peer.phase == Phase::published;
    const std::size_t parent = private_mode ? peer.private_tip : peer.best;
    const Node& base = nodes_[parent];

    // Pick transfers FIFO, dropping any that fail against the tip state.
    LedgerState scratch = *base.state;
    scratch.set_height(base.height + 1);
    std::vector<TransferInstruction> chosen;
    auto try_add = [&](const MempoolEntry& e) {
        if (chosen.size() >= config_.max_block_transfers) return true;
        if (base.included->count(e.id) || (private_mode && peer.excluded.count(e.id))) return true;
        if (peer.target_id && *peer.target_id == e.id) return true;
        try {
            scratch.submit_transfer(e.transfer, peer.keys.address);
            chosen.push_back(e.transfer);
            return true;
        } catch (const LedgerError& err) {
            trace(static_cast<std::int64_t>(miner), "evict", {{"transfer", e.id}, {"reason", to_string(err.code())}});
            return false;
        }
    };
    if (private_mode && peer.conflict) try_add(*peer.conflict);
    std::vector<MempoolEntry> kept;
    for (auto& e : peer.mempool) {
        if (try_add(e))
            kept.push_back(std::move(e));
        else
            peer.mempool_ids.erase(e.id);
    }
    peer.mempool = std::move(kept);

    Node node;
    node.block = assemble_block(base.hash, base.height + 1, peer.keys.address, std::move(chosen));
    seal_block(node.block, target_);
    node.state = std::make_shared<const LedgerState>(
        validate_block(*base.state, node.block, target_, config_.block_subsidy));
    node.hash = block_hash(node.block);
    node.parent = parent;
    node.height = node.block.height;
    auto included = std::make_shared<IdSet>(*base.included);
    for (const auto& t : node.block.transfers) included->insert(transfer_id(t));
    node.included = std::move(included);
    node.creator = miner;

    const std::size_t id = nodes_.size();
    index_[node.hash] = id;
    nodes_.push_back(std::move(node));
    for (auto& p : peers_) p.arrival.push_back(-1);
    ++report_.blocks_mined;

    const Node& made = nodes_[id];
    trace(static_cast<std::int64_t>(miner), "mine",
          {{"block", made.hash}, {"height", made.height}, {"transfers", made.block.transfers.size()},
           {"private", peer.phase == Phase::withholding}});
    return id;
}

void Simulation::broadcast(std::size_t from, std::size_t node)
{
    for (std::size_t to = 0; to < peers_.size(); ++to)
        if (to != from) schedule(now_ + latency(), EventKind::deliver_block, to, node);
}

void Simulation::handle_mine()
{
    if (mining_stopped_) return;
    if ((config_.max_blocks > 0 && report_.blocks_mined >= config_.max_blocks) ||
        (now_ >= config_.horizon_ms && settled())) {
        mining_stopped_ = true;
        return;
    }
    const std::size_t miner = pick_miner();
    auto& peer = peers_[miner];
    const std::size_t node = mine_block(miner);
    if (peer.phase == Phase::withholding) {
        peer.private_tip = node;
        if (peer.fork_first == kNone) peer.fork_first = node;
        peer.withheld.push_back(node);
    } else {
        if (peer.phase == Phase::published) peer.private_tip = node;
        accept_block(miner, node);
        broadcast(miner, node);
    }
    evaluate_attack(miner);
    check_resolution();

    const auto gap = static_cast<std::int64_t>(std::ceil(rng_.exponential(static_cast<double>(config_.block_interval_ms))));
    schedule(now_ + std::max<std::int64_t>(1, gap), EventKind::mine, 0, 0);
}

void Simulation::handle_block(std::size_t peer, std::size_t node)
{
    --in_flight_;
    accept_block(peer, node);
    evaluate_attack(peer);
    check_resolution();
}

void Simulation::accept_block(std::size_t peer_index, std::size_t node)
{
    auto& peer = peers_[peer_index];
    if (peer.knows(node)) return;
    const std::size_t parent = nodes_[node].parent;
    if (!peer.knows(parent)) {
        peer.waiting[nodes_[parent].hash].push_back(node);
        return;
    }

    std::vector<std::size_t> fresh;
    std::vector<std::size_t> todo{node};
    while (!todo.empty()) {
        const std::size_t n = todo.back();
        todo.pop_back();
        if (peer.knows(n)) continue;
        const Node& b = nodes_[n];
        // Every adopted block satisfies the puzzle and replays cleanly (its
        // state was produced by validate_block when it was mined).
        if (!phi({header_digest(b.block), target_}, b.block.nonce) || !b.state)
            throw std::logic_error("invalid block reached a peer");
        peer.arrival[n] = peer.next_arrival++;
        fresh.push_back(n);
        trace(static_cast<std::int64_t>(peer_index), "receive", {{"block", b.hash}, {"height", b.height}});
        const auto it = peer.waiting.find(b.hash);
        if (it != peer.waiting.end()) {
            for (const auto child : it->second) todo.push_back(child);
            peer.waiting.erase(it);
        }
    }
    update_best(peer_index, fresh);
}

void Simulation::update_best(std::size_t peer_index, const std::vector<std::size_t>& fresh)
{
    auto& peer = peers_[peer_index];
    std::vector<ChainCandidate> candidates{{nodes_[peer.best].hash, nodes_[peer.best].height,
                                            static_cast<std::uint64_t>(peer.arrival[peer.best])}};
    for (const auto n : fresh)
        candidates.push_back({nodes_[n].hash, nodes_[n].height, static_cast<std::uint64_t>(peer.arrival[n])});
    const std::size_t winner = index_.at(candidates[fork_choice(candidates)].tip);
    if (winner == peer.best) return;

    const std::size_t old = peer.best;
    TipChange change{now_, peer_index, {}, {}};
    std::size_t a = old;
    std::size_t b = winner;
    std::vector<Hash256> connected;
    while (nodes_[a].height > nodes_[b].height) {
        change.disconnected.push_back(nodes_[a].hash);
        a = nodes_[a].parent;
    }
    while (nodes_[b].height > nodes_[a].height) {
        connected.push_back(nodes_[b].hash);
        b = nodes_[b].parent;
    }
    while (a != b) {
        change.disconnected.push_back(nodes_[a].hash);
        connected.push_back(nodes_[b].hash);
        a = nodes_[a].parent;
        b = nodes_[b].parent;
    }
    change.connected.assign(connected.rbegin(), connected.rend());
    peer.best = winner;

    trace(static_cast<std::int64_t>(peer_index), change.disconnected.empty() ? "extend" : "reorg",
          {{"tip", nodes_[winner].hash}, {"height", nodes_[winner].height}, {"depth", change.disconnected.size()}});

    if (peer_index == 0) {
        for (auto& attacker : peers_) {
            if (attacker.outcome == kNone) continue;
            auto& outcome = report_.attacks[attacker.outcome];
            if (attacker.target_id && !outcome.victim_confirmed) {
                const std::size_t holder = containing_block(winner, *attacker.target_id);
                if (holder != kNone && nodes_[winner].height - nodes_[holder].height + 1 >= attacker.config.attack.confirmations)
                    outcome.victim_confirmed = true;
            }
            // Transfers dropped when peer 0 first moves onto the private fork.
            if (outcome.orphaned_transfers.empty() && attacker.fork_first != kNone && !change.disconnected.empty() &&
                descends_from(winner, attacker.fork_first) && !descends_from(old, attacker.fork_first)) {
                const auto& now_included = *nodes_[winner].included;
                for (const auto& h : change.disconnected)
                    for (const auto& t : nodes_[index_.at(h)].block.transfers) {
                        const auto id = transfer_id(t);
                        if (!now_included.count(id)) outcome.orphaned_transfers.push_back(id);
                    }
            }
        }
    }
    report_.tip_changes.push_back(std::move(change));
}

void Simulation::handle_transfer(std::size_t peer_index, std::size_t index)
{
    --in_flight_;
    auto& peer = peers_[peer_index];
    const auto& entry = transfers_[index];
    if (config_.transfers[index].origin == peer_index)
        trace(static_cast<std::int64_t>(peer_index), "transfer", {{"transfer", entry.id}, {"index", index}});
    if (peer.mempool_ids.insert(entry.id).second) peer.mempool.push_back(entry);
    if (peer.config.behavior == Behavior::double_spender && peer.config.attack.target_index == index)
        peer.target_seen = true;
    evaluate_attack(peer_index);
    check_resolution();
}

void Simulation::publish(std::size_t peer_index)
{
    auto& peer = peers_[peer_index];
    peer.phase = Phase::published;
    report_.attacks[peer.outcome].published = true;
    trace(static_cast<std::int64_t>(peer_index), "publish",
          {{"blocks", peer.withheld.size()}, {"tip", nodes_[peer.private_tip].hash}});
    for (const auto n : peer.withheld) {
        accept_block(peer_index, n);
        broadcast(peer_index, n);
    }
    peer.withheld.clear();
}

void Simulation::evaluate_attack(std::size_t peer_index)
{
    auto& peer = peers_[peer_index];
    if (peer.honest() || peer.phase == Phase::done) return;
    auto& outcome = report_.attacks[peer.outcome];
    const auto& attack = peer.config.attack;

    if (peer.phase == Phase::idle) {
        std::size_t base = kNone;
        if (peer.config.behavior == Behavior::double_spender && peer.target_seen) {
            base = peer.best;
            const std::size_t holder = containing_block(base, *peer.target_id);
            if (holder != kNone) base = nodes_[holder].parent;
        } else if (peer.config.behavior == Behavior::reverse_miner) {
            const auto trigger = attack.trigger_height ? attack.trigger_height : attack.erase_depth + 1;
            const auto height = nodes_[peer.best].height;
            if (height >= trigger && height >= attack.erase_depth) {
                base = ancestor_at(peer.best, height - attack.erase_depth);
                for (std::size_t n = peer.best; n != base; n = nodes_[n].parent)
                    for (const auto& t : nodes_[n].block.transfers) peer.excluded.insert(transfer_id(t));
            }
        }
        if (base == kNone) return;
        peer.phase = Phase::withholding;
        peer.private_tip = base;
        outcome.triggered = true;
        outcome.fork_height = nodes_[base].height;
        trace(static_cast<std::int64_t>(peer_index), "fork",
              {{"base", nodes_[base].hash}, {"height", nodes_[base].height}, {"excluded", peer.excluded.size()}});
        return;
    }

    const auto public_height = nodes_[peer.best].height;
    const auto private_height = nodes_[peer.private_tip].height;
    if (peer.phase == Phase::published && peer.fork_first != kNone && descends_from(peer.best, peer.fork_first)) {
        peer.private_tip = peer.best;
        return;
    }
    if (public_height >= private_height + attack.give_up_deficit) {
        peer.phase = Phase::done;
        outcome.abandoned = true;
        peer.withheld.clear();
        trace(static_cast<std::int64_t>(peer_index), "abandon", {{"public", public_height}, {"private", private_height}});
        return;
    }
    if (peer.phase == Phase::withholding && private_height > public_height) {
        bool ready = true;
        if (peer.config.behavior == Behavior::double_spender) {
            const std::size_t holder = containing_block(peer.best, *peer.target_id);
            ready = holder != kNone && public_height - nodes_[holder].height + 1 >= attack.confirmations;
        }
        if (ready) publish(peer_index);
    }
}

void Simulation::check_resolution()
{
    for (auto& attacker : peers_) {
        if (attacker.honest() || attacker.phase != Phase::published) continue;
        bool all = true;
        for (const auto& p : peers_)
            if (p.honest() && !descends_from(p.best, attacker.fork_first)) all = false;
        if (!all) continue;
        auto& outcome = report_.attacks[attacker.outcome];
        outcome.adopted = true;
        outcome.success = attacker.config.behavior == Behavior::double_spender ? outcome.victim_confirmed : true;
        attacker.phase = Phase::done;
        trace(-1, "attack_resolved", {{"peer", attacker.outcome}, {"success", outcome.success}});
    }
}

SimReport Simulation::run()
{
    report_.seed = config_.rng_seed;

    Node genesis;
    genesis.hash = genesis_hash();
    genesis.state = std::make_shared<const LedgerState>(LedgerState::genesis(config_.genesis, Address{}));
    genesis.included = std::make_shared<const IdSet>();
    nodes_.push_back(std::move(genesis));
    index_[nodes_[0].hash] = 0;

    for (const auto& t : config_.transfers) transfers_.push_back({transfer_id(t.transfer), t.transfer});

    for (std::size_t i = 0; i < config_.peers.size(); ++i) {
        Peer peer;
        peer.config = config_.peers[i];
        peer.keys = peer_keys(peer.config.name);
        peer.arrival.push_back(0);
        peer.next_arrival = 1;
        if (!peer.honest()) {
            peer.outcome = report_.attacks.size();
            report_.attacks.push_back({});
            report_.attacks.back().peer = i;
            report_.attacks.back().behavior = peer.config.behavior;
        }
        if (peer.config.behavior == Behavior::double_spender) {
            peer.target_id = transfers_[peer.config.attack.target_index].id;
            peer.conflict = MempoolEntry{transfer_id(*peer.config.attack.conflict), *peer.config.attack.conflict};
        }
        peers_.push_back(std::move(peer));
    }

    for (std::size_t i = 0; i < config_.transfers.size(); ++i) {
        const auto& t = config_.transfers[i];
        for (std::size_t p = 0; p < peers_.size(); ++p)
            schedule(t.time_ms + (p == t.origin ? 0 : latency()), EventKind::deliver_transfer, p, i);
    }
    const auto first = static_cast<std::int64_t>(std::ceil(rng_.exponential(static_cast<double>(config_.block_interval_ms))));
    schedule(std::max<std::int64_t>(1, first), EventKind::mine, 0, 0);

    while (!queue_.empty()) {
        if (report_.events_processed >= config_.max_events) {
            report_.hit_event_limit = true;
            break;
        }
        if (config_.stop_when_attack_resolved && !report_.attacks.empty() && attacks_resolved()) break;
        const Event e = queue_.top();
        queue_.pop();
        now_ = e.time;
        ++report_.events_processed;
        switch (e.kind) {
        case EventKind::mine: handle_mine(); break;
        case EventKind::deliver_block: handle_block(e.peer, e.item); break;
        case EventKind::deliver_transfer: handle_transfer(e.peer, e.item); break;
        }
    }

    // Summaries.
    std::map<std::uint64_t, std::uint64_t> per_height;
    for (std::size_t n = 1; n < nodes_.size(); ++n) {
        ++per_height[nodes_[n].height];
        report_.blocks.emplace(nodes_[n].hash, nodes_[n].block);
    }
    for (const auto& [_, count] : per_height)
        if (count > 1) ++report_.fork_heights;

    std::optional<std::size_t> honest_tip;
    report_.converged = true;
    for (const auto& p : peers_) {
        PeerSummary s{p.config.name, p.config.behavior, nodes_[p.best].hash, nodes_[p.best].height, {}};
        for (const auto n : path_to(p.best)) s.chain.push_back(nodes_[n].hash);
        report_.peers.push_back(std::move(s));
        if (!p.honest()) continue;
        if (honest_tip && *honest_tip != p.best) report_.converged = false;
        honest_tip = p.best;
    }
    const auto on_chain = path_to(peers_[0].best);
    const std::set<std::size_t> main(on_chain.begin(), on_chain.end());
    for (std::size_t n = 1; n < nodes_.size(); ++n)
        if (!main.count(n)) report_.orphaned_blocks.push_back(nodes_[n].hash);
    std::sort(report_.orphaned_blocks.begin(), report_.orphaned_blocks.end());

    for (auto& attacker : peers_) {
        if (attacker.outcome == kNone) continue;
        auto& outcome = report_.attacks[attacker.outcome];
        if (!outcome.adopted && attacker.fork_first != kNone) {
            bool all = true;
            for (const auto& p : peers_)
                if (p.honest() && !descends_from(p.best, attacker.fork_first)) all = false;
            outcome.adopted = all;
            if (all)
                outcome.success =
                    attacker.config.behavior == Behavior::double_spender ? outcome.victim_confirmed : true;
        }
    }

    report_.final_state = *nodes_[peers_[0].best].state;
    const auto& s = report_.final_state;
    Amount expected = s.genesis_supply();
    for (std::uint64_t h = 0; h < nodes_[peers_[0].best].height; ++h) expected += config_.block_subsidy;
    report_.conserved = s.conserved() && s.total_balances() + s.total_fee_accruals() == expected;
    return std::move(report_);
}

} // namespace

SimReport run_simulation(const SimConfig& config)
{
    return Simulation(config).run();
}

std::vector<Block> final_chain(const SimReport& report, std::size_t peer)
{
    std::vector<Block> out;
    for (const auto& h : report.peers.at(peer).chain) out.push_back(report.blocks.at(h));
    return out;
}

std::string trace_jsonl(const SimReport& report)
{
    std::string out;
    for (const auto& r : report.trace) {
        out += Json{{"time", r.time_ms}, {"peer", r.peer}, {"event", r.event}, {"payload", r.payload}}.dump();
        out += '\n';
    }
    return out;
}

Json report_json(const SimReport& report)
{
    Json peers = Json::array();
    for (const auto& p : report.peers)
        peers.push_back({{"name", p.name},
                         {"behavior", std::string(to_string(p.behavior))},
                         {"tip", p.tip},
                         {"height", p.height},
                         {"chain", p.chain}});
    Json attacks = Json::array();
    for (const auto& a : report.attacks)
        attacks.push_back({{"peer", a.peer},
                           {"behavior", std::string(to_string(a.behavior))},
                           {"triggered", a.triggered},
                           {"victim_confirmed", a.victim_confirmed},
                           {"published", a.published},
                           {"abandoned", a.abandoned},
                           {"adopted", a.adopted},
                           {"success", a.success},
                           {"fork_height", a.fork_height},
                           {"orphaned_transfers", a.orphaned_transfers}});
    const auto trace = trace_jsonl(report);
    return Json{{"seed", report.seed},
                {"converged", report.converged},
                {"conserved", report.conserved},
                {"hit_event_limit", report.hit_event_limit},
                {"events_processed", report.events_processed},
                {"blocks_mined", report.blocks_mined},
                {"fork_heights", report.fork_heights},
                {"orphaned_blocks", report.orphaned_blocks},
                {"peers", peers},
                {"attacks", attacks},
                {"final_balances", balances_json(report.final_state.balances())},
                {"final_height", report.final_state.height()},
                {"trace", {{"records", report.trace.size()}, {"sha256", sha256(trace).hex()}}}};
}

} // namespace nlab
