#include "nlab/scenarios.hpp"

#include <algorithm>
#include <atomic>
#include <set>
#include <stdexcept>
#include <thread>

#include "nlab/rng.hpp"

namespace nlab {

KeyPair account_keys(const std::string& name)
{
    return keygen("nlab/account/" + name);
}

namespace {

Check check(std::string name, Amount expected, Amount actual)
{
    return {std::move(name), std::to_string(expected.value()), std::to_string(actual.value()), expected == actual};
}

PeerConfig honest_peer(std::string name, double share)
{
    return {std::move(name), Behavior::honest, share, {}};
}

} // namespace

OabdReport run_oabd_scenario(Amount q, Amount r, Amount g)
{
    if (r > q) throw std::invalid_argument("OABD needs r <= q");
    const auto k = account_keys("oabd-k");
    const auto l = account_keys("oabd-l");
    const auto donor = account_keys("oabd-donor");

    SimConfig config;
    config.peers = {honest_peer("miner", 1.0)};
    config.rng_seed = 1;
    config.max_blocks = 1;
    config.genesis = {{k.address, q}};
    if (g.value() > 0) {
        config.genesis.emplace_back(donor.address, g);
        config.transfers.push_back({0, make_transfer(donor, g, k.address), 0});
    }
    config.transfers.push_back({0, make_transfer(k, r, l.address), 0});

    OabdReport report;
    report.q = q;
    report.r = r;
    report.g = g;
    report.sim = run_simulation(config);
    const auto& state = report.sim.final_state;
    const auto miner = peer_keys("miner").address;
    report.miner_fee_income = state.balance(miner) - config.block_subsidy;
    report.source_final = state.balance(k.address);
    report.destination_final = state.balance(l.address);
    report.checks = {check("miner_fee_income", (q - r) + g, report.miner_fee_income),
                     check("source_final", Amount{}, report.source_final),
                     check("destination_final", r, report.destination_final),
                     check("blocks", Amount{1}, Amount{state.height()})};
    report.ok = report.sim.conserved;
    for (const auto& c : report.checks) report.ok = report.ok && c.ok;
    return report;
}

SimConfig double_spend_config(double alpha, std::uint64_t confirmations, std::uint64_t seed)
{
    if (!(alpha > 0 && alpha < 1)) throw ConfigInvalid("alpha", "must lie strictly between 0 and 1");
    const auto mallory = account_keys("mallory");
    const auto merchant = account_keys("merchant");
    const auto stash = account_keys("mallory-stash");

    SimConfig config;
    config.peers = {honest_peer("victim", 1.0 - alpha), {"attacker", Behavior::double_spender, alpha, {}}};
    auto& attack = config.peers[1].attack;
    attack.target_index = 0;
    attack.conflict = make_transfer(mallory, Amount{100}, stash.address);
    attack.confirmations = confirmations;
    attack.give_up_deficit = confirmations + 6;
    config.latency = {50, 500};
    config.rng_seed = seed;
    config.max_events = 200'000;
    config.horizon_ms = INT64_MAX / 4;
    config.stop_when_attack_resolved = true;
    config.genesis = {{mallory.address, Amount{100}}};
    config.transfers = {{1000, make_transfer(mallory, Amount{100}, merchant.address), 1}};
    return config;
}

RaceSummary run_double_spend(double alpha, std::uint64_t confirmations, std::uint64_t races, std::uint64_t seed,
                             unsigned jobs)
{
    if (races == 0) throw std::invalid_argument("races must be at least 1");
    RaceSummary summary;
    summary.alpha = alpha;
    summary.confirmations = confirmations;
    summary.races = races;
    std::vector<AttackOutcome> outcomes(races);
    std::vector<char> conserved(races, 0);
    const CounterRng seeds(seed);
    auto run_one = [&](std::uint64_t i) {
        const auto sim = run_simulation(double_spend_config(alpha, confirmations, seeds.at(i)));
        outcomes[i] = sim.attacks.at(0);
        conserved[i] = sim.conserved;
    };
    const unsigned workers = std::max(1U, std::min<unsigned>(jobs, static_cast<unsigned>(races)));
    if (workers == 1) {
        for (std::uint64_t i = 0; i < races; ++i) run_one(i);
    } else {
        std::atomic<std::uint64_t> next{0};
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (auto i = next.fetch_add(1); i < races; i = next.fetch_add(1)) run_one(i);
            });
    }
    for (const auto& o : outcomes) {
        summary.triggered += o.triggered;
        summary.published += o.published;
        summary.abandoned += o.abandoned;
        summary.successes += o.success;
        summary.outcomes.push_back(o.success);
    }
    summary.success_frequency = static_cast<double>(summary.successes) / static_cast<double>(races);
    summary.conserved = std::all_of(conserved.begin(), conserved.end(), [](char c) { return c != 0; });
    return summary;
}

SimConfig reverse_mining_config(std::uint64_t erase_depth, double alpha, std::uint64_t seed)
{
    if (!(alpha > 0 && alpha < 1)) throw ConfigInvalid("alpha", "must lie strictly between 0 and 1");
    if (erase_depth == 0) throw ConfigInvalid("erase_depth", "must be at least 1");
    const auto accounts = scenario_accounts(8);

    SimConfig config;
    config.peers = {honest_peer("honest", 1.0 - alpha), {"reverser", Behavior::reverse_miner, alpha, {}}};
    auto& attack = config.peers[1].attack;
    attack.erase_depth = erase_depth;
    attack.trigger_height = erase_depth + 2;
    attack.give_up_deficit = erase_depth + 6;
    config.latency = {50, 500};
    config.rng_seed = seed;
    config.max_events = 200'000;
    config.horizon_ms = INT64_MAX / 4;
    config.stop_when_attack_resolved = true;
    config.genesis = equal_allocation(accounts, Amount{1000});
    const auto stream = random_transfer_stream(accounts, config.genesis, 16, seed);
    for (std::size_t i = 0; i < stream.size(); ++i)
        config.transfers.push_back({static_cast<std::int64_t>(2500 * i), stream[i], 0});
    return config;
}

ReverseMiningReport run_reverse_mining(std::uint64_t erase_depth, double alpha, std::uint64_t seed)
{
    ReverseMiningReport report;
    report.erase_depth = erase_depth;
    report.alpha = alpha;
    report.sim = run_simulation(reverse_mining_config(erase_depth, alpha, seed));
    report.outcome = report.sim.attacks.at(0);
    return report;
}

std::vector<KeyPair> scenario_accounts(std::size_t n)
{
    std::vector<KeyPair> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(account_keys("acct-" + std::to_string(i)));
    return out;
}

Allocation equal_allocation(const std::vector<KeyPair>& accounts, Amount each)
{
    Allocation out;
    for (const auto& a : accounts) out.emplace_back(a.address, each);
    return out;
}

std::vector<TransferInstruction> random_transfer_stream(const std::vector<KeyPair>& accounts,
                                                        const Allocation& genesis, std::size_t count,
                                                        std::uint64_t seed, double invalid_fraction)
{
    if (accounts.size() < 2) throw std::invalid_argument("need at least two accounts");
    CounterRng rng(seed, 0x57e4);
    LedgerState running = LedgerState::genesis(genesis, Address{});
    std::vector<TransferInstruction> out;
    std::set<Hash256> emitted;
    for (std::size_t n = 0; n < count; ++n) {
        std::vector<std::size_t> funded;
        for (std::size_t i = 0; i < accounts.size(); ++i)
            if (running.balance(accounts[i].address).value() > 0) funded.push_back(i);
        const std::size_t from = funded.empty() ? rng.below(accounts.size()) : funded[rng.below(funded.size())];
        std::size_t to = rng.below(accounts.size() - 1);
        if (to >= from) ++to;
        const auto& src = accounts[from];
        const Amount q = running.balance(src.address);
        // Fees stay small so the stream does not bleed the accounts dry.
        auto draw_amount = [&] { return Amount{q.value() - rng.below(std::min<std::uint64_t>(q.value() / 10, 5) + 1)}; };
        Amount r = draw_amount();

        if (rng.unit() < invalid_fraction) {
            if (rng.below(2) == 0) {
                out.push_back(make_transfer(accounts[to], r, accounts[to == 0 ? 1 : 0].address));
                out.back().from = src.address; // signed by the wrong key
            } else {
                out.push_back(make_transfer(src, q + Amount{1}, accounts[to].address));
            }
        } else {
            // A repeated instruction is a replay, which the chain refuses.
            auto t = make_transfer(src, r, accounts[to].address);
            for (int attempt = 0; emitted.count(transfer_id(t)) && attempt < 64; ++attempt) {
                to = rng.below(accounts.size() - 1);
                if (to >= from) ++to;
                t = make_transfer(src, draw_amount(), accounts[to].address);
            }
            if (emitted.count(transfer_id(t))) throw std::logic_error("no distinct transfer left to draw");
            out.push_back(std::move(t));
        }
        emitted.insert(transfer_id(out.back()));
        try {
            running.submit_transfer(out.back(), Address{});
        } catch (const LedgerError&) {
        }
    }
    return out;
}

EquivalenceReport oracle_equivalence(const Allocation& genesis, const std::vector<TransferInstruction>& stream,
                                     std::uint64_t seed)
{
    SimConfig config;
    config.peers = {honest_peer("solo", 1.0)};
    config.rng_seed = seed;
    config.genesis = genesis;
    config.block_interval_ms = 50;
    config.horizon_ms = 0;
    config.max_block_transfers = 25;
    for (std::size_t i = 0; i < stream.size(); ++i)
        config.transfers.push_back({static_cast<std::int64_t>(i), stream[i], 0});

    EquivalenceReport report;
    report.submitted = stream.size();
    const auto sim = run_simulation(config);
    report.height = sim.final_state.height();
    report.conserved = sim.conserved;
    for (const auto& b : final_chain(sim)) report.accepted_chain += b.transfers.size();

    const auto miner = peer_keys("solo").address;
    LedgerState oracle = LedgerState::genesis(genesis, Address{});
    for (const auto& t : stream) {
        try {
            oracle.submit_transfer(t, miner);
            ++report.accepted_oracle;
        } catch (const LedgerError&) {
        }
    }
    for (std::uint64_t h = 0; h < report.height; ++h) oracle.credit_subsidy(miner, config.block_subsidy);

    const auto& got = sim.final_state.balances();
    const auto& want = oracle.balances();
    report.equal = got == want && report.accepted_chain == report.accepted_oracle;
    if (!report.equal) {
        if (report.accepted_chain != report.accepted_oracle)
            report.mismatch = "accepted " + std::to_string(report.accepted_chain) + " vs oracle " +
                              std::to_string(report.accepted_oracle);
        for (const auto& [address, amount] : want)
            if (sim.final_state.balance(address) != amount) {
                report.mismatch = address.hex() + ": chain " + std::to_string(sim.final_state.balance(address).value()) +
                                  " vs oracle " + std::to_string(amount.value());
                break;
            }
        if (report.mismatch.empty()) report.mismatch = "balance maps differ";
    }
    return report;
}

} // namespace nlab
