#include <doctest.h>

#include <set>

#include "nlab/scenarios.hpp"
#include "nlab/sim.hpp"
#include "nlab/wallet.hpp"

using namespace nlab;

namespace {

SimConfig honest_network(std::size_t peers, std::int64_t min_ms, std::int64_t max_ms, std::uint64_t seed)
{
    SimConfig c;
    for (std::size_t i = 0; i < peers; ++i)
        c.peers.push_back({"p" + std::to_string(i), Behavior::honest, 1.0 / static_cast<double>(peers), {}});
    c.latency = {min_ms, max_ms};
    c.rng_seed = seed;
    c.horizon_ms = 120'000;
    const auto accounts = scenario_accounts(6);
    c.genesis = equal_allocation(accounts, Amount{500});
    const auto stream = random_transfer_stream(accounts, c.genesis, 30, seed);
    for (std::size_t i = 0; i < stream.size(); ++i)
        c.transfers.push_back({static_cast<std::int64_t>(3000 * i), stream[i], i % peers});
    return c;
}

} // namespace

TEST_CASE("single honest miner without latency builds one chain")
{
    auto c = honest_network(1, 0, 0, 3);
    const auto r = run_simulation(c);
    CHECK(r.converged);
    CHECK(r.conserved);
    CHECK(r.orphaned_blocks.empty());
    CHECK(r.fork_heights == 0);
    CHECK(r.blocks_mined == r.final_state.height());
    CHECK(r.final_state.height() > 0);

    // The chain replays from genesis to the same state.
    const auto target = target_for_leading_zeros(c.difficulty_k);
    const auto chain = replay_chain(LedgerState::genesis(c.genesis, Address{}), final_chain(r), target,
                                    c.block_subsidy);
    CHECK(chain.state.balances() == r.final_state.balances());
}

TEST_CASE("simulation is deterministic")
{
    const auto c = honest_network(3, 100, 2000, 17);
    const auto a = run_simulation(c);
    const auto b = run_simulation(c);
    CHECK(report_json(a).dump() == report_json(b).dump());
    CHECK(trace_jsonl(a) == trace_jsonl(b));
    auto other = c;
    other.rng_seed = 18;
    CHECK(report_json(run_simulation(other)).dump() != report_json(a).dump());
}

TEST_CASE("honest peers converge under latency and conserve value")
{
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        CAPTURE(seed);
        const auto r = run_simulation(honest_network(2 + seed % 4, 200, 4000, seed));
        CHECK(r.converged);
        CHECK(r.conserved);
        CHECK_FALSE(r.hit_event_limit);
        std::set<Hash256> tips;
        for (const auto& p : r.peers) tips.insert(p.tip);
        CHECK(tips.size() == 1);
    }
}

TEST_CASE("high latency produces forks")
{
    std::uint64_t forks = 0;
    std::uint64_t reorgs = 0;
    for (std::uint64_t seed = 0; seed < 100 && forks == 0; ++seed) {
        auto c = honest_network(2, 3000, 9000, seed);
        c.transfers.clear();
        c.horizon_ms = 60'000;
        const auto r = run_simulation(c);
        forks += r.fork_heights;
        for (const auto& t : r.tip_changes) reorgs += !t.disconnected.empty();
        CHECK(r.converged);
        CHECK(r.conserved);
    }
    CHECK(forks > 0);
    CHECK(reorgs > 0);
}

TEST_CASE("config validation names the field")
{
    auto c = honest_network(2, 0, 10, 1);
    c.peers[1].hashpower_share = 0.7;
    try {
        run_simulation(c);
        FAIL("expected ConfigInvalid");
    } catch (const ConfigInvalid& e) {
        CHECK(e.field() == "peers");
    }
    c = honest_network(2, 0, 10, 1);
    c.difficulty_k = 21;
    CHECK_THROWS_AS(run_simulation(c), ConfigInvalid);
    c = honest_network(2, 0, 10, 1);
    c.latency = {10, 5};
    CHECK_THROWS_AS(run_simulation(c), ConfigInvalid);
    c = honest_network(2, 0, 10, 1);
    c.peers[1].behavior = Behavior::double_spender;
    try {
        run_simulation(c);
        FAIL("expected ConfigInvalid");
    } catch (const ConfigInvalid& e) {
        CHECK(e.field() == "peers[1].attack.conflict");
    }
}

TEST_CASE("OABD scenario")
{
    const auto r = run_oabd_scenario(Amount{10}, Amount{9}, Amount{5});
    CHECK(r.ok);
    CHECK(r.miner_fee_income == Amount{6});
    CHECK(r.destination_final == Amount{9});
    CHECK(r.source_final == Amount{0});
    CHECK(run_oabd_scenario(Amount{10}, Amount{7}, Amount{0}).miner_fee_income == Amount{3});
    CHECK(run_oabd_scenario(Amount{10}, Amount{10}, Amount{0}).miner_fee_income == Amount{0});
    CHECK(run_oabd_scenario(Amount{10}, Amount{10}, Amount{0}).ok);
    CHECK_THROWS_AS(run_oabd_scenario(Amount{5}, Amount{6}, Amount{0}), std::invalid_argument);
}

TEST_CASE("oracle equivalence")
{
    const auto accounts = scenario_accounts(10);
    const auto genesis = equal_allocation(accounts, Amount{1000});
    CHECK(oracle_equivalence(genesis, {}, 1).equal);

    const auto stream = random_transfer_stream(accounts, genesis, 120, 5);
    const auto r = oracle_equivalence(genesis, stream, 5);
    CHECK_MESSAGE(r.equal, r.mismatch);
    CHECK(r.accepted_chain == stream.size());

    auto bad = stream;
    bad.insert(bad.begin() + 40, make_transfer(accounts[0], Amount{999'999}, accounts[1].address));
    const auto rb = oracle_equivalence(genesis, bad, 5);
    CHECK_MESSAGE(rb.equal, rb.mismatch);
    CHECK(rb.accepted_chain == stream.size());

    const auto noisy = random_transfer_stream(accounts, genesis, 120, 6, 0.2);
    const auto rn = oracle_equivalence(genesis, noisy, 6);
    CHECK_MESSAGE(rn.equal, rn.mismatch);
    CHECK(rn.accepted_chain < noisy.size());
}

TEST_CASE("long transfer streams stay funded and never repeat an instruction")
{
    const auto accounts = scenario_accounts(8);
    const auto genesis = equal_allocation(accounts, Amount{1000});
    const auto stream = random_transfer_stream(accounts, genesis, 500, 1);
    std::set<Hash256> ids;
    for (const auto& t : stream) ids.insert(transfer_id(t));
    CHECK(ids.size() == stream.size());
    const auto r = oracle_equivalence(genesis, stream, 1);
    CHECK_MESSAGE(r.equal, r.mismatch);
    CHECK(r.accepted_chain == 500);
}

TEST_CASE("a replayed instruction is accepted by the abstract ledger but not by the chain")
{
    const auto a = account_keys("replay-a");
    const auto b = account_keys("replay-b");
    const Allocation genesis{{a.address, Amount{10}}};
    const auto there = make_transfer(a, Amount{10}, b.address);
    const std::vector<TransferInstruction> stream{there, make_transfer(b, Amount{10}, a.address), there};

    auto ledger = LedgerState::genesis(genesis, Address{});
    for (const auto& t : stream) ledger.submit_transfer(t);
    CHECK(ledger.balance(b.address) == Amount{10});

    const auto r = oracle_equivalence(genesis, stream, 3);
    CHECK(r.accepted_oracle == 3);
    CHECK(r.accepted_chain == 2);
    CHECK_FALSE(r.equal);
}

TEST_CASE("double spend: dominant attacker wins, weak attacker rarely does")
{
    const auto strong = run_double_spend(0.9, 2, 10, 7);
    CHECK(strong.success_frequency >= 0.8);
    const auto weak = run_double_spend(0.1, 6, 30, 7);
    CHECK(weak.success_frequency < 0.1);
    CHECK(weak.triggered == 30);
    CHECK(run_double_spend(0.3, 2, 6, 9, 1).outcomes == run_double_spend(0.3, 2, 6, 9, 3).outcomes);
}

TEST_CASE("double spend success replaces the target with the conflict")
{
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto c = double_spend_config(0.8, 2, seed);
        const auto r = run_simulation(c);
        const auto& o = r.attacks.at(0);
        if (!o.success) continue;
        CHECK(o.victim_confirmed);
        CHECK(o.published);
        const auto merchant = account_keys("merchant").address;
        const auto stash = account_keys("mallory-stash").address;
        for (const auto& p : r.peers) {
            if (p.behavior != Behavior::honest) continue;
            std::set<Hash256> ids;
            for (const auto& h : p.chain)
                for (const auto& t : r.blocks.at(h).transfers) ids.insert(transfer_id(t));
            CHECK(ids.count(transfer_id(*c.peers[1].attack.conflict)) == 1);
            CHECK(ids.count(transfer_id(c.transfers[0].transfer)) == 0);
        }
        CHECK(r.final_state.balance(stash) == Amount{100});
        CHECK(r.final_state.balance(merchant) == Amount{0});
        return;
    }
    FAIL("no successful double spend in 20 seeds at alpha 0.8");
}

TEST_CASE("reverse mining")
{
    int adopted = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) adopted += run_reverse_mining(1, 0.9, seed).outcome.adopted;
    CHECK(adopted >= 7);
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const auto r = run_reverse_mining(6, 0.1, seed);
        CHECK_FALSE(r.outcome.adopted);
        CHECK(r.sim.conserved);
    }
}

TEST_CASE("transfers erased by a rewrite show up orphaned in the wallet log")
{
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const auto r = run_reverse_mining(2, 0.9, seed);
        if (!r.outcome.adopted || r.outcome.orphaned_transfers.empty()) continue;

        // Follow peer 0's tip changes with a wallet that watches every block.
        Wallet w = Wallet::create("pw", 1);
        const auto& erased = r.outcome.orphaned_transfers.front();
        std::map<Hash256, TransferInstruction> by_id;
        for (const auto& [_, b] : r.sim.blocks)
            for (const auto& t : b.transfers) by_id.emplace(transfer_id(t), t);
        w.watch(by_id.at(erased));
        for (const auto& change : r.sim.tip_changes) {
            if (change.peer != 0) continue;
            for (const auto& h : change.disconnected) w.scan_disconnected(r.sim.blocks.at(h));
            for (const auto& h : change.connected) w.scan_block(r.sim.blocks.at(h));
        }
        bool saw_confirmed = false;
        bool saw_orphaned = false;
        for (const auto& e : w.log()) {
            if (e.id != erased) continue;
            saw_confirmed |= e.status == TxStatus::confirmed;
            saw_orphaned |= e.status == TxStatus::orphaned;
        }
        CHECK(saw_confirmed);
        CHECK(saw_orphaned);
        return;
    }
    FAIL("no adopted rewrite with orphaned transfers");
}
