#include <doctest.h>

#include "nlab/json.hpp"
#include "nlab/ledger.hpp"
#include "nlab/rng.hpp"

using namespace nlab;

namespace {

struct Fixture {
    KeyPair k = keygen("oabd-k");
    KeyPair l = keygen("oabd-l");
    KeyPair donor = keygen("donor");
    Address sink = keygen("sink").address;
};

BlockRecord indefinite() { return {BlockMode::indefinite, 0}; }
BlockRecord until(std::uint64_t h) { return {BlockMode::temporary, h}; }

} // namespace

TEST_CASE_FIXTURE(Fixture, "genesis")
{
    const auto empty = LedgerState::genesis({}, sink);
    CHECK(empty.balance(k.address) == Amount{});
    CHECK(empty.height() == 0);
    CHECK(empty.blocking_table().empty());

    const auto state = LedgerState::genesis({{k.address, Amount(10)}, {l.address, Amount(3)}}, sink);
    CHECK(state.balance(k.address) == Amount(10));
    CHECK(state.total_balances() == Amount(13));
    CHECK(state.genesis_supply() == Amount(13));
    CHECK(state.conserved());

    CHECK_THROWS_AS(LedgerState::genesis({{k.address, Amount(1)}, {k.address, Amount(2)}}, sink), LedgerError);
}

TEST_CASE_FIXTURE(Fixture, "full residual fee on a transfer")
{
    auto state = LedgerState::genesis({{k.address, Amount(10)}}, sink);
    const auto receipt = state.submit_transfer(make_transfer(k, Amount(9), l.address));
    CHECK(receipt.amount == Amount(9));
    CHECK(receipt.fee == Amount(1));
    CHECK(receipt.fee_to_sink);
    CHECK(state.balance(k.address) == Amount{});
    CHECK(state.balance(l.address) == Amount(9));
    CHECK(state.fee_accruals().at(sink) == Amount(1));
    CHECK(state.conserved());
}

TEST_CASE_FIXTURE(Fixture, "donation validated first inflates the fee to f + g")
{
    auto state = LedgerState::genesis({{k.address, Amount(10)}, {donor.address, Amount(5)}}, sink);
    const auto outgoing = make_transfer(k, Amount(9), l.address);
    state.submit_transfer(make_transfer(donor, Amount(5), k.address));
    const auto receipt = state.submit_transfer(outgoing);
    CHECK(receipt.fee == Amount(6));
    CHECK(state.balance(k.address) == Amount{});
    CHECK(state.balance(l.address) == Amount(9));
    CHECK(state.conserved());
}

TEST_CASE_FIXTURE(Fixture, "fees go to an explicit recipient")
{
    const auto miner = keygen("miner").address;
    auto state = LedgerState::genesis({{k.address, Amount(10)}}, sink);
    const auto receipt = state.submit_transfer(make_transfer(k, Amount(7), l.address), miner);
    CHECK_FALSE(receipt.fee_to_sink);
    CHECK(receipt.fee_recipient == miner);
    CHECK(state.balance(miner) == Amount(3));
    CHECK(state.fee_accruals().empty());
    CHECK(state.conserved());
}

TEST_CASE_FIXTURE(Fixture, "rejected transfers leave the state untouched")
{
    const auto before = LedgerState::genesis({{k.address, Amount(10)}}, sink);
    auto state = before;

    auto expect = [&](const TransferInstruction& t, LedgerErrc code) {
        try {
            state.submit_transfer(t);
            FAIL("transfer accepted");
        } catch (const LedgerError& e) {
            CHECK(e.code() == code);
        }
        CHECK(state == before);
    };

    expect(make_transfer(k, Amount(11), l.address), LedgerErrc::insufficient_balance);
    expect(make_transfer(k, Amount(1), k.address), LedgerErrc::self_transfer);
    auto forged = make_transfer(k, Amount(1), l.address);
    forged.amount = Amount(2);
    expect(forged, LedgerErrc::invalid_signature);
    auto wrong_signer = make_transfer(l, Amount(1), donor.address);
    wrong_signer.from = k.address;
    expect(wrong_signer, LedgerErrc::invalid_signature);
    // A zero balance source cannot pay anything but r = 0.
    expect(make_transfer(l, Amount(1), k.address), LedgerErrc::insufficient_balance);
}

TEST_CASE_FIXTURE(Fixture, "indefinite blocking rejects every incoming transfer")
{
    auto state = LedgerState::genesis({{k.address, Amount(10)}, {donor.address, Amount(50)}}, sink);
    state.block_address(k.address, indefinite(), sign(k, blocking_message(k.address, indefinite())), Amount{});
    CHECK(state.is_blocked(k.address));

    const auto snapshot = state;
    CHECK_THROWS_AS(state.submit_transfer(make_transfer(donor, Amount(5), k.address)), LedgerError);
    CHECK(state == snapshot);
    state.advance_height(1000);
    CHECK(state.is_blocked(k.address));
    CHECK_THROWS_AS(state.credit_subsidy(k.address, Amount(1)), LedgerError);

    // Outgoing transfers from a blocked address remain possible.
    state.submit_transfer(make_transfer(k, Amount(10), l.address));
    CHECK(state.balance(l.address) == Amount(10));
}

TEST_CASE_FIXTURE(Fixture, "temporary blocking lapses at the expiry height")
{
    auto state = LedgerState::genesis({{k.address, Amount(10)}, {donor.address, Amount(50)}}, sink);
    state.block_address(k.address, until(5), sign(k, blocking_message(k.address, until(5))), Amount{});
    state.advance_height(4);
    try {
        state.submit_transfer(make_transfer(donor, Amount(5), k.address));
        FAIL("accepted while blocked");
    } catch (const LedgerError& e) {
        CHECK(e.code() == LedgerErrc::destination_blocked);
    }
    state.advance_height(2);
    state.submit_transfer(make_transfer(donor, Amount(5), k.address));
    CHECK(state.balance(k.address) == Amount(15));
}

TEST_CASE_FIXTURE(Fixture, "blocking fee and error paths")
{
    auto state = LedgerState::genesis({{k.address, Amount(10)}}, sink);
    const auto proof = sign(k, blocking_message(k.address, indefinite()));

    SUBCASE("fee is deducted and accrued")
    {
        const auto receipt = state.block_address(k.address, indefinite(), proof, Amount(2));
        CHECK(receipt.fee == Amount(2));
        CHECK(state.balance(k.address) == Amount(8));
        CHECK(state.fee_accruals().at(sink) == Amount(2));
        CHECK(state.conserved());
        try {
            state.block_address(k.address, indefinite(), proof, Amount{});
            FAIL("blocked twice");
        } catch (const LedgerError& e) {
            CHECK(e.code() == LedgerErrc::already_blocked);
        }
    }
    SUBCASE("fee above balance")
    {
        const auto before = state;
        try {
            state.block_address(k.address, indefinite(), proof, Amount(11));
            FAIL("accepted");
        } catch (const LedgerError& e) {
            CHECK(e.code() == LedgerErrc::insufficient_balance_for_fee);
        }
        CHECK(state == before);
    }
    SUBCASE("proof by another key")
    {
        try {
            state.block_address(k.address, indefinite(), sign(l, blocking_message(k.address, indefinite())), Amount{});
            FAIL("accepted");
        } catch (const LedgerError& e) {
            CHECK(e.code() == LedgerErrc::invalid_signature);
        }
    }
    SUBCASE("proof for a different mode")
    {
        CHECK_THROWS_AS(state.block_address(k.address, until(3), proof, Amount{}), LedgerError);
    }
}

TEST_CASE_FIXTURE(Fixture, "height never decreases")
{
    auto state = LedgerState::genesis({}, sink);
    state.set_height(4);
    CHECK_THROWS_AS(state.set_height(3), LedgerError);
    CHECK(state.height() == 4);
}

TEST_CASE_FIXTURE(Fixture, "challenge response")
{
    const auto c = issue_challenge(99);
    CHECK(issue_challenge(99) == c);
    CHECK(issue_challenge(100) != c);

    const auto response = prove_control(k, c);
    CHECK(verify_control(k.address, c, response));
    // An agent without s can only sign with its own key.
    CHECK_FALSE(verify_control(k.address, c, prove_control(l, c)));
    // Replay on a fresh challenge fails.
    CHECK_FALSE(verify_control(k.address, issue_challenge(100), response));
}

TEST_CASE_FIXTURE(Fixture, "random operation sequences conserve supply and never go negative")
{
    std::vector<KeyPair> keys;
    for (int i = 0; i < 8; ++i) keys.push_back(keygen("acct-" + std::to_string(i)));
    std::vector<std::pair<Address, Amount>> genesis;
    for (const auto& kp : keys) genesis.emplace_back(kp.address, Amount(100));
    auto state = LedgerState::genesis(genesis, sink);

    CounterRng rng(2024);
    std::size_t blocked_index = keys.size();
    Amount blocked_balance;
    for (int step = 0; step < 2000; ++step) {
        const auto& from = keys[rng.below(keys.size())];
        const auto& to = keys[rng.below(keys.size())];
        const auto before = state;
        const Amount r(rng.below(state.balance(from.address).value() + 20));
        try {
            switch (rng.below(10)) {
            case 0: state.credit_subsidy(to.address, Amount(rng.below(10))); break;
            case 1: state.advance_height(); break;
            case 2:
                if (blocked_index == keys.size()) {
                    state.block_address(from.address, indefinite(),
                                        sign(from, blocking_message(from.address, indefinite())), Amount(1));
                    blocked_index = static_cast<std::size_t>(&from - keys.data());
                    blocked_balance = state.balance(from.address);
                }
                break;
            default: state.submit_transfer(make_transfer(from, r, to.address)); break;
            }
        } catch (const LedgerError&) {
            CHECK(state == before);
        }
        REQUIRE(state.conserved());
        if (blocked_index < keys.size()) {
            const auto now = state.balance(keys[blocked_index].address);
            // Only its own outgoing transfers may change the blocked balance.
            CHECK(now <= blocked_balance);
            blocked_balance = now;
        }
    }
}

TEST_CASE_FIXTURE(Fixture, "snapshot json and genesis parsing")
{
    auto state = LedgerState::genesis({{k.address, Amount(10)}}, sink);
    state.submit_transfer(make_transfer(k, Amount(9), l.address));
    const Json j = state;
    CHECK(j.at("balances").at(l.address.hex()) == "9");
    CHECK(j.at("fee_accruals").at(sink.hex()) == "1");
    CHECK(j.at("conserved") == true);

    const auto text = "{\"" + k.address.hex() + "\": \"10\", \"" + l.address.hex() + "\": 4}";
    const auto parsed = parse_genesis(text);
    REQUIRE(parsed.size() == 2);
    const auto dup = "{\"" + k.address.hex() + "\": \"10\", \"" + k.address.hex() + "\": \"4\"}";
    CHECK_THROWS_AS(parse_genesis(dup), LedgerError);

    const auto t = make_transfer(k, Amount(3), l.address);
    const Json tj = t;
    CHECK(tj.get<TransferInstruction>() == t);
}
