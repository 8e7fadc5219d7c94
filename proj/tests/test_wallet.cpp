#include <doctest.h>

#include "nlab/chain.hpp"
#include "nlab/wallet.hpp"

using namespace nlab;

namespace {

Block block_with(const Hash256& prev, std::uint64_t height, std::vector<TransferInstruction> transfers)
{
    auto b = assemble_block(prev, height, keygen("wallet-test-miner").address, std::move(transfers));
    seal_block(b, target_for_leading_zeros(4));
    return b;
}

} // namespace

TEST_CASE("addresses derive deterministically from the wallet seed")
{
    auto a = Wallet::create("pw", 1);
    auto b = Wallet::create("pw", 1);
    CHECK(a.new_address("pw") == b.new_address("pw"));
    CHECK(a.new_address("pw") != Wallet::create("pw", 2).new_address("pw"));
}

TEST_CASE("wrong passphrase changes nothing")
{
    auto w = Wallet::create("correct horse", 7);
    const auto k = w.new_address("correct horse");
    const auto before = w.addresses();
    try {
        w.new_address("battery");
        FAIL("accepted");
    } catch (const WalletError& e) {
        CHECK(e.code() == WalletErrc::wrong_passphrase);
    }
    CHECK_THROWS_AS(w.sign_transfer("battery", k, Amount(1), keygen("x").address), WalletError);
    CHECK(w.addresses() == before);
    CHECK(w.log().empty());
}

TEST_CASE("signing requires an owned address")
{
    auto w = Wallet::create("pw", 3);
    try {
        w.sign_transfer("pw", keygen("stranger").address, Amount(1), keygen("x").address);
        FAIL("accepted");
    } catch (const WalletError& e) {
        CHECK(e.code() == WalletErrc::unknown_address);
    }
}

TEST_CASE("scan confirms, disconnect orphans, log is append-only")
{
    auto w = Wallet::create("pw", 5);
    const auto k = w.new_address("pw");
    const auto t = w.sign_transfer("pw", k, Amount(4), keygen("payee").address);
    const auto id = transfer_id(t);
    CHECK(w.status(id) == TxStatus::issued);

    const auto block = block_with(genesis_hash(), 1, {t});
    w.scan_block(block);
    CHECK(w.status(id) == TxStatus::confirmed);
    CHECK(w.log().size() == 2);
    w.scan_block(block);
    CHECK(w.log().size() == 2);

    w.scan_disconnected(block);
    CHECK(w.status(id) == TxStatus::orphaned);
    CHECK(w.log().size() == 3);
    CHECK(w.log()[0].status == TxStatus::issued);

    // Reincluded on the new best chain.
    const auto other = block_with(block_hash(block_with(genesis_hash(), 1, {})), 2, {t});
    w.scan_block(other);
    CHECK(w.status(id) == TxStatus::confirmed);

    // Unrelated transfers are ignored.
    auto foreign_keys = keygen("foreign");
    w.scan_block(block_with(genesis_hash(), 1, {make_transfer(foreign_keys, Amount(1), k)}));
    CHECK(w.log().size() == 4);
}

TEST_CASE("encrypted save and load")
{
    auto w = Wallet::create("s3cret", 11);
    const auto k = w.new_address("s3cret");
    w.new_address("s3cret");
    const auto t = w.sign_transfer("s3cret", k, Amount(2), keygen("payee").address);
    const auto blob = w.save();
    CHECK(blob.find(k.hex()) == std::string::npos);
    CHECK(w.save() == blob);

    auto restored = Wallet::load(blob, "s3cret");
    CHECK(restored.addresses() == w.addresses());
    CHECK(restored.status(transfer_id(t)) == TxStatus::issued);
    CHECK(restored.save() == blob);

    try {
        Wallet::load(blob, "guess");
        FAIL("accepted");
    } catch (const WalletError& e) {
        CHECK(e.code() == WalletErrc::wrong_passphrase);
    }

    auto tampered = blob;
    const auto pos = tampered.find("\"ciphertext\": \"") + 16;
    tampered[pos] = tampered[pos] == '0' ? '1' : '0';
    try {
        Wallet::load(tampered, "s3cret");
        FAIL("accepted");
    } catch (const WalletError& e) {
        CHECK(e.code() == WalletErrc::corrupt);
    }
}
