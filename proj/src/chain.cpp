#include "nlab/chain.hpp"

#include "nlab/mining.hpp"
#include "nlab/sha256.hpp"

namespace nlab {

namespace {

void put_u64(Sha256& h, std::uint64_t v)
{
    std::array<std::uint8_t, 8> buf;
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<std::uint8_t>(v >> (56 - 8 * i));
    h.update(buf);
}

} // namespace

Hash256 body_digest(std::uint64_t height, const Address& miner, std::span<const TransferInstruction> transfers)
{
    Sha256 h;
    put_u64(h, height);
    h.update(miner.span());
    put_u64(h, transfers.size());
    for (const auto& t : transfers) h.update(transfer_id(t).span());
    return h.finish();
}

Hash256 header_digest(const Block& b)
{
    return hash512(concat(b.prev_hash, b.tx_digest));
}

Hash256 block_hash(const Block& b)
{
    return hash512(concat(header_digest(b), b.nonce));
}

Block assemble_block(const Hash256& prev_hash, std::uint64_t height, const Address& miner,
                     std::vector<TransferInstruction> transfers)
{
    Block b;
    b.prev_hash = prev_hash;
    b.height = height;
    b.miner = miner;
    b.transfers = std::move(transfers);
    b.tx_digest = body_digest(b.height, b.miner, b.transfers);
    return b;
}

void seal_block(Block& b, const BitSeq256& target, std::uint64_t max_trials)
{
    const auto d1 = header_digest(b);
    auto strategy = MinerStrategy::sequential(d1);
    const auto solution = solve({d1, target}, strategy, max_trials);
    if (!solution) throw std::runtime_error("no nonce found within the trial budget");
    b.nonce = solution->r;
}

Hash256 genesis_hash()
{
    return Hash256::zeros();
}

std::string_view to_string(BlockErrc code)
{
    switch (code) {
    case BlockErrc::bad_proof_of_work: return "BadProofOfWork";
    case BlockErrc::bad_digest: return "BadDigest";
    case BlockErrc::bad_height: return "BadHeight";
    case BlockErrc::bad_transfer: return "BadTransfer";
    case BlockErrc::bad_subsidy: return "BadSubsidy";
    }
    return "Unknown";
}

LedgerState validate_block(const LedgerState& parent, const Block& b, const BitSeq256& target, Amount subsidy)
{
    if (!phi({header_digest(b), target}, b.nonce))
        throw BlockRejected(BlockErrc::bad_proof_of_work, "nonce does not satisfy the target");
    if (b.tx_digest != body_digest(b.height, b.miner, b.transfers))
        throw BlockRejected(BlockErrc::bad_digest, "body digest mismatch");
    if (b.height != parent.height() + 1) throw BlockRejected(BlockErrc::bad_height, "height is not parent + 1");

    LedgerState next = parent;
    next.set_height(b.height);
    for (std::size_t i = 0; i < b.transfers.size(); ++i) {
        try {
            next.submit_transfer(b.transfers[i], b.miner);
        } catch (const LedgerError& e) {
            throw BlockRejected(BlockErrc::bad_transfer, "transfer " + std::to_string(i) + ": " + e.what(), e.code(), i);
        }
    }
    try {
        next.credit_subsidy(b.miner, subsidy);
    } catch (const LedgerError& e) {
        throw BlockRejected(BlockErrc::bad_subsidy, e.what(), e.code());
    }
    return next;
}

std::size_t fork_choice(std::span<const ChainCandidate> candidates)
{
    if (candidates.empty()) throw std::invalid_argument("fork_choice needs at least one chain");
    std::size_t best = 0;
    for (std::size_t i = 1; i < candidates.size(); ++i) {
        const auto& c = candidates[i];
        const auto& b = candidates[best];
        if (c.length > b.length || (c.length == b.length && c.arrival < b.arrival)) best = i;
    }
    return best;
}

Chain replay_chain(const LedgerState& genesis, std::vector<Block> blocks, const BitSeq256& target, Amount subsidy)
{
    Chain chain{std::move(blocks), genesis};
    Hash256 prev = genesis_hash();
    for (const auto& b : chain.blocks) {
        if (b.prev_hash != prev) throw std::invalid_argument("chain does not link at height " + std::to_string(b.height));
        chain.state = validate_block(chain.state, b, target, subsidy);
        prev = block_hash(b);
    }
    return chain;
}

} // namespace nlab
