#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlab/bitseq.hpp"
#include "nlab/ledger.hpp"
#include "nlab/puzzle.hpp"

namespace nlab {

struct Block {
    Hash256 prev_hash;
    Hash256 tx_digest;
    BitSeq256 nonce;
    Address miner;
    std::vector<TransferInstruction> transfers;
    std::uint64_t height = 0;

    friend bool operator==(const Block&, const Block&) = default;
};

/// Digest of the block body: height, miner address and the ordered
/// transfers, each in canonical fixed-width big-endian form.
Hash256 body_digest(std::uint64_t height, const Address& miner, std::span<const TransferInstruction> transfers);

/// d1 of the block's puzzle: hash512(prev_hash || tx_digest).
Hash256 header_digest(const Block& b);

/// Block identity: hash512(header_digest || nonce), the value compared
/// against the target.
Hash256 block_hash(const Block& b);

/// Builds the body and digest but leaves the nonce unsolved.
Block assemble_block(const Hash256& prev_hash, std::uint64_t height, const Address& miner,
                     std::vector<TransferInstruction> transfers);

/// Finds a nonce with the sequential strategy. Throws std::runtime_error if
/// none is found within max_trials.
void seal_block(Block& b, const BitSeq256& target, std::uint64_t max_trials = UINT64_MAX);

/// Conventional parent of height-1 blocks.
Hash256 genesis_hash();

enum class BlockErrc { bad_proof_of_work, bad_digest, bad_height, bad_transfer, bad_subsidy };

std::string_view to_string(BlockErrc code);

class BlockRejected : public std::runtime_error {
public:
    BlockRejected(BlockErrc code, const std::string& what, std::optional<LedgerErrc> ledger_code = std::nullopt,
                  std::optional<std::size_t> transfer_index = std::nullopt)
        : std::runtime_error(what), code_(code), ledger_code_(ledger_code), transfer_index_(transfer_index)
    {
    }
    BlockErrc code() const { return code_; }
    std::optional<LedgerErrc> ledger_code() const { return ledger_code_; }
    std::optional<std::size_t> transfer_index() const { return transfer_index_; }

private:
    BlockErrc code_;
    std::optional<LedgerErrc> ledger_code_;
    std::optional<std::size_t> transfer_index_;
};

/// Applies b on top of the replayed parent state: proof of work, then each
/// transfer with its fee credited to b.miner, then the subsidy. Returns the
/// new state; the input is never modified. Throws BlockRejected.
LedgerState validate_block(const LedgerState& parent, const Block& b, const BitSeq256& target, Amount subsidy);

/// A competing chain as seen by one peer.
struct ChainCandidate {
    Hash256 tip;
    std::uint64_t length = 0;  ///< blocks above genesis
    std::uint64_t arrival = 0; ///< receive order at this peer, lower is earlier
};

/// Longest chain wins; equal lengths go to the earliest received. Returns
/// the index of the winner. Throws std::invalid_argument on an empty set.
std::size_t fork_choice(std::span<const ChainCandidate> candidates);

/// A full chain from the block after genesis to the tip with its replayed
/// ledger state.
struct Chain {
    std::vector<Block> blocks;
    LedgerState state;
};

/// Replays a whole chain from the genesis state. Throws BlockRejected, or
/// std::invalid_argument when hashes do not link.
Chain replay_chain(const LedgerState& genesis, std::vector<Block> blocks, const BitSeq256& target, Amount subsidy);

} // namespace nlab
