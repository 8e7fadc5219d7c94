#pragma once

#include "nlab/bitseq.hpp"

namespace nlab {

/// Proof-of-work problem: find r with bs2n(hash512(d1 || r)) <= bs2n(d2).
struct PuzzleSpec {
    BitSeq256 d1; ///< header digest
    BitSeq256 d2; ///< target
};

/// The acceptance predicate. Compares big-endian byte strings, which orders
/// exactly as bs2n does.
bool phi(const PuzzleSpec& spec, const BitSeq256& r);

/// Target accepting digests with at least k leading zero bits:
/// n2bs(2^(256-k) - 1, 256). Throws std::invalid_argument for k > 256.
BitSeq256 target_for_leading_zeros(unsigned k);

} // namespace nlab
