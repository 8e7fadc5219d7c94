#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "nlab/bitseq.hpp"
#include "nlab/puzzle.hpp"
#include "nlab/rng.hpp"

namespace nlab {

using U256 = boost::multiprecision::uint256_t;

U256 to_u256(const BitSeq256& b);
BitSeq256 from_u256(const U256& v);

enum class StrategyKind { sequential, prime_stride, random };

std::string_view to_string(StrategyKind kind);
/// Accepts "sequential", "prime_stride" (or "prime-stride") and "random".
StrategyKind strategy_from_string(std::string_view name);

class MiningExhausted : public std::runtime_error {
public:
    MiningExhausted() : std::runtime_error("candidate space exhausted") {}
};

/// Enumeration of 512-bit words w_i || suffix_n.
///
/// Every strategy is random-access: suffix_at(n) is a pure function of the
/// strategy parameters, which is what lets solve_parallel hand out disjoint
/// index ranges and still agree with the sequential scan.
class MinerStrategy {
public:
    /// suffix_n = n.
    static MinerStrategy sequential(const BitSeq256& w);
    /// suffix_n = (bs2n(w) + n * p) mod 2^256. p must be an odd prime below
    /// 2^256; throws std::invalid_argument otherwise.
    static MinerStrategy prime_stride(const BitSeq256& w, const Natural& p);
    /// suffix_n = 256 bits drawn from the counter generator at position n.
    static MinerStrategy random(const BitSeq256& w, std::uint64_t seed);

    StrategyKind kind() const { return kind_; }
    const BitSeq256& word() const { return word_; }
    const U256& stride() const { return stride_; }
    std::uint64_t seed() const { return seed_; }

    BitSeq256 suffix_at(const U256& n) const;
    BitSeq512 candidate_at(const U256& n) const { return concat(word_, suffix_at(n)); }

    /// Returns the candidate at the cursor and advances it. Throws
    /// MiningExhausted once all 2^256 indices were issued.
    BitSeq512 next_candidate();

    const U256& cursor() const { return cursor_; }
    bool exhausted() const { return exhausted_; }
    /// Repositions the cursor (used for resuming and by the exhaustion tests).
    void seek(const U256& n);
    /// Advances the cursor by count indices, saturating at exhaustion.
    void advance(std::uint64_t count);

private:
    MinerStrategy(StrategyKind kind, const BitSeq256& w) : kind_(kind), word_(w) {}

    StrategyKind kind_;
    BitSeq256 word_;
    U256 stride_ = 0;
    U256 start_ = 0;
    std::uint64_t seed_ = 0;
    U256 cursor_ = 0;
    bool exhausted_ = false;
};

struct Solution {
    BitSeq256 r;
    std::uint64_t trials = 0; ///< candidates tested, including the winner

    friend bool operator==(const Solution&, const Solution&) = default;
};

/// Tests candidates in strategy order and returns the first r with
/// phi(spec, r). Returns std::nullopt when max_trials candidates fail (or the
/// space runs out). The strategy's word must equal spec.d1.
std::optional<Solution> solve(const PuzzleSpec& spec, MinerStrategy& strategy, std::uint64_t max_trials);

/// Same result as solve, computed by `workers` threads over disjoint index
/// chunks; the lowest winning index is reported.
std::optional<Solution> solve_parallel(const PuzzleSpec& spec, MinerStrategy& strategy, std::uint64_t max_trials,
                                       unsigned workers);

/// Draws a random odd prime below 2^256.
Natural random_prime_256(CounterRng& rng);

struct MiningStats {
    unsigned k = 0;
    std::uint64_t runs = 0;
    StrategyKind strategy = StrategyKind::sequential;
    std::uint64_t seed = 0;
    std::vector<std::uint64_t> trials_per_success;
    double mean = 0.0;
    double variance = 0.0; ///< unbiased sample variance; 0 for a single run

    friend bool operator==(const MiningStats&, const MiningStats&) = default;
};

/// Solves `runs` fresh puzzles at k leading zero bits, each with its own
/// pseudorandom w_i. Requires k <= 24 and runs >= 1.
MiningStats trial_statistics(unsigned k, std::uint64_t runs, StrategyKind kind, std::uint64_t seed,
                             unsigned jobs = 1);

} // namespace nlab
