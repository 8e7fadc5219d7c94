#include "nlab/mining.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <thread>

#include <boost/multiprecision/miller_rabin.hpp>

#include "nlab/sha256.hpp"

namespace nlab {

namespace {

const U256 kMaxIndex = std::numeric_limits<U256>::max();

BitSeq256 random_bits(const CounterRng& rng, std::uint64_t first_index)
{
    BitSeq256 out;
    for (std::uint64_t i = 0; i < 4; ++i) {
        const auto word = rng.at(first_index + i);
        for (std::size_t j = 0; j < 8; ++j) out.bytes()[8 * i + j] = static_cast<std::uint8_t>(word >> (56 - 8 * j));
    }
    return out;
}

void require_matching_word(const PuzzleSpec& spec, const MinerStrategy& strategy)
{
    if (spec.d1 != strategy.word()) throw std::invalid_argument("strategy word does not match puzzle d1");
}

} // namespace

U256 to_u256(const BitSeq256& b)
{
    U256 v = 0;
    for (const auto byte : b.bytes()) v = (v << 8) | byte;
    return v;
}

BitSeq256 from_u256(const U256& v)
{
    BitSeq256 out;
    U256 rest = v;
    for (std::size_t i = 32; i-- > 0;) {
        out.bytes()[i] = static_cast<std::uint8_t>(static_cast<unsigned>(rest & 0xff));
        rest >>= 8;
    }
    return out;
}

std::string_view to_string(StrategyKind kind)
{
    switch (kind) {
    case StrategyKind::sequential: return "sequential";
    case StrategyKind::prime_stride: return "prime_stride";
    case StrategyKind::random: return "random";
    }
    return "unknown";
}

StrategyKind strategy_from_string(std::string_view name)
{
    if (name == "sequential") return StrategyKind::sequential;
    if (name == "prime_stride" || name == "prime-stride") return StrategyKind::prime_stride;
    if (name == "random") return StrategyKind::random;
    throw std::invalid_argument("unknown strategy: " + std::string(name));
}

MinerStrategy MinerStrategy::sequential(const BitSeq256& w)
{
    return MinerStrategy(StrategyKind::sequential, w);
}

MinerStrategy MinerStrategy::prime_stride(const BitSeq256& w, const Natural& p)
{
    if (p <= 2 || p >= (Natural(1) << 256) || (p & 1) == 0)
        throw std::invalid_argument("prime stride must be an odd prime below 2^256");
    // Fixed witness generator: the check must not consume caller randomness.
    CounterRng witness(0x5eed0f9121e5ULL);
    if (!boost::multiprecision::miller_rabin_test(p, 25, witness))
        throw std::invalid_argument("prime stride is not prime");
    MinerStrategy s(StrategyKind::prime_stride, w);
    s.stride_ = static_cast<U256>(p);
    // bs2n(w_i) already lies below 2^256, so the start needs no reduction.
    s.start_ = to_u256(w);
    return s;
}

MinerStrategy MinerStrategy::random(const BitSeq256& w, std::uint64_t seed)
{
    MinerStrategy s(StrategyKind::random, w);
    s.seed_ = seed;
    return s;
}

BitSeq256 MinerStrategy::suffix_at(const U256& n) const
{
    switch (kind_) {
    case StrategyKind::sequential: return from_u256(n);
    case StrategyKind::prime_stride: return from_u256(start_ + n * stride_); // wraps mod 2^256
    case StrategyKind::random: {
        // Indices beyond 2^62 alias; unreachable at desk scale.
        const auto index = static_cast<std::uint64_t>(n & U256(0x3fffffffffffffffULL));
        return random_bits(CounterRng(seed_, 0x7a4d0), index * 4);
    }
    }
    throw std::logic_error("unknown strategy kind");
}

BitSeq512 MinerStrategy::next_candidate()
{
    if (exhausted_) throw MiningExhausted();
    auto candidate = candidate_at(cursor_);
    if (cursor_ == kMaxIndex)
        exhausted_ = true;
    else
        ++cursor_;
    return candidate;
}

void MinerStrategy::seek(const U256& n)
{
    cursor_ = n;
    exhausted_ = false;
}

void MinerStrategy::advance(std::uint64_t count)
{
    if (count == 0 || exhausted_) return;
    if (kMaxIndex - cursor_ < count) {
        cursor_ = kMaxIndex;
        exhausted_ = true;
        return;
    }
    cursor_ += count;
}

std::optional<Solution> solve(const PuzzleSpec& spec, MinerStrategy& strategy, std::uint64_t max_trials)
{
    require_matching_word(spec, strategy);
    if (max_trials == 0) throw std::invalid_argument("max_trials must be at least 1");
    for (std::uint64_t trial = 1; trial <= max_trials; ++trial) {
        if (strategy.exhausted()) return std::nullopt;
        const auto candidate = strategy.next_candidate();
        if (hash512(candidate) <= spec.d2) return Solution{suffix(candidate), trial};
    }
    return std::nullopt;
}

std::optional<Solution> solve_parallel(const PuzzleSpec& spec, MinerStrategy& strategy, std::uint64_t max_trials,
                                       unsigned workers)
{
    require_matching_word(spec, strategy);
    if (max_trials == 0) throw std::invalid_argument("max_trials must be at least 1");
    if (workers <= 1) return solve(spec, strategy, max_trials);
    if (strategy.exhausted()) return std::nullopt;

    // Offsets are relative to the current cursor; candidates past the end of
    // the index space are not available.
    const U256 last_offset = kMaxIndex - strategy.cursor();
    const std::uint64_t limit = last_offset < max_trials ? static_cast<std::uint64_t>(last_offset) + 1 : max_trials;
    constexpr std::uint64_t kChunk = 1024;
    const U256 base = strategy.cursor();

    std::atomic<std::uint64_t> next_chunk{0};
    std::atomic<std::uint64_t> best{std::numeric_limits<std::uint64_t>::max()};
    auto work = [&] {
        for (;;) {
            const std::uint64_t start = next_chunk.fetch_add(1) * kChunk;
            if (start >= limit || start >= best.load()) return;
            const std::uint64_t stop = std::min(limit, start + kChunk);
            for (std::uint64_t offset = start; offset < stop && offset < best.load(); ++offset) {
                if (hash512(strategy.candidate_at(base + offset)) <= spec.d2) {
                    auto current = best.load();
                    while (offset < current && !best.compare_exchange_weak(current, offset)) {
                    }
                    break;
                }
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        for (unsigned i = 0; i < workers; ++i) pool.emplace_back(work);
    }

    const std::uint64_t winner = best.load();
    if (winner == std::numeric_limits<std::uint64_t>::max()) {
        strategy.advance(limit);
        return std::nullopt;
    }
    strategy.advance(winner + 1);
    return Solution{strategy.suffix_at(base + winner), winner + 1};
}

Natural random_prime_256(CounterRng& rng)
{
    for (;;) {
        Natural candidate = 0;
        for (int i = 0; i < 4; ++i) candidate = (candidate << 64) | Natural(rng());
        candidate |= 1;
        if (candidate > 2 && boost::multiprecision::miller_rabin_test(candidate, 25, rng)) return candidate;
    }
}

MiningStats trial_statistics(unsigned k, std::uint64_t runs, StrategyKind kind, std::uint64_t seed, unsigned jobs)
{
    if (k > 24) throw std::invalid_argument("difficulty above 24 bits is outside desk scale");
    if (runs == 0) throw std::invalid_argument("runs must be at least 1");

    MiningStats stats;
    stats.k = k;
    stats.runs = runs;
    stats.strategy = kind;
    stats.seed = seed;
    stats.trials_per_success.assign(runs, 0);
    const auto target = target_for_leading_zeros(k);

    auto run_one = [&](std::uint64_t run) {
        CounterRng rng = CounterRng(seed).fork(run);
        const BitSeq256 word = random_bits(rng, 0);
        rng.advance_to(4);
        MinerStrategy strategy = [&] {
            switch (kind) {
            case StrategyKind::sequential: return MinerStrategy::sequential(word);
            case StrategyKind::prime_stride: return MinerStrategy::prime_stride(word, random_prime_256(rng));
            case StrategyKind::random: return MinerStrategy::random(word, rng());
            }
            throw std::logic_error("unknown strategy kind");
        }();
        const auto solution = solve({word, target}, strategy, std::numeric_limits<std::uint64_t>::max());
        if (!solution) throw std::runtime_error("mining run did not terminate");
        stats.trials_per_success[run] = solution->trials;
    };

    const unsigned workers = std::max(1U, std::min<unsigned>(jobs, static_cast<unsigned>(runs)));
    if (workers == 1) {
        for (std::uint64_t run = 0; run < runs; ++run) run_one(run);
    } else {
        std::atomic<std::uint64_t> next{0};
        std::vector<std::jthread> pool;
        for (unsigned i = 0; i < workers; ++i)
            pool.emplace_back([&] {
                for (std::uint64_t run = next.fetch_add(1); run < runs; run = next.fetch_add(1)) run_one(run);
            });
    }

    long double sum = 0;
    for (const auto t : stats.trials_per_success) sum += t;
    stats.mean = static_cast<double>(sum / runs);
    if (runs > 1) {
        long double squares = 0;
        for (const auto t : stats.trials_per_success) {
            const long double d = t - sum / runs;
            squares += d * d;
        }
        stats.variance = static_cast<double>(squares / (runs - 1));
    }
    return stats;
}

} // namespace nlab
