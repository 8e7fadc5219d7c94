#include "nlab/puzzle.hpp"

#include <stdexcept>

#include "nlab/sha256.hpp"

namespace nlab {

bool phi(const PuzzleSpec& spec, const BitSeq256& r)
{
    return hash512(concat(spec.d1, r)) <= spec.d2;
}

BitSeq256 target_for_leading_zeros(unsigned k)
{
    if (k > 256) throw std::invalid_argument("difficulty exceeds 256 bits");
    return n2bs<256>((Natural(1) << (256 - k)) - 1);
}

} // namespace nlab
