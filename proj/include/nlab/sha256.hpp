#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

#include "nlab/bitseq.hpp"

namespace nlab {

/// Incremental FIPS 180-4 SHA-256.
class Sha256 {
public:
    Sha256();
    Sha256& update(std::span<const std::uint8_t> data);
    Sha256& update(std::string_view text);
    Hash256 finish();

private:
    void compress(const std::uint8_t* block);

    std::array<std::uint32_t, 8> state_;
    std::array<std::uint8_t, 64> buffer_{};
    std::size_t buffered_ = 0;
    std::uint64_t total_bytes_ = 0;
};

Hash256 sha256(std::span<const std::uint8_t> data);
Hash256 sha256(std::string_view text);

/// SHA-256 restricted to 512-bit inputs (the puzzle hash).
Hash256 hash512(const BitSeq512& d);

} // namespace nlab
