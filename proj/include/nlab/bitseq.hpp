#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace nlab {

/// Arbitrary-precision natural number used by bs2n / n2bs.
using Natural = boost::multiprecision::cpp_int;

/// Fixed-length bit sequence stored as big-endian bytes: bit 0 is the most
/// significant bit of byte 0.
template <std::size_t Bits>
class BitSeq {
    static_assert(Bits % 8 == 0, "bit sequences are byte aligned");

public:
    static constexpr std::size_t kBits = Bits;
    static constexpr std::size_t kBytes = Bits / 8;
    using Bytes = std::array<std::uint8_t, kBytes>;

    constexpr BitSeq() = default;
    constexpr explicit BitSeq(const Bytes& bytes) : bytes_(bytes) {}

    static BitSeq zeros() { return BitSeq{}; }
    static BitSeq ones()
    {
        BitSeq b;
        b.bytes_.fill(0xff);
        return b;
    }

    static BitSeq from_span(std::span<const std::uint8_t> data)
    {
        if (data.size() != kBytes) throw std::invalid_argument("BitSeq: wrong byte length");
        BitSeq b;
        std::copy(data.begin(), data.end(), b.bytes_.begin());
        return b;
    }

    /// Parses lowercase or uppercase hex, no prefix, exactly 2*kBytes digits.
    static BitSeq from_hex(std::string_view hex);
    std::string hex() const;

    bool bit(std::size_t i) const { return (bytes_[i / 8] >> (7 - i % 8)) & 1U; }
    void set_bit(std::size_t i, bool v)
    {
        const auto mask = static_cast<std::uint8_t>(1U << (7 - i % 8));
        if (v)
            bytes_[i / 8] |= mask;
        else
            bytes_[i / 8] &= static_cast<std::uint8_t>(~mask);
    }

    const Bytes& bytes() const { return bytes_; }
    Bytes& bytes() { return bytes_; }
    std::span<const std::uint8_t> span() const { return bytes_; }

    /// Number of leading zero bits.
    std::size_t leading_zeros() const
    {
        for (std::size_t i = 0; i < Bits; ++i)
            if (bit(i)) return i;
        return Bits;
    }

    // Lexicographic byte order equals numeric order for big-endian sequences.
    friend auto operator<=>(const BitSeq&, const BitSeq&) = default;

private:
    Bytes bytes_{};
};

using BitSeq256 = BitSeq<256>;
using BitSeq512 = BitSeq<512>;
using Hash256 = BitSeq256;

std::string to_hex(std::span<const std::uint8_t> bytes);
/// Throws std::invalid_argument on odd length or a non-hex digit.
std::vector<std::uint8_t> from_hex(std::string_view hex);

template <std::size_t Bits>
BitSeq<Bits> BitSeq<Bits>::from_hex(std::string_view hex)
{
    if (hex.size() != 2 * kBytes) throw std::invalid_argument("BitSeq: wrong hex length");
    return from_span(nlab::from_hex(hex));
}

template <std::size_t Bits>
std::string BitSeq<Bits>::hex() const
{
    return to_hex(bytes_);
}

/// Big-endian conversion of a bit sequence to a natural number.
template <std::size_t Bits>
Natural bs2n(const BitSeq<Bits>& b)
{
    Natural n = 0;
    for (const auto byte : b.bytes()) {
        n <<= 8;
        n += byte;
    }
    return n;
}

/// Inverse of bs2n. Throws std::overflow_error when n >= 2^Bits.
template <std::size_t Bits>
BitSeq<Bits> n2bs(const Natural& n)
{
    if (n < 0 || n >= (Natural(1) << Bits)) throw std::overflow_error("n2bs: value does not fit width");
    BitSeq<Bits> b;
    Natural rest = n;
    for (std::size_t i = BitSeq<Bits>::kBytes; i-- > 0;) {
        b.bytes()[i] = static_cast<std::uint8_t>(static_cast<unsigned>(rest & 0xff));
        rest >>= 8;
    }
    return b;
}

/// Concatenation of two 256-bit sequences into the 512-bit hash input.
BitSeq512 concat(const BitSeq256& left, const BitSeq256& right);
BitSeq256 prefix(const BitSeq512& b);
BitSeq256 suffix(const BitSeq512& b);

} // namespace nlab
