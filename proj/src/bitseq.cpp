#include "nlab/bitseq.hpp"

namespace nlab {

std::string to_hex(std::span<const std::uint8_t> bytes)
{
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (const auto b : bytes) {
        out.push_back(kDigits[b >> 4]);
        out.push_back(kDigits[b & 0x0f]);
    }
    return out;
}

namespace {

int hex_value(char c)
{
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

} // namespace

std::vector<std::uint8_t> from_hex(std::string_view hex)
{
    if (hex.size() % 2 != 0) throw std::invalid_argument("hex: odd length");
    std::vector<std::uint8_t> out(hex.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const int hi = hex_value(hex[2 * i]);
        const int lo = hex_value(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) throw std::invalid_argument("hex: invalid digit");
        out[i] = static_cast<std::uint8_t>(hi << 4 | lo);
    }
    return out;
}

BitSeq512 concat(const BitSeq256& left, const BitSeq256& right)
{
    BitSeq512 out;
    std::copy(left.bytes().begin(), left.bytes().end(), out.bytes().begin());
    std::copy(right.bytes().begin(), right.bytes().end(), out.bytes().begin() + 32);
    return out;
}

BitSeq256 prefix(const BitSeq512& b)
{
    return BitSeq256::from_span(b.span().first(32));
}

BitSeq256 suffix(const BitSeq512& b)
{
    return BitSeq256::from_span(b.span().last(32));
}

} // namespace nlab
