#include "cwbell/bitstring.hpp"

#include <bit>

#include "cwbell/errors.hpp"

namespace cwbell {

std::size_t BitString::popcount() const {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
}

BitString BitString::slice(std::size_t begin, std::size_t length) const {
    if (begin + length > length_) throw LengthMismatch("slice exceeds bit string");
    BitString out(length);
    for (std::size_t i = 0; i < length; ++i) out.set(i, get(begin + i));
    return out;
}

BitString BitString::operator^(const BitString& o) const {
    if (o.length_ != length_) throw LengthMismatch("xor of bit strings of different length");
    BitString out = *this;
    for (std::size_t i = 0; i < words_.size(); ++i) out.words_[i] ^= o.words_[i];
    return out;
}

std::vector<std::uint8_t> BitString::to_bytes() const {
    std::vector<std::uint8_t> out((length_ + 7) / 8);
    for (std::size_t b = 0; b < out.size(); ++b)
        out[b] = static_cast<std::uint8_t>(words_[b >> 3] >> (56 - 8 * (b & 7)));
    return out;
}

BitString BitString::from_bytes(std::span<const std::uint8_t> bytes, std::size_t length) {
    if (length > bytes.size() * 8) throw LengthMismatch("bit length exceeds byte payload");
    BitString out(length);
    for (std::size_t b = 0; b < (length + 7) / 8; ++b)
        out.words_[b >> 3] |= static_cast<std::uint64_t>(bytes[b]) << (56 - 8 * (b & 7));
    // zero any padding bits beyond length
    if (length & 63) out.words_.back() &= ~std::uint64_t{0} << (64 - (length & 63));
    return out;
}

std::string BitString::to_string() const {
    std::string s(length_, '0');
    for (std::size_t i = 0; i < length_; ++i)
        if (get(i)) s[i] = '1';
    return s;
}

BitString BitString::from_string(const std::string& s) {
    BitString out;
    for (char c : s) {
        if (c == '0' || c == '1')
            out.push_back(c == '1');
        else
            throw FormatError("bit string may contain only '0' and '1'");
    }
    return out;
}

}  // namespace cwbell
