#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace cwbell {

// Packed bits; bit i lives in word i/64 at position 63 - i%64, so the byte
// serialization is most-significant-bit first.
class BitString {
public:
    BitString() = default;
    explicit BitString(std::size_t length) : length_(length), words_((length + 63) / 64, 0) {}

    std::size_t size() const { return length_; }
    bool empty() const { return length_ == 0; }

    int get(std::size_t i) const { return static_cast<int>(words_[i >> 6] >> (63 - (i & 63)) & 1); }
    void set(std::size_t i, int v) {
        const std::uint64_t mask = std::uint64_t{1} << (63 - (i & 63));
        if (v)
            words_[i >> 6] |= mask;
        else
            words_[i >> 6] &= ~mask;
    }
    void push_back(int v) {
        if ((length_ & 63) == 0) words_.push_back(0);
        ++length_;
        set(length_ - 1, v);
    }

    std::size_t popcount() const;
    BitString slice(std::size_t begin, std::size_t length) const;
    BitString operator^(const BitString& o) const;

    std::vector<std::uint8_t> to_bytes() const;
    static BitString from_bytes(std::span<const std::uint8_t> bytes, std::size_t length);
    std::string to_string() const;  // '0'/'1' characters
    static BitString from_string(const std::string& s);

    const std::vector<std::uint64_t>& words() const { return words_; }

    friend bool operator==(const BitString& a, const BitString& b) {
        return a.length_ == b.length_ && a.words_ == b.words_;
    }

private:
    std::size_t length_ = 0;
    std::vector<std::uint64_t> words_;
};

}  // namespace cwbell
