#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace cwbell {

constexpr int kMaxFieldWords = 4;  // degrees up to 256

// Coefficient of x^k is bit k%64 of word k/64.
using FieldElem = std::array<std::uint64_t, kMaxFieldWords>;

// x^degree + sum x^taps + 1 with the lowest weight; among trinomials the smallest
// middle exponent, otherwise the smallest pentanomial (taps compared from the
// largest exponent down). Results are cached.
std::vector<int> find_modulus(int degree);

// Rabin's test for x^degree + sum x^taps + 1.
bool is_irreducible(int degree, const std::vector<int>& taps);

class GF2Field {
public:
    explicit GF2Field(int degree);
    GF2Field(int degree, std::vector<int> taps);

    int degree() const { return degree_; }
    int words() const { return words_; }
    const std::vector<int>& taps() const { return taps_; }

    FieldElem mul(const FieldElem& a, const FieldElem& b) const;

    // Evaluates sum_j coeffs[j] z^(s-1-j) at up to 8 points at once; coefficients
    // and points must be reduced (fewer than degree bits).
    // coeffs holds s elements of words() words each, points/out hold `count`.
    void horner(const std::uint64_t* coeffs, std::size_t s, const FieldElem* points,
                FieldElem* out, int count) const;

    // Whether the carry-less multiply instruction is used.
    static bool hardware_clmul();
    // Force the portable path (for tests and benchmarks).
    static void set_force_portable(bool v);

private:
    int degree_;
    int words_;
    std::vector<int> taps_;
};

// Reference multiply: shift-and-add with bitwise reduction, degree <= 63.
std::uint64_t gf2_mul_reference(std::uint64_t a, std::uint64_t b, int degree,
                                const std::vector<int>& taps);

}  // namespace cwbell
