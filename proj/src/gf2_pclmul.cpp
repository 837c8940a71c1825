// Compiled with -mpclmul; only called after a runtime CPU check.
#include <immintrin.h>

#include <cstddef>
#include <cstdint>

namespace cwbell::gf2_pclmul {

inline void clmul(std::uint64_t a, std::uint64_t b, std::uint64_t& lo, std::uint64_t& hi) {
    const __m128i r = _mm_clmulepi64_si128(_mm_cvtsi64_si128(static_cast<long long>(a)),
                                           _mm_cvtsi64_si128(static_cast<long long>(b)), 0);
    lo = static_cast<std::uint64_t>(_mm_cvtsi128_si64(r));
    hi = static_cast<std::uint64_t>(_mm_extract_epi64(r, 1));
}

// words 2h, 2h+1 of a W-word element
template <int W>
inline __m128i load_pair(const std::uint64_t* p, int h) {
    if (2 * h + 1 < W) return _mm_loadu_si128(reinterpret_cast<const __m128i*>(p + 2 * h));
    return _mm_loadl_epi64(reinterpret_cast<const __m128i*>(p + 2 * h));
}

// products land in e[q] (words 2q, 2q+1) or o[q] (words 2q+1, 2q+2)
template <int W>
inline void mac(const __m128i* a, const __m128i* b, __m128i* e, __m128i* o) {
#pragma GCC unroll 16
    for (int i = 0; i < W; ++i) {
#pragma GCC unroll 16
        for (int j = 0; j < W; ++j) {
            __m128i r;
            switch (((j & 1) << 4) | (i & 1)) {
                case 0x00: r = _mm_clmulepi64_si128(a[i / 2], b[j / 2], 0x00); break;
                case 0x01: r = _mm_clmulepi64_si128(a[i / 2], b[j / 2], 0x01); break;
                case 0x10: r = _mm_clmulepi64_si128(a[i / 2], b[j / 2], 0x10); break;
                default: r = _mm_clmulepi64_si128(a[i / 2], b[j / 2], 0x11); break;
            }
            if (((i + j) & 1) == 0)
                e[(i + j) / 2] = _mm_xor_si128(e[(i + j) / 2], r);
            else
                o[(i + j) / 2] = _mm_xor_si128(o[(i + j) / 2], r);
        }
    }
}

template <int W, int B>
inline void block_mac(const std::uint64_t* a, const std::uint64_t (*pw)[W], const std::uint64_t* c,
                      std::uint64_t* p) {
    constexpr int H = (W + 1) / 2;
    __m128i e[W], o[W], x[H], y[H];
    for (int i = 0; i < W; ++i) e[i] = o[i] = _mm_setzero_si128();
    for (int h = 0; h < H; ++h) {
        x[h] = load_pair<W>(a, h);
        y[h] = load_pair<W>(pw[B], h);
    }
    mac<W>(x, y, e, o);
    for (int k = 0; k < B - 1; ++k) {
        for (int h = 0; h < H; ++h) {
            x[h] = load_pair<W>(c + k * W, h);
            y[h] = load_pair<W>(pw[B - 1 - k], h);
        }
        mac<W>(x, y, e, o);
    }
    alignas(16) std::uint64_t t[2];
    std::uint64_t q[2 * W + 2] = {};
    for (int i = 0; i < W; ++i) {
        _mm_store_si128(reinterpret_cast<__m128i*>(t), e[i]);
        q[2 * i] ^= t[0];
        q[2 * i + 1] ^= t[1];
        _mm_store_si128(reinterpret_cast<__m128i*>(t), o[i]);
        q[2 * i + 1] ^= t[0];
        q[2 * i + 2] ^= t[1];
    }
    for (int i = 0; i < 2 * W; ++i) p[i] = q[i];
}

#include "gf2_kernel.ipp"

void horner(int words, const std::uint64_t* coeffs, std::size_t s, const std::uint64_t* z,
            std::uint64_t* acc, int count, int ell, const int* taps, int ntaps) {
    horner_dispatch(words, coeffs, s, z, acc, count, ell, taps, ntaps);
}

void mul(int words, const std::uint64_t* a, const std::uint64_t* b, int ell, const int* taps,
         int ntaps, std::uint64_t* out) {
    mul_dispatch(words, a, b, ell, taps, ntaps, out);
}

}  // namespace cwbell::gf2_pclmul
