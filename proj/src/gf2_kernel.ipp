// Included inside a namespace that provides
//   inline void clmul(std::uint64_t a, std::uint64_t b, std::uint64_t& lo, std::uint64_t& hi);
//   template <int W, int B> void block_mac(a, pw, c, p);
// where block_mac writes the unreduced a*pw[B] + sum_e c[e]*pw[B-1-e], e < B-1,
// to p (2W words).

template <int W>
inline void mul_wide(const std::uint64_t* a, const std::uint64_t* b, std::uint64_t* p) {
    for (int i = 0; i < 2 * W; ++i) p[i] = 0;
    for (int i = 0; i < W; ++i)
        for (int j = 0; j < W; ++j) {
            std::uint64_t lo, hi;
            clmul(a[i], b[j], lo, hi);
            p[i + j] ^= lo;
            p[i + j + 1] ^= hi;
        }
}

// Sparse modulus x^ell + sum x^taps + 1 with its shift constants.
struct Mod {
    int ell = 0, ws = 0, bs = 0;
    int ntaps = 0;
    int tw[4] = {}, tb[4] = {};
    bool two_fold = false;  // largest tap <= ell/2: two folds always reduce fully
    const int* taps = nullptr;
};

inline Mod make_mod(int ell, const int* taps, int ntaps) {
    Mod m;
    m.ell = ell;
    m.ws = ell >> 6;
    m.bs = ell & 63;
    m.ntaps = ntaps;
    m.taps = taps;
    int top = 0;
    for (int t = 0; t < ntaps && t < 4; ++t) {
        m.tw[t] = taps[t] >> 6;
        m.tb[t] = taps[t] & 63;
        top = taps[t] > top ? taps[t] : top;
    }
    m.two_fold = ntaps <= 4 && 2 * top <= ell;
    return m;
}

// in (N words) -> out (W+1 words) with in = L + H x^ell replaced by L + H (sum x^t + 1)
template <int N, int W>
inline void fold(const std::uint64_t* in, std::uint64_t* out, const Mod& m) {
    std::uint64_t h[W + 1];
    for (int j = 0; j <= W; ++j) {
        const int a = j + m.ws;
        std::uint64_t v = 0;
        if (a < N) {
            v = in[a] >> m.bs;
            if (m.bs && a + 1 < N) v |= in[a + 1] << (64 - m.bs);
        }
        h[j] = v;
    }
    for (int j = 0; j <= W; ++j) {
        std::uint64_t v = j < N ? in[j] : 0;
        if (j > m.ws) v = 0;
        else if (j == m.ws) v &= m.bs ? (std::uint64_t{1} << m.bs) - 1 : 0;
        out[j] = v ^ h[j];
    }
    for (int t = 0; t < m.ntaps; ++t) {
        const int kw = m.tw[t], kb = m.tb[t];
        for (int j = W; j >= kw; --j) {
            std::uint64_t v = h[j - kw] << kb;
            if (kb && j - kw - 1 >= 0) v |= h[j - kw - 1] >> (64 - kb);
            out[j] ^= v;
        }
    }
}

// p (2W words) reduced modulo x^ell + sum x^taps + 1, written to out (W words).
template <int W>
inline void reduce_loop(std::uint64_t* p, const Mod& m, std::uint64_t* out) {
    const int ws = m.ws, bs = m.bs;
    for (;;) {
        std::uint64_t hi[2 * W];
        bool any = false;
        for (int i = 0; i < 2 * W; ++i) {
            const int src = i + ws;
            std::uint64_t v = 0;
            if (src < 2 * W) {
                v = p[src] >> bs;
                if (bs && src + 1 < 2 * W) v |= p[src + 1] << (64 - bs);
            }
            hi[i] = v;
            any |= v != 0;
        }
        if (!any) break;
        if (bs) {
            p[ws] &= (std::uint64_t{1} << bs) - 1;
            for (int i = ws + 1; i < 2 * W; ++i) p[i] = 0;
        } else {
            for (int i = ws; i < 2 * W; ++i) p[i] = 0;
        }
        for (int i = 0; i < 2 * W; ++i) p[i] ^= hi[i];
        for (int t = 0; t < m.ntaps; ++t) {
            const int kw = m.taps[t] >> 6, kb = m.taps[t] & 63;
            for (int i = 2 * W - 1; i >= kw; --i) {
                std::uint64_t v = hi[i - kw] << kb;
                if (kb && i - kw - 1 >= 0) v |= hi[i - kw - 1] >> (64 - kb);
                p[i] ^= v;
            }
        }
    }
    for (int i = 0; i < W; ++i) out[i] = p[i];
}

template <int W>
inline void reduce(std::uint64_t* p, const Mod& m, std::uint64_t* out) {
    if (!m.two_fold) {
        reduce_loop<W>(p, m, out);
        return;
    }
    std::uint64_t r1[W + 1], r2[W + 1];
    fold<2 * W, W>(p, r1, m);
    fold<W + 1, W>(r1, r2, m);
    for (int i = 0; i < W; ++i) out[i] = r2[i];
}

template <int W>
inline void field_mul(const std::uint64_t* a, const std::uint64_t* b, const Mod& m,
                      std::uint64_t* out) {
    std::uint64_t p[2 * W];
    mul_wide<W>(a, b, p);
    reduce<W>(p, m, out);
}

// Horner's rule in blocks of B coefficients: with powers z^1..z^B at hand,
//   acc <- acc z^B + c_0 z^(B-1) + ... + c_(B-1)
// is accumulated without reduction (block_mac) and reduced once per block.
// Coefficients must already be reduced (fewer than ell bits).
constexpr int kBlock = 16;

template <int W, int K>
inline void horner_fixed(const std::uint64_t* coeffs, std::size_t s, const std::uint64_t* z,
                         std::uint64_t* acc, int ell, const int* taps, int ntaps) {
    const Mod m = make_mod(ell, taps, ntaps);
    std::uint64_t a[K][W] = {};
    std::uint64_t pw[K][kBlock + 1][W] = {};
    for (int k = 0; k < K; ++k) {
        pw[k][0][0] = 1;
        for (int i = 0; i < W; ++i) pw[k][1][i] = z[k * W + i];
        for (int e = 2; e <= kBlock; ++e) field_mul<W>(pw[k][e - 1], pw[k][1], m, pw[k][e]);
    }
    const std::size_t head = m.two_fold ? s % kBlock : s;
    for (std::size_t j = 0; j < head; ++j) {
        const std::uint64_t* c = coeffs + j * W;
        for (int k = 0; k < K; ++k) {
            std::uint64_t t[W];
            field_mul<W>(a[k], pw[k][1], m, t);
            for (int i = 0; i < W; ++i) a[k][i] = t[i] ^ c[i];
        }
    }
    for (std::size_t j = head; j < s; j += kBlock) {
        const std::uint64_t* c = coeffs + j * W;
        for (int k = 0; k < K; ++k) {
            std::uint64_t p[2 * W];
            block_mac<W, kBlock>(a[k], pw[k], c, p);
            for (int i = 0; i < W; ++i) p[i] ^= c[(kBlock - 1) * W + i];
            reduce<W>(p, m, a[k]);
        }
    }
    for (int k = 0; k < K; ++k)
        for (int i = 0; i < W; ++i) acc[k * W + i] = a[k][i];
}

template <int W>
inline void horner_w(const std::uint64_t* coeffs, std::size_t s, const std::uint64_t* z,
                     std::uint64_t* acc, int count, int ell, const int* taps, int ntaps) {
    switch (count) {
        case 8: horner_fixed<W, 8>(coeffs, s, z, acc, ell, taps, ntaps); break;
        case 4: horner_fixed<W, 4>(coeffs, s, z, acc, ell, taps, ntaps); break;
        default:
            for (int k = 0; k < count; ++k)
                horner_fixed<W, 1>(coeffs, s, z + k * W, acc + k * W, ell, taps, ntaps);
    }
}

inline void horner_dispatch(int words, const std::uint64_t* coeffs, std::size_t s,
                            const std::uint64_t* z, std::uint64_t* acc, int count, int ell,
                            const int* taps, int ntaps) {
    switch (words) {
        case 1: horner_w<1>(coeffs, s, z, acc, count, ell, taps, ntaps); break;
        case 2: horner_w<2>(coeffs, s, z, acc, count, ell, taps, ntaps); break;
        case 3: horner_w<3>(coeffs, s, z, acc, count, ell, taps, ntaps); break;
        default: horner_w<4>(coeffs, s, z, acc, count, ell, taps, ntaps); break;
    }
}

inline void mul_dispatch(int words, const std::uint64_t* a, const std::uint64_t* b, int ell,
                         const int* taps, int ntaps, std::uint64_t* out) {
    switch (words) {
        case 1: field_mul<1>(a, b, make_mod(ell, taps, ntaps), out); break;
        case 2: field_mul<2>(a, b, make_mod(ell, taps, ntaps), out); break;
        case 3: field_mul<3>(a, b, make_mod(ell, taps, ntaps), out); break;
        default: field_mul<4>(a, b, make_mod(ell, taps, ntaps), out); break;
    }
}
