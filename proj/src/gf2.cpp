#include "cwbell/gf2.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <mutex>
#include <string>

#include "cwbell/errors.hpp"

namespace cwbell {

namespace gf2_portable {

// 4-bit windowed carry-less multiply
inline void clmul(std::uint64_t a, std::uint64_t b, std::uint64_t& lo, std::uint64_t& hi) {
    std::uint64_t tab[16];
    tab[0] = 0;
    tab[1] = b & 0x0fffffffffffffffULL;  // top 4 bits handled below
    for (int i = 2; i < 16; i += 2) {
        tab[i] = tab[i / 2] << 1;
        tab[i + 1] = tab[i] ^ tab[1];
    }
    std::uint64_t l = 0, h = 0;
    for (int s = 60; s >= 0; s -= 4) {
        if (s != 60) {
            h = (h << 4) | (l >> 60);
            l <<= 4;
        }
        l ^= tab[(a >> s) & 15];
    }
    // contributions of the top 4 bits of b
    for (int k = 60; k < 64; ++k)
        if (b >> k & 1) {
            l ^= a << k;
            h ^= a >> (64 - k);
        }
    lo = l;
    hi = h;
}

template <int W>
inline void mac(const std::uint64_t* a, const std::uint64_t* b, std::uint64_t* p) {
    for (int i = 0; i < W; ++i)
        for (int j = 0; j < W; ++j) {
            std::uint64_t lo, hi;
            clmul(a[i], b[j], lo, hi);
            p[i + j] ^= lo;
            p[i + j + 1] ^= hi;
        }
}

template <int W, int B>
inline void block_mac(const std::uint64_t* a, const std::uint64_t (*pw)[W], const std::uint64_t* c,
                      std::uint64_t* p) {
    for (int i = 0; i < 2 * W; ++i) p[i] = 0;
    mac<W>(a, pw[B], p);
    for (int e = 0; e < B - 1; ++e) mac<W>(c + e * W, pw[B - 1 - e], p);
}

#include "gf2_kernel.ipp"

}  // namespace gf2_portable

namespace gf2_pclmul {
void horner(int words, const std::uint64_t* coeffs, std::size_t s, const std::uint64_t* z,
            std::uint64_t* acc, int count, int ell, const int* taps, int ntaps);
void mul(int words, const std::uint64_t* a, const std::uint64_t* b, int ell, const int* taps,
         int ntaps, std::uint64_t* out);
}  // namespace gf2_pclmul

namespace {

std::atomic<bool> g_force_portable{false};

bool cpu_has_pclmul() {
    static const bool has = [] {
        __builtin_cpu_init();
        return __builtin_cpu_supports("pclmul") && __builtin_cpu_supports("sse4.1");
    }();
    return has;
}

bool use_hw() { return cpu_has_pclmul() && !g_force_portable.load(std::memory_order_relaxed); }

// --- variable-length GF(2)[x] helpers for the irreducibility test ---
using Poly = std::vector<std::uint64_t>;

int poly_degree(const Poly& p) {
    for (int w = static_cast<int>(p.size()) - 1; w >= 0; --w)
        if (p[w]) return w * 64 + 63 - __builtin_clzll(p[w]);
    return -1;
}

void poly_xor_shifted(Poly& a, const Poly& b, int shift) {
    const int ws = shift >> 6, bs = shift & 63;
    const std::size_t need = b.size() + ws + 1;
    if (a.size() < need) a.resize(need, 0);
    for (std::size_t i = 0; i < b.size(); ++i) {
        a[i + ws] ^= b[i] << bs;
        if (bs) a[i + ws + 1] ^= b[i] >> (64 - bs);
    }
}

Poly poly_mod(Poly a, const Poly& m) {
    const int dm = poly_degree(m);
    for (int da = poly_degree(a); da >= dm; da = poly_degree(a)) poly_xor_shifted(a, m, da - dm);
    return a;
}

Poly poly_gcd(Poly a, Poly b) {
    while (poly_degree(b) >= 0) {
        Poly r = poly_mod(a, b);
        a = std::move(b);
        b = std::move(r);
    }
    return a;
}

std::vector<int> prime_factors(int n) {
    std::vector<int> f;
    for (int p = 2; p * p <= n; ++p)
        if (n % p == 0) {
            f.push_back(p);
            while (n % p == 0) n /= p;
        }
    if (n > 1) f.push_back(n);
    return f;
}

}  // namespace

GF2Field::GF2Field(int degree) : GF2Field(degree, find_modulus(degree)) {}

GF2Field::GF2Field(int degree, std::vector<int> taps)
    : degree_(degree), words_((degree + 63) / 64), taps_(std::move(taps)) {
    if (degree < 1 || degree > 64 * kMaxFieldWords)
        throw DomainError("field degree must lie in [1, " + std::to_string(64 * kMaxFieldWords) + "]");
    for (int t : taps_)
        if (t <= 0 || t >= degree) throw DomainError("modulus taps must lie strictly inside (0, degree)");
}

FieldElem GF2Field::mul(const FieldElem& a, const FieldElem& b) const {
    FieldElem out{};
    if (use_hw())
        gf2_pclmul::mul(words_, a.data(), b.data(), degree_, taps_.data(),
                        static_cast<int>(taps_.size()), out.data());
    else
        gf2_portable::mul_dispatch(words_, a.data(), b.data(), degree_, taps_.data(),
                                   static_cast<int>(taps_.size()), out.data());
    return out;
}

void GF2Field::horner(const std::uint64_t* coeffs, std::size_t s, const FieldElem* points,
                      FieldElem* out, int count) const {
    if (count < 1 || count > 8) throw DomainError("horner evaluates 1..8 points");
    std::uint64_t z[8 * kMaxFieldWords], acc[8 * kMaxFieldWords];
    for (int k = 0; k < count; ++k)
        for (int i = 0; i < words_; ++i) z[k * words_ + i] = points[k][i];
    const int nt = static_cast<int>(taps_.size());
    if (use_hw())
        gf2_pclmul::horner(words_, coeffs, s, z, acc, count, degree_, taps_.data(), nt);
    else
        gf2_portable::horner_dispatch(words_, coeffs, s, z, acc, count, degree_, taps_.data(), nt);
    for (int k = 0; k < count; ++k) {
        out[k] = FieldElem{};
        for (int i = 0; i < words_; ++i) out[k][i] = acc[k * words_ + i];
    }
}

bool GF2Field::hardware_clmul() { return use_hw(); }
void GF2Field::set_force_portable(bool v) { g_force_portable.store(v); }

bool is_irreducible(int degree, const std::vector<int>& taps) {
    if (degree < 1) return false;
    if (degree == 1) return true;
    const GF2Field f(degree, taps);
    Poly modulus((degree + 64) / 64 + 1, 0);
    auto setbit = [](Poly& p, int k) { p[k >> 6] ^= std::uint64_t{1} << (k & 63); };
    setbit(modulus, degree);
    setbit(modulus, 0);
    for (int t : taps) setbit(modulus, t);

    auto to_poly = [&](const FieldElem& e) { return Poly(e.begin(), e.begin() + f.words()); };
    // x^(2^k) mod f by repeated squaring
    FieldElem x{};
    x[0] = degree == 1 ? 0 : 2;
    std::vector<FieldElem> frob(degree + 1);
    frob[0] = x;
    for (int k = 1; k <= degree; ++k) frob[k] = f.mul(frob[k - 1], frob[k - 1]);
    if (frob[degree] != x) return false;
    for (int p : prime_factors(degree)) {
        FieldElem d = frob[degree / p];
        d[0] ^= 2;  // minus x
        const Poly g = poly_gcd(modulus, to_poly(d));
        if (poly_degree(g) != 0) return false;
    }
    return true;
}

std::vector<int> find_modulus(int degree) {
    static std::mutex mu;
    static std::map<int, std::vector<int>> cache;
    {
        std::lock_guard<std::mutex> lock(mu);
        if (auto it = cache.find(degree); it != cache.end()) return it->second;
    }
    std::vector<int> found;
    for (int k = 1; k < degree && found.empty(); ++k)
        if (is_irreducible(degree, {k})) found = {k};
    for (int a = 3; a < degree && found.empty(); ++a)
        for (int b = 2; b < a && found.empty(); ++b)
            for (int c = 1; c < b && found.empty(); ++c)
                if (is_irreducible(degree, {a, b, c})) found = {a, b, c};
    if (found.empty() && degree > 1) throw DomainError("no trinomial or pentanomial modulus found");
    std::lock_guard<std::mutex> lock(mu);
    cache[degree] = found;
    return found;
}

std::uint64_t gf2_mul_reference(std::uint64_t a, std::uint64_t b, int degree,
                                const std::vector<int>& taps) {
    if (degree < 1 || degree > 63) throw DomainError("reference multiply supports degree 1..63");
    std::uint64_t mod = (std::uint64_t{1} << degree) | 1;
    for (int t : taps) mod |= std::uint64_t{1} << t;
    std::uint64_t r = 0;
    for (int i = degree - 1; i >= 0; --i) {
        r <<= 1;
        if (r >> degree & 1) r ^= mod;
        if (b >> i & 1) r ^= a;
    }
    return r;
}

}  // namespace cwbell
