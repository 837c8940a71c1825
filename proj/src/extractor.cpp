#include "cwbell/extractor.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

#include "cwbell/errors.hpp"
#include "cwbell/parallel.hpp"
#include "cwbell/rates.hpp"

namespace cwbell {

int BitStringSource::next_bit() {
    if (pos_ >= bits_.size()) throw SourceExhausted("uniform bit source exhausted after " +
                                                    std::to_string(pos_) + " bits");
    ++consumed_;
    return bits_.get(pos_++);
}

int RngBitSource::next_bit() {
    if (left_ == 0) {
        word_ = rng_.next();
        left_ = 64;
    }
    --left_;
    ++consumed_;
    return static_cast<int>(word_ >> left_ & 1);
}

IntervalSample interval_sample(double gamma, BitSource& src, int max_bits) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw DomainError("interval sampler needs gamma in (0,1)");
    // e = gamma*2^j - (2^j - k - 1) for the current dyadic interval [k/2^j, (k+1)/2^j);
    // every update is exact in binary floating point
    double e = gamma;
    IntervalSample r;
    for (;;) {
        if (r.consumed >= max_bits) throw SamplingAborted("interval sampler exceeded its bit cap");
        const int u = src.next_bit();
        ++r.consumed;
        e = 2.0 * e + u - 1.0;
        if (e >= 1.0) {
            r.bit = 1;
            return r;
        }
        if (e <= 0.0) {
            r.bit = 0;
            return r;
        }
    }
}

struct BernoulliSequenceSampler::State {
    using Int = boost::multiprecision::cpp_int;
    Int g, g_bar;    // gamma = g / 2^e, 1 - gamma = g_bar / 2^e
    int e = 0;
    std::size_t block = 1;
    // within the current block: target [lo, lo + w) / 2^depth, U in [k, k + 1) / 2^j
    std::size_t drawn = 0;
    Int lo, w, k;
    std::uint64_t depth = 0, j = 0;

    void reset() {
        drawn = 0;
        lo = 0;
        w = 1;
        k = 0;
        depth = 0;
        j = 0;
    }
};

BernoulliSequenceSampler::BernoulliSequenceSampler(double gamma, std::size_t block)
    : st_(std::make_unique<State>()) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw DomainError("sequence sampler needs gamma in (0,1)");
    if (block < 1) throw DomainError("sequence sampler needs a positive block size");
    int ex = 0;
    const double f = std::frexp(gamma, &ex);  // gamma = f 2^ex, f in [1/2, 1)
    st_->e = 53 - ex;
    st_->g = static_cast<std::uint64_t>(std::ldexp(f, 53));
    st_->g_bar = (State::Int(1) << st_->e) - st_->g;
    st_->block = block;
    st_->reset();
}

BernoulliSequenceSampler::~BernoulliSequenceSampler() = default;
BernoulliSequenceSampler::BernoulliSequenceSampler(BernoulliSequenceSampler&&) noexcept = default;
BernoulliSequenceSampler& BernoulliSequenceSampler::operator=(BernoulliSequenceSampler&&) noexcept =
    default;

int BernoulliSequenceSampler::next(BitSource& src) {
    State& s = *st_;
    if (s.drawn == s.block) s.reset();
    const std::uint64_t depth = s.depth + static_cast<std::uint64_t>(s.e);
    const State::Int lo = s.lo << s.e;
    const State::Int cut = lo + s.w * s.g_bar;  // split point, units 2^-depth
    for (;;) {
        // compare U's interval with the cut on a common denominator
        State::Int kl = s.k, kh = s.k + 1, c = cut;
        if (depth >= s.j) {
            kl <<= (depth - s.j);
            kh <<= (depth - s.j);
        } else {
            c <<= (s.j - depth);
        }
        if (kh <= c) {
            s.lo = lo;
            s.w *= s.g_bar;
            s.depth = depth;
            ++s.drawn;
            return 0;
        }
        if (kl >= c) {
            s.lo = cut;
            s.w *= s.g;
            s.depth = depth;
            ++s.drawn;
            return 1;
        }
        const int u = src.next_bit();
        ++consumed_;
        s.k = (s.k << 1) + u;
        ++s.j;
    }
}

std::uint64_t next_prime(std::uint64_t n) {
    auto prime = [](std::uint64_t v) {
        if (v < 2) return false;
        for (std::uint64_t d = 2; d * d <= v; ++d)
            if (v % d == 0) return false;
        return true;
    };
    while (!prime(n)) ++n;
    return n;
}

WeakDesign::WeakDesign(std::size_t m, int ell) : m_(m), ell_(ell) {
    if (m < 1) throw ParameterInfeasible("weak design needs at least one set");
    if (ell < 2) throw ParameterInfeasible("weak design needs ell >= 2");
    const std::size_t t = static_cast<std::size_t>(2 * ell);
    q_ = next_prime(t);
    const double r = 2.0 * std::numbers::e;
    std::size_t base = 0;
    auto add = [&](std::size_t size) {
        blocks_.push_back({base, size, blocks_.size() * segment_bits()});
        base += size;
    };
    if (m > t) {
        const auto a = static_cast<int>(std::ceil((std::log(m - r) - std::log(t - r)) /
                                                  (std::log(r) - std::log(r - 1.0))));
        const double n0 = static_cast<double>(m) / r - 1.0;
        double ni = n0, cum = 0.0;
        for (int i = 0; i < a && base < m; ++i) {
            cum += ni;
            ni *= 1.0 - 1.0 / r;
            const auto upto = std::min<std::size_t>(m, static_cast<std::size_t>(std::ceil(cum)));
            if (upto > base) add(upto - base);
        }
    }
    if (base < m) add(m - base);
}

std::pair<std::size_t, std::size_t> WeakDesign::locate(std::size_t i) const {
    if (i >= m_) throw DomainError("weak design index out of range");
    const auto it = std::upper_bound(blocks_.begin(), blocks_.end(), i,
                                     [](std::size_t v, const DesignBlock& b) { return v < b.first_output; });
    const std::size_t b = static_cast<std::size_t>(it - blocks_.begin()) - 1;
    return {b, i - blocks_[b].first_output};
}

void WeakDesign::set(std::size_t i, std::vector<std::uint64_t>& out) const {
    const auto [b, j] = locate(i);
    std::uint64_t digits[64];
    int nd = 0;
    for (std::uint64_t v = j; v > 0; v /= q_) digits[nd++] = v % q_;
    const int t = this->t();
    out.resize(static_cast<std::size_t>(t));
    const std::uint64_t off = blocks_[b].seed_offset;
    for (int x = 0; x < t; ++x) {
        std::uint64_t p = 0;
        for (int k = nd - 1; k >= 0; --k) p = (p * static_cast<std::uint64_t>(x) + digits[k]) % q_;
        out[static_cast<std::size_t>(x)] = off + static_cast<std::uint64_t>(x) * q_ + p;
    }
}

ExtractorSpec ExtractorSpec::from_budget(std::uint64_t n_rounds, std::uint64_t m, double eps_1) {
    const SeedLength sl = seed_length(static_cast<double>(n_rounds), static_cast<std::int64_t>(m), eps_1);
    if (sl.ell > 64 * kMaxFieldWords) throw ParameterInfeasible("field degree above supported maximum");
    ExtractorSpec s;
    s.input_len = 2 * n_rounds;
    s.m = m;
    s.ell = static_cast<int>(sl.ell);
    s.a = sl.a;
    s.d = sl.d;
    s.eps_1 = eps_1;
    s.design_d = WeakDesign(m, s.ell).d();
    return s;
}

ExtractorSpec ExtractorSpec::with_ell(std::uint64_t input_len, std::uint64_t m, int ell) {
    if (ell < 2 || ell > 64 * kMaxFieldWords) throw ParameterInfeasible("unsupported field degree");
    ExtractorSpec s;
    s.input_len = input_len;
    s.m = m;
    s.ell = ell;
    const double r = 2.0 * std::numbers::e;
    const double t = 2.0 * ell;
    s.a = static_cast<double>(m) > t
              ? static_cast<std::int64_t>(std::ceil((std::log(m - r) - std::log(t - r)) /
                                                    (std::log(r) - std::log(r - 1.0))))
              : 1;
    s.d = s.a * (2 * ell) * (2 * ell);
    s.design_d = WeakDesign(m, ell).d();
    return s;
}

std::vector<std::uint64_t> source_symbols(const BitString& source, const GF2Field& f) {
    const std::size_t ell = static_cast<std::size_t>(f.degree());
    const std::size_t w = static_cast<std::size_t>(f.words());
    const std::size_t s = (source.size() + ell - 1) / ell;
    std::vector<std::uint64_t> out(s * w, 0);
    for (std::size_t i = 0; i < source.size(); ++i)
        if (source.get(i)) {
            const std::size_t j = i / ell, k = i % ell;
            out[j * w + k / 64] |= std::uint64_t{1} << (k % 64);
        }
    return out;
}

namespace {

FieldElem gather(const BitString& seed, const std::uint64_t* idx, int count) {
    FieldElem e{};
    for (int k = 0; k < count; ++k)
        if (seed.get(idx[k])) e[k / 64] |= std::uint64_t{1} << (k % 64);
    return e;
}

int masked_parity(const FieldElem& a, const FieldElem& b) {
    int p = 0;
    for (int i = 0; i < kMaxFieldWords; ++i) p ^= std::popcount(a[i] & b[i]) & 1;
    return p;
}

}  // namespace

int one_bit_extract(const BitString& source, const BitString& subseed, int ell) {
    if (subseed.size() != static_cast<std::size_t>(2 * ell))
        throw LengthMismatch("subseed must hold 2*ell bits");
    if (source.empty()) throw LengthMismatch("empty source");
    const GF2Field f(ell);
    const auto sym = source_symbols(source, f);
    std::vector<std::uint64_t> idx(static_cast<std::size_t>(2 * ell));
    for (int k = 0; k < 2 * ell; ++k) idx[static_cast<std::size_t>(k)] = static_cast<std::uint64_t>(k);
    const FieldElem z = gather(subseed, idx.data(), ell);
    const FieldElem u = gather(subseed, idx.data() + ell, ell);
    FieldElem y;
    f.horner(sym.data(), sym.size() / static_cast<std::size_t>(f.words()), &z, &y, 1);
    return masked_parity(y, u);
}

BitString trevisan_extract(const BitString& source, const BitString& seed,
                           const ExtractorSpec& spec, const ExtractOptions& opt) {
    if (source.size() != spec.input_len)
        throw LengthMismatch("source has " + std::to_string(source.size()) + " bits, spec expects " +
                             std::to_string(spec.input_len));
    const WeakDesign wd(spec.m, spec.ell);
    if (seed.size() < wd.d())
        throw LengthMismatch("seed has " + std::to_string(seed.size()) + " bits, design needs " +
                             std::to_string(wd.d()));
    const GF2Field f(spec.ell);
    const auto sym = source_symbols(source, f);
    const std::size_t s = sym.size() / static_cast<std::size_t>(f.words());
    const int ell = spec.ell;

    constexpr std::size_t kGroup = 8;
    const std::size_t groups = (spec.m + kGroup - 1) / kGroup;
    std::vector<std::uint8_t> bits(spec.m);
    parallel_for(groups, opt.workers, [&](std::size_t g) {
        const std::size_t lo = g * kGroup;
        const int count = static_cast<int>(std::min<std::size_t>(kGroup, spec.m - lo));
        FieldElem z[kGroup], u[kGroup], y[kGroup];
        std::vector<std::uint64_t> idx;
        for (int k = 0; k < count; ++k) {
            wd.set(lo + static_cast<std::size_t>(k), idx);
            z[k] = gather(seed, idx.data(), ell);
            u[k] = gather(seed, idx.data() + ell, ell);
        }
        if (count == 8 || count == 4) {
            f.horner(sym.data(), s, z, y, count);
        } else {
            for (int k = 0; k < count; ++k) f.horner(sym.data(), s, &z[k], &y[k], 1);
        }
        for (int k = 0; k < count; ++k) bits[lo + static_cast<std::size_t>(k)] = static_cast<std::uint8_t>(masked_parity(y[k], u[k]));
    });
    BitString out(spec.m);
    for (std::size_t i = 0; i < spec.m; ++i) out.set(i, bits[i]);
    return out;
}

}  // namespace cwbell
