#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "cwbell/bitstring.hpp"
#include "cwbell/gf2.hpp"
#include "cwbell/rng.hpp"

namespace cwbell {

// ---- uniform bit sources ----

class BitSource {
public:
    virtual ~BitSource() = default;
    virtual int next_bit() = 0;  // throws SourceExhausted
    std::uint64_t consumed() const { return consumed_; }

protected:
    std::uint64_t consumed_ = 0;
};

class BitStringSource : public BitSource {
public:
    explicit BitStringSource(BitString bits) : bits_(std::move(bits)) {}
    int next_bit() override;
    std::size_t remaining() const { return bits_.size() - pos_; }

private:
    BitString bits_;
    std::size_t pos_ = 0;
};

class RngBitSource : public BitSource {
public:
    explicit RngBitSource(std::uint64_t seed) : rng_(seed, "bits") {}
    int next_bit() override;

private:
    Rng rng_;
    std::uint64_t word_ = 0;
    int left_ = 0;
};

struct IntervalSample {
    int bit = 0;
    int consumed = 0;
};

// Exact Bernoulli(gamma) from uniform bits: the bits read so far define a
// dyadic interval for U; the output is 1 once the interval lies in
// [1-gamma, 1) and 0 once it lies in [0, 1-gamma). Throws SamplingAborted when
// more than max_bits would be needed.
IntervalSample interval_sample(double gamma, BitSource& src, int max_bits = 1100);

// Interval algorithm applied jointly to blocks of `block` Bernoulli(gamma)
// draws: the target interval is refined draw by draw and uniform bits are read
// only until the current draw is decided, so leftover information carries over
// within a block. Exact dyadic arithmetic; block = 1 reproduces interval_sample.
class BernoulliSequenceSampler {
public:
    explicit BernoulliSequenceSampler(double gamma, std::size_t block = 32);
    ~BernoulliSequenceSampler();
    BernoulliSequenceSampler(BernoulliSequenceSampler&&) noexcept;
    BernoulliSequenceSampler& operator=(BernoulliSequenceSampler&&) noexcept;

    int next(BitSource& src);
    std::uint64_t consumed() const { return consumed_; }

private:
    struct State;
    std::unique_ptr<State> st_;
    std::uint64_t consumed_ = 0;
};

// ---- weak design ----

struct DesignBlock {
    std::size_t first_output = 0;  // index of the block's first set
    std::size_t size = 0;          // number of sets
    std::uint64_t seed_offset = 0; // start of the block's seed segment
};

// Blocks of basic polynomial designs over GF(q), q the least prime >= t = 2*ell.
// Set j of a block is {x*q + p_j(x) mod q : 0 <= x < t}, where the coefficients
// of p_j are the base-q digits of j (lowest first). Each block owns t*q seed bits.
class WeakDesign {
public:
    WeakDesign(std::size_t m, int ell);

    std::size_t m() const { return m_; }
    int ell() const { return ell_; }
    int t() const { return 2 * ell_; }
    std::uint64_t q() const { return q_; }
    std::uint64_t segment_bits() const { return static_cast<std::uint64_t>(t()) * q_; }
    std::uint64_t d() const { return blocks_.size() * segment_bits(); }
    const std::vector<DesignBlock>& blocks() const { return blocks_; }

    // Indices of S_i, absolute within the full seed, in order of x.
    void set(std::size_t i, std::vector<std::uint64_t>& out) const;
    std::vector<std::uint64_t> set(std::size_t i) const {
        std::vector<std::uint64_t> v;
        set(i, v);
        return v;
    }
    // block index and in-block index of output i
    std::pair<std::size_t, std::size_t> locate(std::size_t i) const;

private:
    std::size_t m_;
    int ell_;
    std::uint64_t q_;
    std::vector<DesignBlock> blocks_;
};

std::uint64_t next_prime(std::uint64_t n);

// ---- one-bit extractor and Trevisan ----

struct ExtractorSpec {
    std::uint64_t input_len = 0;  // 2n
    std::uint64_t m = 0;
    int ell = 0;
    std::int64_t a = 0;
    std::int64_t d = 0;        // a (2 ell)^2
    double eps_1 = 0.0;
    std::uint64_t design_d = 0; // seed bits actually read by the design

    // ell, a, d from the seed-length formulas
    static ExtractorSpec from_budget(std::uint64_t n_rounds, std::uint64_t m, double eps_1);
    // explicit field degree (toy instances)
    static ExtractorSpec with_ell(std::uint64_t input_len, std::uint64_t m, int ell);
};

// Source split into ell-bit symbols (the last zero-padded), bit k of a symbol
// being the coefficient of x^k; the first symbol is the leading coefficient.
std::vector<std::uint64_t> source_symbols(const BitString& source, const GF2Field& f);

// First ell subseed bits give the evaluation point z, the remaining ell bits
// the Hadamard mask u; output parity(u & f(z)).
int one_bit_extract(const BitString& source, const BitString& subseed, int ell);

struct ExtractOptions {
    unsigned workers = 1;
};

BitString trevisan_extract(const BitString& source, const BitString& seed,
                           const ExtractorSpec& spec, const ExtractOptions& opt = {});

}  // namespace cwbell
