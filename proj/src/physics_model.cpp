#include "cwbell/physics_model.hpp"

#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "cwbell/errors.hpp"
#include "cwbell/parallel.hpp"

namespace cwbell {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;

using cplx = std::complex<double>;
using Mat4 = std::array<std::array<cplx, 4>, 4>;
using Mat2 = std::array<std::array<double, 2>, 2>;

Mat2 projector(double u0, double u1) { return {{{u0 * u0, u0 * u1}, {u1 * u0, u1 * u1}}}; }

Mat2 complement(const Mat2& p) {
    return {{{1.0 - p[0][0], -p[0][1]}, {-p[1][0], 1.0 - p[1][1]}}};
}

// Tr(rho (P ⊗ Q)); basis order HH, HV, VH, VV.
double expectation(const Mat4& rho, const Mat2& pa, const Mat2& pb) {
    cplx tr = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            const double k = pa[j >> 1][i >> 1] * pb[j & 1][i & 1];
            if (k != 0.0) tr += rho[i][j] * k;
        }
    return tr.real();
}

}  // namespace

void SourceModel::validate() const {
    auto in01 = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!in01(eta_a) || !in01(eta_b)) throw DomainError("efficiencies must lie in [0,1]");
    if (!(dark_rate_a >= 0.0) || !(dark_rate_b >= 0.0) || !(pair_rate >= 0.0))
        throw DomainError("rates must be non-negative");
    for (double a : {theta, phi, alpha0, alpha1, beta0, beta1})
        if (!std::isfinite(a)) throw DomainError("angles must be finite");
}

SourceModel reference_model() {
    SourceModel m;
    m.theta = 25.9 * kDeg;
    m.alpha0 = -7.2 * kDeg;
    m.alpha1 = 28.7 * kDeg;
    m.beta0 = 82.7 * kDeg;
    m.beta1 = -61.5 * kDeg;
    m.eta_a = 0.824;
    m.eta_b = 0.822;
    m.dark_rate_a = 45.7;
    m.dark_rate_b = 41.5;
    m.pair_rate = 2.4e4;
    return m;
}

double OutcomeDistribution::correlator() const {
    return p[kPlus][kPlus] + p[kMinus][kMinus] - p[kPlus][kMinus] - p[kMinus][kPlus];
}

QuantumProbTable quantum_probabilities(const SourceModel& m, int x, int y) {
    // |psi> = cos(theta)|HV> - e^{i phi} sin(theta)|VH>
    const std::array<cplx, 4> psi{0.0, std::cos(m.theta),
                                  -std::polar(1.0, m.phi) * std::sin(m.theta), 0.0};
    Mat4 rho{};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) rho[i][j] = psi[i] * std::conj(psi[j]);

    // Click ('-') port of each analyzer; Bob's analyzer frame is mirrored.
    const double a = m.alpha(x), b = m.beta(y);
    const Mat2 a_minus = projector(-std::sin(a), std::cos(a));
    const Mat2 b_minus = projector(std::sin(b), std::cos(b));
    const Mat2 pa[2] = {complement(a_minus), a_minus};
    const Mat2 pb[2] = {complement(b_minus), b_minus};

    QuantumProbTable t;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) t.p[i][j] = expectation(rho, pa[i], pb[j]);
    return t;
}

NoClickWeights single_pair_noclick_weight(const QuantumProbTable& t, Side side,
                                          double eta_other) {
    const double miss = 1.0 - eta_other;
    if (side == Side::A)
        return {t.p[kPlus][kPlus] + miss * t.p[kPlus][kMinus],
                t.p[kMinus][kPlus] + miss * t.p[kMinus][kMinus]};
    return {t.p[kPlus][kPlus] + miss * t.p[kMinus][kPlus],
            t.p[kPlus][kMinus] + miss * t.p[kMinus][kMinus]};
}

double multi_pair_exclusive_click(int v, double eta, double d_plus, double d_minus) {
    if (v < 0) throw DomainError("pair count must be non-negative");
    if (v == 0) return 0.0;
    // binomial row via multiplicative recurrence, powers built incrementally
    std::vector<double> pplus(v + 1), pminus(v + 1), pmiss(v + 1);
    pplus[0] = pminus[0] = pmiss[0] = 1.0;
    for (int k = 1; k <= v; ++k) {
        pplus[k] = pplus[k - 1] * d_plus;
        pminus[k] = pminus[k - 1] * d_minus;
        pmiss[k] = pmiss[k - 1] * (1.0 - eta);
    }
    double binom = 1.0, sum = 0.0;
    for (int k = 1; k <= v; ++k) {
        binom = binom * static_cast<double>(v - k + 1) / static_cast<double>(k);
        sum += binom * (1.0 - pmiss[k]) * pminus[k] * pplus[v - k];
    }
    return sum;
}

int poisson_cutoff(double mu, const PoissonOptions& opt) {
    if (!(mu >= 0.0)) throw DomainError("mu must be non-negative");
    if (mu == 0.0) return 0;
    for (int v = 0;; ++v) {
        if (v + 2 > mu) {
            const double log_next = -mu + (v + 1) * std::log(mu) - std::lgamma(v + 2.0);
            const double bound = std::exp(log_next) / (1.0 - mu / (v + 2.0));
            if (bound < opt.tail_mass) return v;
        }
        if (v >= opt.v_max)
            throw ModelOutOfRange("mu=" + std::to_string(mu) +
                                  " needs more than v_max pairs per round");
    }
}

OutcomeDistribution outcome_distribution(const SourceModel& m, int x, int y, double mu,
                                         double tau, const PoissonOptions& opt) {
    if (!(mu >= 0.0)) throw DomainError("mu must be non-negative");
    if (!(tau > 0.0)) throw DomainError("tau must be positive");
    m.validate();
    const QuantumProbTable t = quantum_probabilities(m, x, y);
    const NoClickWeights wa = single_pair_noclick_weight(t, Side::A, m.eta_b);
    const NoClickWeights wb = single_pair_noclick_weight(t, Side::B, m.eta_a);
    // per-pair probability that neither detector fires
    const double q00 = wa.d_plus + (1.0 - m.eta_a) * wa.d_minus;
    const double silent_a = std::exp(-m.dark_rate_a * tau);
    const double silent_b = std::exp(-m.dark_rate_b * tau);

    const int vmax = poisson_cutoff(mu, opt);
    double p_mp = 0.0, p_pm = 0.0, p_pp = 0.0;
    double q00_pow = 1.0;
    for (int v = 0; v <= vmax; ++v) {
        const double w =
            mu == 0.0 ? 1.0 : std::exp(-mu + v * std::log(mu) - std::lgamma(v + 1.0));
        const double da = multi_pair_exclusive_click(v, m.eta_a, wa.d_plus, wa.d_minus);
        const double db = multi_pair_exclusive_click(v, m.eta_b, wb.d_plus, wb.d_minus);
        p_mp += w * silent_b * (da + (1.0 - silent_a) * q00_pow);
        p_pm += w * silent_a * (db + (1.0 - silent_b) * q00_pow);
        p_pp += w * silent_a * silent_b * q00_pow;
        q00_pow *= q00;
    }
    OutcomeDistribution d;
    d.mu = mu;
    d.tau = tau;
    d.p[kPlus][kPlus] = p_pp;
    d.p[kMinus][kPlus] = p_mp;
    d.p[kPlus][kMinus] = p_pm;
    d.p[kMinus][kMinus] = std::max(0.0, 1.0 - p_pp - p_mp - p_pm);
    return d;
}

double chsh_value(const SourceModel& m, double mu, double tau, const PoissonOptions& opt) {
    double s = 0.0;
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) {
            const double e = outcome_distribution(m, x, y, mu, tau, opt).correlator();
            s += (x == 1 && y == 1) ? -e : e;
        }
    return s;
}

double chsh_at_tau(const SourceModel& m, double tau, const PoissonOptions& opt) {
    return chsh_value(m, m.pair_rate * tau, tau, opt);
}

double single_pair_chsh(const SourceModel& m) {
    double s = 0.0;
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) {
            const auto t = quantum_probabilities(m, x, y);
            const double e = t.p[0][0] + t.p[1][1] - t.p[0][1] - t.p[1][0];
            s += (x == 1 && y == 1) ? -e : e;
        }
    return s;
}

double reduce_angle(double a) {
    double r = std::fmod(a, kPi);
    if (r > kPi / 2) r -= kPi;
    if (r <= -kPi / 2) r += kPi;
    return r;
}

SourceModel canonicalize(const SourceModel& in) {
    SourceModel m = in;
    m.theta = reduce_angle(m.theta);
    if (m.theta < 0.0) {  // V -> -V on Alice's side
        m.theta = -m.theta;
        m.alpha0 = -m.alpha0;
        m.alpha1 = -m.alpha1;
    }
    if (m.theta > kPi / 4) {  // H <-> V on both sides
        m.theta = kPi / 2 - m.theta;
        m.alpha0 = kPi / 2 - m.alpha0;
        m.alpha1 = kPi / 2 - m.alpha1;
        m.beta0 = kPi / 2 - m.beta0;
        m.beta1 = kPi / 2 - m.beta1;
    }
    double* angles[] = {&m.alpha0, &m.alpha1, &m.beta0, &m.beta1};
    for (double* a : angles) *a = reduce_angle(*a);
    if (m.alpha0 > 0.0)  // V -> -V on both sides leaves the state unchanged
        for (double* a : angles) *a = reduce_angle(-*a);
    return m;
}

namespace {

struct Objective {
    const SourceModel* base;
    double mu, tau;
    bool single_pair;
    int evaluations = 0;
};

SourceModel from_vector(const SourceModel& base, const gsl_vector* v) {
    SourceModel m = base;
    m.phi = 0.0;
    m.theta = gsl_vector_get(v, 0);
    m.alpha0 = gsl_vector_get(v, 1);
    m.alpha1 = gsl_vector_get(v, 2);
    m.beta0 = gsl_vector_get(v, 3);
    m.beta1 = gsl_vector_get(v, 4);
    return m;
}

double negative_s(const gsl_vector* v, void* params) {
    auto* o = static_cast<Objective*>(params);
    ++o->evaluations;
    const SourceModel m = from_vector(*o->base, v);
    return o->single_pair ? -single_pair_chsh(m) : -chsh_value(m, o->mu, o->tau);
}

double halton(int index, int base) {
    double f = 1.0, r = 0.0;
    for (int i = index; i > 0; i /= base) {
        f /= base;
        r += f * (i % base);
    }
    return r;
}

struct StartResult {
    SourceModel model;
    double s0 = 0.0, s = 0.0;
    bool converged = false;
    int evaluations = 0;
};

StartResult run_start(const SourceModel& base, double mu, double tau,
                      const OptimizeOptions& opt, int k) {
    // start points from a 5-d Halton sequence over the canonical domain
    const int primes[5] = {2, 3, 5, 7, 11};
    double x0[5];
    for (int d = 0; d < 5; ++d) {
        const double u = halton(k + 1, primes[d]);
        x0[d] = d == 0 ? (0.02 + u * (kPi / 4 - 0.02)) : (-kPi / 2 + u * kPi);
    }
    Objective obj{&base, mu, tau, opt.single_pair};
    gsl_multimin_function f{&negative_s, 5, &obj};
    gsl_vector* x = gsl_vector_alloc(5);
    gsl_vector* step = gsl_vector_alloc(5);
    for (int d = 0; d < 5; ++d) gsl_vector_set(x, d, x0[d]);
    gsl_vector_set_all(step, 0.2);

    StartResult r;
    r.s0 = -negative_s(x, &obj);
    gsl_multimin_fminimizer* sm =
        gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 5);
    gsl_multimin_fminimizer_set(sm, &f, x, step);
    double prev = sm->fval;
    int stalls = 0;
    for (int it = 0; it < opt.max_iterations; ++it) {
        if (gsl_multimin_fminimizer_iterate(sm) != 0) break;
        const double size = gsl_multimin_fminimizer_size(sm);
        stalls = (std::abs(prev - sm->fval) < opt.tolerance) ? stalls + 1 : 0;
        prev = sm->fval;
        if (size < 1e-7 || (stalls > 50 && size < 1e-4)) {
            r.converged = true;
            break;
        }
    }
    r.model = canonicalize(from_vector(base, sm->x));
    r.s = -sm->fval;
    r.evaluations = obj.evaluations;
    gsl_multimin_fminimizer_free(sm);
    gsl_vector_free(x);
    gsl_vector_free(step);
    return r;
}

}  // namespace

OptimizeResult optimize_parameters(const SourceModel& base, double mu, double tau,
                                   const OptimizeOptions& opt) {
    base.validate();
    const int starts = std::max(1, opt.starts);
    std::vector<StartResult> runs(starts);
    parallel_for(starts, opt.workers,
                 [&](std::size_t k) { runs[k] = run_start(base, mu, tau, opt, static_cast<int>(k)); });

    OptimizeResult out;
    double lo = runs[0].s0, hi = runs[0].s0;
    int best = 0;
    for (int k = 0; k < starts; ++k) {
        out.evaluations += runs[k].evaluations;
        lo = std::min({lo, runs[k].s0, runs[k].s});
        hi = std::max({hi, runs[k].s0, runs[k].s});
        if (runs[k].s > runs[best].s) best = k;
    }
    out.model = runs[best].model;
    out.s = runs[best].s;
    out.converged = runs[best].converged;
    out.flat = (hi - lo) < 1e-12;
    return out;
}

}  // namespace cwbell
