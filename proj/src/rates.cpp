#include "cwbell/rates.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "cwbell/errors.hpp"

namespace cwbell {

namespace {

const double kSqrt2 = std::sqrt(2.0);
const double kTsirelson = 2.0 * kSqrt2;
const double kWMax = (2.0 + kSqrt2) / 4.0;
constexpr double kTol = 1e-12;

double clamp_s(double s) {
    if (!(s >= 2.0 - kTol && s <= kTsirelson + kTol))
        throw DomainError("S=" + std::to_string(s) + " outside [2, 2*sqrt(2)]");
    return std::clamp(s, 2.0, kTsirelson);
}

double checked_w(double p1, double gamma) {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw DomainError("gamma must lie in (0,1]");
    const double w = p1 / gamma;
    if (!(w >= 0.0 && w <= 1.0)) throw DomainError("p1/gamma must lie in [0,1]");
    return w;
}

}  // namespace

double binary_entropy(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("binary entropy argument outside [0,1]");
    if (p == 0.0 || p == 1.0) return 0.0;
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double pironio_bound(double s) {
    s = clamp_s(s);
    return 1.0 - std::log2(1.0 + std::sqrt(std::max(0.0, 2.0 - s * s / 4.0)));
}

double asymptotic_rate_per_round(double s) {
    s = clamp_s(s);
    const double r = std::sqrt(std::max(0.0, s * s / 4.0 - 1.0));
    return 1.0 - binary_entropy(std::min(1.0, 0.5 + 0.5 * r));
}

double asymptotic_rate(double s, double tau) {
    if (!(tau > 0.0)) throw DomainError("tau must be positive");
    return asymptotic_rate_per_round(s) / tau;
}

double winning_probability(double s) { return 0.5 + s / 8.0; }

double g_function(double p1, double gamma) {
    const double w = checked_w(p1, gamma);
    if (w >= kWMax) return 1.0;
    if (w <= 0.75) return 0.0;
    const double rad = 16.0 * w * (w - 1.0) + 3.0;
    return 1.0 - binary_entropy(std::min(1.0, 0.5 + 0.5 * std::sqrt(rad)));
}

double g_derivative(double p1, double gamma) {
    const double w = checked_w(p1, gamma);
    if (w >= kWMax || w < 0.75) return 0.0;
    // dg/dw = log2(p/(1-p)) (8w-4)/s with p = (1+s)/2, s = sqrt(16w(w-1)+3);
    // log2((1+s)/(1-s)) = 2 atanh(s)/ln2, so the ratio is regular at s -> 0
    const double s = std::sqrt(std::max(0.0, 16.0 * w * (w - 1.0) + 3.0));
    const double atanh_over_s = s < 1e-8 ? 1.0 : std::atanh(std::min(s, 1.0 - 1e-16)) / s;
    return (8.0 * w - 4.0) * 2.0 * atanh_over_s / std::numbers::ln2 / gamma;
}

double f_min(double p1, double pt, double gamma) {
    if (p1 <= pt) return g_function(p1, gamma);
    return g_function(pt, gamma) + g_derivative(pt, gamma) * (p1 - pt);
}

bool SecurityBudget::feasible() const {
    auto in01 = [](double v) { return v > 0.0 && v < 1.0; };
    return in01(eps_est) && in01(eps_ea) && in01(eps_prime) && in01(eps_ex) && in01(eps_1) &&
           eps_sa >= 0.0 && eps_sa + eps_est <= eps_c * (1 + 1e-12) &&
           eps_sa + eps_ea + eps_prime / 2 + eps_ex <= eps_s * (1 + 1e-12);
}

SecurityBudget epsilon_budget(double n, double gamma, double eps_c, double eps_s) {
    if (!(eps_c > 0.0 && eps_c < 1.0 && eps_s > 0.0 && eps_s < 1.0))
        throw DomainError("eps_c and eps_s must lie in (0,1)");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw DomainError("gamma must lie in (0,1]");
    if (!(n >= 1.0)) throw DomainError("n must be at least 1");
    SecurityBudget b;
    b.eps_c = eps_c;
    b.eps_s = eps_s;
    if (gamma < 1.0) {
        b.l_max = std::max(-std::log2(gamma), -std::log2(1.0 - gamma));
        const double hg = binary_entropy(gamma);
        b.eps_sa = std::exp(-18.0 * hg * hg * hg * n / b.l_max);
    }
    if (b.eps_sa >= eps_c || b.eps_sa >= eps_s)
        throw InfeasibleBudget("sampling error eps_SA=" + std::to_string(b.eps_sa) +
                               " exhausts the error budget");
    b.eps_est = eps_c - b.eps_sa;
    b.delta_est = std::sqrt(std::log(1.0 / b.eps_est) / (2.0 * n));
    const double rest = eps_s - b.eps_sa;
    b.eps_ea = rest / 4.0;
    b.eps_prime = rest / 2.0;
    b.eps_ex = rest / 4.0;
    b.eps_1 = b.eps_ex / (2.0 * n);
    return b;
}

EtaOpt eta_opt(const ProtocolParams& prm, double eps_prime, double eps_ea) {
    if (!(prm.gamma > 0.0 && prm.gamma <= 1.0)) throw DomainError("gamma must lie in (0,1]");
    if (!(prm.n >= 1.0)) throw DomainError("n must be at least 1");
    if (!(prm.delta_est >= 0.0)) throw DomainError("delta_est must be non-negative");
    if (!(eps_prime > 0.0 && eps_prime < 1.0 && eps_ea > 0.0 && eps_ea < 1.0))
        throw DomainError("eps' and eps_EA must lie in (0,1)");
    EtaOpt out;
    const double g = prm.gamma;
    const double p = std::min(prm.omega_exp * g - prm.delta_est, g);
    if (p <= 0.75 * g) {
        out.raw = -std::numeric_limits<double>::infinity();
        return out;
    }
    const double coef = std::isinf(prm.n)
                            ? 0.0
                            : 2.0 / std::sqrt(prm.n) *
                                  std::sqrt(1.0 - 2.0 * std::log2(eps_prime * eps_ea));
    const double log13 = std::log2(13.0);
    auto eta = [&](double pt) { return f_min(p, pt, g) - coef * (log13 + g_derivative(pt, g)); };

    const double lo = 0.75 * g, hi = kWMax * g;
    constexpr int kGrid = 10000;
    double best = -std::numeric_limits<double>::infinity(), best_pt = lo;
    int best_k = 1;
    for (int k = 1; k < kGrid; ++k) {
        const double pt = lo + (hi - lo) * k / kGrid;
        const double v = eta(pt);
        if (v > best) {
            best = v;
            best_pt = pt;
            best_k = k;
        }
    }
    const double a = lo + (hi - lo) * (best_k - 1) / kGrid;
    const double b = lo + (hi - lo) * (best_k + 1) / kGrid;
    std::uintmax_t iters = 200;
    const auto r = boost::math::tools::brent_find_minima([&](double pt) { return -eta(pt); }, a, b,
                                                         std::numeric_limits<double>::digits / 2,
                                                         iters);
    if (-r.second > best) {
        best = -r.second;
        best_pt = r.first;
    }
    out.raw = best;
    out.p_t = best_pt;
    out.value = std::max(0.0, best);
    return out;
}

std::int64_t output_length(double n, double eta, double eps_ex) {
    if (!(n >= 1.0) || !(eps_ex > 0.0 && eps_ex < 1.0)) throw DomainError("invalid output_length input");
    if (!(eta > 0.0)) return 0;
    const double m = std::floor(n * eta - 4.0 * std::log2(n) + 4.0 * std::log2(eps_ex) - 10.0);
    return static_cast<std::int64_t>(std::clamp(m, 0.0, 2.0 * n));
}

SeedLength seed_length(double n, std::int64_t m, double eps_1) {
    if (!(n >= 1.0)) throw DomainError("n must be at least 1");
    if (!(eps_1 > 0.0 && eps_1 < 1.0)) throw DomainError("eps_1 must lie in (0,1)");
    const double r = 2.0 * std::numbers::e;
    SeedLength s;
    s.ell = static_cast<std::int64_t>(std::ceil(std::log2(2.0 * n) + 2.0 * std::log2(2.0 / eps_1)));
    if (static_cast<double>(m) <= r) throw DomainError("output length must exceed 2e");
    if (static_cast<double>(2 * s.ell) <= r) throw DomainError("2*ell must exceed 2e");
    const double a = std::ceil((std::log(m - r) - std::log(2.0 * s.ell - r)) /
                               (std::log(r) - std::log(r - 1.0)));
    // outputs no longer than one basic design still need one block
    s.a = std::max<std::int64_t>(1, static_cast<std::int64_t>(a));
    s.d = s.a * (2 * s.ell) * (2 * s.ell);
    return s;
}

double finite_rate(const ProtocolParams& prm, const SecurityBudget& b) {
    const EtaOpt e = eta_opt(prm, b.eps_prime, b.eps_ea);
    if (std::isinf(prm.n)) return e.value / prm.tau;
    const double n = prm.n;
    return (e.value - 4.0 * std::log2(n) / n + 4.0 * std::log2(b.eps_ex) / n - 10.0 / n) / prm.tau;
}

double net_rate(const ProtocolParams& prm, const SecurityBudget& b, double d) {
    const double cost = 6.0 * binary_entropy(prm.gamma) + 4.0 * prm.gamma +
                        (std::isinf(prm.n) ? 0.0 : d / prm.n);
    return finite_rate(prm, b) - cost / prm.tau;
}

double asymptotic_net_rate(double s, double tau, double gamma) {
    return asymptotic_rate(s, tau) - (binary_entropy(gamma) + 2.0 * gamma) / tau;
}

RateResult compute_rates(double s, double tau, double n, double gamma, double eps_c,
                         double eps_s) {
    RateResult r;
    r.s = s;
    r.tau = tau;
    r.n = n;
    r.gamma = gamma;
    const double s_eff = std::clamp(s, 2.0, kTsirelson);  // no violation -> zero rate
    r.r_inf = asymptotic_rate(s_eff, tau);
    r.r_inf_net = asymptotic_net_rate(s_eff, tau, gamma);
    r.budget = epsilon_budget(std::isinf(n) ? 1e300 : n, gamma, eps_c, eps_s);
    ProtocolParams prm{gamma, winning_probability(s), r.budget.delta_est, n, tau};
    if (std::isinf(n)) prm.delta_est = 0.0;
    const EtaOpt e = eta_opt(prm, r.budget.eps_prime, r.budget.eps_ea);
    r.eta_opt_value = e.value;
    r.p_t_star = e.p_t;
    if (std::isinf(n)) {
        r.r_n = e.value / tau;
        r.r_net = r.r_n - (6.0 * binary_entropy(gamma) + 4.0 * gamma) / tau;
        return r;
    }
    r.m = output_length(n, e.value, r.budget.eps_ex);
    if (static_cast<double>(r.m) > 2.0 * std::numbers::e) {
        const SeedLength sl = seed_length(n, r.m, r.budget.eps_1);
        r.ell = sl.ell;
        r.a = sl.a;
        r.d = sl.d;
    }
    r.r_n = (e.value - 4.0 * std::log2(n) / n + 4.0 * std::log2(r.budget.eps_ex) / n - 10.0 / n) / tau;
    r.r_net = r.r_n - (6.0 * binary_entropy(gamma) + 4.0 * gamma + static_cast<double>(r.d) / n) / tau;
    return r;
}

}  // namespace cwbell
