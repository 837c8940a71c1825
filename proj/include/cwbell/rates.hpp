#pragma once

#include <cstdint>

namespace cwbell {

double binary_entropy(double p);

// 1 - log2(1 + sqrt(2 - s^2/4))
double pironio_bound(double s);

// 1 - h(1/2 + 1/2 sqrt(s^2/4 - 1)), bits per round
double asymptotic_rate_per_round(double s);
double asymptotic_rate(double s, double tau);

// CHSH game winning probability 1/2 + s/8
double winning_probability(double s);

// Single-round rate function in terms of p(1) = probability of a test round
// that wins; w = p1/gamma. Zero for w <= 3/4, one above (2+sqrt2)/4.
double g_function(double p1, double gamma);
double g_derivative(double p1, double gamma);  // d g / d p1
double f_min(double p1, double pt, double gamma);

struct SecurityBudget {
    double eps_c = 0, eps_s = 0;
    double eps_sa = 0, eps_est = 0, eps_ea = 0, eps_prime = 0, eps_ex = 0, eps_1 = 0;
    double delta_est = 0;
    double l_max = 0;  // 0 when gamma == 1
    bool feasible() const;
};

SecurityBudget epsilon_budget(double n, double gamma, double eps_c, double eps_s);

struct ProtocolParams {
    double gamma = 1.0;
    double omega_exp = 0.75;
    double delta_est = 0.0;
    double n = 1.0;
    double tau = 1.0;  // s
};

struct EtaOpt {
    double value = 0.0;  // clamped at 0
    double raw = 0.0;    // unclamped maximum
    double p_t = 0.0;    // maximizing p_t(1)
};

EtaOpt eta_opt(const ProtocolParams& params, double eps_prime, double eps_ea);

std::int64_t output_length(double n, double eta, double eps_ex);

struct SeedLength {
    std::int64_t ell = 0, a = 0, d = 0;
};

SeedLength seed_length(double n, std::int64_t m, double eps_1);

double finite_rate(const ProtocolParams& params, const SecurityBudget& budget);
double net_rate(const ProtocolParams& params, const SecurityBudget& budget, double d);
double asymptotic_net_rate(double s, double tau, double gamma);

struct RateResult {
    SecurityBudget budget;
    double s = 0, tau = 0, n = 0, gamma = 1;
    double eta_opt_value = 0, p_t_star = 0;
    std::int64_t m = 0, ell = 0, a = 0, d = 0;
    double r_n = 0, r_net = 0, r_inf = 0, r_inf_net = 0;
};

// Full chain from an observed/expected S. n may be +infinity, in which case the
// finite-size quantities equal their asymptotic values and m, d are 0.
RateResult compute_rates(double s, double tau, double n, double gamma, double eps_c,
                         double eps_s);

}  // namespace cwbell
