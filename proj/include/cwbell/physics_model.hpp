#pragma once

#include <array>
#include <cstddef>

namespace cwbell {

// Index 0 is the no-click outcome ('+', output +1), index 1 the click ('-', output -1).
enum Outcome : int { kPlus = 0, kMinus = 1 };
enum class Side { A, B };

struct SourceModel {
    double theta = 0.0;
    double phi = 0.0;
    double alpha0 = 0.0, alpha1 = 0.0;
    double beta0 = 0.0, beta1 = 0.0;
    double eta_a = 1.0, eta_b = 1.0;
    double dark_rate_a = 0.0, dark_rate_b = 0.0;
    double pair_rate = 0.0;

    double alpha(int x) const { return x == 0 ? alpha0 : alpha1; }
    double beta(int y) const { return y == 0 ? beta0 : beta1; }
    void validate() const;
};

// Setup of the reference experiment: efficiencies, background, pair rate and
// the optimized state/analyzer angles.
SourceModel reference_model();

// p[alpha][beta], indexed by Outcome.
struct QuantumProbTable {
    std::array<std::array<double, 2>, 2> p{};
};

// p[a][b], indexed by Outcome (kPlus <-> +1, kMinus <-> -1).
struct OutcomeDistribution {
    std::array<std::array<double, 2>, 2> p{};
    double mu = 0.0;
    double tau = 0.0;
    double correlator() const;
};

struct PoissonOptions {
    double tail_mass = 1e-12;
    int v_max = 200;
};

QuantumProbTable quantum_probabilities(const SourceModel& m, int x, int y);

struct NoClickWeights {
    double d_plus = 0.0;
    double d_minus = 0.0;
};

// D(.) for the given side: weight of this side's outcome when the other side
// does not register the pair.
NoClickWeights single_pair_noclick_weight(const QuantumProbTable& t, Side side,
                                          double eta_other);

// D_v = sum_{k=1..v} C(v,k) [1-(1-eta)^k] d_minus^k d_plus^(v-k)
double multi_pair_exclusive_click(int v, double eta, double d_plus, double d_minus);

// Smallest v such that the Poisson(mu) mass above v is below tail_mass.
int poisson_cutoff(double mu, const PoissonOptions& opt = {});

OutcomeDistribution outcome_distribution(const SourceModel& m, int x, int y, double mu,
                                         double tau, const PoissonOptions& opt = {});

double chsh_value(const SourceModel& m, double mu, double tau,
                  const PoissonOptions& opt = {});

// S evaluated at mu = pair_rate * tau.
double chsh_at_tau(const SourceModel& m, double tau, const PoissonOptions& opt = {});

// CHSH value of a single detected pair with perfect detectors (no Poisson
// mixture, no background).
double single_pair_chsh(const SourceModel& m);

// Maps to the representative with theta in (0, pi/4], all angles in
// (-pi/2, pi/2] and alpha0 <= 0. S is invariant under the applied symmetries.
SourceModel canonicalize(const SourceModel& m);

double reduce_angle(double a);

struct OptimizeOptions {
    int starts = 32;
    double tolerance = 1e-9;
    int max_iterations = 4000;
    unsigned workers = 1;
    bool single_pair = false;  // optimize single_pair_chsh instead of chsh_value
};

struct OptimizeResult {
    SourceModel model;
    double s = 0.0;
    bool converged = false;
    bool flat = false;  // objective constant across all starts
    int evaluations = 0;
};

// phi is held at 0. Efficiencies, dark rates and pair rate are copied from `base`.
OptimizeResult optimize_parameters(const SourceModel& base, double mu, double tau,
                                   const OptimizeOptions& opt = {});

}  // namespace cwbell
