#pragma once

#include <span>
#include <vector>

namespace bravo {

// Finite irreducible birth-death chain on states {0, ..., J}. Births move up
// at rate lambda_i from state i < J, deaths move down at rate mu_i from state
// i > 0. All rates strictly positive.
class BirthDeathChain {
  public:
    // birth_rates = lambda_0..lambda_{J-1}, death_rates = mu_1..mu_J.
    BirthDeathChain(std::vector<double> birth_rates,
                    std::vector<double> death_rates);

    int num_states_above_zero() const { return static_cast<int>(birth_rates_.size()); }
    int num_states() const { return num_states_above_zero() + 1; }

    std::span<const double> birth_rates() const { return birth_rates_; }
    std::span<const double> death_rates() const { return death_rates_; }

    // Rate of the birth out of state i, 0 <= i < J.
    double birth_rate(int i) const { return birth_rates_[static_cast<std::size_t>(i)]; }
    // Rate of the death out of state i, 1 <= i <= J.
    double death_rate(int i) const { return death_rates_[static_cast<std::size_t>(i) - 1]; }

    // True when every birth rate equals lambda_0 within the relative tolerance.
    bool has_constant_births(double rel_tol = 1e-12) const;

  private:
    std::vector<double> birth_rates_;
    std::vector<double> death_rates_;
};

struct MmskParams {
    int servers;              // s >= 1
    int buffer;               // K >= 0
    double traffic_intensity; // rho > 0
};

// M/M/s/K with per-server service rate 1 and arrival rate s*rho, so the chain
// has J = s + K states above zero, constant birth rate s*rho and death rate
// min(i, s) out of state i. The ratio of interest is scale-free, so this
// normalization loses nothing and keeps rates O(s).
BirthDeathChain build_mmsk(const MmskParams& params);

struct StationaryDistribution {
    std::vector<double> probabilities;  // pi_0..pi_J
    std::vector<double> cumulative;     // P_i = sum_{j<=i} pi_j

    // Entries far out in the tails of very large chains can underflow to
    // zero; the ratio formulas below avoid dividing by them.
};

// Detailed-balance products accumulated in log space with max subtraction,
// then normalized.
StationaryDistribution stationary(const BirthDeathChain& chain);

struct OutputRatioResult {
    double departure_rate = 0.0;                         // lambda*
    std::vector<double> cumulative_departure_fractions;  // Lambda*_0..Lambda*_J
    double ratio = 0.0;                                  // D_pi, see d_pi()
};

// lambda* = sum_j mu_j pi_j and the cumulative departure fractions
// Lambda*_i = sum_{j<=i} mu_j pi_j / lambda*. The ratio field is left NaN;
// use d_pi() to fill it.
OutputRatioResult output_stats(const BirthDeathChain& chain,
                               const StationaryDistribution& dist);

// Limiting variance-to-mean ratio of the death counting process,
//   D = 1 - 2 sum_i (P_i - L_i) (1 - lambda*/(pi_i lambda_i) (P_i - L_i)),
// with L_i the cumulative departure fractions. The i = J term vanishes
// identically (P_J = L_J = 1) and is skipped, so lambda_J is never read.
double d_pi(const BirthDeathChain& chain);

// Same ratio through the constant-birth simplification
//   D = 1 - 2 pi_J/(1-pi_J) sum_i P_i (1 - pi_J P_i / pi_i).
// Rejects chains whose births are not all equal (relative 1e-12).
double d_pi_constant_birth(const BirthDeathChain& chain);

// (1/2 - pi_J)/(1 - pi_J), a lower bound on D for constant-birth chains.
double d_pi_lower_bound(const StationaryDistribution& dist);

struct MarkedRatio {
    double value = 0.0;
    // The marked-output formula's derivation is not fully established;
    // results carry this flag so downstream output can say so.
    bool experimental = true;
};

// Variance-to-mean ratio when the death out of state i is only counted with
// probability q_i. counting_probabilities holds q_1..q_J in [0, 1].
MarkedRatio d_pi_marked(const BirthDeathChain& chain,
                        std::span<const double> counting_probabilities);

}  // namespace bravo
