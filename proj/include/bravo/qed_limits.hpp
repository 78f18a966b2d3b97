#pragma once

#include "bravo/quadrature.hpp"

namespace bravo {

// Scaled slack beta = (1 - rho) sqrt(s) and scaled buffer eta = K/sqrt(s) of
// an M/M/s/K sequence driven into the many-server heavy-traffic regime.
struct QedParams {
    double beta;
    double eta;
};

enum class QedBranch { critical, noncritical };

struct QedEvaluation {
    QedParams params{};
    double h_value = 0.0;  // NaN on the critical branch
    double f_value = 0.0;
    double g_value = 0.0;
    double ratio = 0.0;
    QedBranch branch = QedBranch::noncritical;
};

// Below this |beta| the noncritical expressions are ill-conditioned (h grows
// like 1/beta) and the critical-branch closed form is used instead.
inline constexpr double kBetaSwitch = 1e-6;

// L(eta) = [(2 - pi/2) eta + sqrt(2 pi)(1 - log 2 - pi/12)] / (eta + sqrt(pi/2))^3
double l_eta(double eta);

// Limiting ratio at exact balance (rho = 1): 2/3 - L(eta).
double d0(double eta);

struct EtaStarResult {
    double argmin;          // closed form sqrt(2 pi)(log 8 - 2)/(4 - pi)
    double min_value;       // d0 at the argmin
    double argmin_numeric;  // golden-section check on [0, 10]
};
EtaStarResult eta_star();

// h(eta, beta) = 1/(1 - e^{-beta eta} + beta Phi(beta)/phi(beta)).
// Requires |beta| >= kBetaSwitch; beta*h > 0 always.
double h_fn(double eta, double beta);

// f(eta, beta) = int_{-beta}^inf (1 - beta e^{-beta eta} h Mills(u)) Phi(-u) du
double f_fn(double eta, double beta, const QuadratureConfig& config = {});

// g(eta, beta) = 2 e^{-beta eta} h (1 + e^{-beta eta} h)
//                  (1 - beta eta - e^{-beta eta}
//                   + (1 - 2 beta eta e^{-beta eta} - e^{-2 beta eta}) h)
double g_fn(double eta, double beta);

// Limiting variance-to-mean ratio of the departure count:
//   D = 1 - (2 beta^2 e^{-beta eta} h^2 / phi(beta)) f + g
// on the noncritical branch, and d0(eta) when |beta| < kBetaSwitch. The
// noncritical branch needs eta > 0; the critical one accepts eta = 0.
QedEvaluation d_beta_eta(double eta, double beta, const QuadratureConfig& config = {});

// Limiting probability that all servers are busy: (1 - e^{-beta eta}) h, with
// critical-branch value eta/(eta + sqrt(pi/2)).
double delay_prob_limit(double eta, double beta);

struct IPlusResult {
    double quadrature;   // int_0^inf Phi(-u)[1 - e^{u^2/2} Phi(-u)] du
    double closed_form;  // (1 - log sqrt 2)/sqrt(2 pi); consistent with the quadrature
    // sqrt(2 pi)(1 - log sqrt 2): a scaled variant that circulates for this
    // integral but exceeds the domination bound int_0^inf Phi(-u) du; kept
    // for the record, never used downstream.
    double printed_form;
};
IPlusResult i_plus(const QuadratureConfig& config = {});

struct JBetaResult {
    // adaptive quadrature of int_beta^inf e^{u^2/2} Phi(-u)^2 du
    double direct;
    // independent semi-closed route: boundary terms plus residual
    // one-dimensional quadratures from the polar-coordinate reduction
    double semi_closed;
};
JBetaResult j_beta(double beta, const QuadratureConfig& config = {});

}  // namespace bravo
