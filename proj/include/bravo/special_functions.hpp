#pragma once

#include <cstdint>

namespace bravo {

inline constexpr double kPi = 3.141592653589793238462643383279503;
inline constexpr double kSqrt2Pi = 2.506628274631000502415765284811045;
inline constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934382;

double normal_pdf(double u);
double normal_cdf(double u);
// Phi(-u), relative-accurate deep into the tail.
double normal_cdf_complement(double u);

// Mills ratio Phi(-u)/phi(u). Laplace continued fraction for u >= 6, direct
// quotient in between, and the reflection Mills(u) = 1/phi(u) - Mills(-u)
// for u <= -6. Throws std::overflow_error once 1/phi(u) exceeds the double
// range (u below about -37.6).
double mills_ratio(double u);

// Regularized upper incomplete gamma Q(a, x), a > 0, x >= 0.
double gamma_q(double a, double x);

double poisson_pmf(std::int64_t i, double kappa);
// P(Poisson(kappa) <= i): the tail integral of a gamma density, Q(i+1, kappa).
double poisson_cdf(std::int64_t i, double kappa);

// Measured quality of the normal approximation to a Poisson(s) distribution,
// evaluated exhaustively over the support.
struct PoissonAsymptoticsReport {
    std::int64_t mean_parameter = 0;
    // sup_i |P(X <= i) - Phi((i-s)/sqrt(s))|
    double berry_esseen_sup_dev = 0.0;
    // the sup above multiplied by sqrt(s)
    double scaled_dev = 0.0;
    // max over 1 <= i <= floor(s^(5/8)) of the relative error of
    // pmf(s-i)/pmf(s) against phi(i/sqrt(s))/phi(0)
    double local_clt_max_rel_err = 0.0;
    // |pmf(s) * sqrt(2 pi s) - 1|
    double stirling_rel_err = 0.0;
    // mean over 1 <= i <= s of sqrt(s) * (cdf(i) - Phi((i-s)/sqrt(s)))
    double psi_mean = 0.0;
};

PoissonAsymptoticsReport poisson_asymptotics_report(std::int64_t s);

}  // namespace bravo
