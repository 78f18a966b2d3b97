#include "bravo/special_functions.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace bravo {

namespace {

constexpr double kSqrt2 = 1.414213562373095048801688724209698;

// Laplace continued fraction 1/(u + 1/(u + 2/(u + 3/(u + ...)))) for the
// Mills ratio, u > 0. Modified Lentz evaluation; converges quickly for u >= 6.
double mills_continued_fraction(double u) {
    constexpr double tiny = 1e-300;
    double value = tiny;
    double c = value;
    double d = 0.0;
    for (int n = 1; n <= 400; ++n) {
        const double an = (n == 1) ? 1.0 : static_cast<double>(n - 1);
        d = u + an * d;
        if (d == 0.0) d = tiny;
        c = u + an / c;
        if (c == 0.0) c = tiny;
        d = 1.0 / d;
        const double delta = c * d;
        value *= delta;
        if (std::abs(delta - 1.0) < 1e-16) return value;
    }
    throw std::runtime_error("mills_ratio continued fraction did not converge");
}

// Series for the regularized lower incomplete gamma P(a, x), x < a + 1.
double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int n = 0; n < 200000; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * 1e-17) {
            return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
        }
    }
    throw std::runtime_error("gamma_p series did not converge");
}

// Continued fraction for Q(a, x), x >= a + 1 (modified Lentz).
double gamma_q_fraction(double a, double x) {
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 200000; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-17) {
            return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
        }
    }
    throw std::runtime_error("gamma_q continued fraction did not converge");
}

}  // namespace

double normal_pdf(double u) { return kInvSqrt2Pi * std::exp(-0.5 * u * u); }

double normal_cdf(double u) { return 0.5 * std::erfc(-u / kSqrt2); }

double normal_cdf_complement(double u) { return 0.5 * std::erfc(u / kSqrt2); }

double mills_ratio(double u) {
    if (u >= 6.0) return mills_continued_fraction(u);
    if (u > -6.0) return normal_cdf_complement(u) / normal_pdf(u);
    // Mills(u) + Mills(-u) = 1/phi(u)
    const double inv_pdf = kSqrt2Pi * std::exp(0.5 * u * u);
    if (!std::isfinite(inv_pdf)) {
        throw std::overflow_error("mills_ratio: value not representable at u = " +
                                  std::to_string(u));
    }
    return inv_pdf - mills_continued_fraction(-u);
}

double gamma_q(double a, double x) {
    if (!(a > 0.0) || !(x >= 0.0)) {
        throw std::invalid_argument("gamma_q requires a > 0 and x >= 0");
    }
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_fraction(a, x);
}

double poisson_pmf(std::int64_t i, double kappa) {
    if (i < 0 || !(kappa > 0.0)) {
        throw std::invalid_argument("poisson_pmf requires i >= 0 and kappa > 0");
    }
    const double di = static_cast<double>(i);
    return std::exp(-kappa + di * std::log(kappa) - std::lgamma(di + 1.0));
}

double poisson_cdf(std::int64_t i, double kappa) {
    if (i < 0 || !(kappa > 0.0)) {
        throw std::invalid_argument("poisson_cdf requires i >= 0 and kappa > 0");
    }
    return gamma_q(static_cast<double>(i) + 1.0, kappa);
}

PoissonAsymptoticsReport poisson_asymptotics_report(std::int64_t s) {
    if (s < 10) throw std::invalid_argument("poisson_asymptotics_report requires s >= 10");

    PoissonAsymptoticsReport report;
    report.mean_parameter = s;
    const double ds = static_cast<double>(s);
    const double sd = std::sqrt(ds);

    // Past s + 13 sqrt(s) both the Poisson and the normal tail are below
    // 1e-30, so scanning up to there is exhaustive at double precision.
    const std::int64_t hi = s + static_cast<std::int64_t>(std::ceil(13.0 * sd));
    double sup_dev = 0.0;
    double psi_sum = 0.0;
    double psi_comp = 0.0;  // Kahan correction
    for (std::int64_t i = 0; i <= hi; ++i) {
        const double dev =
            poisson_cdf(i, ds) - normal_cdf((static_cast<double>(i) - ds) / sd);
        sup_dev = std::max(sup_dev, std::abs(dev));
        if (i >= 1 && i <= s) {
            const double term = sd * dev - psi_comp;
            const double t = psi_sum + term;
            psi_comp = (t - psi_sum) - term;
            psi_sum = t;
        }
    }
    report.berry_esseen_sup_dev = sup_dev;
    report.scaled_dev = sup_dev * sd;
    report.psi_mean = psi_sum / ds;

    // pmf(s-i)/pmf(s) = prod_{j=0}^{i-1} (s-j)/s, accumulated exactly enough
    // by running product.
    const std::int64_t window =
        static_cast<std::int64_t>(std::floor(std::pow(ds, 0.625)));
    double ratio = 1.0;
    double max_rel = 0.0;
    for (std::int64_t i = 1; i <= window; ++i) {
        ratio *= static_cast<double>(s - i + 1) / ds;
        const double x = static_cast<double>(i) / sd;
        const double gauss = std::exp(-0.5 * x * x);  // phi(x)/phi(0)
        max_rel = std::max(max_rel, std::abs(ratio - gauss) / gauss);
    }
    report.local_clt_max_rel_err = max_rel;

    const double pmf_s = std::exp(-ds + ds * std::log(ds) - std::lgamma(ds + 1.0));
    report.stirling_rel_err = std::abs(pmf_s * std::sqrt(2.0 * kPi * ds) - 1.0);
    return report;
}

}  // namespace bravo
