#include "bravo/qed_limits.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "bravo/special_functions.hpp"

namespace bravo {

namespace {

const double kSqrtPiOver2 = std::sqrt(kPi / 2.0);
const double kLog2 = std::log(2.0);

void require_eta_positive(double eta) {
    if (!(eta > 0.0) || !std::isfinite(eta)) {
        throw std::invalid_argument("eta must be positive and finite");
    }
}

// Phi(beta)/phi(beta) = Mills(-beta), without the overflow throw: for beta
// past the double range the limit of interest is h -> 0, which +inf here
// produces naturally.
double cdf_over_pdf(double beta) {
    if (beta <= -6.0) return mills_ratio(-beta);
    if (beta < 37.0) return normal_cdf(beta) / normal_pdf(beta);
    return std::numeric_limits<double>::infinity();
}

double h_impl(double eta, double beta) {
    return 1.0 / (1.0 - std::exp(-beta * eta) + beta * cdf_over_pdf(beta));
}

double f_impl(double eta, double beta, double h, const QuadratureConfig& config) {
    const double c = beta * std::exp(-beta * eta) * h;
    const auto integrand = [c](double u) {
        return (1.0 - c * mills_ratio(u)) * normal_cdf_complement(u);
    };
    const double lower = -beta;
    const auto envelope = [c](double u) {
        return normal_cdf_complement(u) * (1.0 + std::abs(c) * mills_ratio(u));
    };
    const double upper = truncation_point(envelope, std::max(lower, 0.0),
                                          config.truncation_tail_mass);
    return integrate(integrand, lower, upper, config).value;
}

double g_impl(double eta, double beta, double h) {
    const double e = std::exp(-beta * eta);
    return 2.0 * e * h * (1.0 + e * h) *
           (1.0 - beta * eta - e + (1.0 - 2.0 * beta * eta * e - e * e) * h);
}

}  // namespace

double l_eta(double eta) {
    if (!(eta >= 0.0) || !std::isfinite(eta)) {
        throw std::invalid_argument("l_eta requires eta >= 0");
    }
    const double num =
        (2.0 - kPi / 2.0) * eta + kSqrt2Pi * (1.0 - kLog2 - kPi / 12.0);
    const double base = eta + kSqrtPiOver2;
    return num / (base * base * base);
}

double d0(double eta) { return 2.0 / 3.0 - l_eta(eta); }

EtaStarResult eta_star() {
    const double argmin = kSqrt2Pi * (std::log(8.0) - 2.0) / (4.0 - kPi);

    // golden-section search of d0 on [0, 10]
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = 0.0, b = 10.0;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = d0(c), fd = d0(d);
    while (b - a > 1e-12) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = d0(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = d0(d);
        }
    }
    const double numeric = 0.5 * (a + b);
    return EtaStarResult{argmin, d0(argmin), numeric};
}

double h_fn(double eta, double beta) {
    require_eta_positive(eta);
    if (std::abs(beta) < kBetaSwitch) {
        throw std::domain_error("|beta| below the critical switch; use the d0 branch");
    }
    return h_impl(eta, beta);
}

double f_fn(double eta, double beta, const QuadratureConfig& config) {
    return f_impl(eta, beta, h_fn(eta, beta), config);
}

double g_fn(double eta, double beta) { return g_impl(eta, beta, h_fn(eta, beta)); }

QedEvaluation d_beta_eta(double eta, double beta, const QuadratureConfig& config) {
    if (!std::isfinite(beta)) throw std::invalid_argument("beta must be finite");

    QedEvaluation eval;
    eval.params = {beta, eta};
    // the critical closed form is finite at eta = 0, so allow it there
    if (std::abs(beta) >= kBetaSwitch) require_eta_positive(eta);
    if (std::abs(beta) < kBetaSwitch) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        eval.h_value = eval.f_value = eval.g_value = nan;
        eval.ratio = d0(eta);
        eval.branch = QedBranch::critical;
        return eval;
    }
    const double h = h_impl(eta, beta);
    const double f = f_impl(eta, beta, h, config);
    const double g = g_impl(eta, beta, h);
    eval.h_value = h;
    eval.f_value = f;
    eval.g_value = g;
    eval.ratio = 1.0 -
                 (2.0 * beta * beta * std::exp(-beta * eta) * h * h / normal_pdf(beta)) * f +
                 g;
    eval.branch = QedBranch::noncritical;
    return eval;
}

double delay_prob_limit(double eta, double beta) {
    if (!std::isfinite(beta)) throw std::invalid_argument("beta must be finite");
    double p;
    if (std::abs(beta) < kBetaSwitch) {
        if (!(eta >= 0.0) || !std::isfinite(eta)) {
            throw std::invalid_argument("eta must be >= 0");
        }
        p = eta / (eta + kSqrtPiOver2);
    } else {
        require_eta_positive(eta);
        p = (1.0 - std::exp(-beta * eta)) * h_impl(eta, beta);
    }
    return std::min(1.0, std::max(0.0, p));
}

IPlusResult i_plus(const QuadratureConfig& config) {
    // e^{u^2/2} Phi(-u) = Mills(u)/sqrt(2 pi)
    const auto integrand = [](double u) {
        return normal_cdf_complement(u) * (1.0 - mills_ratio(u) * kInvSqrt2Pi);
    };
    const auto envelope = [](double u) { return normal_cdf_complement(u); };
    const double upper = truncation_point(envelope, 0.0, config.truncation_tail_mass);
    IPlusResult result;
    result.quadrature = integrate(integrand, 0.0, upper, config).value;
    result.closed_form = (1.0 - std::log(std::sqrt(2.0))) / kSqrt2Pi;
    result.printed_form = kSqrt2Pi * (1.0 - std::log(std::sqrt(2.0)));
    return result;
}

namespace {

// Residual quadrature shared by both tails of the semi-closed j_beta route:
// (b/(2 pi)) int_lo^hi e^{-b^2 x^2/2} log(1 + 1/x^2) dx, b > 0.
double log_kernel_integral(double b, double lo, double hi,
                           const QuadratureConfig& config) {
    const auto integrand = [b](double x) {
        return b * std::exp(-0.5 * b * b * x * x) * std::log1p(1.0 / (x * x)) /
               (2.0 * kPi);
    };
    return integrate(integrand, lo, hi, config).value;
}

// Semi-closed value of int_b^inf e^{u^2/2} Phi(-u)^2 du for b > 0, from the
// polar-coordinate reduction of the double normal tail:
//   Phi(-b) log 2 / sqrt(2 pi) - (b/(2 pi)) int_1^inf e^{-b^2 x^2/2} log(1 + 1/x^2) dx.
double j_beta_right(double b, const QuadratureConfig& config) {
    const auto envelope = [b](double x) {
        return b * std::exp(-0.5 * b * b * x * x) * std::log1p(1.0 / (x * x)) /
               (2.0 * kPi);
    };
    const double hi =
        truncation_point(envelope, 1.0, config.truncation_tail_mass, 0.5,
                         1.0 + 45.0 / b);
    return normal_cdf_complement(b) * kLog2 / kSqrt2Pi -
           log_kernel_integral(b, 1.0, hi, config);
}

}  // namespace

JBetaResult j_beta(double beta, const QuadratureConfig& config) {
    if (!std::isfinite(beta)) throw std::invalid_argument("beta must be finite");

    // direct route: e^{u^2/2} Phi(-u)^2 = Mills(u) Phi(-u)/sqrt(2 pi),
    // decreasing on u >= 0
    const auto integrand = [](double u) {
        return mills_ratio(u) * normal_cdf_complement(u) * kInvSqrt2Pi;
    };
    const double upper = truncation_point(integrand, std::max(beta, 0.0),
                                          config.truncation_tail_mass);
    JBetaResult result;
    result.direct = integrate(integrand, beta, upper, config).value;

    const double at_zero = std::log(std::sqrt(2.0)) / kSqrt2Pi;
    if (std::abs(beta) < 1e-12) {
        result.semi_closed = at_zero;
    } else if (beta > 0.0) {
        result.semi_closed = j_beta_right(beta, config);
    } else {
        // Left tail in terms of the right one:
        //   J(-b) = J(b) + int_0^b e^{u^2/2} du
        //           + (2 log 2/sqrt(2 pi)) (Phi(b) - 1/2)
        //           - (2 b/(2 pi)) int_0^1 e^{-b^2 x^2/2} log(1 + 1/x^2) dx.
        const double b = -beta;
        const double growth =
            integrate([](double u) { return std::exp(0.5 * u * u); }, 0.0, b, config)
                .value;
        result.semi_closed = j_beta_right(b, config) + growth +
                             2.0 * kLog2 / kSqrt2Pi * (normal_cdf(b) - 0.5) -
                             2.0 * log_kernel_integral(b, 0.0, 1.0, config);
    }
    return result;
}

}  // namespace bravo
