#include "bravo/birth_death.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace bravo {

namespace {

void require_positive_rates(const std::vector<double>& rates, const char* what) {
    for (std::size_t i = 0; i < rates.size(); ++i) {
        if (!(rates[i] > 0.0) || !std::isfinite(rates[i])) {
            throw std::invalid_argument(std::string(what) + " rate at index " +
                                        std::to_string(i) +
                                        " must be positive and finite");
        }
    }
}

double kahan_sum(const std::vector<double>& v) {
    double sum = 0.0, comp = 0.0;
    for (double x : v) {
        const double y = x - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum;
}

}  // namespace

BirthDeathChain::BirthDeathChain(std::vector<double> birth_rates,
                                 std::vector<double> death_rates)
    : birth_rates_(std::move(birth_rates)), death_rates_(std::move(death_rates)) {
    if (birth_rates_.empty()) {
        throw std::invalid_argument("chain needs at least one state above zero");
    }
    if (birth_rates_.size() != death_rates_.size()) {
        throw std::invalid_argument("birth and death rate vectors must both have J entries");
    }
    require_positive_rates(birth_rates_, "birth");
    require_positive_rates(death_rates_, "death");
}

bool BirthDeathChain::has_constant_births(double rel_tol) const {
    const double first = birth_rates_.front();
    for (double r : birth_rates_) {
        if (std::abs(r - first) > rel_tol * std::abs(first)) return false;
    }
    return true;
}

BirthDeathChain build_mmsk(const MmskParams& params) {
    if (params.servers < 1) throw std::invalid_argument("servers must be >= 1");
    if (params.buffer < 0) throw std::invalid_argument("buffer must be >= 0");
    if (!(params.traffic_intensity > 0.0) || !std::isfinite(params.traffic_intensity)) {
        throw std::invalid_argument("traffic intensity must be positive and finite");
    }
    const int J = params.servers + params.buffer;
    const double arrival = params.servers * params.traffic_intensity;
    std::vector<double> births(static_cast<std::size_t>(J), arrival);
    std::vector<double> deaths(static_cast<std::size_t>(J));
    for (int i = 1; i <= J; ++i) {
        deaths[static_cast<std::size_t>(i) - 1] = std::min(i, params.servers);
    }
    return BirthDeathChain(std::move(births), std::move(deaths));
}

StationaryDistribution stationary(const BirthDeathChain& chain) {
    const int J = chain.num_states_above_zero();
    std::vector<double> logw(static_cast<std::size_t>(J) + 1, 0.0);
    for (int i = 1; i <= J; ++i) {
        logw[i] = logw[i - 1] + std::log(chain.birth_rate(i - 1)) -
                  std::log(chain.death_rate(i));
    }
    const double peak = *std::max_element(logw.begin(), logw.end());

    StationaryDistribution dist;
    dist.probabilities.resize(logw.size());
    for (std::size_t i = 0; i < logw.size(); ++i) {
        dist.probabilities[i] = std::exp(logw[i] - peak);
    }
    const double norm = kahan_sum(dist.probabilities);
    if (!(norm > 0.0) || !std::isfinite(norm)) {
        throw std::runtime_error("stationary distribution normalizer not representable");
    }
    double running = 0.0;
    dist.cumulative.resize(dist.probabilities.size());
    for (std::size_t i = 0; i < dist.probabilities.size(); ++i) {
        dist.probabilities[i] /= norm;
        running += dist.probabilities[i];
        dist.cumulative[i] = running;
    }
    return dist;
}

OutputRatioResult output_stats(const BirthDeathChain& chain,
                               const StationaryDistribution& dist) {
    const int J = chain.num_states_above_zero();
    if (static_cast<int>(dist.probabilities.size()) != J + 1) {
        throw std::invalid_argument("distribution does not match chain size");
    }
    std::vector<double> cum(static_cast<std::size_t>(J) + 1, 0.0);
    double sum = 0.0, comp = 0.0;
    for (int i = 1; i <= J; ++i) {
        const double term = chain.death_rate(i) * dist.probabilities[i] - comp;
        const double t = sum + term;
        comp = (t - sum) - term;
        sum = t;
        cum[i] = sum;
    }
    OutputRatioResult result;
    result.departure_rate = sum;
    result.cumulative_departure_fractions = std::move(cum);
    for (double& v : result.cumulative_departure_fractions) v /= sum;
    result.ratio = std::numeric_limits<double>::quiet_NaN();
    return result;
}

// The ratio formulas divide pi-weighted cumulative quantities by pi_i, which
// underflows in the far tails of large chains, so the sums below carry the
// ratios w_i = (P_i - Lambda*_i)/pi_i (or y_i = pi_J P_i/pi_i) through
// one-step recurrences in the rate ratios. A single recurrence direction is
// unstable: each step multiplies the carried error by pi_{i-1}/pi_i (forward)
// or pi_{i+1}/pi_i (backward), which exceeds one on the side where pi falls.
// Sweeping forward up to the peak of pi and backward from the other end keeps
// every factor at most one on unimodal chains. The backward anchors are exact
// (P_J - Lambda*_J = 0 and pi_J P_J/pi_J = 1).

namespace {

std::size_t peak_index(const std::vector<double>& pi) {
    std::size_t m = 0;
    for (std::size_t i = 1; i < pi.size(); ++i) {
        if (pi[i] > pi[m]) m = i;
    }
    return m;
}

double counted_departure_rate(const BirthDeathChain& chain,
                              const StationaryDistribution& dist,
                              std::span<const double> q) {
    double sum = 0.0, comp = 0.0;
    for (int i = 1; i <= chain.num_states_above_zero(); ++i) {
        const double weight = q.empty() ? 1.0 : q[static_cast<std::size_t>(i) - 1];
        const double term = chain.death_rate(i) * dist.probabilities[i] * weight - comp;
        const double t = sum + term;
        comp = (t - sum) - term;
        sum = t;
    }
    return sum;
}

// sum over i < J of pi_i w_i (top_{i+1} - (rate/lambda_i) w_i), with
// w_i = (P_i - Lambda_i)/pi_i for the counting weights behind rate/Lambda and
// top the per-transition factor (1 for the plain ratio, q for the marked one).
double marked_style_sum(const BirthDeathChain& chain,
                        const StationaryDistribution& dist, double rate,
                        std::span<const double> q) {
    const int J = chain.num_states_above_zero();
    const auto& pi = dist.probabilities;
    const std::size_t m = peak_index(pi);
    const auto weight = [&q](int j) {
        return q.empty() ? 1.0 : q[static_cast<std::size_t>(j) - 1];
    };
    std::vector<double> w(static_cast<std::size_t>(J) + 1, 0.0);

    w[0] = 1.0;  // P_0 - Lambda_0 = pi_0
    for (std::size_t i = 1; i <= m; ++i) {
        const double mu = chain.death_rate(static_cast<int>(i));
        w[i] = w[i - 1] * (mu / chain.birth_rate(static_cast<int>(i) - 1)) +
               (1.0 - mu * weight(static_cast<int>(i)) / rate);
    }
    w[static_cast<std::size_t>(J)] = 0.0;  // P_J = Lambda_J = 1 identically
    for (std::size_t i = static_cast<std::size_t>(J); i-- > m + 1;) {
        const double mu_next = chain.death_rate(static_cast<int>(i) + 1);
        w[i] = (chain.birth_rate(static_cast<int>(i)) / mu_next) *
               (w[i + 1] - (1.0 - mu_next * weight(static_cast<int>(i) + 1) / rate));
    }

    double acc = 0.0, comp = 0.0;
    for (int i = 0; i < J; ++i) {  // the i = J term is identically zero
        const std::size_t k = static_cast<std::size_t>(i);
        const double term =
            pi[k] * w[k] * (weight(i + 1) - (rate / chain.birth_rate(i)) * w[k]) -
            comp;
        const double t = acc + term;
        comp = (t - acc) - term;
        acc = t;
    }
    return acc;
}

}  // namespace

double d_pi(const BirthDeathChain& chain) {
    const StationaryDistribution dist = stationary(chain);
    const double lambda_star = counted_departure_rate(chain, dist, {});
    return 1.0 - 2.0 * marked_style_sum(chain, dist, lambda_star, {});
}

double d_pi_constant_birth(const BirthDeathChain& chain) {
    const double lambda = chain.birth_rate(0);
    const auto births = chain.birth_rates();
    for (std::size_t i = 0; i < births.size(); ++i) {
        if (std::abs(births[i] - lambda) > 1e-12 * std::abs(lambda)) {
            throw std::invalid_argument(
                "constant-birth formula needs equal birth rates; index " +
                std::to_string(i) + " differs");
        }
    }

    const StationaryDistribution dist = stationary(chain);
    const int J = chain.num_states_above_zero();
    const auto& pi = dist.probabilities;
    const double pi_j = pi.back();
    const std::size_t m = peak_index(pi);

    // y_i = pi_J P_i / pi_i, swept toward the peak from both ends
    std::vector<double> y(static_cast<std::size_t>(J) + 1, 0.0);
    y[0] = pi_j;  // P_0 = pi_0
    for (std::size_t i = 1; i <= m; ++i) {
        y[i] = y[i - 1] * (chain.death_rate(static_cast<int>(i)) /
                           chain.birth_rate(static_cast<int>(i) - 1)) +
               pi_j;
    }
    y[static_cast<std::size_t>(J)] = 1.0;  // pi_J P_J / pi_J exactly
    for (std::size_t i = static_cast<std::size_t>(J); i-- > m + 1;) {
        y[i] = (chain.birth_rate(static_cast<int>(i)) /
                chain.death_rate(static_cast<int>(i) + 1)) *
               (y[i + 1] - pi_j);
    }

    double acc = 0.0, acc_comp = 0.0;
    for (int i = 0; i <= J; ++i) {  // the i = J term vanishes (y_J = 1)
        const std::size_t k = static_cast<std::size_t>(i);
        const double term = dist.cumulative[k] * (1.0 - y[k]) - acc_comp;
        const double t = acc + term;
        acc_comp = (t - acc) - term;
        acc = t;
    }
    return 1.0 - 2.0 * (pi_j / (1.0 - pi_j)) * acc;
}

double d_pi_lower_bound(const StationaryDistribution& dist) {
    const double pi_j = dist.probabilities.back();
    return (0.5 - pi_j) / (1.0 - pi_j);
}

MarkedRatio d_pi_marked(const BirthDeathChain& chain,
                        std::span<const double> counting_probabilities) {
    const int J = chain.num_states_above_zero();
    if (static_cast<int>(counting_probabilities.size()) != J) {
        throw std::invalid_argument("need one counting probability per death transition");
    }
    for (std::size_t i = 0; i < counting_probabilities.size(); ++i) {
        const double q = counting_probabilities[i];
        if (!(q >= 0.0 && q <= 1.0)) {
            throw std::invalid_argument("counting probability at index " +
                                        std::to_string(i) + " outside [0, 1]");
        }
    }

    // lambda* and the cumulative fractions are those of the counted process:
    // only then does the formula reduce to the exact thinning law
    // D_q = 1 - q + q D for constant q, and only then does it match the
    // marked simulator.
    const StationaryDistribution dist = stationary(chain);
    const double lambda_q = counted_departure_rate(chain, dist, counting_probabilities);
    if (!(lambda_q > 0.0)) {
        throw std::invalid_argument("counting probabilities mark no transition at all");
    }
    return MarkedRatio{
        1.0 - 2.0 * marked_style_sum(chain, dist, lambda_q, counting_probabilities),
        true};
}

}  // namespace bravo
