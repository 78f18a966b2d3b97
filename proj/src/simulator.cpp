#include "bravo/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "bravo/parallel.hpp"
#include "bravo/philox.hpp"

namespace bravo {

namespace {

// Substream roles within one replication.
constexpr std::uint32_t kEventStream = 0;
constexpr std::uint32_t kMarkStream = 1;
constexpr std::uint32_t kInitStream = 2;

struct ResolvedConfig {
    std::uint64_t seed;
    double warmup;
    int batches;
    double batch_length;
    int replications;
    std::optional<int> initial_state;
    int threads;
};

ResolvedConfig resolve(const BirthDeathChain& chain,
                       const StationaryDistribution& dist, const SimConfig& config) {
    ResolvedConfig r;
    r.seed = config.master_seed;
    r.batches = config.batch_count;
    r.replications = config.replications;
    r.initial_state = config.initial_state;
    r.threads = std::max(1, config.threads);

    if (config.batch_length > 0.0) {
        r.batch_length = config.batch_length;
    } else {
        double departure_rate = 0.0;
        for (int i = 1; i <= chain.num_states_above_zero(); ++i) {
            departure_rate += chain.death_rate(i) * dist.probabilities[i];
        }
        r.batch_length = 1e4 / departure_rate;
    }

    if (config.warmup_time >= 0.0) {
        r.warmup = config.warmup_time;
    } else {
        double min_rate = std::numeric_limits<double>::infinity();
        for (double v : chain.birth_rates()) min_rate = std::min(min_rate, v);
        for (double v : chain.death_rates()) min_rate = std::min(min_rate, v);
        r.warmup = 100.0 * chain.num_states_above_zero() / min_rate;
    }

    if (r.batches < 20) throw std::invalid_argument("batch_count must be >= 20");
    if (!(r.batch_length > 0.0)) throw std::invalid_argument("batch_length must be > 0");
    if (r.replications < 1) throw std::invalid_argument("replications must be >= 1");
    if (r.initial_state &&
        (*r.initial_state < 0 || *r.initial_state > chain.num_states_above_zero())) {
        throw std::invalid_argument("initial_state outside [0, J]");
    }
    return r;
}

struct RepOutcome {
    std::vector<double> batch_counts;
    std::vector<double> occupancy_time;  // post-warmup, per state
    std::uint64_t departures = 0;        // counted, inside batches
};

RepOutcome run_replication(const BirthDeathChain& chain,
                           const StationaryDistribution& dist,
                           const ResolvedConfig& cfg, int rep,
                           std::span<const double> marks_q) {
    const int J = chain.num_states_above_zero();
    RngStream events(cfg.seed, static_cast<std::uint32_t>(rep), kEventStream);
    RngStream marks(cfg.seed, static_cast<std::uint32_t>(rep), kMarkStream);

    int state;
    if (cfg.initial_state) {
        state = *cfg.initial_state;
    } else {
        RngStream init(cfg.seed, static_cast<std::uint32_t>(rep), kInitStream);
        const double u = init.next_uniform();
        state = static_cast<int>(
            std::lower_bound(dist.cumulative.begin(), dist.cumulative.end(), u) -
            dist.cumulative.begin());
        state = std::min(state, J);
    }

    RepOutcome out;
    out.batch_counts.assign(static_cast<std::size_t>(cfg.batches), 0.0);
    out.occupancy_time.assign(static_cast<std::size_t>(J) + 1, 0.0);

    const double t_end = cfg.warmup + cfg.batches * cfg.batch_length;
    double t = 0.0;
    for (;;) {
        const double birth = state < J ? chain.birth_rate(state) : 0.0;
        const double death = state > 0 ? chain.death_rate(state) : 0.0;
        const double total = birth + death;
        const double t_next = t + events.next_exponential(total);

        const double lo = std::max(t, cfg.warmup);
        const double hi = std::min(t_next, t_end);
        if (hi > lo) out.occupancy_time[static_cast<std::size_t>(state)] += hi - lo;
        if (t_next >= t_end) break;
        t = t_next;

        const bool is_death = events.next_uniform() * total < death;
        if (is_death) {
            bool counted = true;
            if (!marks_q.empty()) {
                // one mark draw per death keeps the stream aligned with the
                // event skeleton regardless of warmup
                counted = marks.next_uniform() < marks_q[static_cast<std::size_t>(state) - 1];
            }
            if (t >= cfg.warmup && counted) {
                const int k = static_cast<int>((t - cfg.warmup) / cfg.batch_length);
                if (k >= 0 && k < cfg.batches) {
                    out.batch_counts[static_cast<std::size_t>(k)] += 1.0;
                    ++out.departures;
                }
            }
            --state;
        } else {
            ++state;
        }
    }
    return out;
}

std::vector<RepOutcome> run_all(const BirthDeathChain& chain, const SimConfig& config,
                                std::span<const double> marks_q,
                                ResolvedConfig* resolved_out) {
    const StationaryDistribution dist = stationary(chain);
    const ResolvedConfig cfg = resolve(chain, dist, config);
    if (resolved_out) *resolved_out = cfg;

    std::vector<RepOutcome> outcomes(static_cast<std::size_t>(cfg.replications));
    parallel_for(outcomes.size(), cfg.threads, [&](std::size_t r) {
        outcomes[r] = run_replication(chain, dist, cfg, static_cast<int>(r), marks_q);
    });
    return outcomes;
}

SimEstimate aggregate_ratio(const std::vector<RepOutcome>& outcomes,
                            const ResolvedConfig& cfg) {
    const int R = cfg.replications;
    const int n = cfg.batches;
    const double L = cfg.batch_length;

    SimEstimate est;
    est.seed_provenance = {cfg.seed, R};

    std::vector<double> ratio_r;
    ratio_r.reserve(static_cast<std::size_t>(R));
    double vhat_sum = 0.0, rate_sum = 0.0;
    int empty_batches = 0;
    // batch statistics of the last replication; only read when R == 1
    double last_mean = 0.0, last_var = 0.0;

    for (const RepOutcome& out : outcomes) {
        est.total_departures += out.departures;
        double mean = 0.0;
        for (double c : out.batch_counts) mean += c;
        mean /= n;
        double var = 0.0;
        for (double c : out.batch_counts) var += (c - mean) * (c - mean);
        var /= (n - 1);
        for (double c : out.batch_counts) empty_batches += (c == 0.0);

        const double vhat = var / L;
        const double rate = mean / L;
        vhat_sum += vhat;
        rate_sum += rate;
        if (rate > 0.0) ratio_r.push_back(vhat / rate);
        last_mean = mean;
        last_var = var;
    }

    const double vhat = vhat_sum / R;
    const double rate = rate_sum / R;
    est.mean_rate_estimate = rate;

    if (est.total_departures == 0 || rate == 0.0 ||
        static_cast<int>(ratio_r.size()) < R) {
        est.low_quality = true;
        est.note = "degenerate run: a replication saw no counted departures";
        est.ratio_estimate = std::numeric_limits<double>::quiet_NaN();
        est.standard_error = std::numeric_limits<double>::quiet_NaN();
        est.ci95 = {est.ratio_estimate, est.ratio_estimate};
        return est;
    }

    est.ratio_estimate = vhat / rate;
    if (R >= 2) {
        double m = 0.0;
        for (double x : ratio_r) m += x;
        m /= R;
        double s2 = 0.0;
        for (double x : ratio_r) s2 += (x - m) * (x - m);
        s2 /= (R - 1);
        est.standard_error = std::sqrt(s2 / R);
    } else {
        // single replication: normal-theory spread of a sample variance plus
        // the rate noise, via the delta method
        const double var_term = 2.0 / (n - 1);
        const double rate_term = last_var / (n * last_mean * last_mean);
        est.standard_error = est.ratio_estimate * std::sqrt(var_term + rate_term);
    }
    est.ci95 = {est.ratio_estimate - 1.96 * est.standard_error,
                est.ratio_estimate + 1.96 * est.standard_error};

    if (empty_batches > 0) {
        est.low_quality = true;
        est.note = std::to_string(empty_batches) +
                   " empty batch(es); batch_length is likely too short";
    }
    return est;
}

}  // namespace

SimEstimate simulate_ratio(const BirthDeathChain& chain, const SimConfig& config) {
    ResolvedConfig cfg;
    const auto outcomes = run_all(chain, config, {}, &cfg);
    return aggregate_ratio(outcomes, cfg);
}

SimEstimate simulate_marked_ratio(const BirthDeathChain& chain,
                                  std::span<const double> counting_probabilities,
                                  const SimConfig& config) {
    const int J = chain.num_states_above_zero();
    if (static_cast<int>(counting_probabilities.size()) != J) {
        throw std::invalid_argument("need one counting probability per death transition");
    }
    for (double q : counting_probabilities) {
        if (!(q >= 0.0 && q <= 1.0)) {
            throw std::invalid_argument("counting probabilities must lie in [0, 1]");
        }
    }
    ResolvedConfig cfg;
    const auto outcomes = run_all(chain, config, counting_probabilities, &cfg);
    return aggregate_ratio(outcomes, cfg);
}

DelayProbEstimate empirical_delay_prob(const BirthDeathChain& chain, int servers,
                                       const SimConfig& config) {
    if (servers < 0 || servers > chain.num_states_above_zero()) {
        throw std::invalid_argument("servers outside the chain's state range");
    }
    ResolvedConfig cfg;
    const auto outcomes = run_all(chain, config, {}, &cfg);

    std::vector<double> fraction_r;
    fraction_r.reserve(outcomes.size());
    for (const RepOutcome& out : outcomes) {
        double above = 0.0, total = 0.0;
        for (std::size_t i = 0; i < out.occupancy_time.size(); ++i) {
            total += out.occupancy_time[i];
            if (static_cast<int>(i) >= servers) above += out.occupancy_time[i];
        }
        fraction_r.push_back(total > 0.0 ? above / total : 0.0);
    }

    DelayProbEstimate est;
    const int R = static_cast<int>(fraction_r.size());
    for (double p : fraction_r) est.value += p;
    est.value /= R;
    if (R >= 2) {
        double s2 = 0.0;
        for (double p : fraction_r) s2 += (p - est.value) * (p - est.value);
        s2 /= (R - 1);
        est.standard_error = std::sqrt(s2 / R);
    }
    return est;
}

std::vector<double> empirical_distribution(const BirthDeathChain& chain,
                                           const SimConfig& config) {
    ResolvedConfig cfg;
    const auto outcomes = run_all(chain, config, {}, &cfg);
    std::vector<double> occupancy(static_cast<std::size_t>(chain.num_states_above_zero()) + 1,
                                  0.0);
    double total = 0.0;
    for (const RepOutcome& out : outcomes) {
        for (std::size_t i = 0; i < occupancy.size(); ++i) {
            occupancy[i] += out.occupancy_time[i];
            total += out.occupancy_time[i];
        }
    }
    for (double& v : occupancy) v /= total;
    return occupancy;
}

}  // namespace bravo
