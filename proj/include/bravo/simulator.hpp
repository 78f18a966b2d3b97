#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bravo/birth_death.hpp"

namespace bravo {

struct SimConfig {
    std::uint64_t master_seed = 0;
    // < 0 selects the default 100 * J / (smallest rate) relaxation heuristic.
    double warmup_time = -1.0;
    int batch_count = 32;  // per replication, >= 20
    // <= 0 selects the default of roughly 1e4 departures per batch.
    double batch_length = -1.0;
    int replications = 4;
    // Empty means the initial state is sampled from the stationary law.
    std::optional<int> initial_state;
    int threads = 1;
};

struct SeedProvenance {
    std::uint64_t master_seed = 0;
    int replications = 0;
};

struct SimEstimate {
    double ratio_estimate = 0.0;
    double standard_error = 0.0;
    std::pair<double, double> ci95{0.0, 0.0};
    std::uint64_t total_departures = 0;  // counted departures inside batches
    double mean_rate_estimate = 0.0;
    SeedProvenance seed_provenance{};
    bool low_quality = false;
    std::string note;
};

// Batch-means estimate of the limiting variance-to-mean ratio of the death
// count. Deaths are counted per batch after warmup; the asymptotic variance
// rate is the batch-count sample variance over the batch length, averaged
// across replications, and the ratio divides it by the mean departure rate.
// A pure function of (chain, config): reruns and any thread count give
// bit-identical results.
SimEstimate simulate_ratio(const BirthDeathChain& chain, const SimConfig& config);

// Same estimator when the death out of state i is only counted with
// probability q_i (q_1..q_J). Marks draw from a dedicated substream, so the
// event skeleton matches the unmarked run of the same seed.
SimEstimate simulate_marked_ratio(const BirthDeathChain& chain,
                                  std::span<const double> counting_probabilities,
                                  const SimConfig& config);

struct DelayProbEstimate {
    double value = 0.0;
    double standard_error = 0.0;
};

// Fraction of post-warmup time spent in states >= servers.
DelayProbEstimate empirical_delay_prob(const BirthDeathChain& chain, int servers,
                                       const SimConfig& config);

// Time-weighted empirical state distribution over the batch window.
std::vector<double> empirical_distribution(const BirthDeathChain& chain,
                                           const SimConfig& config);

}  // namespace bravo
