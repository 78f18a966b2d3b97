#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "bravo/birth_death.hpp"
#include "bravo/philox.hpp"
#include "bravo/qed_limits.hpp"
#include "bravo/simulator.hpp"

using namespace bravo;

TEST_CASE("philox known answers") {
    // published test vectors for the 4x32, 10-round configuration
    const auto zero = Philox4x32::encrypt({0, 0, 0, 0}, {0, 0});
    CHECK(zero[0] == 0x6627e8d5u);
    CHECK(zero[1] == 0xe169c58du);
    CHECK(zero[2] == 0xbc57ac4cu);
    CHECK(zero[3] == 0x9b00dbd8u);
    const auto pi_digits = Philox4x32::encrypt(
        {0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
        {0xa4093822u, 0x299f31d0u});
    CHECK(pi_digits[0] == 0xd16cfe09u);
    CHECK(pi_digits[1] == 0x94fdccebu);
    CHECK(pi_digits[2] == 0x5001e420u);
    CHECK(pi_digits[3] == 0x24126ea1u);
}

TEST_CASE("rng streams are independent and well-behaved") {
    RngStream a(123, 0, 0), b(123, 1, 0), c(123, 0, 1);
    bool all_equal = true;
    double mean = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double ua = a.next_uniform();
        all_equal = all_equal && (ua == b.next_uniform());
        CHECK(ua > 0.0);
        CHECK(ua < 1.0);
        mean += ua;
        (void)c;
    }
    CHECK_FALSE(all_equal);
    CHECK(std::abs(mean / n - 0.5) < 0.01);

    // same coordinates replay the same sequence
    RngStream x(99, 7, 2), y(99, 7, 2);
    for (int i = 0; i < 100; ++i) CHECK(x.next_u64() == y.next_u64());
}

TEST_CASE("renewal case matches the closed value") {
    const BirthDeathChain chain({1.0}, {1.0});
    SimConfig cfg;
    cfg.master_seed = 11;
    cfg.warmup_time = 100.0;
    cfg.batch_count = 100;
    cfg.batch_length = 400.0;
    cfg.replications = 20;
    const auto est = simulate_ratio(chain, cfg);
    CHECK_FALSE(est.low_quality);
    CHECK(std::abs(est.ratio_estimate - 0.5) <= 3.0 * est.standard_error);
    CHECK(std::abs(est.mean_rate_estimate - 0.5) < 0.01);
    CHECK(est.ci95.first < est.ratio_estimate);
    CHECK(est.ci95.second > est.ratio_estimate);
}

TEST_CASE("five-server system matches the exact formula") {
    const auto chain = build_mmsk({5, 7, 1.0});
    const double exact = d_pi(chain);
    SimConfig cfg;
    cfg.master_seed = 7;
    cfg.warmup_time = 200.0;
    cfg.batch_count = 100;
    cfg.batch_length = 300.0;
    cfg.replications = 16;
    const auto est = simulate_ratio(chain, cfg);
    CHECK(std::abs(est.ratio_estimate - exact) <= 3.0 * est.standard_error);
}

TEST_CASE("determinism: repeated and parallel runs are bit-identical") {
    const auto chain = build_mmsk({5, 7, 1.0});
    SimConfig cfg;
    cfg.master_seed = 99;
    cfg.warmup_time = 50.0;
    cfg.batch_count = 40;
    cfg.batch_length = 50.0;
    cfg.replications = 8;
    cfg.threads = 1;
    const auto a = simulate_ratio(chain, cfg);
    const auto b = simulate_ratio(chain, cfg);
    cfg.threads = 4;
    const auto c = simulate_ratio(chain, cfg);
    CHECK(a.ratio_estimate == b.ratio_estimate);
    CHECK(a.standard_error == b.standard_error);
    CHECK(a.total_departures == b.total_departures);
    CHECK(a.ratio_estimate == c.ratio_estimate);
    CHECK(a.standard_error == c.standard_error);
    CHECK(a.total_departures == c.total_departures);
    CHECK(a.mean_rate_estimate == c.mean_rate_estimate);
}

TEST_CASE("marked run with q = 1 reproduces the unmarked skeleton") {
    const auto chain = build_mmsk({1, 2, 1.0});
    SimConfig cfg;
    cfg.master_seed = 5;
    cfg.warmup_time = 50.0;
    cfg.batch_count = 30;
    cfg.batch_length = 100.0;
    cfg.replications = 4;
    const std::vector<double> ones{1.0, 1.0, 1.0};
    const auto marked = simulate_marked_ratio(chain, ones, cfg);
    const auto plain = simulate_ratio(chain, cfg);
    // marks never thin, and the event stream is untouched by the mark stream
    CHECK(marked.ratio_estimate == plain.ratio_estimate);
    CHECK(marked.total_departures == plain.total_departures);
}

TEST_CASE("marked runs match the marked formula") {
    SimConfig cfg;
    cfg.master_seed = 777;
    cfg.warmup_time = 100.0;
    cfg.batch_count = 120;
    cfg.batch_length = 500.0;
    cfg.replications = 16;

    const auto c13 = build_mmsk({1, 2, 1.0});
    const std::vector<double> q110{1.0, 1.0, 0.0};
    const auto est = simulate_marked_ratio(c13, q110, cfg);
    CHECK(std::abs(est.ratio_estimate - d_pi_marked(c13, q110).value) <=
          3.0 * est.standard_error);

    const auto c22 = build_mmsk({2, 2, 0.8});
    const std::vector<double> qhalf(4, 0.5);
    const auto est2 = simulate_marked_ratio(c22, qhalf, cfg);
    CHECK(std::abs(est2.ratio_estimate - d_pi_marked(c22, qhalf).value) <=
          3.0 * est2.standard_error);
}

TEST_CASE("empirical delay probability") {
    // two-state symmetric chain spends half its time busy
    const auto c11 = build_mmsk({1, 0, 1.0});
    SimConfig cfg;
    cfg.master_seed = 5;
    cfg.warmup_time = 20.0;
    cfg.batch_count = 100;
    cfg.batch_length = 100.0;
    cfg.replications = 10;
    const auto dp = empirical_delay_prob(c11, 1, cfg);
    CHECK(std::abs(dp.value - 0.5) <= 3.0 * dp.standard_error);

    // matches the exact stationary tail on a mid-size chain
    const auto c57 = build_mmsk({5, 7, 1.0});
    const auto dist = stationary(c57);
    double tail = 0.0;
    for (std::size_t i = 5; i < dist.probabilities.size(); ++i) {
        tail += dist.probabilities[i];
    }
    const auto dp2 = empirical_delay_prob(c57, 5, cfg);
    CHECK(std::abs(dp2.value - tail) <= 3.0 * dp2.standard_error);

    // many-server regime tracks the limiting value
    const auto c400 = build_mmsk({400, 20, 0.95});
    SimConfig cfg4;
    cfg4.master_seed = 31;
    cfg4.warmup_time = 5.0;
    cfg4.batch_count = 20;
    cfg4.batch_length = 25.0;
    cfg4.replications = 8;
    const auto dp4 = empirical_delay_prob(c400, 400, cfg4);
    CHECK(std::abs(dp4.value - delay_prob_limit(1.0, 1.0)) <= 0.03);
}

TEST_CASE("occupancy law: empirical distribution near the stationary one") {
    const auto chain = build_mmsk({5, 7, 1.0});
    const auto dist = stationary(chain);
    SimConfig cfg;
    cfg.master_seed = 8;
    cfg.warmup_time = 100.0;
    cfg.batch_count = 100;
    cfg.batch_length = 120.0;  // about 1e6 events in total
    cfg.replications = 10;
    const auto occ = empirical_distribution(chain, cfg);
    REQUIRE(occ.size() == dist.probabilities.size());
    double tv = 0.0;
    for (std::size_t i = 0; i < occ.size(); ++i) {
        tv += std::abs(occ[i] - dist.probabilities[i]);
    }
    CHECK(0.5 * tv <= 0.01);
}

TEST_CASE("rate law: mean rate matches lambda*") {
    const auto chain = build_mmsk({3, 4, 0.7});
    const auto dist = stationary(chain);
    double lambda_star = 0.0;
    for (int i = 1; i <= chain.num_states_above_zero(); ++i) {
        lambda_star += chain.death_rate(i) * dist.probabilities[i];
    }
    SimConfig cfg;
    cfg.master_seed = 21;
    cfg.warmup_time = 100.0;
    cfg.batch_count = 60;
    cfg.batch_length = 250.0;
    cfg.replications = 12;
    const auto est = simulate_ratio(chain, cfg);
    // Var(rate over horizon T) = v/T with v the asymptotic variance rate, and
    // v = ratio * rate, T = departures/rate
    const double rate_se = est.mean_rate_estimate *
                           std::sqrt(est.ratio_estimate /
                                     static_cast<double>(est.total_departures));
    CHECK(std::abs(est.mean_rate_estimate - lambda_star) <= 3.0 * rate_se);
}

TEST_CASE("standard error shrinks like the square root of the work") {
    const auto chain = build_mmsk({5, 7, 1.0});
    SimConfig cfg;
    cfg.master_seed = 2024;
    cfg.warmup_time = 50.0;
    cfg.batch_count = 40;
    cfg.batch_length = 100.0;
    cfg.replications = 10;
    const auto a = simulate_ratio(chain, cfg);
    cfg.replications = 40;
    const auto b = simulate_ratio(chain, cfg);
    const double shrink = a.standard_error / b.standard_error;
    CHECK(shrink > 2.0 / 1.5);
    CHECK(shrink < 2.0 * 1.5);
}

TEST_CASE("degenerate runs are flagged, not silent") {
    // top-state deaths never happen from below in a q that counts nothing
    const auto chain = build_mmsk({1, 1, 1.0});
    SimConfig cfg;
    cfg.master_seed = 3;
    cfg.warmup_time = 1.0;
    cfg.batch_count = 20;
    cfg.batch_length = 0.05;  // far too short: some batches see no departures
    cfg.replications = 2;
    const auto est = simulate_ratio(chain, cfg);
    CHECK(est.low_quality);
    CHECK_FALSE(est.note.empty());
}

TEST_CASE("default config resolves to ~1e4 departures per batch") {
    const BirthDeathChain chain({1.0}, {1.0});
    SimConfig cfg;  // auto warmup, auto batch length, stationary start
    cfg.master_seed = 1;
    const auto est = simulate_ratio(chain, cfg);
    CHECK_FALSE(est.low_quality);
    const double per_batch = static_cast<double>(est.total_departures) /
                             (cfg.batch_count * cfg.replications);
    CHECK(per_batch > 0.8e4);
    CHECK(per_batch < 1.2e4);
    CHECK(std::abs(est.ratio_estimate - 0.5) <= 4.0 * est.standard_error);
}

TEST_CASE("config validation") {
    const auto chain = build_mmsk({1, 1, 1.0});
    SimConfig cfg;
    cfg.batch_count = 10;  // below the batch-means floor
    CHECK_THROWS_AS(simulate_ratio(chain, cfg), std::invalid_argument);
    cfg = SimConfig{};
    cfg.initial_state = 5;  // outside [0, J]
    CHECK_THROWS_AS(simulate_ratio(chain, cfg), std::invalid_argument);
    cfg = SimConfig{};
    cfg.replications = 0;
    CHECK_THROWS_AS(simulate_ratio(chain, cfg), std::invalid_argument);
    CHECK_THROWS_AS(
        simulate_marked_ratio(chain, std::vector<double>{0.5}, SimConfig{}),
        std::invalid_argument);
    CHECK_THROWS_AS(
        simulate_marked_ratio(chain, std::vector<double>{0.5, 1.5}, SimConfig{}),
        std::invalid_argument);
}

TEST_CASE("fixed initial state is honored deterministically") {
    const auto chain = build_mmsk({2, 3, 1.0});
    SimConfig cfg;
    cfg.master_seed = 17;
    cfg.warmup_time = 0.0;
    cfg.batch_count = 20;
    cfg.batch_length = 50.0;
    cfg.replications = 2;
    cfg.initial_state = 0;
    const auto a = simulate_ratio(chain, cfg);
    const auto b = simulate_ratio(chain, cfg);
    CHECK(a.ratio_estimate == b.ratio_estimate);
    cfg.initial_state = chain.num_states_above_zero();
    const auto c = simulate_ratio(chain, cfg);
    CHECK(a.ratio_estimate != c.ratio_estimate);
}
