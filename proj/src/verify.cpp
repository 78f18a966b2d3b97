#include "bravo/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "bravo/birth_death.hpp"
#include "bravo/csv.hpp"
#include "bravo/philox.hpp"
#include "bravo/qed_limits.hpp"
#include "bravo/simulator.hpp"
#include "bravo/special_functions.hpp"

namespace bravo::verify {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof buf, format, args);
    va_end(args);
    return buf;
}

class Suite {
  public:
    void check(const std::string& id, const std::function<CheckResult()>& body) {
        CheckResult r;
        r.id = id;
        try {
            r = body();
            r.id = id;
        } catch (const std::exception& e) {
            r.passed = false;
            r.detail = std::string("exception: ") + e.what();
        }
        results.push_back(std::move(r));
    }
    std::vector<CheckResult> results;
};

BirthDeathChain random_constant_birth_chain(RngStream& rng) {
    const int J = 1 + static_cast<int>(rng.next_u64() % 200);
    const double lambda = 0.1 + 9.9 * rng.next_uniform();
    std::vector<double> births(static_cast<std::size_t>(J), lambda);
    std::vector<double> deaths(static_cast<std::size_t>(J));
    for (double& mu : deaths) mu = 0.1 + 9.9 * rng.next_uniform();
    return BirthDeathChain(std::move(births), std::move(deaths));
}

}  // namespace

std::vector<CheckResult> run_checks(Level level, int threads) {
    Suite suite;
    QuadratureConfig quad;  // defaults: 1e-10 tolerances

    suite.check("01-formula-equivalence", [] {
        const auto t0 = Clock::now();
        RngStream rng(3, 0, 0);
        double worst = 0.0;
        for (int n = 0; n < 200; ++n) {
            const auto chain = random_constant_birth_chain(rng);
            worst = std::max(worst,
                             std::abs(d_pi(chain) - d_pi_constant_birth(chain)));
        }
        const double secs = seconds_since(t0);
        CheckResult r;
        r.passed = worst <= 1e-10 && secs < 5.0;
        r.detail = fmt("max |general - constant-birth| = %.3g (<= 1e-10) over 200 "
                       "random chains in %.2f s",
                       worst, secs);
        return r;
    });

    suite.check("02-renewal-closed-case", [] {
        const BirthDeathChain chain({1.0}, {1.0});
        const double d = d_pi(chain);
        CheckResult r;
        r.passed = std::abs(d - 0.5) <= 1e-12;
        r.detail = fmt("two-state chain: D = %.15g (renewal Exp+Exp gives 1/2)", d);
        return r;
    });

    suite.check("03-mm1k-critical-limit", [] {
        const double d = d_pi(build_mmsk({1, 2000, 1.0}));
        CheckResult r;
        r.passed = d >= 0.656 && d <= 0.676;
        r.detail = fmt("single server, K = 2000, rho = 1: D = %.6f in [0.656, 0.676]", d);
        return r;
    });

    suite.check("04-critical-eta0-identity", [] {
        const double lhs = d0(0.0);
        const double rhs = 1.0 - 4.0 * (1.0 - std::log(2.0)) / kPi;
        CheckResult r;
        r.passed = std::abs(lhs - rhs) <= 1e-12;
        r.detail = fmt("2/3 - L(0) = %.15g vs 1 - 4(1-log2)/pi = %.15g, diff %.2g",
                       lhs, rhs, lhs - rhs);
        return r;
    });

    suite.check("05-minimum-location", [] {
        const auto es = eta_star();
        CheckResult r;
        r.passed = std::abs(es.argmin_numeric - es.argmin) <= 1e-6 &&
                   std::abs(es.min_value - 0.6018) <= 5e-4;
        r.detail = fmt("argmin closed %.9f vs numeric %.9f (diff %.2g); min %.6f "
                       "(0.6018 +- 5e-4)",
                       es.argmin, es.argmin_numeric, es.argmin - es.argmin_numeric,
                       es.min_value);
        return r;
    });

    suite.check("06-range-property", [] {
        double lo = 1.0, hi = 0.0;
        for (int i = 0; i <= 10000; ++i) {
            const double v = d0(i * 0.01);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        CheckResult r;
        r.passed = lo > 0.6 && hi <= 2.0 / 3.0;
        r.detail = fmt("d0 over eta in [0,100]: range [%.6f, %.6f] inside (0.6, 2/3]",
                       lo, hi);
        return r;
    });

    suite.check("07-i-plus", [&quad] {
        const auto ip = i_plus(quad);
        // frozen from the quadrature oracle at tolerance 1e-12; agrees with
        // the closed form (1 - log sqrt 2)/sqrt(2 pi)
        const double frozen = 0.260679421968228;
        CheckResult r;
        r.passed = std::abs(ip.quadrature - ip.closed_form) <= 1e-9 &&
                   std::abs(ip.quadrature - frozen) <= 1e-7;
        r.detail = fmt("quadrature %.12f = (1-log sqrt2)/sqrt(2pi) %.12f (diff %.2g); "
                       "scaled variant sqrt(2pi)(1-log sqrt2) = %.4f exceeds the "
                       "domination bound %.4f and is flagged inconsistent",
                       ip.quadrature, ip.closed_form, ip.quadrature - ip.closed_form,
                       ip.printed_form, kInvSqrt2Pi);
        return r;
    });

    suite.check("08-j-beta-cross-checks", [&quad] {
        double worst = 0.0;
        for (const double beta : {0.5, 1.0, 2.0, -0.5, -1.0}) {
            const auto j = j_beta(beta, quad);
            worst = std::max(worst, std::abs(j.direct - j.semi_closed));
        }
        const double j0 = j_beta(0.0, quad).direct;
        const double j0_closed = std::log(std::sqrt(2.0)) / kSqrt2Pi;
        CheckResult r;
        r.passed = worst <= 1e-8 && std::abs(j0 - j0_closed) <= 1e-9;
        r.detail = fmt("max |direct - semi-closed| = %.3g over beta in "
                       "{+-0.5, +-1, 2}; J(0) = %.12f vs log(sqrt2)/sqrt(2pi) = %.12f",
                       worst, j0, j0_closed);
        return r;
    });

    suite.check("09-finite-s-convergence", [&quad] {
        const auto t0 = Clock::now();
        struct Case { double eta, beta; };
        bool ok = true;
        std::string note;
        for (const Case c : {Case{1.0, 1.0}, Case{1.0, -1.0}, Case{2.0, 0.5}}) {
            const double limit = d_beta_eta(c.eta, c.beta, quad).ratio;
            double err[2];
            const int sizes[2] = {100, 10000};
            for (int k = 0; k < 2; ++k) {
                const int s = sizes[k];
                const double root = std::sqrt(static_cast<double>(s));
                const auto chain = build_mmsk(
                    {s, static_cast<int>(std::ceil(c.eta * root)), 1.0 - c.beta / root});
                err[k] = std::abs(d_pi(chain) - limit);
            }
            ok = ok && err[1] <= 0.02 && err[1] < err[0];
            note += fmt("(eta=%g,beta=%g): err 1e2=%.4f 1e4=%.4f; ", c.eta, c.beta,
                        err[0], err[1]);
        }
        const double secs = seconds_since(t0);
        ok = ok && secs < 30.0;
        CheckResult r;
        r.passed = ok;
        r.detail = note + fmt("(%.1f s)", secs);
        return r;
    });

    suite.check("10-branch-continuity", [&quad] {
        double worst = 0.0;
        for (const double eta : {0.5, 1.0, 2.0}) {
            const double base = d0(eta);
            worst = std::max(worst,
                             std::abs(d_beta_eta(eta, 1e-3, quad).ratio - base));
            worst = std::max(worst,
                             std::abs(d_beta_eta(eta, -1e-3, quad).ratio - base));
        }
        CheckResult r;
        r.passed = worst <= 1e-2;
        r.detail = fmt("max |D(eta, +-1e-3) - d0(eta)| = %.2g (<= 1e-2)", worst);
        return r;
    });

    suite.check("11-tail-behavior", [&quad] {
        const double p6 = d_beta_eta(1.0, 6.0, quad).ratio;
        const double p4 = d_beta_eta(1.0, 4.0, quad).ratio;
        const double m6 = d_beta_eta(1.0, -6.0, quad).ratio;
        const double m4 = d_beta_eta(1.0, -4.0, quad).ratio;
        CheckResult r;
        r.passed = p6 >= 0.95 && m6 >= 0.95 && p6 > p4 && m6 > m4;
        r.detail = fmt("D(1,+6)=%.6f > D(1,+4)=%.6f; D(1,-6)=%.6f > D(1,-4)=%.6f; "
                       "both >= 0.95",
                       p6, p4, m6, m4);
        return r;
    });

    suite.check("12-global-lower-bound", [&quad] {
        double lowest = 1.0;
        double at_beta = 0.0, at_eta = 0.0;
        for (int bi = 0; bi <= 48; ++bi) {
            const double beta = -6.0 + 0.25 * bi;
            for (const double eta : {0.25, 0.5, 1.0, 2.0, 4.0}) {
                const double v = d_beta_eta(eta, beta, quad).ratio;
                if (v < lowest) {
                    lowest = v;
                    at_beta = beta;
                    at_eta = eta;
                }
            }
        }
        CheckResult r;
        r.passed = lowest >= 0.5 - 1e-9;
        r.detail = fmt("grid min D = %.6f at (beta=%.2f, eta=%.2f), bound 1/2", lowest,
                       at_beta, at_eta);
        return r;
    });

    suite.check("13-delay-probability", [] {
        const auto chain = build_mmsk({10000, 100, 0.99});
        const auto dist = stationary(chain);
        double finite = 0.0;
        for (std::size_t i = 10000; i < dist.probabilities.size(); ++i) {
            finite += dist.probabilities[i];
        }
        const double limit = delay_prob_limit(1.0, 1.0);
        const double small_beta = delay_prob_limit(1.0, 1e-6);
        const double critical = 1.0 / (1.0 + std::sqrt(kPi / 2.0));
        CheckResult r;
        r.passed = std::abs(finite - limit) <= 0.02 &&
                   std::abs(small_beta - critical) <= 1e-3;
        r.detail = fmt("finite-s %.5f vs limit %.5f (diff %.4f); beta=1e-6 gives "
                       "%.7f vs eta/(eta+sqrt(pi/2)) = %.7f",
                       finite, limit, finite - limit, small_beta, critical);
        return r;
    });

    if (level == Level::full) {
        suite.check("14-simulation-cross-validation", [threads] {
            const auto t0 = Clock::now();
            const auto c57 = build_mmsk({5, 7, 1.0});
            const double exact = d_pi(c57);
            SimConfig cfg;
            cfg.master_seed = 20240801;
            cfg.warmup_time = 200.0;
            cfg.batch_count = 150;
            cfg.batch_length = 400.0;
            cfg.replications = 30;
            cfg.threads = threads;
            const auto est = simulate_ratio(c57, cfg);
            const double dev = std::abs(est.ratio_estimate - exact);
            const bool plain_ok = dev <= 3.0 * est.standard_error &&
                                  est.total_departures >= 2000000 && !est.low_quality;

            const auto c13 = build_mmsk({1, 2, 1.0});
            const std::vector<double> q{1.0, 1.0, 0.0};
            const double marked_exact = d_pi_marked(c13, q).value;
            SimConfig mcfg = cfg;
            mcfg.batch_length = 1000.0;
            const auto mest = simulate_marked_ratio(c13, q, mcfg);
            const double mdev = std::abs(mest.ratio_estimate - marked_exact);
            const bool marked_ok = mdev <= 3.0 * mest.standard_error &&
                                   mest.total_departures >= 2000000 && !mest.low_quality;

            const double secs = seconds_since(t0);
            CheckResult r;
            r.passed = plain_ok && marked_ok && secs < 60.0;
            r.detail = fmt("5-server: sim %.5f vs exact %.5f (%.2f se, %llu dep); "
                           "marked q=(1,1,0): sim %.5f vs formula %.5f (%.2f se, "
                           "%llu dep); %.1f s",
                           est.ratio_estimate, exact, dev / est.standard_error,
                           static_cast<unsigned long long>(est.total_departures),
                           mest.ratio_estimate, marked_exact,
                           mdev / mest.standard_error,
                           static_cast<unsigned long long>(mest.total_departures),
                           secs);
            return r;
        });
    }

    suite.check("15a-berry-esseen-bound", [] {
        const double bound = 0.8 * (1.0 + 2.0 / std::exp(1.0));
        const auto r100 = poisson_asymptotics_report(100);
        const auto r10k = poisson_asymptotics_report(10000);
        CheckResult r;
        r.passed = r100.scaled_dev <= bound && r10k.scaled_dev <= bound;
        r.detail = fmt("sqrt(s) * sup deviation: %.5f (s=1e2), %.5f (s=1e4), bound "
                       "0.8(1+2/e) = %.5f",
                       r100.scaled_dev, r10k.scaled_dev, bound);
        return r;
    });

    suite.check("15b-local-clt-decay", [] {
        const auto r100 = poisson_asymptotics_report(100);
        const auto r10k = poisson_asymptotics_report(10000);
        CheckResult r;
        r.passed = r10k.local_clt_max_rel_err < r100.local_clt_max_rel_err;
        // The windowed maximum sits at the window edge i ~ s^(5/8), where the
        // cubic correction i^3/(6 s^2) ~ s^(-1/8)/6 shrinks so slowly that
        // between s = 1e2 (window 17, max at interior i = 10) and s = 1e4
        // (window 316, max at the edge) the measured value creeps up:
        // 0.03566 -> 0.03669. It does decay again for larger s (0.0265 at
        // s = 1e6). Documented expected failure.
        r.expected_fail = true;
        r.detail = fmt("windowed local-CLT max rel err: %.6f (s=1e2) -> %.6f "
                       "(s=1e4); not monotone between these two sizes",
                       r100.local_clt_max_rel_err, r10k.local_clt_max_rel_err);
        return r;
    });

    suite.check("15c-psi-mean-decay", [] {
        const auto r100 = poisson_asymptotics_report(100);
        const auto r10k = poisson_asymptotics_report(10000);
        CheckResult r;
        r.passed = std::abs(r10k.psi_mean) < std::abs(r100.psi_mean);
        r.detail = fmt("|psi_mean|: %.6f (s=1e2) -> %.6f (s=1e4)",
                       std::abs(r100.psi_mean), std::abs(r10k.psi_mean));
        return r;
    });

    if (level == Level::full) {
        suite.check("16-determinism", [threads] {
            const auto chain = build_mmsk({5, 7, 1.0});
            SimConfig cfg;
            cfg.master_seed = 13;
            cfg.warmup_time = 50.0;
            cfg.batch_count = 30;
            cfg.batch_length = 50.0;
            cfg.replications = 8;
            cfg.threads = 1;
            const std::string serial = sim_estimate_csv_row(simulate_ratio(chain, cfg));
            cfg.threads = std::max(4, threads);
            const std::string parallel = sim_estimate_csv_row(simulate_ratio(chain, cfg));
            cfg.threads = 1;
            const std::string repeat = sim_estimate_csv_row(simulate_ratio(chain, cfg));
            CheckResult r;
            r.passed = serial == parallel && serial == repeat;
            r.detail = r.passed
                           ? "1-thread, " + std::to_string(std::max(4, threads)) +
                                 "-thread and repeated runs byte-identical: " + serial
                           : "outputs differ: [" + serial + "] vs [" + parallel +
                                 "] vs [" + repeat + "]";
            return r;
        });
    }

    return suite.results;
}

bool all_ok(const std::vector<CheckResult>& results) {
    for (const auto& r : results) {
        const bool acceptable = r.expected_fail ? !r.passed : r.passed;
        if (!acceptable) return false;
    }
    return true;
}

std::string format_report(const std::vector<CheckResult>& results) {
    std::string out;
    for (const auto& r : results) {
        const char* tag;
        if (r.passed) {
            tag = r.expected_fail ? "UPASS" : "PASS ";
        } else {
            tag = r.expected_fail ? "XFAIL" : "FAIL ";
        }
        out += fmt("%s %-32s %s\n", tag, r.id.c_str(), r.detail.c_str());
    }
    int passed = 0, xfailed = 0, failed = 0;
    for (const auto& r : results) {
        if (r.passed && !r.expected_fail) ++passed;
        else if (!r.passed && r.expected_fail) ++xfailed;
        else ++failed;
    }
    out += fmt("%d passed, %d expected-fail, %d failed\n", passed, xfailed, failed);
    return out;
}

}  // namespace bravo::verify
