#include "bravo/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "bravo/birth_death.hpp"
#include "bravo/csv.hpp"
#include "bravo/parallel.hpp"
#include "bravo/qed_limits.hpp"
#include "bravo/simulator.hpp"
#include "bravo/special_functions.hpp"
#include "bravo/verify.hpp"

namespace bravo::cli {

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitBadInput = 2;
constexpr int kExitIo = 3;

int thread_budget(int requested) {
    int n = requested > 0 ? requested
                          : static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    if (const char* env = std::getenv("BRAVO_THREADS")) {
        const int cap = std::atoi(env);
        if (cap >= 1) n = std::min(n, cap);
    }
    return n;
}

// Accepts "a,b,c" or "lo:hi:step" (inclusive endpoints, within half a step).
std::vector<double> parse_values(const std::string& text) {
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
        double lo, hi, step;
        char c1, c2;
        std::istringstream in(text);
        if (!(in >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':' ||
            !(step > 0.0)) {
            throw std::invalid_argument("bad range '" + text + "', want lo:hi:step");
        }
        const int n = static_cast<int>(std::floor((hi - lo) / step + 0.5));
        for (int i = 0; i <= n; ++i) out.push_back(lo + i * step);
        return out;
    }
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (!item.empty()) out.push_back(std::stod(item));
    }
    if (out.empty()) throw std::invalid_argument("empty value list '" + text + "'");
    return out;
}

void print_kv(std::ostream& os, const char* key, const std::string& value) {
    os << key;
    for (std::size_t i = std::strlen(key); i < 18; ++i) os << ' ';
    os << value << "\n";
}

json nan_safe(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

// ---- exact ------------------------------------------------------------

struct ExactRecord {
    int s, k;
    double rho;
    int J;
    double pi_top, departure_rate, ratio, lower_bound;
};

ExactRecord evaluate_exact(int s, int k, double rho) {
    const auto chain = build_mmsk({s, k, rho});
    const auto dist = stationary(chain);
    const auto stats = output_stats(chain, dist);
    ExactRecord rec;
    rec.s = s;
    rec.k = k;
    rec.rho = rho;
    rec.J = chain.num_states_above_zero();
    rec.pi_top = dist.probabilities.back();
    rec.departure_rate = stats.departure_rate;
    rec.ratio = d_pi_constant_birth(chain);
    rec.lower_bound = d_pi_lower_bound(dist);
    return rec;
}

const char* kExactCsvHeader = "s,k,rho,J,pi_J,departure_rate,d_pi,lower_bound";

std::string exact_csv_row(const ExactRecord& r) {
    return csv_join({std::to_string(r.s), std::to_string(r.k), format_g12(r.rho),
                     std::to_string(r.J), format_g12(r.pi_top),
                     format_g12(r.departure_rate), format_g12(r.ratio),
                     format_g12(r.lower_bound)});
}

json exact_json(const ExactRecord& r) {
    return json{{"s", r.s},
                {"k", r.k},
                {"rho", r.rho},
                {"J", r.J},
                {"pi_J", r.pi_top},
                {"departure_rate", r.departure_rate},
                {"d_pi", r.ratio},
                {"lower_bound", r.lower_bound}};
}

// ---- qed --------------------------------------------------------------

const char* kQedCsvHeader = "beta,eta,branch,h,f,g,d,delay_prob_limit";

std::string qed_csv_row(const QedEvaluation& ev, double delay) {
    const bool critical = ev.branch == QedBranch::critical;
    return csv_join({format_g12(ev.params.beta), format_g12(ev.params.eta),
                     critical ? "critical" : "noncritical",
                     critical ? "" : format_g12(ev.h_value),
                     critical ? "" : format_g12(ev.f_value),
                     critical ? "" : format_g12(ev.g_value), format_g12(ev.ratio),
                     format_g12(delay)});
}

json qed_json(const QedEvaluation& ev, double delay) {
    return json{{"beta", ev.params.beta},
                {"eta", ev.params.eta},
                {"branch", ev.branch == QedBranch::critical ? "critical" : "noncritical"},
                {"h", nan_safe(ev.h_value)},
                {"f", nan_safe(ev.f_value)},
                {"g", nan_safe(ev.g_value)},
                {"d", ev.ratio},
                {"delay_prob_limit", delay}};
}

// ---- output sinks -------------------------------------------------------

// Writes to the path, or to stdout when the path is empty. I/O failures map
// to exit code 3.
int write_text(const std::string& path, const std::string& body) {
    if (path.empty()) {
        std::cout << body;
        return kExitOk;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        std::cerr << "error: cannot open '" << path << "' for writing\n";
        return kExitIo;
    }
    out << body;
    out.flush();
    if (!out) {
        std::cerr << "error: short write to '" << path << "'\n";
        return kExitIo;
    }
    return kExitOk;
}

// ---- subcommand state ---------------------------------------------------

struct Options {
    // exact / simulate grid
    std::string s_text, k_text, rho_text;
    // qed grid
    std::string beta_text, eta_text;
    // single-point exact/qed
    int s = 0, k = 0;
    double rho = 0.0, beta = 0.0, eta = 0.0;
    // sweep
    std::string mode;
    std::string output_path;
    // simulate
    std::uint64_t seed = 0;
    double warmup = -1.0;
    double batch_length = -1.0;
    int batches = 32;
    int replications = 4;
    std::string initial = "stationary";
    std::string q_text;
    // shared
    std::string format = "text";
    bool quiet = false;
    int threads = 0;
    std::string level = "fast";
    std::string which = "all";
    std::string output_dir = ".";
    double abs_tol = 1e-10, rel_tol = 1e-10;
};

QuadratureConfig quad_config(const Options& opt) {
    QuadratureConfig qc;
    qc.abs_tol = opt.abs_tol;
    qc.rel_tol = opt.rel_tol;
    return qc;
}

int cmd_exact(const Options& opt) {
    const ExactRecord rec = evaluate_exact(opt.s, opt.k, opt.rho);
    if (opt.format == "csv") {
        std::cout << kExactCsvHeader << "\n" << exact_csv_row(rec) << "\n";
    } else if (opt.format == "json") {
        std::cout << exact_json(rec).dump(2) << "\n";
    } else if (opt.quiet) {
        std::cout << format_g12(rec.ratio) << "\n";
    } else {
        print_kv(std::cout, "J", std::to_string(rec.J));
        print_kv(std::cout, "pi_J", format_g12(rec.pi_top));
        print_kv(std::cout, "departure_rate", format_g12(rec.departure_rate));
        print_kv(std::cout, "d_pi", format_g12(rec.ratio));
        print_kv(std::cout, "lower_bound", format_g12(rec.lower_bound));
    }
    return kExitOk;
}

int cmd_qed(const Options& opt) {
    const auto ev = d_beta_eta(opt.eta, opt.beta, quad_config(opt));
    const double delay = delay_prob_limit(opt.eta, opt.beta);
    if (opt.format == "csv") {
        std::cout << kQedCsvHeader << "\n" << qed_csv_row(ev, delay) << "\n";
    } else if (opt.format == "json") {
        std::cout << qed_json(ev, delay).dump(2) << "\n";
    } else if (opt.quiet) {
        std::cout << format_g12(ev.ratio) << "\n";
    } else {
        const bool critical = ev.branch == QedBranch::critical;
        print_kv(std::cout, "branch", critical ? "critical" : "noncritical");
        if (!critical) {
            print_kv(std::cout, "h", format_g12(ev.h_value));
            print_kv(std::cout, "f", format_g12(ev.f_value));
            print_kv(std::cout, "g", format_g12(ev.g_value));
        }
        print_kv(std::cout, "d", format_g12(ev.ratio));
        print_kv(std::cout, "delay_prob_limit", format_g12(delay));
    }
    return kExitOk;
}

SimConfig sim_config(const Options& opt) {
    SimConfig cfg;
    cfg.master_seed = opt.seed;
    cfg.warmup_time = opt.warmup;
    cfg.batch_count = opt.batches;
    cfg.batch_length = opt.batch_length;
    cfg.replications = opt.replications;
    cfg.threads = thread_budget(opt.threads);
    if (opt.initial != "stationary") {
        cfg.initial_state = std::stoi(opt.initial);
    }
    return cfg;
}

int cmd_simulate(const Options& opt) {
    const auto chain = build_mmsk({opt.s, opt.k, opt.rho});
    const SimConfig cfg = sim_config(opt);
    SimEstimate est;
    bool experimental = false;
    if (!opt.q_text.empty()) {
        const auto q = parse_values(opt.q_text);
        est = simulate_marked_ratio(chain, q, cfg);
        experimental = true;
    } else {
        est = simulate_ratio(chain, cfg);
    }

    if (opt.format == "csv") {
        std::cout << sim_estimate_csv_header() << "\n"
                  << sim_estimate_csv_row(est) << "\n";
    } else if (opt.format == "json") {
        json j{{"ratio", nan_safe(est.ratio_estimate)},
               {"standard_error", nan_safe(est.standard_error)},
               {"ci95", {nan_safe(est.ci95.first), nan_safe(est.ci95.second)}},
               {"departures", est.total_departures},
               {"mean_rate", est.mean_rate_estimate},
               {"seed", est.seed_provenance.master_seed},
               {"replications", est.seed_provenance.replications},
               {"low_quality", est.low_quality},
               {"note", est.note}};
        if (experimental) j["experimental"] = true;
        std::cout << j.dump(2) << "\n";
    } else if (opt.quiet) {
        std::cout << format_g12(est.ratio_estimate) << "\n";
    } else {
        print_kv(std::cout, "ratio", format_g12(est.ratio_estimate));
        print_kv(std::cout, "standard_error", format_g12(est.standard_error));
        print_kv(std::cout, "ci95",
                 format_g12(est.ci95.first) + " .. " + format_g12(est.ci95.second));
        print_kv(std::cout, "departures", std::to_string(est.total_departures));
        print_kv(std::cout, "mean_rate", format_g12(est.mean_rate_estimate));
        print_kv(std::cout, "seed", std::to_string(est.seed_provenance.master_seed));
        if (experimental) print_kv(std::cout, "experimental", "true");
        if (est.low_quality) print_kv(std::cout, "low_quality", est.note);
    }
    return kExitOk;
}

int cmd_sweep(const Options& opt) {
    const int threads = thread_budget(opt.threads);
    std::vector<std::string> rows;
    std::string header;
    json items = json::array();

    if (opt.mode == "exact" || opt.mode == "simulate") {
        const auto ss = parse_values(opt.s_text);
        const auto ks = parse_values(opt.k_text);
        const auto rhos = parse_values(opt.rho_text);
        struct Point { int s, k; double rho; };
        std::vector<Point> grid;
        for (double s : ss)
            for (double k : ks)
                for (double rho : rhos)
                    grid.push_back({static_cast<int>(s), static_cast<int>(k), rho});
        if (grid.empty()) throw std::invalid_argument("empty sweep grid");

        if (opt.mode == "exact") {
            for (const Point& p : grid) {
                const double work = static_cast<double>(p.s) * (1.0 + p.k);
                if (work > 1e7) {
                    throw std::invalid_argument(
                        "exact sweep point too large: s*(1+K) must stay <= 1e7");
                }
            }
            header = kExactCsvHeader;
            std::vector<ExactRecord> recs(grid.size());
            parallel_for(grid.size(), threads, [&](std::size_t i) {
                recs[i] = evaluate_exact(grid[i].s, grid[i].k, grid[i].rho);
            });
            for (const auto& rec : recs) {
                rows.push_back(exact_csv_row(rec));
                items.push_back(exact_json(rec));
            }
        } else {
            header = std::string("s,k,rho,") + sim_estimate_csv_header();
            std::vector<SimEstimate> ests(grid.size());
            parallel_for(grid.size(), threads, [&](std::size_t i) {
                const auto chain = build_mmsk({grid[i].s, grid[i].k, grid[i].rho});
                SimConfig cfg;
                cfg.master_seed = opt.seed;
                cfg.warmup_time = opt.warmup;
                cfg.batch_count = opt.batches;
                cfg.batch_length = opt.batch_length;
                cfg.replications = opt.replications;
                cfg.threads = 1;  // grid points are the parallel unit
                ests[i] = simulate_ratio(chain, cfg);
            });
            for (std::size_t i = 0; i < grid.size(); ++i) {
                rows.push_back(csv_join({std::to_string(grid[i].s),
                                         std::to_string(grid[i].k),
                                         format_g12(grid[i].rho)}) +
                               "," + sim_estimate_csv_row(ests[i]));
                items.push_back(json{{"s", grid[i].s},
                                     {"k", grid[i].k},
                                     {"rho", grid[i].rho},
                                     {"ratio", nan_safe(ests[i].ratio_estimate)},
                                     {"standard_error", nan_safe(ests[i].standard_error)},
                                     {"departures", ests[i].total_departures},
                                     {"low_quality", ests[i].low_quality}});
            }
        }
    } else if (opt.mode == "qed") {
        const auto betas = parse_values(opt.beta_text);
        const auto etas = parse_values(opt.eta_text);
        struct Point { double beta, eta; };
        std::vector<Point> grid;
        for (double eta : etas)
            for (double beta : betas) grid.push_back({beta, eta});
        if (grid.empty()) throw std::invalid_argument("empty sweep grid");
        header = kQedCsvHeader;
        const QuadratureConfig qc = quad_config(opt);
        std::vector<QedEvaluation> evs(grid.size());
        std::vector<double> delays(grid.size());
        parallel_for(grid.size(), threads, [&](std::size_t i) {
            evs[i] = d_beta_eta(grid[i].eta, grid[i].beta, qc);
            delays[i] = delay_prob_limit(grid[i].eta, grid[i].beta);
        });
        for (std::size_t i = 0; i < grid.size(); ++i) {
            rows.push_back(qed_csv_row(evs[i], delays[i]));
            items.push_back(qed_json(evs[i], delays[i]));
        }
    } else {
        throw std::invalid_argument("sweep mode must be exact, qed or simulate");
    }

    std::string body;
    if (opt.format == "json") {
        body = items.dump(2) + "\n";
    } else {
        body = header + "\n";
        for (const auto& r : rows) body += r + "\n";
    }
    return write_text(opt.output_path, body);
}

int cmd_figures(const Options& opt) {
    const int threads = thread_budget(opt.threads);
    const QuadratureConfig qc = quad_config(opt);
    const std::string dir = opt.output_dir;
    int rc = kExitOk;

    const auto want = [&](const char* name) {
        return opt.which == "all" || opt.which == name;
    };

    if (want("fig1")) {
        // ratio at exact balance as the scaled buffer grows
        std::string body = "eta,d0\n";
        for (int i = 0; i <= 500; ++i) {
            const double eta = i * 0.01;
            body += csv_join({format_g12(eta), format_g12(d0(eta))}) + "\n";
        }
        rc = write_text(dir + "/fig1.csv", body);
        if (rc != kExitOk) return rc;
    }

    if (want("fig2")) {
        // ratio across the slack parameter for a few buffer scalings
        const std::vector<double> etas{0.5, 1.0, 2.0, 4.0};
        struct Point { double beta, eta; };
        std::vector<Point> grid;
        for (double eta : etas)
            for (int bi = -120; bi <= 120; ++bi) grid.push_back({bi * 0.05, eta});
        std::vector<double> values(grid.size());
        parallel_for(grid.size(), threads, [&](std::size_t i) {
            values[i] = d_beta_eta(grid[i].eta, grid[i].beta, qc).ratio;
        });
        std::string body = "beta,eta,d\n";
        for (std::size_t i = 0; i < grid.size(); ++i) {
            body += csv_join({format_g12(grid[i].beta), format_g12(grid[i].eta),
                              format_g12(values[i])}) +
                    "\n";
        }
        rc = write_text(dir + "/fig2.csv", body);
        if (rc != kExitOk) return rc;
    }

    if (want("fig3")) {
        // finite systems dipping toward the limit as s grows, buffer ~ sqrt(s)
        const std::vector<int> sizes{10, 100, 400};
        struct Point { int s; double rho; };
        std::vector<Point> grid;
        for (int s : sizes)
            for (int ri = 0; ri <= 100; ++ri) grid.push_back({s, 0.5 + ri * 0.01});
        std::vector<double> values(grid.size());
        parallel_for(grid.size(), threads, [&](std::size_t i) {
            const int s = grid[i].s;
            const int K = static_cast<int>(std::ceil(std::sqrt(s)));
            values[i] = d_pi_constant_birth(build_mmsk({s, K, grid[i].rho}));
        });
        std::string body = "rho,s,d_exact\n";
        for (std::size_t i = 0; i < grid.size(); ++i) {
            body += csv_join({format_g12(grid[i].rho), std::to_string(grid[i].s),
                              format_g12(values[i])}) +
                    "\n";
        }
        // limit marker at rho = 1, eta = 1
        body += csv_join({"1", "inf", format_g12(d0(1.0))}) + "\n";
        rc = write_text(dir + "/fig3.csv", body);
        if (rc != kExitOk) return rc;
    }

    if (!want("fig1") && !want("fig2") && !want("fig3")) {
        throw std::invalid_argument("unknown figure '" + opt.which + "'");
    }
    return rc;
}

int cmd_verify(const Options& opt) {
    const auto level =
        opt.level == "full" ? verify::Level::full : verify::Level::fast;
    const auto results = verify::run_checks(level, thread_budget(opt.threads));
    const bool ok = verify::all_ok(results);
    if (opt.format == "json") {
        json arr = json::array();
        for (const auto& r : results) {
            arr.push_back(json{{"id", r.id},
                               {"passed", r.passed},
                               {"expected_fail", r.expected_fail},
                               {"detail", r.detail}});
        }
        std::cout << arr.dump(2) << "\n";
    } else if (opt.format == "csv") {
        std::cout << "id,passed,expected_fail,detail\n";
        for (const auto& r : results) {
            std::string detail = r.detail;
            for (char& c : detail) {
                if (c == ',') c = ';';
            }
            std::cout << csv_join({r.id, r.passed ? "1" : "0",
                                   r.expected_fail ? "1" : "0", detail})
                      << "\n";
        }
    } else if (opt.quiet) {
        std::cout << (ok ? "ok" : "FAILED") << "\n";
    } else {
        std::cout << verify::format_report(results);
    }
    return ok ? kExitOk : kExitVerifyFailed;
}

}  // namespace

int run(int argc, char** argv) {
    Options opt;
    CLI::App app{"departure-count variance tools for finite birth-death queues"};
    app.require_subcommand(1);

    const auto add_format = [&](CLI::App* cmd) {
        cmd->add_option("--format", opt.format, "text, csv or json")
            ->check(CLI::IsMember({"text", "csv", "json"}));
        cmd->add_flag("--quiet", opt.quiet, "print only the headline value");
    };

    auto* exact = app.add_subcommand(
        "exact", "exact ratio for an M/M/s/K system");
    exact->add_option("-s,--s", opt.s, "servers")->required();
    exact->add_option("-k,--k", opt.k, "buffer size")->required();
    exact->add_option("-r,--rho", opt.rho, "traffic intensity")->required();
    add_format(exact);

    auto* qed = app.add_subcommand(
        "qed", "limiting ratio at scaled slack beta and scaled buffer eta");
    qed->add_option("-b,--beta", opt.beta, "scaled slack")->required();
    qed->add_option("-e,--eta", opt.eta, "scaled buffer (> 0; 0 allowed only at beta = 0)")
        ->required();
    qed->add_option("--abs-tol", opt.abs_tol, "quadrature absolute tolerance");
    qed->add_option("--rel-tol", opt.rel_tol, "quadrature relative tolerance");
    add_format(qed);

    auto* sweep = app.add_subcommand("sweep", "evaluate a parameter grid");
    sweep->add_option("--mode", opt.mode, "exact, qed or simulate")->required();
    sweep->add_option("--s", opt.s_text, "server counts: list or lo:hi:step");
    sweep->add_option("--k", opt.k_text, "buffer sizes: list or lo:hi:step");
    sweep->add_option("--rho", opt.rho_text, "traffic intensities");
    sweep->add_option("--beta", opt.beta_text, "scaled slacks");
    sweep->add_option("--eta", opt.eta_text, "scaled buffers");
    sweep->add_option("-o,--output", opt.output_path, "output file (default stdout)");
    sweep->add_option("--seed", opt.seed, "master seed (simulate mode)");
    sweep->add_option("--warmup", opt.warmup, "warmup time (simulate mode)");
    sweep->add_option("--batch-length", opt.batch_length, "batch length (simulate mode)");
    sweep->add_option("--batches", opt.batches, "batches per replication");
    sweep->add_option("--replications", opt.replications, "replications per point");
    sweep->add_option("--threads", opt.threads, "worker threads (BRAVO_THREADS caps)");
    sweep->add_option("--abs-tol", opt.abs_tol, "quadrature absolute tolerance");
    sweep->add_option("--rel-tol", opt.rel_tol, "quadrature relative tolerance");
    add_format(sweep);

    auto* simulate = app.add_subcommand(
        "simulate", "batch-means simulation estimate for an M/M/s/K system");
    simulate->add_option("-s,--s", opt.s, "servers")->required();
    simulate->add_option("-k,--k", opt.k, "buffer size")->required();
    simulate->add_option("-r,--rho", opt.rho, "traffic intensity")->required();
    simulate->add_option("--q", opt.q_text,
                         "per-state counting probabilities q_1..q_J (marked run, "
                         "experimental)");
    simulate->add_option("--seed", opt.seed, "master seed");
    simulate->add_option("--warmup", opt.warmup, "warmup time (< 0: auto)");
    simulate->add_option("--batch-length", opt.batch_length, "batch length (<= 0: auto)");
    simulate->add_option("--batches", opt.batches, "batches per replication (>= 20)");
    simulate->add_option("--replications", opt.replications, "independent replications");
    simulate->add_option("--initial", opt.initial, "initial state index or 'stationary'");
    simulate->add_option("--threads", opt.threads, "worker threads (BRAVO_THREADS caps)");
    add_format(simulate);

    auto* figures = app.add_subcommand("figures", "write figure data as CSV");
    figures->add_option("--which", opt.which, "fig1, fig2, fig3 or all")
        ->check(CLI::IsMember({"fig1", "fig2", "fig3", "all"}));
    figures->add_option("--output-dir", opt.output_dir, "directory for the CSV files");
    figures->add_option("--threads", opt.threads, "worker threads (BRAVO_THREADS caps)");

    auto* verify_cmd = app.add_subcommand("verify", "run the self-verification suite");
    verify_cmd->add_option("--level", opt.level, "fast (skip simulations) or full")
        ->check(CLI::IsMember({"fast", "full"}));
    verify_cmd->add_option("--threads", opt.threads, "worker threads (BRAVO_THREADS caps)");
    add_format(verify_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitBadInput;
    }

    try {
        if (exact->parsed()) return cmd_exact(opt);
        if (qed->parsed()) return cmd_qed(opt);
        if (sweep->parsed()) return cmd_sweep(opt);
        if (simulate->parsed()) return cmd_simulate(opt);
        if (figures->parsed()) return cmd_figures(opt);
        if (verify_cmd->parsed()) return cmd_verify(opt);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitVerifyFailed;
    }
    return kExitBadInput;
}

}  // namespace bravo::cli
