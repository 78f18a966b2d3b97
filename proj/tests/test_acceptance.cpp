// Acceptance suite: one line per check, nonzero exit when anything is off.
// The same checks back `bravo verify`.

#include <cstdio>
#include <cstdlib>
#include <cstring>

#include "bravo/verify.hpp"

int main(int argc, char** argv) {
    int threads = 4;
    if (const char* env = std::getenv("BRAVO_THREADS")) {
        const int cap = std::atoi(env);
        if (cap >= 1 && cap < threads) threads = cap;
    }
    auto level = bravo::verify::Level::full;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--fast") == 0) level = bravo::verify::Level::fast;
    }

    const auto results = bravo::verify::run_checks(level, threads);
    std::fputs(bravo::verify::format_report(results).c_str(), stdout);
    return bravo::verify::all_ok(results) ? 0 : 1;
}
