#pragma once

#include <string>
#include <vector>

namespace bravo::verify {

enum class Level { fast, full };

struct CheckResult {
    std::string id;
    bool passed = false;
    // Marks a check whose failure is a measured, documented property of the
    // quantities involved rather than an implementation defect. The suite
    // treats "failed as documented" as acceptable and an unexpected pass as
    // an error, so the record stays honest either way.
    bool expected_fail = false;
    std::string detail;
};

// Runs the self-verification suite. `fast` skips the simulation-backed
// checks; `full` runs everything.
std::vector<CheckResult> run_checks(Level level, int threads);

bool all_ok(const std::vector<CheckResult>& results);

std::string format_report(const std::vector<CheckResult>& results);

}  // namespace bravo::verify
