#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include "bravo/simulator.hpp"

namespace bravo {

// All text output prints floating values with 12 significant digits, so equal
// doubles always give equal bytes.
inline std::string format_g12(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline std::string csv_join(const std::vector<std::string>& fields) {
    std::string row;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) row += ',';
        row += fields[i];
    }
    return row;
}

inline std::string sim_estimate_csv_header() {
    return "ratio,standard_error,ci_lo,ci_hi,departures,rate,seed,replications,"
           "low_quality";
}

inline std::string sim_estimate_csv_row(const SimEstimate& e) {
    return csv_join({format_g12(e.ratio_estimate), format_g12(e.standard_error),
                     format_g12(e.ci95.first), format_g12(e.ci95.second),
                     std::to_string(e.total_departures),
                     format_g12(e.mean_rate_estimate),
                     std::to_string(e.seed_provenance.master_seed),
                     std::to_string(e.seed_provenance.replications),
                     e.low_quality ? "1" : "0"});
}

}  // namespace bravo
