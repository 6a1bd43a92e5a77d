#pragma once

/**
 * @file io.hpp
 * @brief CSV encodings of experiment outputs.  Floats are written with 17
 * significant digits so they round-trip exactly.
 */

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "rauzy/returns.hpp"
#include "rauzy/statistics.hpp"

namespace rauzy {

[[nodiscard]] inline std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline void write_correlations_csv(std::ostream& os, const std::vector<CorrelationPoint>& series) {
    os << "n,corr,stderr,samples\n";
    for (const auto& p : series)
        os << p.n << ',' << format_double(p.corr) << ',' << format_double(p.stderr) << ',' << p.samples << '\n';
}

inline void write_returns_csv(std::ostream& os, const std::vector<ReturnRecord>& records) {
    os << "idx,n_q,eta,tau,len_w,lognorm\n";
    for (const auto& r : records)
        os << r.idx << ',' << r.n_q << ',' << format_double(r.eta) << ',' << format_double(r.tau) << ',' << r.len_w
           << ',' << format_double(r.lognorm) << '\n';
}

inline void write_survival_csv(std::ostream& os, const std::vector<SurvivalPoint>& table) {
    os << "N,survivors,total\n";
    for (const auto& p : table) os << p.N << ',' << p.survivors << ',' << p.total << '\n';
}

}  // namespace rauzy
