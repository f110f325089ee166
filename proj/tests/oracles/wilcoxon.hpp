#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace oracle {

// Enumerates every sign assignment of the average ranks of |d| (zeros
// dropped) and counts those with W+ at least the observed value. Ranks are
// doubled so all comparisons are on integers.
inline double brute_force_p(const std::vector<double>& d) {
    std::vector<double> nz;
    for (double v : d)
        if (v != 0.0) nz.push_back(v);
    const std::size_t n = nz.size();
    std::vector<long> rank2(n);
    for (std::size_t i = 0; i < n; ++i) {
        long less = 0, equal = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (std::abs(nz[j]) < std::abs(nz[i])) ++less;
            if (std::abs(nz[j]) == std::abs(nz[i])) ++equal;
        }
        // average of ranks less+1 .. less+equal, doubled
        rank2[i] = 2 * less + equal + 1;
    }
    long observed = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (nz[i] > 0) observed += rank2[i];
    std::uint64_t count = 0;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
        long w = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (mask >> i & 1) w += rank2[i];
        if (w >= observed) ++count;
    }
    return static_cast<double>(count) / static_cast<double>(std::uint64_t{1} << n);
}

}  // namespace oracle
