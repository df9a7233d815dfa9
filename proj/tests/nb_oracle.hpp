#pragma once

#include "relapse/classifiers/categorical.hpp"

#include <cstdint>
#include <span>

namespace relapse::testing {

/// Exact smoothed-posterior comparison (alpha = 1) in 128-bit integers:
/// relapse iff n1 * prod(c1 + 1) * (n0 + L)^F > n0 * prod(c0 + 1) * (n1 + L)^F.
inline int nb_oracle_label(const CategoricalMatrix& x, std::span<const int> y, std::span<const int> row,
                           int levels) {
    __int128 n[2] = {0, 0};
    for (int v : y) ++n[v ? 1 : 0];
    __int128 side[2] = {n[0], n[1]};
    for (std::size_t f = 0; f < x.cols(); ++f) {
        __int128 c[2] = {0, 0};
        for (std::size_t r = 0; r < x.rows(); ++r) {
            if (x.at(r, f) == row[f]) ++c[y[r] ? 1 : 0];
        }
        // Cross-multiplied denominators keep everything integral.
        side[1] *= (c[1] + 1) * (n[0] + levels);
        side[0] *= (c[0] + 1) * (n[1] + levels);
    }
    return side[1] > side[0] ? 1 : 0;
}

} // namespace relapse::testing
