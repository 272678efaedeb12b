#ifndef ISOMONO_TEST_UTIL_HPP
#define ISOMONO_TEST_UTIL_HPP

#include "isomono/types.hpp"
#include <random>

namespace testutil {

// deterministic complex matrix with entries in the unit box
inline isomono::Matrix random_matrix(int n, unsigned seed, double scale = 1.0) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    isomono::Matrix M(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            M(i, j) = scale * isomono::Complex(dist(rng), dist(rng));
    return M;
}

inline double rel_err(const isomono::Matrix& got, const isomono::Matrix& want) {
    double den = std::max(1.0, isomono::max_abs(want));
    return isomono::max_abs(isomono::Matrix(got - want)) / den;
}

} // namespace testutil

#endif
