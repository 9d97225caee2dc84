#pragma once

// Independent GP posterior oracle for the surrogate checks: dense
// Gaussian-elimination solves of (K + noise2 I), no Cholesky anywhere, kept
// apart from the implementation it verifies.

#include <cmath>
#include <utility>
#include <vector>

#include "surrogate.hpp"

namespace mtbo_oracle {

using mtbo::GpKernel;
using mtbo::Vec;

inline Vec solve_dense(std::vector<double> a, Vec b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::fabs(a[r * n + col]) > std::fabs(a[piv * n + col])) piv = r;
        if (piv != col) {
            for (std::size_t c = 0; c < n; ++c) std::swap(a[piv * n + c], a[col * n + c]);
            std::swap(b[piv], b[col]);
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a[r * n + col] / a[col * n + col];
            if (f == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
            b[r] -= f * b[col];
        }
    }
    Vec x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i * n + i];
    return x;
}

/// Posterior (mean, std) in the standardized target space.
inline std::pair<double, double> dense_posterior(const std::vector<Vec>& xs, const Vec& ys_std,
                                                 const GpKernel& kernel, const Vec& x) {
    const std::size_t n = xs.size();
    std::vector<double> gram(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            gram[i * n + j] = mtbo::matern52(xs[i], xs[j], kernel) +
                              (i == j ? kernel.noise2 : 0.0);
    const Vec alpha = solve_dense(gram, ys_std);

    Vec kstar(n);
    for (std::size_t i = 0; i < n; ++i) kstar[i] = mtbo::matern52(x, xs[i], kernel);
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += kstar[i] * alpha[i];

    const Vec w = solve_dense(gram, kstar);
    double quad = 0.0;
    for (std::size_t i = 0; i < n; ++i) quad += kstar[i] * w[i];
    const double var = std::max(mtbo::matern52(x, x, kernel) - quad, 0.0);
    return {mean, std::sqrt(var)};
}

}  // namespace mtbo_oracle
