#pragma once
// Small numerical helpers for test oracles, kept independent of the library quadrature.

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

namespace testsupport {

using cplx = std::complex<double>;

// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
    std::vector<double> x(n), w(n);
    for (int i = 0; i < n; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1, p1 = z;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1;
            dp = n * (z * p1 - p0) / (z * z - 1);
            double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        x[i] = z;
        w[i] = 2 / ((1 - z * z) * dp * dp);
    }
    return {x, w};
}

template <class F>
auto gl_integrate(F f, double a, double b, int n = 20) {
    static thread_local std::vector<std::pair<std::vector<double>, std::vector<double>>> cache(80);
    if (cache[n].first.empty()) cache[n] = gauss_legendre(n);
    const auto& [x, w] = cache[n];
    double h = (b - a) / 2, m = (a + b) / 2;
    decltype(f(a)) s{};
    for (int i = 0; i < n; ++i) s += w[i] * f(m + h * x[i]);
    return s * h;
}

// Composite Gauss-Legendre over [a, b] split into `cells` pieces.
template <class F>
auto gl_composite(F f, double a, double b, int cells, int n = 20) {
    decltype(f(a)) s{};
    double h = (b - a) / cells;
    for (int c = 0; c < cells; ++c) s += gl_integrate(f, a + c * h, a + (c + 1) * h, n);
    return s;
}

inline double rel_err(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace testsupport
