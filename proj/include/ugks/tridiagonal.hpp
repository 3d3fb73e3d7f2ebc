#pragma once

#include "ugks/error.hpp"

#include <cmath>
#include <span>
#include <vector>

namespace ugks {

/// Row i reads lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i];
/// lower[0] and upper[n-1] are ignored.
struct TridiagonalSystem {
    std::vector<double> lower;
    std::vector<double> diag;
    std::vector<double> upper;
    std::vector<double> rhs;

    void resize(std::size_t n) {
        lower.assign(n, 0.0);
        diag.assign(n, 0.0);
        upper.assign(n, 0.0);
        rhs.assign(n, 0.0);
    }
    std::size_t size() const noexcept { return diag.size(); }
};

/// Thomas elimination without pivoting. Stable for diagonally dominant rows,
/// which every system assembled in this library is. `scratch` is resized.
inline void solve_tridiagonal(const TridiagonalSystem& sys, std::span<double> x, std::vector<double>& scratch) {
    const std::size_t n = sys.size();
    if (x.size() != n || sys.lower.size() != n || sys.upper.size() != n || sys.rhs.size() != n)
        throw InvalidArgument("tridiagonal system size mismatch");
    if (n == 0) return;
    scratch.resize(n);
    double pivot = sys.diag[0];
    if (pivot == 0.0 || !std::isfinite(pivot)) throw InvalidData("singular tridiagonal system");
    x[0] = sys.rhs[0] / pivot;
    for (std::size_t i = 1; i < n; ++i) {
        scratch[i] = sys.upper[i - 1] / pivot;
        pivot = sys.diag[i] - sys.lower[i] * scratch[i];
        if (pivot == 0.0 || !std::isfinite(pivot)) throw InvalidData("singular tridiagonal system");
        x[i] = (sys.rhs[i] - sys.lower[i] * x[i - 1]) / pivot;
    }
    for (std::size_t i = n - 1; i-- > 0;) x[i] -= scratch[i + 1] * x[i + 1];
}

inline std::vector<double> solve_tridiagonal(const TridiagonalSystem& sys) {
    std::vector<double> x(sys.size()), scratch;
    solve_tridiagonal(sys, x, scratch);
    return x;
}

}  // namespace ugks
