#pragma once

#include "ugks/error.hpp"
#include "ugks/mesh.hpp"
#include "ugks/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace ugks {

/// Cell-averaged distribution f[i][k] (row-major, one row per cell) and the
/// density rho[i]. Steppers keep rho equal to the discrete average of each
/// row; they never recompute it lazily.
struct KineticState {
    std::size_t n_cells = 0;
    std::size_t n_nodes = 0;
    std::vector<double> f;
    std::vector<double> rho;
    double t = 0.0;

    KineticState() = default;
    KineticState(std::size_t cells, std::size_t nodes)
        : n_cells(cells), n_nodes(nodes), f(cells * nodes, 0.0), rho(cells, 0.0) {}

    std::span<double> cell(std::size_t i) { return {f.data() + i * n_nodes, n_nodes}; }
    std::span<const double> cell(std::size_t i) const { return {f.data() + i * n_nodes, n_nodes}; }
    double& at(std::size_t i, std::size_t k) { return f[i * n_nodes + k]; }
    double at(std::size_t i, std::size_t k) const { return f[i * n_nodes + k]; }

    bool all_finite() const {
        for (double x : f)
            if (!std::isfinite(x)) return false;
        for (double x : rho)
            if (!std::isfinite(x)) return false;
        return std::isfinite(t);
    }
};

/// Sample f0(x, v) at cell centers and nodes; rho is the discrete average.
template <class F0>
KineticState make_state(const SpatialMesh& mesh, const VelocityQuadrature& q, F0&& f0, double t0 = 0.0) {
    KineticState s(mesh.n_cells(), q.size());
    s.t = t0;
    for (std::size_t i = 0; i < s.n_cells; ++i) {
        const double x = mesh.center(i);
        for (std::size_t k = 0; k < s.n_nodes; ++k) s.at(i, k) = f0(x, q.node(k));
        s.rho[i] = average(q, s.cell(i));
    }
    if (!s.all_finite()) throw InvalidData("initial condition is not finite");
    return s;
}

/// Largest |rho_i - <f_i>_h| / (1 + |rho_i|) over the cells.
inline double moment_defect(const KineticState& s, const VelocityQuadrature& q) {
    double worst = 0.0;
    for (std::size_t i = 0; i < s.n_cells; ++i) {
        const double d = std::abs(s.rho[i] - average(q, s.cell(i))) / (1.0 + std::abs(s.rho[i]));
        worst = std::max(worst, d);
    }
    return worst;
}

}  // namespace ugks
