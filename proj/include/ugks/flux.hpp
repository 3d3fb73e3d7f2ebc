#pragma once

#include "ugks/coefficients.hpp"
#include "ugks/error.hpp"
#include "ugks/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <span>

namespace ugks {

/// One-sided density slopes on either side of an interface.
struct SlopePair {
    double left = 0;
    double right = 0;
};

/// Unique interface density <f_left 1_{v>0} + f_right 1_{v<0}>.
inline double interface_density(std::span<const double> f_left, std::span<const double> f_right,
                                 const VelocityQuadrature& q) {
    return q.average_pos(f_left) + q.average_neg(f_right);
}

/// Continuous piecewise-linear density reconstruction around an interface.
/// The caller picks the time level of rho_left / rho_right: t^n for explicit
/// diffusion, t^{n+1} for the implicit variant. rho_iface is always at t^n.
inline SlopePair slopes(double rho_iface, double rho_left, double rho_right, double dx) {
    const double half = 0.5 * dx;
    return {(rho_iface - rho_left) / half, (rho_right - rho_iface) / half};
}

/// Three-argument minmod: zero on sign disagreement, else the argument of
/// smallest magnitude.
inline double minmod(double a, double b, double c) {
    if (a > 0.0 && b > 0.0 && c > 0.0) return std::min({a, b, c});
    if (a < 0.0 && b < 0.0 && c < 0.0) return std::max({a, b, c});
    return 0.0;
}

/// Monotonized-central limited slope of f at the middle point.
inline double mc_slope(double f_prev, double f_mid, double f_next, double dx, double theta_lim) {
    return minmod((f_next - f_prev) / (2.0 * dx), theta_lim * (f_mid - f_prev) / dx,
                  theta_lim * (f_next - f_mid) / dx);
}

/// Microscopic interface flux at one velocity node.
///
/// `f_left` / `f_right` are the (reconstructed) values from the cells on
/// each side, `g` the source value seen by this node, `f_slopes` the limited
/// f slopes of the two cells (zero for the first-order reconstruction).
inline double micro_flux(const FluxCoefficients& k, double v, double f_left, double f_right, double rho_iface,
                         SlopePair rho_slopes, double g, SlopePair f_slopes = {}) {
    const bool up = v > 0.0;
    const double f = up ? f_left : f_right;
    const double drho = up ? rho_slopes.left : rho_slopes.right;
    const double df = up ? f_slopes.left : f_slopes.right;
    return k.a * v * f + k.c * v * rho_iface + k.d * v * v * drho + k.e * v * g + k.b * v * v * df;
}

/// Per-node inputs of one interior interface. Empty slope spans mean the
/// first-order reconstruction.
struct InterfaceData {
    std::span<const double> f_left;
    std::span<const double> f_right;
    std::span<const double> g_left;
    std::span<const double> g_right;
    std::span<const double> df_left = {};
    std::span<const double> df_right = {};
};

/// A macroscopic interface flux written as an affine function of the two
/// adjacent cell densities: Phi = k0 + w_left rho_left + w_right rho_right.
/// Only the D term depends on the cell densities, so this form serves both
/// the explicit update and the implicit (tridiagonal) one.
struct LinearFlux {
    double k0 = 0;
    double w_left = 0;
    double w_right = 0;

    double operator()(double rho_left, double rho_right) const { return k0 + w_left * rho_left + w_right * rho_right; }
};

/// Velocity average of micro_flux over all nodes, eliminated analytically
/// with the discrete half-moments.
inline LinearFlux macro_flux_linear(const FluxCoefficients& k, const VelocityQuadrature& q, const InterfaceData& in,
                                    double rho_iface, double dx) {
    const auto& m = q.moments();
    const auto v = q.nodes();

    double k0 = k.a * (q.sum_pos([&](std::size_t i) { return v[i] * in.f_left[i]; }) +
                       q.sum_neg([&](std::size_t i) { return v[i] * in.f_right[i]; }));
    // m.v_pos + m.v_neg is exactly zero for a mirrored rule
    k0 += k.c * rho_iface * (m.v_pos + m.v_neg);
    k0 += k.e * (q.sum_pos([&](std::size_t i) { return v[i] * in.g_left[i]; }) +
                 q.sum_neg([&](std::size_t i) { return v[i] * in.g_right[i]; }));
    if (!in.df_left.empty()) {
        k0 += k.b * (q.sum_pos([&](std::size_t i) { return v[i] * v[i] * in.df_left[i]; }) +
                     q.sum_neg([&](std::size_t i) { return v[i] * v[i] * in.df_right[i]; }));
    }

    // D (m2p dL + m2n dR) with dL = (rho_if - rho_l)/(dx/2), dR = (rho_r - rho_if)/(dx/2)
    const double two_d = 2.0 * k.d / dx;
    k0 += two_d * rho_iface * (m.v2_pos - m.v2_neg);
    return {k0, -two_d * m.v2_pos, two_d * m.v2_neg};
}

/// Macroscopic flux Phi at an interior interface. For a symmetric rule the
/// D term equals D <v^2>_h (rho_right - rho_left) / dx.
inline double macro_flux(const FluxCoefficients& k, const VelocityQuadrature& q, const InterfaceData& in,
                         double rho_iface, double rho_left, double rho_right, double dx) {
    return macro_flux_linear(k, q, in, rho_iface, dx)(rho_left, rho_right);
}

}  // namespace ugks
