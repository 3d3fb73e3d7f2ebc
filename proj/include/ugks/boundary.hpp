#pragma once

#include "ugks/coefficients.hpp"
#include "ugks/error.hpp"
#include "ugks/flux.hpp"
#include "ugks/quadrature.hpp"

#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace ugks {

enum class BoundaryMode {
    stabilized,  ///< boundary density chosen so the two O(1/eps) inflow terms cancel
    corrected,   ///< Chandrasekhar density and matching inflow term
    blended,     ///< stabilized for nu dt -> 0, corrected for nu dt -> infinity
};

enum class WeightVariant {
    polynomial,  ///< W(v) = 3/2 v^2 + v
    fitted,      ///< W(v) = 0.956 v + 1.565 v^2
};

inline double chandrasekhar_weight(WeightVariant variant, double mu) {
    return variant == WeightVariant::polynomial ? 1.5 * mu * mu + mu : 0.956 * mu + 1.565 * mu * mu;
}

/// W(|v_k|) sampled at every node; the mirror image serves the right wall.
struct ChandrasekharWeight {
    WeightVariant variant = WeightVariant::polynomial;
    std::vector<double> samples;

    ChandrasekharWeight(WeightVariant w, const VelocityQuadrature& q) : variant(w), samples(q.size()) {
        for (std::size_t k = 0; k < q.size(); ++k) samples[k] = chandrasekhar_weight(w, std::abs(q.node(k)));
    }
};

/// Inflow data at the quadrature nodes: f_left is read where v > 0, f_right
/// where v < 0. Entries on the outgoing half are ignored.
struct BoundarySpec {
    std::vector<double> f_left;
    std::vector<double> f_right;
    BoundaryMode mode = BoundaryMode::stabilized;
    WeightVariant weight = WeightVariant::polynomial;

    void validate(const VelocityQuadrature& q) const {
        if (f_left.size() != q.size() || f_right.size() != q.size())
            throw InvalidArgument("boundary data must have one sample per node");
        for (std::size_t j = 0; j < q.half(); ++j) {
            const double l = f_left[q.pos(j)];
            const double r = f_right[q.neg(j)];
            if (!(l >= 0.0) || !std::isfinite(l) || !(r >= 0.0) || !std::isfinite(r))
                throw InvalidData("inflow data must be finite and nonnegative");
        }
    }
};

/// Isotropic inflow c on both walls.
inline BoundarySpec isotropic_boundary(const VelocityQuadrature& q, double left, double right,
                                       BoundaryMode mode = BoundaryMode::stabilized) {
    return {std::vector<double>(q.size(), left), std::vector<double>(q.size(), right), mode,
            WeightVariant::polynomial};
}

/// 2 <W f_L 1_{v>0}>_h, the Dirichlet value of the diffusion limit.
inline double chandrasekhar_density(std::span<const double> f_left, const ChandrasekharWeight& w,
                                    const VelocityQuadrature& q) {
    q.check_size(f_left);
    return 2.0 * q.sum_pos([&](std::size_t k) { return w.samples[k] * f_left[k]; });
}

/// Boundary density, the inflow part of the macroscopic flux, and the
/// isotropic shift added to the incoming micro flux.
///
/// The shift makes the incoming micro flux average to the inflow term, so
/// the velocity average of the f-update still reproduces the density
/// update. It is zero in stabilized mode and for isotropic inflow.
struct BoundaryClosure {
    double rho = 0;
    double inflow = 0;
    double shift = 0;
    double theta = 0;
};

namespace detail {

// Left wall, written for incoming v > 0. The right wall calls this with the
// mirrored quadrature roles (see closure_right).
inline BoundaryClosure closure_left(BoundaryMode mode, std::span<const double> f_in, std::span<const double> w,
                                    const VelocityQuadrature& q, double theta, double eps) {
    const auto& m = q.moments();
    const auto v = q.nodes();
    const double lp = q.sum_pos([&](std::size_t k) { return v[k] * f_in[k]; });
    const double wp = q.sum_pos([&](std::size_t k) { return w[k] * f_in[k]; });

    const double rho_stab = -lp / m.v_neg;
    const double rho_corr = 2.0 * wp;
    const double in_stab = lp / eps;
    const double in_corr = -2.0 * m.v_neg * wp / eps;

    BoundaryClosure c;
    switch (mode) {
        case BoundaryMode::stabilized:
            c.rho = rho_stab;
            c.inflow = in_stab;
            return c;
        case BoundaryMode::corrected:
            c.rho = rho_corr;
            c.inflow = in_corr;
            c.theta = 1.0;
            break;
        case BoundaryMode::blended:
            c.rho = (1.0 - theta) * rho_stab + theta * rho_corr;
            c.inflow = (1.0 - theta) * in_stab + theta * in_corr;
            c.theta = theta;
            break;
        default:
            throw InvalidArgument("unknown boundary mode");
    }
    c.shift = (eps * c.inflow - lp) / m.v_pos;
    return c;
}

inline BoundaryClosure closure_right(BoundaryMode mode, std::span<const double> f_in, std::span<const double> w,
                                     const VelocityQuadrature& q, double theta, double eps) {
    const auto& m = q.moments();
    const auto v = q.nodes();
    // incoming v < 0: mirror of the left formulas with sum_pos <-> sum_neg
    const double ln = q.sum_neg([&](std::size_t k) { return v[k] * f_in[k]; });
    const double wn = q.sum_neg([&](std::size_t k) { return w[k] * f_in[k]; });

    const double rho_stab = -ln / m.v_pos;
    const double rho_corr = 2.0 * wn;
    const double in_stab = ln / eps;
    const double in_corr = -2.0 * m.v_pos * wn / eps;

    BoundaryClosure c;
    switch (mode) {
        case BoundaryMode::stabilized:
            c.rho = rho_stab;
            c.inflow = in_stab;
            return c;
        case BoundaryMode::corrected:
            c.rho = rho_corr;
            c.inflow = in_corr;
            c.theta = 1.0;
            break;
        case BoundaryMode::blended:
            c.rho = (1.0 - theta) * rho_stab + theta * rho_corr;
            c.inflow = (1.0 - theta) * in_stab + theta * in_corr;
            c.theta = theta;
            break;
        default:
            throw InvalidArgument("unknown boundary mode");
    }
    c.shift = (eps * c.inflow - ln) / m.v_neg;
    return c;
}

}  // namespace detail

inline BoundaryClosure left_closure(const FluxCoefficients& k, const VelocityQuadrature& q, const BoundarySpec& bc,
                                    const ChandrasekharWeight& w) {
    return detail::closure_left(bc.mode, bc.f_left, w.samples, q, blend_parameter(k.nu, k.dt), k.eps);
}

inline BoundaryClosure right_closure(const FluxCoefficients& k, const VelocityQuadrature& q, const BoundarySpec& bc,
                                     const ChandrasekharWeight& w) {
    return detail::closure_right(bc.mode, bc.f_right, w.samples, q, blend_parameter(k.nu, k.dt), k.eps);
}

/// Micro flux at the left wall. `f_in` is the inflow sample, `f1`, `rho1`
/// the first cell, `g` the source seen by the outgoing node.
inline double left_wall_micro(const FluxCoefficients& k, double v, double f_in, const BoundaryClosure& c, double f1,
                              double rho1, double dx, double g) {
    if (v > 0.0) return v / k.eps * (f_in + c.shift);
    const double d_right = (rho1 - c.rho) / (0.5 * dx);
    return k.a * v * f1 + k.c * v * c.rho + k.d * v * v * d_right + k.e * v * g;
}

inline double right_wall_micro(const FluxCoefficients& k, double v, double f_in, const BoundaryClosure& c,
                               double f_last, double rho_last, double dx, double g) {
    if (v < 0.0) return v / k.eps * (f_in + c.shift);
    const double d_left = (c.rho - rho_last) / (0.5 * dx);
    return k.a * v * f_last + k.c * v * c.rho + k.d * v * v * d_left + k.e * v * g;
}

/// Macroscopic left-wall flux as an affine function of rho_1 (w_left = 0).
inline LinearFlux left_wall_linear(const FluxCoefficients& k, const VelocityQuadrature& q, const BoundaryClosure& c,
                                   std::span<const double> f1, std::span<const double> g, double dx) {
    const auto& m = q.moments();
    const auto v = q.nodes();
    const double two_d = 2.0 * k.d / dx;
    LinearFlux lf;
    lf.k0 = c.inflow + k.a * q.sum_neg([&](std::size_t i) { return v[i] * f1[i]; }) + k.c * m.v_neg * c.rho -
            two_d * m.v2_neg * c.rho + k.e * q.sum_neg([&](std::size_t i) { return v[i] * g[i]; });
    lf.w_right = two_d * m.v2_neg;
    return lf;
}

/// Macroscopic right-wall flux as an affine function of rho_N (w_right = 0).
inline LinearFlux right_wall_linear(const FluxCoefficients& k, const VelocityQuadrature& q, const BoundaryClosure& c,
                                    std::span<const double> f_last, std::span<const double> g, double dx) {
    const auto& m = q.moments();
    const auto v = q.nodes();
    const double two_d = 2.0 * k.d / dx;
    LinearFlux lf;
    lf.k0 = c.inflow + k.a * q.sum_pos([&](std::size_t i) { return v[i] * f_last[i]; }) + k.c * m.v_pos * c.rho +
            two_d * m.v2_pos * c.rho + k.e * q.sum_pos([&](std::size_t i) { return v[i] * g[i]; });
    lf.w_left = -two_d * m.v2_pos;
    return lf;
}

/// Per-node and macroscopic fluxes at one wall, plus the boundary density.
struct BoundaryFlux {
    std::vector<double> micro;
    double macro = 0;
    double rho_iface = 0;
};

/// Left-wall fluxes for a scalar interface source g. The coefficients must
/// be built from the wall values of sigma and alpha.
inline BoundaryFlux boundary_fluxes_left(const FluxCoefficients& k, const VelocityQuadrature& q,
                                         const BoundarySpec& bc, std::span<const double> f1, double rho1, double dx,
                                         double g) {
    bc.validate(q);
    q.check_size(f1);
    const ChandrasekharWeight w(bc.weight, q);
    const BoundaryClosure c = left_closure(k, q, bc, w);
    const std::vector<double> gv(q.size(), g);
    BoundaryFlux out;
    out.micro.resize(q.size());
    for (std::size_t i = 0; i < q.size(); ++i)
        out.micro[i] = left_wall_micro(k, q.node(i), bc.f_left[i], c, f1[i], rho1, dx, g);
    out.macro = left_wall_linear(k, q, c, f1, gv, dx)(0.0, rho1);
    out.rho_iface = c.rho;
    return out;
}

inline BoundaryFlux boundary_fluxes_right(const FluxCoefficients& k, const VelocityQuadrature& q,
                                          const BoundarySpec& bc, std::span<const double> f_last, double rho_last,
                                          double dx, double g) {
    bc.validate(q);
    q.check_size(f_last);
    const ChandrasekharWeight w(bc.weight, q);
    const BoundaryClosure c = right_closure(k, q, bc, w);
    const std::vector<double> gv(q.size(), g);
    BoundaryFlux out;
    out.micro.resize(q.size());
    for (std::size_t i = 0; i < q.size(); ++i)
        out.micro[i] = right_wall_micro(k, q.node(i), bc.f_right[i], c, f_last[i], rho_last, dx, g);
    out.macro = right_wall_linear(k, q, c, f_last, gv, dx)(rho_last, 0.0);
    out.rho_iface = c.rho;
    return out;
}

inline std::string to_string(BoundaryMode m) {
    switch (m) {
        case BoundaryMode::stabilized: return "stabilized";
        case BoundaryMode::corrected: return "corrected";
        case BoundaryMode::blended: return "blended";
    }
    return "?";
}

}  // namespace ugks
