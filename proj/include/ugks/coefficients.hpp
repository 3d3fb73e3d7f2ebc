#pragma once

#include "ugks/error.hpp"

#include <array>
#include <cmath>
#include <limits>

namespace ugks {

/// Interface coefficients of the characteristic-integral flux for one time
/// step:
///
///   phi(v) = A v f_upwind + C v rho_iface + D v^2 drho_upwind + E v G
///            + B v^2 df_upwind
///
/// with nu = sigma / eps^2 + alpha.
struct FluxCoefficients {
    double a = 0;
    double b = 0;
    double c = 0;
    double d = 0;
    double e = 0;
    double nu = 0;
    double dt = 0;
    double eps = 0;
    double sigma = 0;
    double alpha = 0;
};

namespace detail {

/// Below this value of x = nu * dt the relative functions use their Taylor
/// series; above it, the closed forms built on expm1.
inline constexpr double series_switch = 0.1;

template <std::size_t N>
constexpr double horner(const std::array<double, N>& c, double x) {
    double acc = 0.0;
    for (std::size_t k = N; k-- > 0;) acc = acc * x + c[k];
    return acc;
}

// Series coefficients, 17 terms each (truncation below 1e-30 at x = 0.1).
//   h1(x) = (1 - e^-x) / x                     = sum (-x)^j / (j+1)!
//   q1(x) = (x - 1 + e^-x) / x^2               = sum (-x)^j / (j+2)!
//   q2(x) = (x(1 + e^-x) - 2(1 - e^-x)) / x^3  = sum (-1)^j (j+1) x^j / (j+3)!
//   q3(x) = (e^-x - h1(x)) / x                 = sum (-1)^(j+1) (j+1) x^j / (j+2)!
inline constexpr std::size_t series_terms = 17;

constexpr std::array<double, series_terms> make_series(int kind) {
    std::array<double, series_terms> c{};
    for (std::size_t j = 0; j < series_terms; ++j) {
        double fact = 1.0;
        const std::size_t shift = kind == 0 ? 1 : kind == 2 ? 3 : 2;
        for (std::size_t m = 2; m <= j + shift; ++m) fact *= static_cast<double>(m);
        const double sign = (j % 2 == 0) ? 1.0 : -1.0;
        switch (kind) {
            case 0: c[j] = sign / fact; break;
            case 1: c[j] = sign / fact; break;
            case 2: c[j] = sign * static_cast<double>(j + 1) / fact; break;
            default: c[j] = -sign * static_cast<double>(j + 1) / fact; break;
        }
    }
    return c;
}

inline constexpr auto h1_series_coeffs = make_series(0);
inline constexpr auto q1_series_coeffs = make_series(1);
inline constexpr auto q2_series_coeffs = make_series(2);
inline constexpr auto q3_series_coeffs = make_series(3);

inline double h1_series(double x) { return horner(h1_series_coeffs, x); }
inline double q1_series(double x) { return horner(q1_series_coeffs, x); }
inline double q2_series(double x) { return horner(q2_series_coeffs, x); }
inline double q3_series(double x) { return horner(q3_series_coeffs, x); }

inline double h1_direct(double x) { return -std::expm1(-x) / x; }
inline double q1_direct(double x) { return (x + std::expm1(-x)) / (x * x); }
inline double q2_direct(double x) {
    const double em = std::expm1(-x);
    return (x * (2.0 + em) + 2.0 * em) / (x * x * x);
}
inline double q3_direct(double x) { return (std::exp(-x) - h1_direct(x)) / x; }

// Products that stay finite for x -> infinity.
inline double h1(double x) { return x < series_switch ? h1_series(x) : h1_direct(x); }
inline double q1(double x) { return x < series_switch ? q1_series(x) : q1_direct(x); }
/// 1 - h1(x) = x q1(x)
inline double one_minus_h1(double x) { return x < series_switch ? x * q1_series(x) : 1.0 + std::expm1(-x) / x; }
/// x^2 q2(x)
inline double p2(double x) {
    if (x < series_switch) return x * x * q2_series(x);
    const double em = std::expm1(-x);
    return (x * (2.0 + em) + 2.0 * em) / x;
}
/// x q3(x) = e^-x - h1(x)
inline double p3(double x) { return x < series_switch ? x * q3_series(x) : std::exp(-x) - h1_direct(x); }

}  // namespace detail

/// Evaluate A, B, C, D, E without cancellation for any nu * dt >= 0,
/// including the collisionless case sigma = alpha = 0.
inline FluxCoefficients flux_coefficients(double dt, double eps, double sigma, double alpha) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("flux_coefficients: dt must be positive");
    if (!(eps > 0.0) || !std::isfinite(eps)) throw InvalidArgument("flux_coefficients: eps must be positive");
    if (!(sigma >= 0.0) || !(alpha >= 0.0)) throw InvalidArgument("flux_coefficients: sigma, alpha must be >= 0");

    FluxCoefficients k;
    k.dt = dt;
    k.eps = eps;
    k.sigma = sigma;
    k.alpha = alpha;
    const double eps2 = eps * eps;
    k.nu = sigma / eps2 + alpha;
    const double x = k.nu * dt;
    if (!std::isfinite(x)) throw InvalidArgument("flux_coefficients: nu * dt overflows");

    // nu * eps^2, kept separate so sigma / eps^4 never has to be formed
    const double stiff = sigma + alpha * eps2;

    k.a = detail::h1(x) / eps;
    k.e = dt * detail::q1(x) / eps;
    if (sigma > 0.0) {
        k.c = sigma * detail::one_minus_h1(x) / (eps * stiff);
        k.d = -sigma * detail::p2(x) / (stiff * stiff);
    }
    k.b = stiff > 0.0 ? detail::p3(x) / stiff : -0.5 * dt / eps2;
    return k;
}

/// Boundary blending weight theta = 1 - exp(-nu dt): 0 without collisions,
/// 1 in the diffusive limit.
inline double blend_parameter(double nu, double dt) {
    if (!(nu >= 0.0) || !(dt > 0.0)) throw InvalidArgument("blend_parameter: need nu >= 0, dt > 0");
    return -std::expm1(-nu * dt);
}

}  // namespace ugks
