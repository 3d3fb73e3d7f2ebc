#pragma once

#include "ugks/error.hpp"

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace ugks {

enum class QuadratureFamily {
    gauss_legendre,  ///< n-point Gauss-Legendre on [-1,1]
    double_gauss,    ///< n/2-point Gauss-Legendre on each of [-1,0] and [0,1]
};

/// Discrete half-range moments of the velocity average <.>_h.
struct HalfMoments {
    double v_neg = 0;   ///< <v 1_{v<0}>
    double v_pos = 0;   ///< <v 1_{v>0}>
    double v2_neg = 0;  ///< <v^2 1_{v<0}>
    double v2_pos = 0;  ///< <v^2 1_{v>0}>
    double v2 = 0;      ///< <v^2>
};

/// Symmetric discrete-ordinate set on [-1,1].
///
/// Nodes are stored in increasing order. The first half holds the negative
/// cosines, the second half their exact mirrors, so `neg(j)` and `pos(j)`
/// address a mirrored pair. Every half-range sum in the library walks the
/// pairs in the same order, which makes odd moments of even data cancel
/// exactly.
class VelocityQuadrature {
public:
    VelocityQuadrature(QuadratureFamily family, std::vector<double> nodes,
                       std::vector<double> weights)
        : family_(family), nodes_(std::move(nodes)), weights_(std::move(weights)) {
        const std::size_t n = nodes_.size();
        if (n < 2 || n % 2 != 0 || weights_.size() != n)
            throw InvalidArgument("quadrature needs an even, matching number of nodes and weights");
        for (std::size_t j = 0; j < half(); ++j) {
            if (!(nodes_[pos(j)] > 0.0) || nodes_[neg(j)] != -nodes_[pos(j)] ||
                weights_[neg(j)] != weights_[pos(j)] || !(weights_[pos(j)] > 0.0))
                throw InvalidArgument("quadrature nodes must be symmetric, nonzero, positive weight");
        }
        std::vector<double> v(n), v2(n);
        for (std::size_t k = 0; k < n; ++k) {
            v[k] = nodes_[k];
            v2[k] = nodes_[k] * nodes_[k];
        }
        moments_.v_pos = average_pos(v);
        moments_.v_neg = average_neg(v);
        moments_.v2_pos = average_pos(v2);
        moments_.v2_neg = average_neg(v2);
        moments_.v2 = moments_.v2_pos + moments_.v2_neg;
    }

    QuadratureFamily family() const noexcept { return family_; }
    std::size_t size() const noexcept { return nodes_.size(); }
    std::size_t half() const noexcept { return nodes_.size() / 2; }

    std::span<const double> nodes() const noexcept { return nodes_; }
    std::span<const double> weights() const noexcept { return weights_; }
    double node(std::size_t k) const { return nodes_[k]; }
    double weight(std::size_t k) const { return weights_[k]; }

    /// Index of the j-th positive node (j < half()), smallest first.
    std::size_t pos(std::size_t j) const noexcept { return half() + j; }
    /// Index of the mirror of pos(j).
    std::size_t neg(std::size_t j) const noexcept { return half() - 1 - j; }
    static constexpr std::size_t mirror(std::size_t k, std::size_t n) noexcept { return n - 1 - k; }

    const HalfMoments& moments() const noexcept { return moments_; }

    /// (1/2) sum over v_k > 0 of w_k fn(k).
    template <class F>
    double sum_pos(F&& fn) const {
        double acc = 0.0;
        for (std::size_t j = 0; j < half(); ++j) acc += weights_[pos(j)] * fn(pos(j));
        return 0.5 * acc;
    }

    /// (1/2) sum over v_k < 0 of w_k fn(k), in mirrored order.
    template <class F>
    double sum_neg(F&& fn) const {
        double acc = 0.0;
        for (std::size_t j = 0; j < half(); ++j) acc += weights_[neg(j)] * fn(neg(j));
        return 0.5 * acc;
    }

    double average_pos(std::span<const double> s) const {
        check_size(s);
        return sum_pos([&](std::size_t k) { return s[k]; });
    }

    double average_neg(std::span<const double> s) const {
        check_size(s);
        return sum_neg([&](std::size_t k) { return s[k]; });
    }

    void check_size(std::span<const double> s) const {
        if (s.size() != nodes_.size())
            throw InvalidArgument("sample count " + std::to_string(s.size()) +
                                  " does not match quadrature size " +
                                  std::to_string(nodes_.size()));
    }

private:
    QuadratureFamily family_;
    std::vector<double> nodes_;
    std::vector<double> weights_;
    HalfMoments moments_;
};

namespace detail {

// Positive roots and weights of the m-point Gauss-Legendre rule on [-1,1],
// by Newton iteration on the three-term recurrence. Returned smallest first.
inline void legendre_positive_roots(std::size_t m, std::vector<double>& x, std::vector<double>& w) {
    x.clear();
    w.clear();
    const std::size_t count = m / 2;
    for (std::size_t i = 0; i < count; ++i) {
        long double z = std::cos(std::numbers::pi_v<long double> * (i + 0.75L) / (m + 0.5L));
        long double dp = 0;
        for (int it = 0; it < 100; ++it) {
            long double p0 = 1, p1 = z;
            for (std::size_t k = 2; k <= m; ++k) {
                const long double p2 = ((2.0L * k - 1) * z * p1 - (k - 1.0L) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = m * (z * p1 - p0) / (z * z - 1);
            const long double dz = p1 / dp;
            z -= dz;
            if (std::fabs(dz) < 1e-19L) break;
        }
        // recompute the derivative at the converged root
        long double p0 = 1, p1 = z;
        for (std::size_t k = 2; k <= m; ++k) {
            const long double p2 = ((2.0L * k - 1) * z * p1 - (k - 1.0L) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = m * (z * p1 - p0) / (z * z - 1);
        x.push_back(static_cast<double>(z));
        w.push_back(static_cast<double>(2.0L / ((1 - z * z) * dp * dp)));
    }
    if (m % 2 == 1) {
        // center node of an odd rule: weight 2 / P'_m(0)^2
        long double p0 = 1, p1 = 0;
        for (std::size_t k = 2; k <= m; ++k) {
            const long double p2 = (-(k - 1.0L) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        const long double dp0 = m * (-p0) / -1.0L;
        x.push_back(0.0);
        w.push_back(static_cast<double>(2.0L / (dp0 * dp0)));
    }
    // Newton from cos guesses yields the largest root first
    std::vector<double> xs(x.rbegin(), x.rend()), ws(w.rbegin(), w.rend());
    x = std::move(xs);
    w = std::move(ws);
}

inline VelocityQuadrature assemble_symmetric(QuadratureFamily family, const std::vector<double>& pos_nodes,
                                             const std::vector<double>& pos_weights) {
    const std::size_t half = pos_nodes.size();
    double total = 0.0;
    for (double w : pos_weights) total += 2.0 * w;
    std::vector<double> nodes(2 * half), weights(2 * half);
    for (std::size_t j = 0; j < half; ++j) {
        const double w = pos_weights[j] * (2.0 / total);
        nodes[half + j] = pos_nodes[j];
        nodes[half - 1 - j] = -pos_nodes[j];
        weights[half + j] = w;
        weights[half - 1 - j] = w;
    }
    return VelocityQuadrature(family, std::move(nodes), std::move(weights));
}

inline void check_node_count(std::size_t n) {
    if (n < 2 || n > 512 || n % 2 != 0)
        throw InvalidArgument("quadrature size must be even and in [2, 512], got " + std::to_string(n));
}

}  // namespace detail

/// n-point Gauss-Legendre rule on [-1,1] (n even, so v = 0 is never a node).
/// Weights are rescaled to sum to exactly 2 up to rounding.
inline VelocityQuadrature build_gauss_legendre(std::size_t n) {
    detail::check_node_count(n);
    std::vector<double> x, w;
    detail::legendre_positive_roots(n, x, w);
    return detail::assemble_symmetric(QuadratureFamily::gauss_legendre, x, w);
}

/// Double-Gauss rule: an (n/2)-point Gauss-Legendre rule mapped onto each
/// half-interval. Half-range moments of polynomials of degree < n are exact,
/// which the half-range boundary formulas rely on.
inline VelocityQuadrature build_double_gauss(std::size_t n) {
    detail::check_node_count(n);
    const std::size_t m = n / 2;
    std::vector<double> x, w;
    detail::legendre_positive_roots(m, x, w);
    // full m-point rule on [-1,1], mapped to [0,1]
    std::vector<double> full_x, full_w;
    for (std::size_t j = x.size(); j-- > 0;) {
        if (x[j] == 0.0) continue;
        full_x.push_back(-x[j]);
        full_w.push_back(w[j]);
    }
    for (std::size_t j = 0; j < x.size(); ++j) {
        full_x.push_back(x[j]);
        full_w.push_back(w[j]);
    }
    std::vector<double> pos_x, pos_w;
    for (std::size_t j = 0; j < full_x.size(); ++j) {
        pos_x.push_back(0.5 * (1.0 + full_x[j]));
        pos_w.push_back(0.5 * full_w[j]);
    }
    return detail::assemble_symmetric(QuadratureFamily::double_gauss, pos_x, pos_w);
}

inline VelocityQuadrature build_quadrature(QuadratureFamily family, std::size_t n) {
    return family == QuadratureFamily::gauss_legendre ? build_gauss_legendre(n) : build_double_gauss(n);
}

/// Discrete velocity average (1/2) sum_k w_k s_k.
inline double average(const VelocityQuadrature& q, std::span<const double> samples) {
    q.check_size(samples);
    return q.average_neg(samples) + q.average_pos(samples);
}

}  // namespace ugks
