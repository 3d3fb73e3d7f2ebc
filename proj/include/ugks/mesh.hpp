#pragma once

#include "ugks/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace ugks {

/// Uniform 1D cell decomposition of [x_min, x_max].
class SpatialMesh {
public:
    SpatialMesh(double x_min, double x_max, std::size_t n_cells)
        : x_min_(x_min), x_max_(x_max), n_cells_(n_cells) {
        if (n_cells < 2) throw InvalidArgument("mesh needs at least 2 cells");
        if (!(x_max > x_min) || !std::isfinite(x_min) || !std::isfinite(x_max))
            throw InvalidArgument("mesh bounds must satisfy x_min < x_max");
        dx_ = (x_max - x_min) / static_cast<double>(n_cells);
    }

    double x_min() const noexcept { return x_min_; }
    double x_max() const noexcept { return x_max_; }
    std::size_t n_cells() const noexcept { return n_cells_; }
    std::size_t n_interfaces() const noexcept { return n_cells_ + 1; }
    double dx() const noexcept { return dx_; }

    double center(std::size_t i) const noexcept { return x_min_ + (static_cast<double>(i) + 0.5) * dx_; }
    /// Interface j sits between cells j-1 and j; j = 0 and j = n_cells are the walls.
    double interface(std::size_t j) const noexcept {
        return j == n_cells_ ? x_max_ : x_min_ + static_cast<double>(j) * dx_;
    }

    std::vector<double> centers() const {
        std::vector<double> x(n_cells_);
        for (std::size_t i = 0; i < n_cells_; ++i) x[i] = center(i);
        return x;
    }

private:
    double x_min_;
    double x_max_;
    std::size_t n_cells_;
    double dx_;
};

/// Cell and interface samples of the scattering cross section sigma, the
/// absorption alpha and the isotropic source G.
///
/// Interface j between cells j-1 and j carries the arithmetic mean of the two
/// cell values; the two wall interfaces copy their adjacent cell.
struct MaterialField {
    std::vector<double> sigma_cell;
    std::vector<double> alpha_cell;
    std::vector<double> g_cell;
    std::vector<double> sigma_iface;
    std::vector<double> alpha_iface;
    std::vector<double> g_iface;

    std::size_t n_cells() const noexcept { return sigma_cell.size(); }
    double sigma_min() const { return *std::min_element(sigma_cell.begin(), sigma_cell.end()); }
    double sigma_max() const { return *std::max_element(sigma_cell.begin(), sigma_cell.end()); }
    double alpha_max() const { return *std::max_element(alpha_cell.begin(), alpha_cell.end()); }
};

namespace detail {

inline std::vector<double> interface_means(const std::vector<double>& cell) {
    const std::size_t n = cell.size();
    std::vector<double> face(n + 1);
    face[0] = cell[0];
    face[n] = cell[n - 1];
    for (std::size_t j = 1; j < n; ++j) face[j] = 0.5 * (cell[j - 1] + cell[j]);
    return face;
}

}  // namespace detail

/// Build a material field from per-cell values.
inline MaterialField material_from_cells(std::vector<double> sigma, std::vector<double> alpha,
                                         std::vector<double> g) {
    const std::size_t n = sigma.size();
    if (n < 2 || alpha.size() != n || g.size() != n)
        throw InvalidArgument("material arrays must share one length of at least 2");
    for (std::size_t i = 0; i < n; ++i) {
        if (!(sigma[i] >= 0.0) || !std::isfinite(sigma[i]))
            throw InvalidData("negative or non-finite sigma in cell " + std::to_string(i));
        if (!(alpha[i] >= 0.0) || !std::isfinite(alpha[i]))
            throw InvalidData("negative or non-finite alpha in cell " + std::to_string(i));
        if (!std::isfinite(g[i])) throw InvalidData("non-finite source in cell " + std::to_string(i));
    }
    MaterialField m;
    m.sigma_iface = detail::interface_means(sigma);
    m.alpha_iface = detail::interface_means(alpha);
    m.g_iface = detail::interface_means(g);
    m.sigma_cell = std::move(sigma);
    m.alpha_cell = std::move(alpha);
    m.g_cell = std::move(g);
    return m;
}

/// Midpoint sampling of sigma(x), alpha(x), G(x) on the mesh.
template <class Sigma, class Alpha, class Source>
MaterialField sample_material(Sigma&& sigma, Alpha&& alpha, Source&& source, const SpatialMesh& mesh) {
    const std::size_t n = mesh.n_cells();
    std::vector<double> s(n), a(n), g(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = mesh.center(i);
        s[i] = sigma(x);
        a[i] = alpha(x);
        g[i] = source(x);
    }
    return material_from_cells(std::move(s), std::move(a), std::move(g));
}

}  // namespace ugks
