#pragma once

#include "ugks/boundary.hpp"
#include "ugks/coefficients.hpp"
#include "ugks/error.hpp"
#include "ugks/flux.hpp"
#include "ugks/mesh.hpp"
#include "ugks/quadrature.hpp"
#include "ugks/state.hpp"
#include "ugks/tridiagonal.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <utility>
#include <vector>

namespace ugks {

enum class Reconstruction { first_order, mc_limited };
enum class DiffusionMode { explicit_slopes, implicit_slopes };
enum class CflForm {
    max_form,  ///< cfl * max(eps dx, 3/2 dx^2 sigma_min)
    sum_form,  ///< cfl * (3/2 dx^2 sigma_min + eps dx)
};

struct SchemeConfig {
    double eps = 1.0;
    double cfl = 0.9;
    Reconstruction reconstruction = Reconstruction::first_order;
    double mc_theta = 1.5;
    DiffusionMode diffusion = DiffusionMode::explicit_slopes;
    CflForm cfl_form = CflForm::max_form;

    void validate() const {
        if (!(eps > 0.0) || !std::isfinite(eps)) throw InvalidArgument("eps must be positive");
        if (!(cfl > 0.0 && cfl <= 1.0)) throw InvalidArgument("cfl must lie in (0, 1]");
        if (reconstruction == Reconstruction::mc_limited && !(mc_theta >= 1.0 && mc_theta <= 2.0))
            throw InvalidArgument("MC limiter theta must lie in [1, 2]");
    }
};

inline double cfl_timestep(const SchemeConfig& cfg, const MaterialField& mat, const SpatialMesh& mesh) {
    cfg.validate();
    const double dx = mesh.dx();
    if (cfg.diffusion == DiffusionMode::implicit_slopes) return std::max(0.9 * cfg.eps * dx, cfg.cfl * dx);
    const double parabolic = 1.5 * dx * dx * mat.sigma_min();
    const double hyperbolic = cfg.eps * dx;
    return cfg.cfl_form == CflForm::max_form ? cfg.cfl * std::max(hyperbolic, parabolic)
                                             : cfg.cfl * (parabolic + hyperbolic);
}

/// Reusable UGKS stepper. Holds copies of the material and boundary data,
/// the per-interface coefficients for the last dt, and scratch buffers, so
/// a time loop allocates nothing after the first step.
///
/// An optional nodal source G(x_i, v_k) (one row per cell) is added to the
/// cell source; the penalized scheme passes its G-tilde through it. Fluxes
/// then see the upwind cell's row at each interface.
class UgksStepper {
public:
    UgksStepper(SchemeConfig cfg, MaterialField mat, const SpatialMesh& mesh, const VelocityQuadrature& q,
                BoundarySpec bc)
        : cfg_(cfg), mat_(std::move(mat)), mesh_(mesh), q_(q), bc_(std::move(bc)), weight_(bc_.weight, q) {
        cfg_.validate();
        bc_.validate(q_);
        if (mat_.n_cells() != mesh_.n_cells()) throw InvalidArgument("material and mesh sizes differ");
        const std::size_t n = q_.size(), nc = mesh_.n_cells();
        face_l_.assign((nc + 1) * n, 0.0);
        face_r_.assign((nc + 1) * n, 0.0);
        df_.assign(nc * n, 0.0);
        phi_.assign((nc + 1) * n, 0.0);
        rho_if_.assign(nc + 1, 0.0);
        lin_.assign(nc + 1, {});
        rho_new_.assign(nc, 0.0);
        gbuf_.assign(n, 0.0);
        sys_.resize(nc);
    }

    const SchemeConfig& config() const noexcept { return cfg_; }
    const MaterialField& material() const noexcept { return mat_; }
    const SpatialMesh& mesh() const noexcept { return mesh_; }
    const VelocityQuadrature& quadrature() const noexcept { return q_; }
    const BoundarySpec& boundary() const noexcept { return bc_; }
    std::size_t steps_taken() const noexcept { return steps_; }

    double cfl_dt() const { return cfl_timestep(cfg_, mat_, mesh_); }

    /// Coefficients of interface j for step size dt.
    const FluxCoefficients& coefficients(std::size_t j, double dt) {
        prepare(dt);
        return coef_[j];
    }

    /// Boundary density, inflow term and shift at the two walls for dt.
    std::pair<BoundaryClosure, BoundaryClosure> closures(double dt) {
        prepare(dt);
        return {left_, right_};
    }

    /// Density system for the step from `s` with size dt. In explicit-slope
    /// mode the system is diagonal with all fluxes on the right; in
    /// implicit-slope mode the D terms couple neighbouring cells.
    const TridiagonalSystem& assemble(const KineticState& s, double dt, std::span<const double> nodal = {}) {
        check_state(s, nodal);
        prepare(dt);
        build_faces(s);
        build_system(s, dt, nodal);
        return sys_;
    }

    /// Advance `s` by dt in place.
    void advance(KineticState& s, double dt, std::span<const double> nodal = {}) {
        assemble(s, dt, nodal);
        solve_tridiagonal(sys_, rho_new_, scratch_);
        update_f(s, dt, nodal);
        std::copy(rho_new_.begin(), rho_new_.end(), s.rho.begin());
        s.t += dt;
        ++steps_;
        if (!s.all_finite()) throw SolverError("non-finite value in UGKS step", steps_, s.t);
    }

private:
    void check_state(const KineticState& s, std::span<const double> nodal) const {
        if (s.n_cells != mesh_.n_cells() || s.n_nodes != q_.size() || s.f.size() != s.n_cells * s.n_nodes ||
            s.rho.size() != s.n_cells)
            throw InvalidArgument("state does not match mesh and quadrature");
        if (!nodal.empty() && nodal.size() != s.f.size()) throw InvalidArgument("nodal source has the wrong size");
    }

    void prepare(double dt) {
        if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("time step must be positive");
        if (dt == cached_dt_) return;
        const std::size_t nf = mesh_.n_interfaces();
        coef_.resize(nf);
        for (std::size_t j = 0; j < nf; ++j)
            coef_[j] = flux_coefficients(dt, cfg_.eps, mat_.sigma_iface[j], mat_.alpha_iface[j]);
        left_ = left_closure(coef_.front(), q_, bc_, weight_);
        right_ = right_closure(coef_.back(), q_, bc_, weight_);
        cached_dt_ = dt;
    }

    std::span<const double> row(const std::vector<double>& a, std::size_t j) const {
        return {a.data() + j * q_.size(), q_.size()};
    }
    std::span<const double> row(std::span<const double> a, std::size_t j) const {
        return {a.data() + j * q_.size(), q_.size()};
    }
    std::span<double> row(std::vector<double>& a, std::size_t j) { return {a.data() + j * q_.size(), q_.size()}; }

    // Reconstructed values on both sides of every interior interface and the
    // interface densities.
    void build_faces(const KineticState& s) {
        const std::size_t n = q_.size(), nc = mesh_.n_cells();
        const double dx = mesh_.dx();
        const bool second = cfg_.reconstruction == Reconstruction::mc_limited;
        if (second) {
            // zero slope in the first and last cell
            std::fill(df_.begin(), df_.end(), 0.0);
            for (std::size_t i = 1; i + 1 < nc; ++i)
                for (std::size_t k = 0; k < n; ++k)
                    df_[i * n + k] = mc_slope(s.at(i - 1, k), s.at(i, k), s.at(i + 1, k), dx, cfg_.mc_theta);
        }
        for (std::size_t j = 1; j < nc; ++j) {
            auto fl = row(face_l_, j);
            auto fr = row(face_r_, j);
            for (std::size_t k = 0; k < n; ++k) {
                fl[k] = s.at(j - 1, k);
                fr[k] = s.at(j, k);
                if (second) {
                    fl[k] += 0.5 * dx * df_[(j - 1) * n + k];
                    fr[k] -= 0.5 * dx * df_[j * n + k];
                }
            }
            rho_if_[j] = interface_density(fl, fr, q_);
        }
        rho_if_[0] = left_.rho;
        rho_if_[nc] = right_.rho;
    }

    // Source rows seen from interface j: upwind cell per node for a nodal
    // source, the interface mean otherwise.
    InterfaceData interface_data(std::size_t j, std::span<const double> nodal) {
        InterfaceData in;
        in.f_left = row(face_l_, j);
        in.f_right = row(face_r_, j);
        if (nodal.empty()) {
            std::fill(gbuf_.begin(), gbuf_.end(), mat_.g_iface[j]);
            in.g_left = gbuf_;
            in.g_right = gbuf_;
        } else {
            in.g_left = row(nodal, j - 1);
            in.g_right = row(nodal, j);
        }
        if (cfg_.reconstruction == Reconstruction::mc_limited) {
            in.df_left = row(df_, j - 1);
            in.df_right = row(df_, j);
        }
        return in;
    }

    std::span<const double> wall_source(std::size_t cell, std::size_t j, std::span<const double> nodal) {
        if (!nodal.empty()) return row(nodal, cell);
        std::fill(gbuf_.begin(), gbuf_.end(), mat_.g_iface[j]);
        return gbuf_;
    }

    double cell_source(std::size_t i, std::span<const double> nodal) const {
        return nodal.empty() ? mat_.g_cell[i] : mat_.g_cell[i] + average(q_, row(nodal, i));
    }

    void build_system(const KineticState& s, double dt, std::span<const double> nodal) {
        const std::size_t nc = mesh_.n_cells();
        const double dx = mesh_.dx();
        lin_[0] = left_wall_linear(coef_[0], q_, left_, s.cell(0), wall_source(0, 0, nodal), dx);
        lin_[nc] = right_wall_linear(coef_[nc], q_, right_, s.cell(nc - 1), wall_source(nc - 1, nc, nodal), dx);
        for (std::size_t j = 1; j < nc; ++j)
            lin_[j] = macro_flux_linear(coef_[j], q_, interface_data(j, nodal), rho_if_[j], dx);

        const bool implicit = cfg_.diffusion == DiffusionMode::implicit_slopes;
        for (std::size_t i = 0; i < nc; ++i) {
            const LinearFlux& w = lin_[i];
            const LinearFlux& e = lin_[i + 1];
            const double base = s.rho[i] / dt + cell_source(i, nodal);
            if (implicit) {
                sys_.diag[i] = 1.0 / dt + mat_.alpha_cell[i] + (e.w_left - w.w_right) / dx;
                sys_.upper[i] = e.w_right / dx;
                sys_.lower[i] = -w.w_left / dx;
                sys_.rhs[i] = base - (e.k0 - w.k0) / dx;
            } else {
                const double rl = i > 0 ? s.rho[i - 1] : 0.0;
                const double rr = i + 1 < nc ? s.rho[i + 1] : 0.0;
                const double phi_e = e(s.rho[i], rr);
                const double phi_w = w(rl, s.rho[i]);
                sys_.diag[i] = 1.0 / dt + mat_.alpha_cell[i];
                sys_.upper[i] = 0.0;
                sys_.lower[i] = 0.0;
                sys_.rhs[i] = base - (phi_e - phi_w) / dx;
            }
        }
    }

    void update_f(KineticState& s, double dt, std::span<const double> nodal) {
        const std::size_t n = q_.size(), nc = mesh_.n_cells();
        const double dx = mesh_.dx();
        const auto& rho_slope = cfg_.diffusion == DiffusionMode::implicit_slopes ? rho_new_ : s.rho;
        const auto v = q_.nodes();
        const bool second = cfg_.reconstruction == Reconstruction::mc_limited;

        {
            auto g = wall_source(0, 0, nodal);
            for (std::size_t k = 0; k < n; ++k)
                phi_[k] = left_wall_micro(coef_[0], v[k], bc_.f_left[k], left_, s.at(0, k), rho_slope[0], dx, g[k]);
            g = wall_source(nc - 1, nc, nodal);
            for (std::size_t k = 0; k < n; ++k)
                phi_[nc * n + k] = right_wall_micro(coef_[nc], v[k], bc_.f_right[k], right_, s.at(nc - 1, k),
                                                    rho_slope[nc - 1], dx, g[k]);
        }
        for (std::size_t j = 1; j < nc; ++j) {
            const FluxCoefficients& c = coef_[j];
            const SlopePair rs = slopes(rho_if_[j], rho_slope[j - 1], rho_slope[j], dx);
            const auto fl = row(face_l_, j);
            const auto fr = row(face_r_, j);
            const double gi = mat_.g_iface[j];
            for (std::size_t k = 0; k < n; ++k) {
                const double g = nodal.empty() ? gi : (v[k] > 0.0 ? nodal[(j - 1) * n + k] : nodal[j * n + k]);
                SlopePair fs;
                if (second) fs = {df_[(j - 1) * n + k], df_[j * n + k]};
                phi_[j * n + k] = micro_flux(c, v[k], fl[k], fr[k], rho_if_[j], rs, g, fs);
            }
        }

        const double eps2 = cfg_.eps * cfg_.eps;
        for (std::size_t i = 0; i < nc; ++i) {
            const double relax = mat_.sigma_cell[i] / eps2;
            const double denom = 1.0 / dt + relax + mat_.alpha_cell[i];
            const double gain = relax * rho_new_[i] + mat_.g_cell[i];
            for (std::size_t k = 0; k < n; ++k) {
                const double src = nodal.empty() ? gain : gain + nodal[i * n + k];
                const double div = (phi_[(i + 1) * n + k] - phi_[i * n + k]) / dx;
                s.at(i, k) = (s.at(i, k) / dt - div + src) / denom;
            }
        }
    }

    SchemeConfig cfg_;
    MaterialField mat_;
    SpatialMesh mesh_;
    VelocityQuadrature q_;
    BoundarySpec bc_;
    ChandrasekharWeight weight_;

    double cached_dt_ = -1.0;
    std::vector<FluxCoefficients> coef_;
    BoundaryClosure left_, right_;
    std::vector<double> face_l_, face_r_, df_, phi_, rho_if_, rho_new_, gbuf_, scratch_;
    std::vector<LinearFlux> lin_;
    TridiagonalSystem sys_;
    std::size_t steps_ = 0;
};

/// Pure single step: returns the state at t + dt.
inline KineticState step(const KineticState& s, const SchemeConfig& cfg, const MaterialField& mat,
                         const SpatialMesh& mesh, const VelocityQuadrature& q, const BoundarySpec& bc, double dt) {
    UgksStepper stepper(cfg, mat, mesh, q, bc);
    KineticState out = s;
    stepper.advance(out, dt);
    return out;
}

/// Density system of one step, e.g. to read off effective diffusivities.
inline TridiagonalSystem assemble_macro_system(const KineticState& s, const SchemeConfig& cfg,
                                               const MaterialField& mat, const SpatialMesh& mesh,
                                               const VelocityQuadrature& q, const BoundarySpec& bc, double dt) {
    UgksStepper stepper(cfg, mat, mesh, q, bc);
    return stepper.assemble(s, dt);
}

}  // namespace ugks
