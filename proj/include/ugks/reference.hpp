#pragma once

#include "ugks/boundary.hpp"
#include "ugks/error.hpp"
#include "ugks/flux.hpp"
#include "ugks/mesh.hpp"
#include "ugks/quadrature.hpp"
#include "ugks/state.hpp"
#include "ugks/stepper.hpp"
#include "ugks/tridiagonal.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <utility>
#include <vector>

namespace ugks {

/// Largest stable step of the fully explicit upwind kinetic scheme (before
/// the cfl factor): min(eps dx, eps^2 / (sigma_max + eps^2 alpha_max)).
inline double upwind_max_dt(double eps, const MaterialField& mat, const SpatialMesh& mesh) {
    const double stiff = mat.sigma_max() + eps * eps * mat.alpha_max();
    const double transport = eps * mesh.dx();
    return stiff > 0.0 ? std::min(transport, eps * eps / stiff) : transport;
}

/// Explicit upwind discretization of the kinetic equation with explicit
/// relaxation. With the MC reconstruction the interface value is the
/// MUSCL-Hancock half-step prediction f_i + (dx/2 - v dt/(2 eps)) df_i; the
/// first and last cells keep a zero slope.
class UpwindStepper {
public:
    UpwindStepper(double eps, MaterialField mat, const SpatialMesh& mesh, const VelocityQuadrature& q,
                  BoundarySpec bc, Reconstruction rec = Reconstruction::first_order, double mc_theta = 1.5)
        : eps_(eps), mat_(std::move(mat)), mesh_(mesh), q_(q), bc_(std::move(bc)), rec_(rec), theta_(mc_theta) {
        if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
        bc_.validate(q_);
        if (mat_.n_cells() != mesh_.n_cells()) throw InvalidArgument("material and mesh sizes differ");
        face_.assign((mesh_.n_cells() + 1) * q_.size(), 0.0);
        df_.assign(mesh_.n_cells() * q_.size(), 0.0);
    }

    double max_dt() const { return upwind_max_dt(eps_, mat_, mesh_); }

    void advance(KineticState& s, double dt) {
        if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
        if (dt > max_dt() * (1.0 + 1e-12))
            throw ConfigError("upwind time step " + std::to_string(dt) + " exceeds the explicit bound " +
                              std::to_string(max_dt()));
        const std::size_t n = q_.size(), nc = mesh_.n_cells();
        const double dx = mesh_.dx();
        const auto v = q_.nodes();
        const bool second = rec_ == Reconstruction::mc_limited;

        if (second) {
            for (std::size_t i = 1; i + 1 < nc; ++i)
                for (std::size_t k = 0; k < n; ++k)
                    df_[i * n + k] = mc_slope(s.at(i - 1, k), s.at(i, k), s.at(i + 1, k), dx, theta_);
        }
        // upwind value at every interface, scaled flux v f / eps
        for (std::size_t j = 0; j <= nc; ++j) {
            for (std::size_t k = 0; k < n; ++k) {
                double f;
                if (v[k] > 0.0) {
                    if (j == 0) {
                        f = bc_.f_left[k];
                    } else {
                        f = s.at(j - 1, k);
                        if (second) f += (0.5 * dx - 0.5 * v[k] * dt / eps_) * df_[(j - 1) * n + k];
                    }
                } else {
                    if (j == nc) {
                        f = bc_.f_right[k];
                    } else {
                        f = s.at(j, k);
                        if (second) f -= (0.5 * dx + 0.5 * v[k] * dt / eps_) * df_[j * n + k];
                    }
                }
                face_[j * n + k] = v[k] * f / eps_;
            }
        }
        const double eps2 = eps_ * eps_;
        for (std::size_t i = 0; i < nc; ++i) {
            const double rho = average(q_, s.cell(i));
            const double relax = mat_.sigma_cell[i] / eps2;
            for (std::size_t k = 0; k < n; ++k) {
                const double f = s.at(i, k);
                const double div = (face_[(i + 1) * n + k] - face_[i * n + k]) / dx;
                s.at(i, k) = f - dt * div + dt * (relax * (rho - f) - mat_.alpha_cell[i] * f + mat_.g_cell[i]);
            }
        }
        for (std::size_t i = 0; i < nc; ++i) s.rho[i] = average(q_, s.cell(i));
        s.t += dt;
        ++steps_;
        if (!s.all_finite()) throw SolverError("non-finite value in upwind step", steps_, s.t);
    }

    std::size_t steps_taken() const noexcept { return steps_; }

private:
    double eps_;
    MaterialField mat_;
    SpatialMesh mesh_;
    VelocityQuadrature q_;
    BoundarySpec bc_;
    Reconstruction rec_;
    double theta_;
    std::vector<double> face_, df_;
    std::size_t steps_ = 0;
};

inline KineticState upwind_step(const KineticState& s, double eps, const MaterialField& mat, const SpatialMesh& mesh,
                                const VelocityQuadrature& q, const BoundarySpec& bc, double dt) {
    UpwindStepper stepper(eps, mat, mesh, q, bc);
    KineticState out = s;
    stepper.advance(out, dt);
    return out;
}

enum class DiffusionScheme { explicit_euler, implicit_euler };

/// kappa = 1 / (3 sigma) at every interface, walls included.
inline std::vector<double> interface_diffusivity(const MaterialField& mat) {
    std::vector<double> kappa(mat.sigma_iface.size());
    for (std::size_t j = 0; j < kappa.size(); ++j) {
        if (!(mat.sigma_iface[j] > 0.0)) throw InvalidData("diffusion limit needs sigma > 0 at every interface");
        kappa[j] = 1.0 / (3.0 * mat.sigma_iface[j]);
    }
    return kappa;
}

/// Three-point scheme for d_t rho - d_x(kappa d_x rho) = -alpha rho + G with
/// Dirichlet walls. The wall flux is kappa (rho_1 - rho_wall) / dx, the
/// diffusion limit of the kinetic boundary flux. Absorption is implicit in
/// both schemes.
struct DiffusionProblem {
    std::vector<double> kappa_iface;  ///< n_cells + 1 entries
    std::vector<double> alpha;
    std::vector<double> g;
    double dx = 0;
    double rho_left = 0;
    double rho_right = 0;

    std::size_t n_cells() const noexcept { return alpha.size(); }
    double max_explicit_dt() const { return dx * dx / (2.0 * *std::max_element(kappa_iface.begin(), kappa_iface.end())); }

    void validate() const {
        const std::size_t n = alpha.size();
        if (n < 2 || g.size() != n || kappa_iface.size() != n + 1) throw InvalidArgument("diffusion problem sizes");
        if (!(dx > 0.0)) throw InvalidArgument("dx must be positive");
    }
};

class DiffusionStepper {
public:
    explicit DiffusionStepper(DiffusionProblem p) : p_(std::move(p)) {
        p_.validate();
        sys_.resize(p_.n_cells());
        next_.assign(p_.n_cells(), 0.0);
    }

    const DiffusionProblem& problem() const noexcept { return p_; }

    void advance(std::vector<double>& rho, double dt, DiffusionScheme scheme) {
        const std::size_t n = p_.n_cells();
        if (rho.size() != n) throw InvalidArgument("density size does not match the problem");
        if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
        if (scheme == DiffusionScheme::explicit_euler) {
            if (dt > p_.max_explicit_dt() * (1.0 + 1e-12))
                throw ConfigError("explicit diffusion step " + std::to_string(dt) + " exceeds dx^2/(2 kappa) = " +
                                  std::to_string(p_.max_explicit_dt()));
            explicit_steps(rho, dt, 1);
        } else {
            const double dx2 = p_.dx * p_.dx;
            const auto& kap = p_.kappa_iface;
            for (std::size_t i = 0; i < n; ++i) {
                sys_.diag[i] = 1.0 / dt + p_.alpha[i] + (kap[i] + kap[i + 1]) / dx2;
                sys_.lower[i] = -kap[i] / dx2;
                sys_.upper[i] = -kap[i + 1] / dx2;
                sys_.rhs[i] = rho[i] / dt + p_.g[i];
            }
            sys_.rhs[0] += kap[0] * p_.rho_left / dx2;
            sys_.rhs[n - 1] += kap[n] * p_.rho_right / dx2;
            solve_tridiagonal(sys_, next_, scratch_);
            rho.swap(next_);
        }
        // NaN and inf survive summation, so one pass checks every entry
        double sum = 0.0;
        for (double r : rho) sum += r;
        if (!std::isfinite(sum)) throw SolverError("non-finite value in diffusion step", 0, 0.0);
    }

    /// `count` explicit steps of size dt without leaving the padded buffers.
    void advance_explicit(std::vector<double>& rho, double dt, std::size_t count) {
        if (rho.size() != p_.n_cells()) throw InvalidArgument("density size does not match the problem");
        if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
        if (dt > p_.max_explicit_dt() * (1.0 + 1e-12))
            throw ConfigError("explicit diffusion step " + std::to_string(dt) + " exceeds dx^2/(2 kappa) = " +
                              std::to_string(p_.max_explicit_dt()));
        explicit_steps(rho, dt, count);
        double sum = 0.0;
        for (double r : rho) sum += r;
        if (!std::isfinite(sum)) throw SolverError("non-finite value in diffusion step", 0, 0.0);
    }

private:
    void explicit_steps(std::vector<double>& rho, double dt, std::size_t count) {
        const std::size_t n = p_.n_cells();
        if (dt != explicit_dt_) prepare_explicit(dt);
        // ping-pong between two padded buffers whose ends hold the Dirichlet values
        pad_[0] = pad2_[0] = p_.rho_left;
        pad_[n + 1] = pad2_[n + 1] = p_.rho_right;
        std::copy(rho.begin(), rho.end(), pad_.begin() + 1);
        double* cur = pad_.data();
        double* nxt = pad2_.data();
        const double* cl = cl_.data();
        const double* cr = cr_.data();
        const double* inv = inv_.data();
        const double* gdt = gdt_.data();
        for (std::size_t s = 0; s < count; ++s) {
            for (std::size_t i = 1; i <= n; ++i)
                nxt[i] = (cur[i] + cr[i - 1] * (cur[i + 1] - cur[i]) - cl[i - 1] * (cur[i] - cur[i - 1]) + gdt[i - 1]) *
                         inv[i - 1];
            std::swap(cur, nxt);
        }
        std::copy(cur + 1, cur + n + 1, rho.begin());
    }

    // Explicit update rho' = (rho + cr drho_east - cl drho_west + dt g) / (1 + dt alpha),
    // with the per-cell factors cached for the current dt.
    void prepare_explicit(double dt) {
        const std::size_t n = p_.n_cells();
        const double s = dt / (p_.dx * p_.dx);
        cl_.resize(n);
        cr_.resize(n);
        inv_.resize(n);
        gdt_.resize(n);
        pad_.assign(n + 2, 0.0);
        pad2_.assign(n + 2, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            cl_[i] = s * p_.kappa_iface[i];
            cr_[i] = s * p_.kappa_iface[i + 1];
            inv_[i] = 1.0 / (1.0 + dt * p_.alpha[i]);
            gdt_[i] = dt * p_.g[i];
        }
        explicit_dt_ = dt;
    }

    DiffusionProblem p_;
    TridiagonalSystem sys_;
    std::vector<double> next_, scratch_;
    std::vector<double> cl_, cr_, inv_, gdt_, pad_, pad2_;
    double explicit_dt_ = -1.0;
};

inline std::vector<double> diffusion_step(std::vector<double> rho, const std::vector<double>& kappa_iface,
                                          const std::vector<double>& alpha, const std::vector<double>& g, double dx,
                                          double dt, DiffusionScheme scheme, std::pair<double, double> dirichlet) {
    DiffusionStepper stepper({kappa_iface, alpha, g, dx, dirichlet.first, dirichlet.second});
    stepper.advance(rho, dt, scheme);
    return rho;
}

namespace detail {

inline bool incoming_isotropic(std::span<const double> f, const VelocityQuadrature& q, bool left) {
    const double first = left ? f[q.pos(0)] : f[q.neg(0)];
    for (std::size_t j = 0; j < q.half(); ++j)
        if ((left ? f[q.pos(j)] : f[q.neg(j)]) != first) return false;
    return true;
}

}  // namespace detail

/// Dirichlet data of the diffusion limit: the inflow value itself when it is
/// isotropic, otherwise the Chandrasekhar density (mirrored on the right).
inline std::pair<double, double> diffusion_dirichlet(const BoundarySpec& bc, const VelocityQuadrature& q) {
    bc.validate(q);
    const ChandrasekharWeight w(bc.weight, q);
    double left, right;
    if (detail::incoming_isotropic(bc.f_left, q, true))
        left = bc.f_left[q.pos(0)];
    else
        left = chandrasekhar_density(bc.f_left, w, q);
    if (detail::incoming_isotropic(bc.f_right, q, false))
        right = bc.f_right[q.neg(0)];
    else
        right = 2.0 * q.sum_neg([&](std::size_t k) { return w.samples[k] * bc.f_right[k]; });
    return {left, right};
}

/// Diffusion problem of the eps -> 0 limit for a material field.
inline DiffusionProblem diffusion_problem(const MaterialField& mat, const SpatialMesh& mesh, const BoundarySpec& bc,
                                          const VelocityQuadrature& q) {
    const auto [l, r] = diffusion_dirichlet(bc, q);
    return {interface_diffusivity(mat), mat.alpha_cell, mat.g_cell, mesh.dx(), l, r};
}

}  // namespace ugks
