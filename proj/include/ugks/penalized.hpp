#pragma once

#include "ugks/boundary.hpp"
#include "ugks/error.hpp"
#include "ugks/mesh.hpp"
#include "ugks/quadrature.hpp"
#include "ugks/state.hpp"
#include "ugks/stepper.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace ugks {

/// Kernel k(v_j, v_k) sampled on node pairs. Entries must be positive and
/// symmetric; k_min and k_max are the extreme entries.
class ScatteringKernel {
public:
    ScatteringKernel(const VelocityQuadrature& q, Eigen::MatrixXd entries) : entries_(std::move(entries)) {
        const auto n = static_cast<Eigen::Index>(q.size());
        if (entries_.rows() != n || entries_.cols() != n)
            throw InvalidArgument("kernel table must be n x n for an n-node quadrature");
        for (Eigen::Index j = 0; j < n; ++j) {
            for (Eigen::Index k = 0; k < n; ++k) {
                const double e = entries_(j, k);
                if (!(e > 0.0) || !std::isfinite(e)) throw InvalidData("kernel entries must be positive and finite");
                if (std::abs(e - entries_(k, j)) > 1e-12 * std::max(e, entries_(k, j)))
                    throw InvalidData("kernel must be symmetric");
            }
        }
        k_min_ = entries_.minCoeff();
        k_max_ = entries_.maxCoeff();
    }

    template <class K>
    static ScatteringKernel sample(const VelocityQuadrature& q, K&& k) {
        const auto n = static_cast<Eigen::Index>(q.size());
        Eigen::MatrixXd m(n, n);
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index i = 0; i < n; ++i) m(j, i) = k(q.node(j), q.node(i));
        return ScatteringKernel(q, std::move(m));
    }

    /// k = c / 2, whose operator is c (<f> - f).
    static ScatteringKernel isotropic(const VelocityQuadrature& q, double c) {
        if (!(c > 0.0)) throw InvalidData("isotropic kernel needs c > 0");
        const auto n = static_cast<Eigen::Index>(q.size());
        return ScatteringKernel(q, Eigen::MatrixXd::Constant(n, n, 0.5 * c));
    }

    const Eigen::MatrixXd& entries() const noexcept { return entries_; }
    double k_min() const noexcept { return k_min_; }
    double k_max() const noexcept { return k_max_; }

private:
    Eigen::MatrixXd entries_;
    double k_min_ = 0;
    double k_max_ = 0;
};

/// Gain matrix M_jk = w_k k(v_j, v_k). The operator acts as
/// (Lf)_j = sum_k M_jk (f_k - f_j), which annihilates constants exactly.
inline Eigen::MatrixXd gain_matrix(const ScatteringKernel& kernel, const VelocityQuadrature& q) {
    const auto n = static_cast<Eigen::Index>(q.size());
    if (kernel.entries().rows() != n) throw InvalidArgument("kernel and quadrature sizes differ");
    Eigen::MatrixXd m = kernel.entries();
    for (Eigen::Index k = 0; k < n; ++k) m.col(k) *= q.weight(static_cast<std::size_t>(k));
    return m;
}

/// Dense matrix of L: gain matrix minus its row sums on the diagonal.
inline Eigen::MatrixXd assemble_operator(const ScatteringKernel& kernel, const VelocityQuadrature& q) {
    Eigen::MatrixXd l = gain_matrix(kernel, q);
    const Eigen::VectorXd loss = l.rowwise().sum();
    l.diagonal() -= loss;
    return l;
}

/// psi = L^{-1} v with <psi>_h = 0, from the bordered system
/// [L 1; w^T/2 0] [psi; lambda] = [v; 0].
inline std::vector<double> pseudo_inverse_v(const Eigen::MatrixXd& l, const VelocityQuadrature& q) {
    const auto n = static_cast<Eigen::Index>(q.size());
    if (l.rows() != n || l.cols() != n) throw InvalidArgument("operator and quadrature sizes differ");
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n + 1, n + 1);
    a.topLeftCorner(n, n) = l;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
    for (Eigen::Index k = 0; k < n; ++k) {
        a(k, n) = 1.0;
        a(n, k) = 0.5 * q.weight(static_cast<std::size_t>(k));
        rhs(k) = q.node(static_cast<std::size_t>(k));
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (lu.rank() < n + 1) throw InvalidData("operator is singular on zero-mean functions");
    const Eigen::VectorXd sol = lu.solve(rhs);

    std::vector<double> psi(sol.data(), sol.data() + n);
    const double mean = average(q, psi);
    for (double& p : psi) p -= mean;

    const Eigen::Map<const Eigen::VectorXd> pv(psi.data(), n);
    const double resid = (l * pv - rhs.head(n)).lpNorm<Eigen::Infinity>();
    if (!(resid <= 1e-10 * rhs.head(n).lpNorm<Eigen::Infinity>()))
        throw InvalidData("pseudo-inverse residual too large; kernel may violate k_min > 0");
    return psi;
}

/// theta = -<v^2> / <v psi>; strictly positive for a valid kernel.
inline double penalization_theta(std::span<const double> psi, const VelocityQuadrature& q) {
    q.check_size(psi);
    double vpsi = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) vpsi += 0.5 * q.weight(k) * q.node(k) * psi[k];
    const double theta = -q.moments().v2 / vpsi;
    if (!(theta > 0.0) || !std::isfinite(theta)) throw InvalidData("penalization theta is not positive");
    return theta;
}

inline double penalization_theta(const Eigen::MatrixXd& l, const VelocityQuadrature& q) {
    return penalization_theta(pseudo_inverse_v(l, q), q);
}

/// eps^2 - dt (k_max - theta). Nonnegative means the space-homogeneous
/// penalized iteration is stable.
inline double homogeneous_stability_margin(double k_max, double theta, double dt, double eps) {
    return eps * eps - dt * (k_max - theta);
}

/// Everything the penalized stepper needs about a kernel.
struct PenalizedOperator {
    Eigen::MatrixXd gain;    ///< M_jk = w_k k_jk
    Eigen::MatrixXd matrix;  ///< L
    std::vector<double> l_inv_v;
    double theta = 0;
    double k_max = 0;

    PenalizedOperator(const ScatteringKernel& kernel, const VelocityQuadrature& q)
        : gain(gain_matrix(kernel, q)), matrix(assemble_operator(kernel, q)), k_max(kernel.k_max()) {
        l_inv_v = pseudo_inverse_v(matrix, q);
        theta = penalization_theta(l_inv_v, q);
    }

    /// Diffusion coefficient of the limit, -<v L^{-1} v> = <v^2> / theta.
    double kappa(const VelocityQuadrature& q) const { return q.moments().v2 / theta; }

    /// out_j = sum_k M_jk (f_k - f_j).
    void apply(std::span<const double> f, std::span<double> out) const {
        const auto n = gain.rows();
        for (Eigen::Index j = 0; j < n; ++j) {
            double acc = 0.0;
            const double fj = f[static_cast<std::size_t>(j)];
            for (Eigen::Index k = 0; k < n; ++k) acc += gain(j, k) * (f[static_cast<std::size_t>(k)] - fj);
            out[static_cast<std::size_t>(j)] = acc;
        }
    }
};

/// G-tilde = (Lf - theta (<f> - f)) / eps^2 for one cell, projected onto
/// zero mean so rounding cannot feed a spurious density source.
inline void penalization_source(const PenalizedOperator& op, const VelocityQuadrature& q, std::span<const double> f,
                                double eps, std::span<double> out) {
    op.apply(f, out);
    const double rho = average(q, f);
    const double inv_eps2 = 1.0 / (eps * eps);
    for (std::size_t k = 0; k < f.size(); ++k) out[k] = (out[k] - op.theta * (rho - f[k])) * inv_eps2;
    const double mean = average(q, std::span<const double>(out.data(), out.size()));
    for (double& x : out) x -= mean;
}

/// UGKS with the relaxation rate theta as the stiff part and G-tilde as an
/// explicit, velocity-dependent source.
class PenalizedStepper {
public:
    PenalizedStepper(SchemeConfig cfg, PenalizedOperator op, const SpatialMesh& mesh, const VelocityQuadrature& q,
                     BoundarySpec bc, bool allow_unstable = false)
        : op_(std::move(op)),
          core_(cfg, uniform_material(mesh.n_cells(), op_.theta), mesh, q, std::move(bc)),
          allow_unstable_(allow_unstable),
          source_(mesh.n_cells() * q.size(), 0.0) {}

    const PenalizedOperator& op() const noexcept { return op_; }
    UgksStepper& core() noexcept { return core_; }
    double cfl_dt() const { return core_.cfl_dt(); }

    double margin(double dt) const {
        return homogeneous_stability_margin(op_.k_max, op_.theta, dt, core_.config().eps);
    }

    /// Nodal G-tilde of every cell at the current state.
    const std::vector<double>& source(const KineticState& s) {
        const std::size_t n = s.n_nodes;
        for (std::size_t i = 0; i < s.n_cells; ++i)
            penalization_source(op_, core_.quadrature(), s.cell(i), core_.config().eps,
                                std::span<double>(source_.data() + i * n, n));
        return source_;
    }

    void advance(KineticState& s, double dt) {
        if (margin(dt) < 0.0 && !allow_unstable_)
            throw InvalidArgument("penalized step violates dt (k_max - theta) <= eps^2; set allow_unstable to force");
        source(s);
        core_.advance(s, dt, source_);
    }

private:
    static MaterialField uniform_material(std::size_t n, double theta) {
        return material_from_cells(std::vector<double>(n, theta), std::vector<double>(n, 0.0),
                                   std::vector<double>(n, 0.0));
    }

    PenalizedOperator op_;
    UgksStepper core_;
    bool allow_unstable_;
    std::vector<double> source_;
};

inline KineticState penalized_step(const KineticState& s, const SchemeConfig& cfg, const PenalizedOperator& op,
                                   const SpatialMesh& mesh, const VelocityQuadrature& q, const BoundarySpec& bc,
                                   double dt, bool allow_unstable = false) {
    PenalizedStepper stepper(cfg, op, mesh, q, bc, allow_unstable);
    KineticState out = s;
    stepper.advance(out, dt);
    return out;
}

/// One space-homogeneous penalized step: rho is conserved and
/// (1/dt + theta/eps^2) f' = f/dt + G-tilde + theta rho / eps^2.
inline void homogeneous_step(std::span<double> f, const PenalizedOperator& op, const VelocityQuadrature& q,
                             double dt, double eps) {
    std::vector<double> g(f.size());
    penalization_source(op, q, f, eps, g);
    const double rho = average(q, f);
    const double relax = op.theta / (eps * eps);
    for (std::size_t k = 0; k < f.size(); ++k) f[k] = (f[k] / dt + g[k] + relax * rho) / (1.0 / dt + relax);
}

}  // namespace ugks
