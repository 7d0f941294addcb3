#pragma once

#include <Eigen/Dense>

#include "rems/grid.hpp"
#include "rems/network.hpp"

namespace rems {

/// Antenna array seen from its ports: inter-element coupling matrix S_RR and
/// one far-field pattern per port (the columns of the transmitting operator).
struct RadiatingStructure {
    Eigen::MatrixXcd S_RR;               // M x M
    std::vector<FarFieldPattern> patterns;  // size M
    std::vector<PortSpec> ports;
    WaveContext ctx;
    std::shared_ptr<const AngularGrid> grid;

    Eigen::Index n_elements() const { return S_RR.rows(); }

    /// 2 x M pattern slice at one grid node: a_F(node) = slice * a_R.
    Eigen::Matrix2Xcd pattern_slice(Eigen::Index node) const {
        Eigen::Matrix2Xcd f(2, n_elements());
        for (Eigen::Index m = 0; m < n_elements(); ++m) f.col(m) = patterns[m].a.col(node);
        return f;
    }
};

/// L2 Gram matrix of the per-port patterns: P_mn = <e_m, e_n>.
inline Eigen::MatrixXcd gram(const RadiatingStructure& rs) {
    const Eigen::Index m = static_cast<Eigen::Index>(rs.patterns.size());
    Eigen::MatrixXcd p(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = i; j < m; ++j) {
            p(i, j) = l2_inner(rs.patterns[i], rs.patterns[j]);
            p(j, i) = std::conj(p(i, j));
        }
    }
    return p;
}

/// No direction may radiate more power than enters the ports:
/// Gram(patterns) <= I - S_RR^H S_RR (+ tol). Returns the worst violation
/// (negative eigenvalue); values >= -tol are acceptable.
inline double passivity_violation(const RadiatingStructure& rs) {
    const Eigen::Index m = rs.n_elements();
    Eigen::MatrixXcd gap =
        Eigen::MatrixXcd::Identity(m, m) - rs.S_RR.adjoint() * rs.S_RR - gram(rs);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gap);
    return -es.eigenvalues().minCoeff();
}

struct ElementModel {
    double exponent = 1.0;          // cos^q(theta) amplitude taper, hemisphere only
    bool theta_polarized = true;    // otherwise phi-hat polarized
};

/// Synthetic rows x cols planar array in the z = 0 plane (broadside theta = 0),
/// physically consistent by construction:
///   1. raw patterns cos^q(theta) 1{theta <= pi/2} pol e^{+jk r_m.u}
///   2. scale so the Gram satisfies P <= (1-eps) I
///   3. S_RR = (I - P)^{1/2}, making the structure exactly lossless
///   4. scale patterns by sqrt(eta) for radiation efficiency eta
/// yielding Gram = eta * (I - S_RR^H S_RR).
inline RadiatingStructure synthesize_array(int rows, int cols, double spacing_lambda,
                                           const ElementModel& element, double efficiency,
                                           const WaveContext& ctx,
                                           std::shared_ptr<const AngularGrid> grid) {
    if (rows < 1 || cols < 1) throw std::invalid_argument("synthesize_array: empty array");
    if (!(spacing_lambda > 0.0)) throw std::invalid_argument("synthesize_array: spacing must be > 0");
    if (!(efficiency > 0.0) || efficiency > 1.0)
        throw std::invalid_argument("synthesize_array: efficiency must be in (0, 1]");
    if (std::abs(grid->w.sum() - 4.0 * pi) > 1e-4 * 4.0 * pi)
        throw std::invalid_argument("synthesize_array: grid resolution insufficient");

    const Eigen::Index m = static_cast<Eigen::Index>(rows) * cols;
    const Eigen::Index nn = grid->n_nodes();
    const double d = spacing_lambda * ctx.lambda;

    RadiatingStructure rs;
    rs.ctx = ctx;
    rs.grid = grid;
    rs.ports.assign(static_cast<size_t>(m), PortSpec(ctx.R0));
    rs.patterns.reserve(static_cast<size_t>(m));

    // Element positions, centered.
    std::vector<Eigen::Vector3d> pos;
    pos.reserve(static_cast<size_t>(m));
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            pos.emplace_back((c - 0.5 * (cols - 1)) * d, (r - 0.5 * (rows - 1)) * d, 0.0);

    // Shared scalar taper and per-node direction vectors.
    Eigen::VectorXd taper(nn);
    Eigen::Matrix3Xd u(3, nn);
    for (Eigen::Index i = 0; i < grid->n_theta(); ++i) {
        const double th = grid->theta(i);
        const double t = th <= pi / 2.0 + 1e-12 ? std::pow(std::cos(std::min(th, pi / 2.0)),
                                                           element.exponent)
                                                : 0.0;
        for (Eigen::Index j = 0; j < grid->n_phi(); ++j) {
            const Eigen::Index n = grid->node(i, j);
            taper(n) = t;
            const double ph = grid->phi(j);
            u.col(n) = Eigen::Vector3d(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph),
                                       std::cos(th));
        }
    }

    const int comp = element.theta_polarized ? 0 : 1;
    for (Eigen::Index e = 0; e < m; ++e) {
        FarFieldPattern p;
        p.grid = grid;
        p.a = Eigen::Matrix2Xcd::Zero(2, nn);
        Eigen::VectorXd phase = ctx.k * (pos[e].transpose() * u).transpose();
        for (Eigen::Index n = 0; n < nn; ++n)
            p.a(comp, n) = taper(n) * std::exp(cplx(0.0, phase(n)));
        rs.patterns.push_back(std::move(p));
    }

    Eigen::MatrixXcd praw = gram(rs);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(praw);
    const double lmax = es.eigenvalues().maxCoeff();
    if (es.eigenvalues().minCoeff() < 1e-12 * lmax) {
        // coincident or near-coincident elements: rank-deficient Gram
        // (allowed, the construction still goes through)
    }
    constexpr double eps_headroom = 1e-6;
    const double scale = std::sqrt((1.0 - eps_headroom) / lmax);
    for (auto& p : rs.patterns) p.a *= scale;

    Eigen::MatrixXcd pmat = praw * (scale * scale);
    // Hermitian PSD square root of I - P.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> esp(
        Eigen::MatrixXcd::Identity(m, m) - (pmat + pmat.adjoint()) / 2.0);
    Eigen::VectorXd ev = esp.eigenvalues().cwiseMax(0.0);
    rs.S_RR = esp.eigenvectors() * ev.cwiseSqrt().asDiagonal() * esp.eigenvectors().adjoint();

    const double se = std::sqrt(efficiency);
    for (auto& p : rs.patterns) p.a *= se;
    return rs;
}

}  // namespace rems
