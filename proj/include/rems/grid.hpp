#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "rems/context.hpp"

namespace rems {

/// Regular (theta, phi) grid over the full sphere with exact per-cell solid
/// angles: w_ij = (cos th_{i-1/2} - cos th_{i+1/2}) * dphi, so the weights sum
/// to 4*pi at machine precision and w_ij ~ sin(theta) dtheta dphi.
struct AngularGrid {
    Eigen::VectorXd theta;  // polar nodes in [0, pi], ascending
    Eigen::VectorXd phi;    // azimuthal nodes in [0, 2*pi)
    Eigen::VectorXd w;      // flattened weights, node index = i*n_phi + j

    Eigen::Index n_theta() const { return theta.size(); }
    Eigen::Index n_phi() const { return phi.size(); }
    Eigen::Index n_nodes() const { return w.size(); }
    Eigen::Index node(Eigen::Index i, Eigen::Index j) const { return i * n_phi() + j; }

    static std::shared_ptr<const AngularGrid> regular(double step_deg = 1.0) {
        if (!(step_deg > 0.0) || step_deg > 90.0)
            throw std::invalid_argument("grid step must be in (0, 90] degrees");
        auto g = std::make_shared<AngularGrid>();
        const double step = step_deg * pi / 180.0;
        const Eigen::Index nth = static_cast<Eigen::Index>(std::llround(pi / step)) + 1;
        const Eigen::Index nph = static_cast<Eigen::Index>(std::llround(2.0 * pi / step));
        g->theta = Eigen::VectorXd::LinSpaced(nth, 0.0, pi);
        g->phi = Eigen::VectorXd::LinSpaced(nph, 0.0, 2.0 * pi * (nph - 1.0) / nph);
        g->w.resize(nth * nph);
        const double dphi = 2.0 * pi / static_cast<double>(nph);
        const double dth = pi / static_cast<double>(nth - 1);
        for (Eigen::Index i = 0; i < nth; ++i) {
            const double lo = std::max(0.0, g->theta(i) - dth / 2.0);
            const double hi = std::min(pi, g->theta(i) + dth / 2.0);
            const double wi = (std::cos(lo) - std::cos(hi)) * dphi;
            for (Eigen::Index j = 0; j < nph; ++j) g->w(g->node(i, j)) = wi;
        }
        return g;
    }

    struct Snap {
        Eigen::Index i = 0, j = 0, node = 0;
        double distance = 0.0;  // great-circle angle to the requested direction, rad
    };

    /// Nearest grid node to an arbitrary direction (radians).
    Snap nearest(double th, double ph) const {
        const double dth = n_theta() > 1 ? theta(1) - theta(0) : pi;
        const double dphi = 2.0 * pi / static_cast<double>(n_phi());
        Eigen::Index i = static_cast<Eigen::Index>(std::llround(th / dth));
        i = std::clamp<Eigen::Index>(i, 0, n_theta() - 1);
        double phw = std::fmod(ph, 2.0 * pi);
        if (phw < 0.0) phw += 2.0 * pi;
        Eigen::Index j = static_cast<Eigen::Index>(std::llround(phw / dphi)) % n_phi();
        Snap s;
        s.i = i;
        s.j = j;
        s.node = node(i, j);
        // angle between the two unit vectors
        const double c = std::sin(th) * std::sin(theta(i)) * std::cos(phw - phi(j)) +
                         std::cos(th) * std::cos(theta(i));
        s.distance = std::acos(std::clamp(c, -1.0, 1.0));
        return s;
    }

    /// Node indices of the upper hemisphere theta <= pi/2 (+eps).
    std::vector<Eigen::Index> hemisphere_nodes() const {
        std::vector<Eigen::Index> out;
        for (Eigen::Index i = 0; i < n_theta(); ++i) {
            if (theta(i) > pi / 2.0 + 1e-12) break;
            for (Eigen::Index j = 0; j < n_phi(); ++j) out.push_back(node(i, j));
        }
        return out;
    }
};

/// Sampled outgoing far-field power-wave pattern: two complex components
/// (theta-hat, phi-hat) per grid node, units sqrt(W/sr).
struct FarFieldPattern {
    Eigen::Matrix2Xcd a;  // column per node
    std::shared_ptr<const AngularGrid> grid;
};

/// L2 inner product over the sphere: sum_ij w_ij * p_ij^H q_ij.
inline cplx l2_inner(const FarFieldPattern& p, const FarFieldPattern& q) {
    if (p.grid != q.grid &&
        (p.grid->n_nodes() != q.grid->n_nodes() || p.grid->theta != q.grid->theta))
        throw std::invalid_argument("l2_inner: patterns live on different grids");
    if (p.a.cols() != q.a.cols()) throw std::invalid_argument("l2_inner: size mismatch");
    Eigen::RowVectorXcd per_node =
        p.a.row(0).conjugate().cwiseProduct(q.a.row(0)) +
        p.a.row(1).conjugate().cwiseProduct(q.a.row(1));
    return (per_node.transpose().cwiseProduct(p.grid->w.cast<cplx>())).sum();
}

inline double l2_norm_sq(const FarFieldPattern& p) { return l2_inner(p, p).real(); }

}  // namespace rems
