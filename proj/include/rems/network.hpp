#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "rems/context.hpp"

namespace rems {

/// n-port scattering description at per-port reference impedances.
/// Immutable by convention: operations return new networks.
struct MultiportNetwork {
    Eigen::MatrixXcd S;
    std::vector<PortSpec> ports;
    WaveContext ctx;

    Eigen::Index size() const { return S.rows(); }
};

namespace detail {

inline void check_square(const Eigen::MatrixXcd& S, const std::vector<PortSpec>& ports) {
    if (S.rows() != S.cols()) throw std::invalid_argument("scattering matrix must be square");
    if (static_cast<Eigen::Index>(ports.size()) != S.rows())
        throw std::invalid_argument("port count does not match matrix dimension");
    if (!S.allFinite()) throw std::invalid_argument("non-finite scattering matrix");
}

inline double condition_2norm(const Eigen::MatrixXcd& A) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) <= 0.0) return std::numeric_limits<double>::infinity();
    return sv(0) / sv(sv.size() - 1);
}

inline constexpr double interconnect_cond_limit = 1e12;

}  // namespace detail

inline MultiportNetwork make_network(Eigen::MatrixXcd S, std::vector<PortSpec> ports,
                                     const WaveContext& ctx) {
    detail::check_square(S, ports);
    return MultiportNetwork{std::move(S), std::move(ports), ctx};
}

/// Impedance matrix -> scattering matrix in the power-wave convention
/// S = F (Z - Zr^H)(Z + Zr)^{-1} F^{-1}, F = diag(1/(2 sqrt(Re zr_i))).
inline MultiportNetwork convert_z_s(const Eigen::MatrixXcd& Z, std::vector<PortSpec> ports,
                                    const WaveContext& ctx) {
    const Eigen::Index n = Z.rows();
    if (Z.cols() != n) throw std::invalid_argument("impedance matrix must be square");
    if (static_cast<Eigen::Index>(ports.size()) != n)
        throw std::invalid_argument("port count does not match matrix dimension");

    Eigen::VectorXcd zr(n), zrc(n);
    Eigen::VectorXd fdiag(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        zr(i) = ports[i].zref;
        zrc(i) = std::conj(ports[i].zref);
        fdiag(i) = 1.0 / (2.0 * std::sqrt(ports[i].zref.real()));
    }
    Eigen::MatrixXcd denom = Z + zr.asDiagonal().toDenseMatrix();
    if (detail::condition_2norm(denom) > detail::interconnect_cond_limit)
        throw DegenerateNetwork("degenerate network: Z + Zref is numerically singular");
    Eigen::MatrixXcd num = Z - zrc.asDiagonal().toDenseMatrix();
    Eigen::MatrixXcd S = fdiag.asDiagonal() * num * denom.inverse() *
                         fdiag.cwiseInverse().asDiagonal().toDenseMatrix();
    return make_network(std::move(S), std::move(ports), ctx);
}

/// Inverse of convert_z_s.
inline Eigen::MatrixXcd s_to_z(const MultiportNetwork& net) {
    const Eigen::Index n = net.size();
    Eigen::VectorXcd zr(n), zrc(n);
    Eigen::VectorXd fdiag(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        zr(i) = net.ports[i].zref;
        zrc(i) = std::conj(net.ports[i].zref);
        fdiag(i) = 1.0 / (2.0 * std::sqrt(net.ports[i].zref.real()));
    }
    // S' = F^{-1} S F; Z = (I - S')^{-1} (S' Zr + Zr^H)
    Eigen::MatrixXcd Sp = fdiag.cwiseInverse().asDiagonal() * net.S *
                          fdiag.asDiagonal().toDenseMatrix();
    Eigen::MatrixXcd lhs = Eigen::MatrixXcd::Identity(n, n) - Sp;
    if (detail::condition_2norm(lhs) > detail::interconnect_cond_limit)
        throw DegenerateNetwork("degenerate network: I - S is numerically singular");
    Eigen::MatrixXcd rhs = Sp * zr.asDiagonal() + zrc.asDiagonal().toDenseMatrix();
    return lhs.inverse() * rhs;
}

/// Same physical network re-expressed at new reference impedances.
/// Derived from the wave change-of-basis a2 = P a1, b2 = Q a1 (with b1 = S a1),
/// which never needs an impedance representation to exist.
inline MultiportNetwork renormalize(const MultiportNetwork& net, std::vector<PortSpec> new_ports) {
    const Eigen::Index n = net.size();
    if (static_cast<Eigen::Index>(new_ports.size()) != n)
        throw std::invalid_argument("renormalize: port count mismatch");

    Eigen::MatrixXcd P(n, n), Q(n, n);
    P.setZero();
    Q.setZero();
    Eigen::VectorXcd d_p(n), d_q(n), e_p(n), e_q(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const cplx z1 = net.ports[i].zref;
        const cplx z2 = new_ports[i].zref;
        const double norm = 2.0 * std::sqrt(z1.real() * z2.real());
        d_p(i) = (std::conj(z1) + z2) / norm;        // a1 coefficient in a2
        e_p(i) = (z1 - z2) / norm;                   // b1 coefficient in a2
        d_q(i) = (std::conj(z1) - std::conj(z2)) / norm;  // a1 coefficient in b2
        e_q(i) = (z1 + std::conj(z2)) / norm;        // b1 coefficient in b2
    }
    P = d_p.asDiagonal().toDenseMatrix() + e_p.asDiagonal() * net.S;
    Q = d_q.asDiagonal().toDenseMatrix() + e_q.asDiagonal() * net.S;
    if (detail::condition_2norm(P) > detail::interconnect_cond_limit)
        throw DegenerateNetwork("degenerate network: renormalization matrix is singular");
    Eigen::MatrixXcd S2 = Q * P.inverse();
    return make_network(std::move(S2), std::move(new_ports), net.ctx);
}

/// Block-diagonal stack of two networks (no connections made).
inline MultiportNetwork stack(const MultiportNetwork& a, const MultiportNetwork& b) {
    const Eigen::Index na = a.size(), nb = b.size();
    Eigen::MatrixXcd S = Eigen::MatrixXcd::Zero(na + nb, na + nb);
    S.topLeftCorner(na, na) = a.S;
    S.bottomRightCorner(nb, nb) = b.S;
    std::vector<PortSpec> ports = a.ports;
    ports.insert(ports.end(), b.ports.begin(), b.ports.end());
    return make_network(std::move(S), std::move(ports), a.ctx);
}

/// Join pairs of ports of one network: on each pair (p,q) impose a_p = b_q
/// and a_q = b_p, then reduce the linear system exactly. Paired ports must
/// have equal reference impedances; the result keeps the unpaired ports in
/// their original order.
inline MultiportNetwork interconnect(const MultiportNetwork& net,
                                     const std::vector<std::pair<int, int>>& pairs) {
    const Eigen::Index n = net.size();
    std::vector<char> used(static_cast<size_t>(n), 0);
    for (const auto& [p, q] : pairs) {
        if (p < 0 || q < 0 || p >= n || q >= n || p == q)
            throw std::invalid_argument("interconnect: invalid port pair");
        if (used[p] || used[q]) throw std::invalid_argument("interconnect: port used twice");
        used[p] = used[q] = 1;
        const cplx zp = net.ports[p].zref, zq = net.ports[q].zref;
        if (std::abs(zp - zq) > 1e-9 * (std::abs(zp) + std::abs(zq)))
            throw std::invalid_argument(
                "interconnect: paired ports have mismatched reference impedances");
    }

    std::vector<int> ext, inner;
    for (Eigen::Index i = 0; i < n; ++i) (used[i] ? inner : ext).push_back(static_cast<int>(i));
    const Eigen::Index ne = static_cast<Eigen::Index>(ext.size());
    const Eigen::Index ni = static_cast<Eigen::Index>(inner.size());

    // Position of each internal port inside `inner`, and the pair swap.
    std::vector<int> pos(static_cast<size_t>(n), -1);
    for (Eigen::Index j = 0; j < ni; ++j) pos[inner[j]] = static_cast<int>(j);
    Eigen::MatrixXcd Pswap = Eigen::MatrixXcd::Zero(ni, ni);
    for (const auto& [p, q] : pairs) {
        Pswap(pos[p], pos[q]) = 1.0;  // a_p = b_q
        Pswap(pos[q], pos[p]) = 1.0;  // a_q = b_p
    }

    Eigen::MatrixXcd See(ne, ne), Sei(ne, ni), Sie(ni, ne), Sii(ni, ni);
    for (Eigen::Index r = 0; r < ne; ++r)
        for (Eigen::Index c = 0; c < ne; ++c) See(r, c) = net.S(ext[r], ext[c]);
    for (Eigen::Index r = 0; r < ne; ++r)
        for (Eigen::Index c = 0; c < ni; ++c) Sei(r, c) = net.S(ext[r], inner[c]);
    for (Eigen::Index r = 0; r < ni; ++r)
        for (Eigen::Index c = 0; c < ne; ++c) Sie(r, c) = net.S(inner[r], ext[c]);
    for (Eigen::Index r = 0; r < ni; ++r)
        for (Eigen::Index c = 0; c < ni; ++c) Sii(r, c) = net.S(inner[r], inner[c]);

    // b_I = S_IE a_E + S_II P b_I  =>  (I - S_II P) b_I = S_IE a_E
    Eigen::MatrixXcd red = Eigen::MatrixXcd::Identity(ni, ni) - Sii * Pswap;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(red, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    // wave amplitudes are order 1, so judge conditioning on that scale
    const double scale = std::max(sv(0), 1.0);
    Eigen::MatrixXcd binner;
    if (sv(sv.size() - 1) * detail::interconnect_cond_limit > scale) {
        binner = red.inverse() * Sie;
    } else {
        // Singular reduction: a lossless loop traps a resonant mode. When the
        // external drive does not excite it, the minimum-norm solution is the
        // physical limit; a driven (inconsistent) resonance is an error.
        if (Sie.cols() == 0)
            throw IllConditionedInterconnect(
                "ill-conditioned interconnect: joined loop is resonant or degenerate");
        svd.setThreshold(1e-9);
        binner = svd.solve(Sie);
        const double resid = (red * binner - Sie).cwiseAbs().maxCoeff();
        if (!(resid < 1e-9 * std::max(1.0, Sie.cwiseAbs().maxCoeff())))
            throw IllConditionedInterconnect(
                "ill-conditioned interconnect: joined loop is resonant or degenerate");
    }
    Eigen::MatrixXcd S2 = See + Sei * Pswap * binner;

    std::vector<PortSpec> ports;
    ports.reserve(static_cast<size_t>(ne));
    for (int i : ext) ports.push_back(net.ports[i]);
    return make_network(std::move(S2), std::move(ports), net.ctx);
}

/// Join port `a_port` of `a` to port `b_port` of `b`.
inline MultiportNetwork connect(const MultiportNetwork& a, int a_port, const MultiportNetwork& b,
                                int b_port) {
    MultiportNetwork s = stack(a, b);
    return interconnect(s, {{a_port, static_cast<int>(a.size()) + b_port}});
}

/// Terminate one port with a one-port of the given reflection coefficient.
inline MultiportNetwork terminate(const MultiportNetwork& net, int port, cplx reflection) {
    if (port < 0 || port >= net.size()) throw std::invalid_argument("terminate: invalid port index");
    if (std::abs(reflection) > 1.0 + 1e-9)
        throw std::invalid_argument("terminate: reflection magnitude exceeds 1");
    Eigen::MatrixXcd s1(1, 1);
    s1(0, 0) = reflection;
    MultiportNetwork load = make_network(s1, {net.ports[port]}, net.ctx);
    return connect(net, port, load, 0);
}

struct Classification {
    bool passive = false;
    bool lossless = false;
    bool reciprocal = false;
    double passivity_margin = 0.0;   // 1 - lambda_max(S^H S); >= 0 means passive
    double lossless_deviation = 0.0; // ||S^H S - I||_2
    double reciprocity_deviation = 0.0;
};

inline Classification classify(const MultiportNetwork& net, double tol = 1e-9) {
    Classification c;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(net.S);
    const double smax = svd.singularValues()(0);
    c.passivity_margin = 1.0 - smax * smax;
    c.passive = smax <= 1.0 + tol;
    const Eigen::Index n = net.size();
    Eigen::MatrixXcd gap = net.S.adjoint() * net.S - Eigen::MatrixXcd::Identity(n, n);
    c.lossless_deviation = Eigen::JacobiSVD<Eigen::MatrixXcd>(gap).singularValues()(0);
    c.lossless = c.lossless_deviation <= tol;
    c.reciprocity_deviation =
        Eigen::JacobiSVD<Eigen::MatrixXcd>(net.S - net.S.transpose()).singularValues()(0);
    c.reciprocal = c.reciprocity_deviation <= tol;
    return c;
}

}  // namespace rems
