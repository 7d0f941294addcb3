#pragma once

#include <Eigen/Dense>
#include <optional>

#include "rems/network.hpp"

namespace rems {

/// Ideal lossless transmission line of characteristic impedance `zc`,
/// electrical length given as a fraction of a wavelength. At reference zc:
/// S11 = S22 = 0, S21 = S12 = exp(-j*2*pi*length).
inline MultiportNetwork transmission_line(double zc, double length_lambda, const WaveContext& ctx) {
    if (!(zc > 0.0)) throw std::invalid_argument("transmission_line: Zc must be > 0");
    if (length_lambda < 0.0) throw std::invalid_argument("transmission_line: negative length");
    const cplx t = std::exp(cplx(0.0, -2.0 * pi * length_lambda));
    Eigen::MatrixXcd S(2, 2);
    S << 0.0, t, t, 0.0;
    return make_network(S, {PortSpec(zc), PortSpec(zc)}, ctx);
}

/// Ideal lossless parallel junction of n >= 2 ports with real reference
/// impedances: S_ij = 2 sqrt(Yi Yj)/sum(Y) - delta_ij.
inline MultiportNetwork junction(const std::vector<double>& port_impedances,
                                 const WaveContext& ctx) {
    const Eigen::Index n = static_cast<Eigen::Index>(port_impedances.size());
    if (n < 2) throw std::invalid_argument("junction: need at least 2 ports");
    double ysum = 0.0;
    Eigen::VectorXd y(n);
    std::vector<PortSpec> ports;
    ports.reserve(port_impedances.size());
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(port_impedances[i] > 0.0))
            throw std::invalid_argument("junction: impedances must be real > 0");
        y(i) = 1.0 / port_impedances[i];
        ysum += y(i);
        ports.push_back(PortSpec(port_impedances[i]));
    }
    Eigen::MatrixXcd S(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            S(i, j) = 2.0 * std::sqrt(y(i) * y(j)) / ysum - (i == j ? 1.0 : 0.0);
    return make_network(S, std::move(ports), ctx);
}

enum class SwitchState { On, Off };

/// Two-state RF switch: either parametric (dB figures) or a pair of
/// measured 2-port scattering matrices.
struct SwitchModel {
    // Parametric figures; ignored when file-based matrices are present.
    double insertion_loss_db = 0.8;
    double isolation_db = 20.0;
    double return_loss_on_db = 15.0;
    double return_loss_off_db = 0.5;
    double transmission_phase = 0.0;  // rad

    std::optional<Eigen::MatrixXcd> on_matrix;
    std::optional<Eigen::MatrixXcd> off_matrix;

    static SwitchModel ideal() {
        SwitchModel m;
        m.insertion_loss_db = 0.0;
        m.isolation_db = std::numeric_limits<double>::infinity();
        m.return_loss_on_db = std::numeric_limits<double>::infinity();
        m.return_loss_off_db = 0.0;
        return m;
    }
};

namespace detail {

inline double db_to_mag(double db) { return std::pow(10.0, -db / 20.0); }

// Symmetric reciprocal 2-port [[r,t],[t,r]] from transmission/reflection
// magnitudes. Both entries real-positive when that is passive (matches the
// ideal open/through limits). Otherwise the minor term moves into quadrature,
// giving singular values sqrt(|r|^2+|t|^2): for a transmission-dominated
// (on) state the residual reflection rotates; for a reflection-dominated
// (off) state the reflection stays open-like and the leakage rotates, the
// capacitive-feedthrough behavior of a series switch. If still active, the
// minor term is scaled down until the 2-norm is <= 1.
inline Eigen::MatrixXcd symmetric_two_port(double tmag, double rmag, double phase) {
    cplx t = tmag * std::exp(cplx(0.0, phase));
    cplx r = rmag;
    if (std::max(std::abs(r + t), std::abs(r - t)) > 1.0) {
        const double norm2 = rmag * rmag + tmag * tmag;
        if (rmag >= tmag) {
            t = cplx(0.0, tmag);  // leakage in quadrature with the open-like reflection
            if (norm2 > 1.0) t *= std::sqrt(std::max(0.0, 1.0 - rmag * rmag)) / tmag;
        } else {
            r = cplx(0.0, 1.0) * rmag * std::exp(cplx(0.0, phase));
            if (norm2 > 1.0) r *= std::sqrt(std::max(0.0, 1.0 - tmag * tmag)) / rmag;
        }
    }
    Eigen::MatrixXcd S(2, 2);
    S << r, t, t, r;
    return S;
}

}  // namespace detail

inline MultiportNetwork switch_two_port(const SwitchModel& model, SwitchState state,
                                        const WaveContext& ctx) {
    Eigen::MatrixXcd S;
    if (model.on_matrix || model.off_matrix) {
        if (!model.on_matrix || !model.off_matrix)
            throw UnphysicalSwitchModel("switch model needs both on- and off-state matrices");
        S = (state == SwitchState::On) ? *model.on_matrix : *model.off_matrix;
        if (S.rows() != 2 || S.cols() != 2)
            throw UnphysicalSwitchModel("file-based switch state must be a 2-port");
    } else if (state == SwitchState::On) {
        S = detail::symmetric_two_port(detail::db_to_mag(model.insertion_loss_db),
                                       detail::db_to_mag(model.return_loss_on_db),
                                       model.transmission_phase);
    } else {
        S = detail::symmetric_two_port(detail::db_to_mag(model.isolation_db),
                                       detail::db_to_mag(model.return_loss_off_db),
                                       model.transmission_phase);
    }
    MultiportNetwork net = make_network(S, {PortSpec(ctx.R0), PortSpec(ctx.R0)}, ctx);
    Classification c = classify(net, 1e-6);
    if (!c.passive)
        throw UnphysicalSwitchModel("unphysical switch model: state matrix is not passive");
    return net;
}

/// Auxiliary RF-frontend matrices for diagonal PA output impedances:
/// K = (Z_Tx + R0 I)^{-1} sqrt(R0), S_RF = (Z_Tx + R0 I)^{-1}(Z_Tx - R0 I).
struct FrontendMatrices {
    Eigen::MatrixXcd K_vTx;
    Eigen::MatrixXcd S_RF;
};

inline FrontendMatrices frontend_matrices(const Eigen::VectorXcd& z_tx, double r0) {
    const Eigen::Index n = z_tx.size();
    FrontendMatrices fm;
    fm.K_vTx = Eigen::MatrixXcd::Zero(n, n);
    fm.S_RF = Eigen::MatrixXcd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(z_tx(i).real() > 0.0))
            throw std::invalid_argument("frontend_matrices: Re{Z_Tx} must be > 0");
        fm.K_vTx(i, i) = std::sqrt(r0) / (z_tx(i) + r0);
        fm.S_RF(i, i) = (z_tx(i) - r0) / (z_tx(i) + r0);
    }
    return fm;
}

}  // namespace rems
