#pragma once

#include <Eigen/Dense>

#include "rems/components.hpp"
#include "rems/radiating.hpp"

namespace rems {

struct RfFrontend {
    Eigen::VectorXcd v_tx;  // Thevenin source voltages, V
    Eigen::VectorXcd z_tx;  // diagonal PA output impedances, ohm

    Eigen::Index n_chains() const { return z_tx.size(); }
};

/// Tuning network multiport at reference R0, partitioned as
/// [b_T; a_R] = [TT TR; RT RR] [a_T; b_R] with N frontend-side and M
/// radiating-side ports.
struct TuningNetwork {
    Eigen::MatrixXcd S;  // (N+M) x (N+M)
    Eigen::Index n = 0;  // frontend-side ports
    Eigen::Index m = 0;  // radiating-side ports

    auto tt() const { return S.topLeftCorner(n, n); }
    auto tr() const { return S.topRightCorner(n, m); }
    auto rt() const { return S.bottomLeftCorner(m, n); }
    auto rr() const { return S.bottomRightCorner(m, m); }

    static TuningNetwork from_network(const MultiportNetwork& net, Eigen::Index n_inner) {
        TuningNetwork t;
        t.n = n_inner;
        t.m = net.size() - n_inner;
        if (t.m < 1 || t.n < 1) throw std::invalid_argument("tuning network: bad partition");
        t.S = net.S;
        return t;
    }

    /// Lossless ideal feedthrough [[0, I], [I, 0]] (requires N == M).
    static TuningNetwork feedthrough(Eigen::Index n) {
        TuningNetwork t;
        t.n = t.m = n;
        t.S = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
        t.S.topRightCorner(n, n).setIdentity();
        t.S.bottomLeftCorner(n, n).setIdentity();
        return t;
    }
};

struct RemsModel {
    RfFrontend frontend;
    TuningNetwork tuning;
    RadiatingStructure radiating;
    WaveContext ctx;

    Eigen::Index n_chains() const { return tuning.n; }
    Eigen::Index n_elements() const { return tuning.m; }

    void check_dimensions() const {
        if (frontend.z_tx.size() != tuning.n)
            throw std::invalid_argument("model: frontend/tuning dimension mismatch");
        if (radiating.n_elements() != tuning.m)
            throw std::invalid_argument("model: tuning/radiating dimension mismatch");
    }
};

/// Cached linear operators of the signal-flow graph. a_F follows from a_R
/// through the pattern slices, so the far-field side is kept as the M-vector
/// maps below plus RadiatingStructure::pattern_slice.
struct Operators {
    Eigen::MatrixXcd K_vTx, S_RF;       // N x N diagonal frontend matrices
    Eigen::MatrixXcd L1, L3;            // N x N
    Eigen::MatrixXcd L2;                // M x M
    Eigen::MatrixXcd W_vTx_aR;          // M x N, v_Tx -> a_R
    Eigen::MatrixXcd W_aT_aR;           // M x N, a_T -> a_R
    Eigen::MatrixXcd G_aT_bT;           // N x N
    Eigen::MatrixXcd W_vTx_aT;          // N x N, v_Tx -> a_T
};

inline Operators assemble_operators(const RemsModel& model) {
    model.check_dimensions();
    const Eigen::Index n = model.n_chains(), m = model.n_elements();

    Operators op;
    FrontendMatrices fm = frontend_matrices(model.frontend.z_tx, model.ctx.R0);
    op.K_vTx = std::move(fm.K_vTx);
    op.S_RF = std::move(fm.S_RF);

    const auto& srr = model.radiating.S_RR;
    op.L1 = op.S_RF * model.tuning.tt();
    op.L2 = model.tuning.rr() * srr;

    Eigen::MatrixXcd im_l2 = Eigen::MatrixXcd::Identity(m, m) - op.L2;
    if (detail::condition_2norm(im_l2) > detail::interconnect_cond_limit)
        throw ResonantModel("resonant model: I - L2 is numerically singular");
    Eigen::MatrixXcd il2 = im_l2.inverse();

    op.W_aT_aR = il2 * model.tuning.rt();
    op.L3 = op.S_RF * model.tuning.tr() * srr * op.W_aT_aR;
    op.G_aT_bT = model.tuning.tt() + model.tuning.tr() * srr * op.W_aT_aR;

    Eigen::MatrixXcd im_l13 = Eigen::MatrixXcd::Identity(n, n) - op.L1 - op.L3;
    if (detail::condition_2norm(im_l13) > detail::interconnect_cond_limit)
        throw ResonantModel("resonant model: I - L1 - L3 is numerically singular");
    op.W_vTx_aT = im_l13.inverse() * op.K_vTx;
    op.W_vTx_aR = op.W_aT_aR * op.W_vTx_aT;
    return op;
}

/// All interface waves of the model for one source vector, obtained by a
/// direct dense solve of the frontend, tuning, and radiating relations.
struct SolvedState {
    Eigen::VectorXcd a_t, b_t;  // N
    Eigen::VectorXcd a_r, b_r;  // M
    FarFieldPattern a_f;
    Eigen::VectorXcd v_t, i_t, v_r, i_r;
};

inline SolvedState solve_state(const RemsModel& model, const Eigen::VectorXcd& v_tx) {
    model.check_dimensions();
    const Eigen::Index n = model.n_chains(), m = model.n_elements();
    if (v_tx.size() != n) throw std::invalid_argument("solve_state: v_Tx dimension mismatch");

    FrontendMatrices fm = frontend_matrices(model.frontend.z_tx, model.ctx.R0);
    const Eigen::Index dim = 2 * n + 2 * m;  // unknowns: a_T, b_T, a_R, b_R
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(dim, dim);
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(dim);
    const auto at = [&](Eigen::Index i) { return i; };
    const auto bt = [&](Eigen::Index i) { return n + i; };
    const auto ar = [&](Eigen::Index i) { return 2 * n + i; };
    const auto br = [&](Eigen::Index i) { return 2 * n + m + i; };

    // frontend: a_T - S_RF b_T = K v_Tx
    for (Eigen::Index i = 0; i < n; ++i) {
        A(at(i), at(i)) = 1.0;
        A(at(i), bt(i)) = -fm.S_RF(i, i);
        rhs(at(i)) = (fm.K_vTx * v_tx)(i);
    }
    // tuning: b_T = TT a_T + TR b_R ; a_R = RT a_T + RR b_R
    for (Eigen::Index i = 0; i < n; ++i) {
        A(bt(i), bt(i)) = 1.0;
        for (Eigen::Index j = 0; j < n; ++j) A(bt(i), at(j)) -= model.tuning.tt()(i, j);
        for (Eigen::Index j = 0; j < m; ++j) A(bt(i), br(j)) -= model.tuning.tr()(i, j);
    }
    for (Eigen::Index i = 0; i < m; ++i) {
        A(ar(i), ar(i)) = 1.0;
        for (Eigen::Index j = 0; j < n; ++j) A(ar(i), at(j)) -= model.tuning.rt()(i, j);
        for (Eigen::Index j = 0; j < m; ++j) A(ar(i), br(j)) -= model.tuning.rr()(i, j);
    }
    // radiating: b_R = S_RR a_R
    for (Eigen::Index i = 0; i < m; ++i) {
        A(br(i), br(i)) = 1.0;
        for (Eigen::Index j = 0; j < m; ++j) A(br(i), ar(j)) -= model.radiating.S_RR(i, j);
    }

    Eigen::FullPivLU<Eigen::MatrixXcd> lu(A);
    if (!lu.isInvertible()) throw ResonantModel("resonant model: signal-flow system is singular");
    Eigen::VectorXcd x = lu.solve(rhs);

    SolvedState st;
    st.a_t = x.segment(0, n);
    st.b_t = x.segment(n, n);
    st.a_r = x.segment(2 * n, m);
    st.b_r = x.segment(2 * n + m, m);

    st.a_f.grid = model.radiating.grid;
    st.a_f.a = Eigen::Matrix2Xcd::Zero(2, model.radiating.grid->n_nodes());
    for (Eigen::Index e = 0; e < m; ++e) st.a_f.a += model.radiating.patterns[e].a * st.a_r(e);

    const double sr0 = std::sqrt(model.ctx.R0);
    st.v_t = sr0 * (st.a_t + st.b_t);
    st.i_t = (st.a_t - st.b_t) / sr0;
    st.v_r = sr0 * (st.a_r + st.b_r);
    st.i_r = (st.a_r - st.b_r) / sr0;
    return st;
}

struct PowerMetrics {
    double p_a = 0.0, p_t = 0.0, p_r = 0.0, p_f = 0.0;  // W
    double eta_matching = 0.0, eta_tuning = 0.0, eta_radiating = 0.0;
    bool efficiencies_defined = true;

    double directivity(double intensity) const {
        return p_f > 0.0 ? 4.0 * pi * intensity / p_f : 0.0;
    }
};

inline PowerMetrics power_metrics(const SolvedState& st, const RemsModel& model,
                                  const Eigen::VectorXcd& v_tx) {
    PowerMetrics pm;
    pm.p_a = 0.25 * (v_tx.array().abs2() / model.frontend.z_tx.array().real()).sum();
    pm.p_t = st.a_t.squaredNorm() - st.b_t.squaredNorm();
    pm.p_r = st.a_r.squaredNorm() - st.b_r.squaredNorm();
    pm.p_f = l2_norm_sq(st.a_f);
    constexpr double floor_w = 1e-18;
    if (pm.p_a > floor_w && pm.p_t > floor_w && pm.p_r > floor_w) {
        pm.eta_matching = pm.p_t / pm.p_a;
        pm.eta_tuning = pm.p_r / pm.p_t;
        pm.eta_radiating = pm.p_f / pm.p_r;
    } else {
        pm.efficiencies_defined = false;
    }
    return pm;
}

/// Radiation intensity |a_F(node)|^2 in W/sr at one grid node.
inline double radiation_intensity(const FarFieldPattern& a_f, Eigen::Index node) {
    return a_f.a.col(node).squaredNorm();
}

}  // namespace rems
