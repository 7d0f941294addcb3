#pragma once

#include <Eigen/Dense>
#include <optional>

#include "rems/model.hpp"

namespace rems {

enum class GainLevel { Rems, Tuning, Radiating };

inline const char* to_string(GainLevel l) {
    switch (l) {
        case GainLevel::Rems: return "REMS";
        case GainLevel::Tuning: return "TUNING";
        default: return "RADIATING";
    }
}

struct GainResult {
    double gain = 0.0;            // linear
    Eigen::VectorXcd excitation;  // the x used (or the optimum)
    PowerMetrics powers;
    double directivity = 0.0;
    Eigen::Index node = 0;
};

namespace detail {

/// Hermitian inverse square root with an eigenvalue floor; throws when B is
/// not positive definite (signals a passivity violation upstream).
inline Eigen::MatrixXcd inv_sqrt_pd(const Eigen::MatrixXcd& B) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es((B + B.adjoint()) / 2.0);
    const Eigen::VectorXd& ev = es.eigenvalues();
    const double lmax = ev.maxCoeff();
    if (!(lmax > 0.0) || ev.minCoeff() < 1e-12 * lmax)
        throw ActiveOrInconsistentModel(
            "active or inconsistent model: gain denominator matrix is not positive definite");
    const double floor = 1e-14 * lmax;
    Eigen::VectorXd inv = ev.cwiseMax(floor).cwiseSqrt().cwiseInverse();
    return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().adjoint();
}

/// Deterministic phase/scale normalization: unit norm, first significant
/// entry real positive.
inline void normalize_excitation(Eigen::VectorXcd& x) {
    const double nrm = x.norm();
    if (nrm <= 0.0) return;
    x /= nrm;
    const double big = x.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (std::abs(x(i)) > 1e-9 * big) {
            x *= std::conj(x(i)) / std::abs(x(i));
            break;
        }
    }
}

}  // namespace detail

/// Per-level ingredients for the Rayleigh quotient G = x^H A(node) x / x^H B x
/// with A(node) = 4*pi * F_node^H F_node and F_node the 2 x n map from the
/// excitation to a_F at the node.
struct GainOperator {
    GainLevel level;
    Eigen::MatrixXcd B;
    Eigen::MatrixXcd B_inv_sqrt;
    // a_F(node) = pattern_slice(node) * chain * x
    Eigen::MatrixXcd chain;  // M x n map excitation -> a_R
    const RadiatingStructure* radiating = nullptr;

    Eigen::Matrix2Xcd f_node(Eigen::Index node) const {
        return radiating->pattern_slice(node) * chain;
    }
};

inline GainOperator make_gain_operator(const RemsModel& model, const Operators& op,
                                       GainLevel level) {
    GainOperator g;
    g.level = level;
    g.radiating = &model.radiating;
    const Eigen::Index n = model.n_chains(), m = model.n_elements();
    switch (level) {
        case GainLevel::Rems:
            g.B = (0.25 * model.frontend.z_tx.array().real().inverse()).matrix().asDiagonal();
            g.chain = op.W_vTx_aR;
            break;
        case GainLevel::Tuning:
            g.B = Eigen::MatrixXcd::Identity(n, n) - op.G_aT_bT.adjoint() * op.G_aT_bT;
            g.chain = op.W_aT_aR;
            break;
        case GainLevel::Radiating:
            g.B = Eigen::MatrixXcd::Identity(m, m) -
                  model.radiating.S_RR.adjoint() * model.radiating.S_RR;
            g.chain = Eigen::MatrixXcd::Identity(m, m);
            break;
    }
    g.B_inv_sqrt = detail::inv_sqrt_pd(g.B);
    return g;
}

/// Closed-form Rayleigh maximum via the dominant singular pair of the 2 x n
/// factor F B^{-1/2}: the per-direction numerator matrix has rank <= 2, so a
/// 2x2 Hermitian eigenproblem replaces the dense n x n solve.
struct RayleighMax {
    double value = 0.0;  // max gain, linear
    Eigen::VectorXcd x;  // optimal excitation, unit norm, phase-normalized
};

inline RayleighMax rayleigh_maximize(const GainOperator& g, Eigen::Index node) {
    Eigen::Matrix2Xcd m2 = g.f_node(node) * g.B_inv_sqrt;
    Eigen::Matrix2cd h = m2 * m2.adjoint();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es((h + h.adjoint()) / 2.0);
    const double lmax = std::max(0.0, es.eigenvalues()(1));
    RayleighMax r;
    r.value = 4.0 * pi * lmax;
    if (lmax <= 0.0) {
        r.x = Eigen::VectorXcd::Zero(m2.cols());
        r.x(0) = 1.0;
        return r;
    }
    Eigen::Vector2cd u = es.eigenvectors().col(1);
    Eigen::VectorXcd c1 = m2.adjoint() * u / std::sqrt(lmax);
    r.x = g.B_inv_sqrt * c1;
    detail::normalize_excitation(r.x);
    return r;
}

/// Evaluate a gain level for a given excitation at a grid node, with the full
/// power breakdown where the level defines it.
inline GainResult gain_at(const RemsModel& model, const Operators& op,
                          const Eigen::VectorXcd& excitation, GainLevel level,
                          Eigen::Index node) {
    model.check_dimensions();
    GainResult res;
    res.node = node;
    res.excitation = excitation;
    const Eigen::Index m = model.n_elements();

    Eigen::VectorXcd a_r;
    double denom = 0.0;
    PowerMetrics pm;
    switch (level) {
        case GainLevel::Rems: {
            SolvedState st = solve_state(model, excitation);
            pm = power_metrics(st, model, excitation);
            a_r = st.a_r;
            denom = pm.p_a;
            break;
        }
        case GainLevel::Tuning: {
            if (excitation.size() != model.n_chains())
                throw std::invalid_argument("gain_at: excitation dimension mismatch");
            a_r = op.W_aT_aR * excitation;
            Eigen::VectorXcd b_t = op.G_aT_bT * excitation;
            pm.p_t = excitation.squaredNorm() - b_t.squaredNorm();
            Eigen::VectorXcd b_r = model.radiating.S_RR * a_r;
            pm.p_r = a_r.squaredNorm() - b_r.squaredNorm();
            denom = pm.p_t;
            break;
        }
        case GainLevel::Radiating: {
            if (excitation.size() != m)
                throw std::invalid_argument("gain_at: excitation dimension mismatch");
            a_r = excitation;
            Eigen::VectorXcd b_r = model.radiating.S_RR * a_r;
            pm.p_r = a_r.squaredNorm() - b_r.squaredNorm();
            denom = pm.p_r;
            break;
        }
    }

    // intensity at the node from a_F = pattern_slice * a_R
    Eigen::Vector2cd af = model.radiating.pattern_slice(node) * a_r;
    const double intensity = af.squaredNorm();
    if (level != GainLevel::Rems) {
        FarFieldPattern full;
        full.grid = model.radiating.grid;
        full.a = Eigen::Matrix2Xcd::Zero(2, model.radiating.grid->n_nodes());
        for (Eigen::Index e = 0; e < m; ++e) full.a += model.radiating.patterns[e].a * a_r(e);
        pm.p_f = l2_norm_sq(full);
    }
    if (!(denom > 0.0)) throw DegenerateExcitation("degenerate excitation: nonpositive power");
    res.gain = 4.0 * pi * intensity / denom;
    res.directivity = pm.directivity(intensity);
    res.powers = pm;
    return res;
}

/// Rayleigh-optimal gain in one direction, with the full breakdown evaluated
/// at the optimum.
inline GainResult maximize_gain(const RemsModel& model, const Operators& op, GainLevel level,
                                Eigen::Index node) {
    GainOperator g = make_gain_operator(model, op, level);
    RayleighMax r = rayleigh_maximize(g, node);
    if (r.value <= 0.0) {
        GainResult res;
        res.node = node;
        res.gain = 0.0;
        res.excitation = r.x;
        return res;
    }
    GainResult res = gain_at(model, op, r.x, level, node);
    return res;
}

/// Per-direction optimal gains over a set of grid nodes.
struct GainMap {
    std::shared_ptr<const AngularGrid> grid;
    std::vector<Eigen::Index> nodes;
    // one vector per requested level, linear gain per node; NaN marks a hole
    std::vector<GainLevel> levels;
    std::vector<Eigen::VectorXd> values;
    std::vector<std::string> hole_reasons;  // empty when clean

    Eigen::Index level_index(GainLevel l) const {
        for (size_t i = 0; i < levels.size(); ++i)
            if (levels[i] == l) return static_cast<Eigen::Index>(i);
        throw std::invalid_argument("gain map does not contain the requested level");
    }
};

inline GainMap gain_map(const RemsModel& model, const Operators& op,
                        const std::vector<Eigen::Index>& nodes,
                        const std::vector<GainLevel>& levels) {
    GainMap gm;
    gm.grid = model.radiating.grid;
    gm.nodes = nodes;
    gm.levels = levels;
    for (GainLevel level : levels) {
        GainOperator g = make_gain_operator(model, op, level);
        Eigen::VectorXd vals(static_cast<Eigen::Index>(nodes.size()));
        for (size_t i = 0; i < nodes.size(); ++i) {
            try {
                vals(static_cast<Eigen::Index>(i)) = rayleigh_maximize(g, nodes[i]).value;
            } catch (const std::exception& e) {
                vals(static_cast<Eigen::Index>(i)) = std::numeric_limits<double>::quiet_NaN();
                gm.hole_reasons.push_back(std::string(to_string(level)) + " node " +
                                          std::to_string(nodes[i]) + ": " + e.what());
            }
        }
        gm.values.push_back(std::move(vals));
    }
    return gm;
}

inline double to_db(double linear) {
    return linear > 0.0 ? 10.0 * std::log10(linear) : -std::numeric_limits<double>::infinity();
}

}  // namespace rems
