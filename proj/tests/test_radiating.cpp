#include <doctest.h>

#include "rems/radiating.hpp"
#include "test_helpers.hpp"

using namespace rems;

namespace {
const WaveContext ctx = WaveContext::at(12e9);

FarFieldPattern isotropic(std::shared_ptr<const AngularGrid> grid, cplx value, int comp = 0) {
    FarFieldPattern p;
    p.grid = grid;
    p.a = Eigen::Matrix2Xcd::Zero(2, grid->n_nodes());
    p.a.row(comp).setConstant(value);
    return p;
}
}  // namespace

TEST_CASE("grid weights sum to the full solid angle") {
    for (double step : {5.0, 2.0, 1.0}) {
        auto g = AngularGrid::regular(step);
        CHECK(std::abs(g->w.sum() - 4.0 * pi) < 1e-6 * 4.0 * pi);
        CHECK(g->w.minCoeff() >= 0.0);
    }
    auto g1 = AngularGrid::regular(1.0);
    CHECK(g1->n_theta() == 181);
    CHECK(g1->n_phi() == 360);
}

TEST_CASE("grid nearest-node snapping") {
    auto g = AngularGrid::regular(1.0);
    auto s = g->nearest(0.5001 * pi / 180.0, 359.6 * pi / 180.0);
    CHECK(g->theta(s.i) == doctest::Approx(pi / 180.0));
    CHECK(s.j == 0);  // wraps around
    CHECK(s.distance < 1.0 * pi / 180.0);
}

TEST_CASE("l2 inner product: normalized isotropic and orthogonal polarizations") {
    auto g = AngularGrid::regular(2.0);
    FarFieldPattern p = isotropic(g, 1.0 / std::sqrt(4.0 * pi));
    CHECK(l2_norm_sq(p) == doctest::Approx(1.0).epsilon(1e-12));

    FarFieldPattern q = isotropic(g, cplx(0.3, 0.4), 1);
    CHECK(std::abs(l2_inner(p, q)) < 1e-15);
}

TEST_CASE("gram: single isotropic port and duplicated pattern") {
    auto g = AngularGrid::regular(2.0);
    RadiatingStructure rs;
    rs.ctx = ctx;
    rs.grid = g;
    rs.S_RR = Eigen::MatrixXcd::Zero(2, 2);
    rs.ports = {PortSpec(50.0), PortSpec(50.0)};
    rs.patterns = {isotropic(g, 1.0 / std::sqrt(4.0 * pi)), isotropic(g, 1.0 / std::sqrt(4.0 * pi))};
    Eigen::MatrixXcd p = gram(rs);
    Eigen::MatrixXcd want = Eigen::MatrixXcd::Ones(2, 2);
    CHECK((p - want).norm() < 1e-10);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(p);
    CHECK(es.eigenvalues().minCoeff() > -1e-10);  // Hermitian PSD
}

TEST_CASE("synthesized 1x1 array is lossless") {
    auto g = AngularGrid::regular(1.0);
    RadiatingStructure rs = synthesize_array(1, 1, 0.25, {}, 1.0, ctx, g);
    const double p = gram(rs)(0, 0).real();
    CHECK(std::abs(rs.S_RR(0, 0).real() - std::sqrt(1.0 - p)) < 1e-9);

    // P_F = P_R for any excitation of a lossless one-port
    Eigen::VectorXcd a(1);
    a << cplx(0.7, -0.2);
    const double pf = p * a.squaredNorm();
    const double pr = a.squaredNorm() - (rs.S_RR * a).squaredNorm();
    CHECK(std::abs(pf - pr) / pr < 1e-10);
}

TEST_CASE("synthesized 4x4 array conserves power") {
    auto g = AngularGrid::regular(2.0);
    RadiatingStructure rs = synthesize_array(4, 4, 0.25, {}, 1.0, ctx, g);
    Eigen::MatrixXcd p = gram(rs);
    const Eigen::Index m = rs.n_elements();
    CHECK((p - (Eigen::MatrixXcd::Identity(m, m) - rs.S_RR.adjoint() * rs.S_RR)).norm() < 1e-8);

    std::mt19937 rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        Eigen::VectorXcd a = remstest::random_complex(m, 1, rng);
        const double pf = (a.adjoint() * p * a)(0).real();
        const double pr = a.squaredNorm() - (rs.S_RR * a).squaredNorm();
        CHECK(std::abs(pf - pr) / pr < 1e-6);
    }

    // spectrum of S_RR in [0, 1)
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rs.S_RR);
    CHECK(es.eigenvalues().minCoeff() >= -1e-12);
    CHECK(es.eigenvalues().maxCoeff() < 1.0);
    CHECK(passivity_violation(rs) < 1e-8);
}

TEST_CASE("synthesized array with eta = 0.8 radiates 80 percent") {
    auto g = AngularGrid::regular(2.0);
    RadiatingStructure rs = synthesize_array(4, 4, 0.25, {}, 0.8, ctx, g);
    Eigen::MatrixXcd p = gram(rs);
    const Eigen::Index m = rs.n_elements();
    std::mt19937 rng(37);
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::VectorXcd a = remstest::random_complex(m, 1, rng);
        const double pf = (a.adjoint() * p * a)(0).real();
        const double pr = a.squaredNorm() - (rs.S_RR * a).squaredNorm();
        CHECK(pf / pr == doctest::Approx(0.8).epsilon(1e-6));
    }
}

TEST_CASE("gram entries are stable under grid refinement") {
    RadiatingStructure coarse = synthesize_array(2, 2, 0.25, {}, 1.0, ctx, AngularGrid::regular(1.0));
    RadiatingStructure fine = synthesize_array(2, 2, 0.25, {}, 1.0, ctx, AngularGrid::regular(0.5));
    // compare the raw (pre-normalization) physics through normalized Grams
    Eigen::MatrixXcd gc = gram(coarse), gf = gram(fine);
    gc /= gc(0, 0).real();
    gf /= gf(0, 0).real();
    CHECK((gc - gf).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("off-diagonal gram entry matches doubled-resolution quadrature") {
    RadiatingStructure c = synthesize_array(1, 2, 0.25, {}, 1.0, ctx, AngularGrid::regular(1.0));
    RadiatingStructure f = synthesize_array(1, 2, 0.25, {}, 1.0, ctx, AngularGrid::regular(0.5));
    const cplx gc = gram(c)(0, 1) / gram(c)(0, 0).real();
    const cplx gf = gram(f)(0, 1) / gram(f)(0, 0).real();
    CHECK(std::abs(gc - gf) < 1e-4);
}
