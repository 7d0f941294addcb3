#include <doctest.h>

#include "rems/components.hpp"
#include "test_helpers.hpp"

using namespace rems;

namespace {
const WaveContext ctx = WaveContext::at(12e9);
}

TEST_CASE("transmission line: through, eighth-wave, half-wave") {
    MultiportNetwork zero = transmission_line(50.0, 0.0, ctx);
    CHECK(std::abs(zero.S(0, 1) - cplx(1.0)) < 1e-15);
    CHECK(std::abs(zero.S(0, 0)) < 1e-15);

    MultiportNetwork l8 = transmission_line(50.0, 0.125, ctx);
    CHECK(std::abs(l8.S(1, 0) - std::exp(cplx(0.0, -pi / 4.0))) < 1e-15);

    MultiportNetwork l2 = transmission_line(50.0, 0.5, ctx);
    CHECK(std::abs(l2.S(1, 0) - cplx(-1.0)) < 1e-14);
}

TEST_CASE("transmission line cascading adds lengths") {
    MultiportNetwork a = transmission_line(50.0, 0.11, ctx);
    MultiportNetwork b = transmission_line(50.0, 0.23, ctx);
    MultiportNetwork joined = connect(a, 1, b, 0);
    MultiportNetwork direct = transmission_line(50.0, 0.34, ctx);
    CHECK((joined.S - direct.S).norm() < 1e-12);
}

TEST_CASE("line and junction are lossless and reciprocal") {
    auto cl = classify(transmission_line(30.0, 0.37, ctx), 1e-12);
    CHECK(cl.lossless);
    CHECK(cl.reciprocal);
    auto cj = classify(junction({50.0, 20.0, 80.0, 50.0}, ctx), 1e-12);
    CHECK(cj.lossless);
    CHECK(cj.reciprocal);
}

TEST_CASE("junction: equal-impedance 3-port and 2-port wire") {
    MultiportNetwork j3 = junction({50.0, 50.0, 50.0}, ctx);
    Eigen::MatrixXcd want(3, 3);
    want << -1, 2, 2, 2, -1, 2, 2, 2, -1;
    want /= 3.0;
    CHECK((j3.S - want).norm() < 1e-14);

    MultiportNetwork j2 = junction({75.0, 75.0}, ctx);
    CHECK(std::abs(j2.S(0, 1) - cplx(1.0)) < 1e-15);
    CHECK(std::abs(j2.S(0, 0)) < 1e-15);
}

TEST_CASE("junction: 50/16-ohm feed into sixteen 50-ohm branches is matched") {
    std::vector<double> z(17, 50.0);
    z[0] = 50.0 / 16.0;
    MultiportNetwork j = junction(z, ctx);
    CHECK(std::abs(j.S(0, 0)) < 1e-12);
}

TEST_CASE("switch: ideal states are perfect through / perfect open") {
    SwitchModel ideal = SwitchModel::ideal();
    MultiportNetwork on = switch_two_port(ideal, SwitchState::On, ctx);
    Eigen::MatrixXcd through(2, 2);
    through << 0, 1, 1, 0;
    CHECK((on.S - through).norm() < 1e-15);

    MultiportNetwork off = switch_two_port(ideal, SwitchState::Off, ctx);
    CHECK((off.S - Eigen::MatrixXcd::Identity(2, 2)).norm() < 1e-15);
}

TEST_CASE("switch: default realistic figures") {
    SwitchModel sw;  // IL 0.8 dB, ISO 20 dB, RL_on 15 dB
    MultiportNetwork on = switch_two_port(sw, SwitchState::On, ctx);
    CHECK(std::abs(on.S(1, 0)) == doctest::Approx(std::pow(10.0, -0.8 / 20.0)).epsilon(1e-12));
    CHECK(std::abs(on.S(0, 0)) == doctest::Approx(std::pow(10.0, -15.0 / 20.0)).epsilon(1e-12));
    CHECK(classify(on).passive);

    MultiportNetwork off = switch_two_port(sw, SwitchState::Off, ctx);
    CHECK(std::abs(off.S(1, 0)) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(classify(off).passive);
}

TEST_CASE("switch: passivity enforced across parameter sweeps") {
    for (double il : {0.0, 0.3, 1.0, 3.0}) {
        for (double rl : {0.1, 3.0, 15.0, 40.0}) {
            SwitchModel sw;
            sw.insertion_loss_db = il;
            sw.return_loss_on_db = rl;
            sw.transmission_phase = 0.7;
            auto c = classify(switch_two_port(sw, SwitchState::On, ctx), 1e-6);
            CHECK(c.passive);
            CHECK(c.reciprocal);
        }
    }
}

TEST_CASE("switch: file-based matrices pass through after passivity check") {
    std::mt19937 rng(41);
    SwitchModel sw;
    sw.on_matrix = remstest::random_passive_s(2, rng);
    sw.off_matrix = remstest::random_passive_s(2, rng);
    MultiportNetwork on = switch_two_port(sw, SwitchState::On, ctx);
    CHECK((on.S - *sw.on_matrix).norm() == 0.0);

    sw.on_matrix = 1.2 * Eigen::MatrixXcd::Identity(2, 2);
    CHECK_THROWS_AS((void)switch_two_port(sw, SwitchState::On, ctx), UnphysicalSwitchModel);
}

TEST_CASE("frontend matrices") {
    Eigen::VectorXcd z1(1);
    z1 << 50.0;
    FrontendMatrices fm = frontend_matrices(z1, 50.0);
    CHECK(fm.K_vTx(0, 0).real() == doctest::Approx(std::sqrt(50.0) / 100.0).epsilon(1e-15));
    CHECK(std::abs(fm.S_RF(0, 0)) < 1e-15);

    Eigen::VectorXcd zt(1);
    zt << 50.0 / 16.0;
    FrontendMatrices tile = frontend_matrices(zt, 50.0 / 16.0);
    CHECK(std::abs(tile.S_RF(0, 0)) < 1e-15);

    Eigen::VectorXcd z100(1);
    z100 << 100.0;
    FrontendMatrices mm = frontend_matrices(z100, 50.0);
    CHECK(mm.S_RF(0, 0).real() == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(mm.K_vTx(0, 0).real() == doctest::Approx(std::sqrt(50.0) / 150.0).epsilon(1e-15));

    Eigen::VectorXcd mixed(3);
    mixed << 50.0, cplx(30.0, 5.0), 75.0;
    FrontendMatrices f3 = frontend_matrices(mixed, 50.0);
    CHECK(std::abs(f3.S_RF(0, 0)) < 1e-15);  // S_RF = 0 iff Z = R0 elementwise
    CHECK(std::abs(f3.S_RF(1, 1)) > 1e-3);
    CHECK(std::abs(f3.S_RF(2, 2)) > 1e-3);
}
