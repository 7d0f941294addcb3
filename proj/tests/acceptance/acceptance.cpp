// End-to-end acceptance checks. Each criterion prints exactly one PASS/FAIL
// line; the process exits nonzero if any criterion fails.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "rems/cli.hpp"
#include "rems/optimize.hpp"

using namespace rems;

namespace {

struct CriterionFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void req(bool cond, const std::string& what) {
    if (!cond) throw CriterionFailure(what);
}

std::mt19937 rng(20260826);

Eigen::VectorXcd random_vec(Eigen::Index n) {
    std::normal_distribution<double> nd(0.0, 1.0);
    Eigen::VectorXcd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = cplx(nd(rng), nd(rng));
    return v;
}

Eigen::MatrixXcd random_mat(Eigen::Index r, Eigen::Index c) {
    Eigen::MatrixXcd m(r, c);
    for (Eigen::Index j = 0; j < c; ++j) m.col(j) = random_vec(r);
    return m;
}

Eigen::MatrixXcd random_passive(Eigen::Index n, double target = 0.9) {
    Eigen::MatrixXcd g = random_mat(n, n);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(g);
    return g * (target / svd.singularValues()(0));
}

const WaveContext ctx = WaveContext::at(12e9);

// ---------------------------------------------------------------------------

std::string c1_physical_consistency() {
    auto grid = AngularGrid::regular(1.0);
    double worst_unit = 0.0, worst_lossy = 0.0;
    for (double eta : {1.0, 0.8}) {
        RadiatingStructure rs = synthesize_array(4, 4, 0.25, ElementModel{}, eta, ctx, grid);
        for (int trial = 0; trial < 100; ++trial) {
            Eigen::VectorXcd a_r = random_vec(16);
            Eigen::VectorXcd b_r = rs.S_RR * a_r;
            const double p_r = a_r.squaredNorm() - b_r.squaredNorm();
            FarFieldPattern af;
            af.grid = grid;
            af.a = Eigen::Matrix2Xcd::Zero(2, grid->n_nodes());
            for (Eigen::Index e = 0; e < 16; ++e) af.a += rs.patterns[e].a * a_r(e);
            const double p_f = l2_norm_sq(af);
            const double dev = std::abs(p_f / p_r - eta);
            (eta == 1.0 ? worst_unit : worst_lossy) =
                std::max(eta == 1.0 ? worst_unit : worst_lossy, dev);
        }
    }
    req(worst_unit < 1e-6, "eta=1 radiated/accepted power deviates");
    req(worst_lossy < 1e-6, "eta=0.8 power ratio deviates");
    std::ostringstream ss;
    ss << "max |P_F/P_R - eta| = " << std::max(worst_unit, worst_lossy);
    return ss.str();
}

std::string c2_operator_oracle() {
    auto grid = AngularGrid::regular(30.0);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 4);
        const int rows = 1 + static_cast<int>(rng() % 4);
        const int cols = 1 + static_cast<int>(rng() % 4);
        RemsModel model;
        model.ctx = ctx;
        model.radiating = synthesize_array(rows, cols, 0.3, ElementModel{}, 0.9, ctx, grid);
        const int m = rows * cols;
        MultiportNetwork tun =
            make_network(random_passive(n + m),
                         std::vector<PortSpec>(static_cast<size_t>(n + m), PortSpec(ctx.R0)), ctx);
        model.tuning = TuningNetwork::from_network(tun, n);
        model.frontend.z_tx = Eigen::VectorXcd::Constant(n, cplx(40.0, 5.0)) + random_vec(n);
        for (int i = 0; i < n; ++i)
            model.frontend.z_tx(i) = cplx(std::abs(model.frontend.z_tx(i).real()) + 5.0,
                                          model.frontend.z_tx(i).imag());
        model.frontend.v_tx = Eigen::VectorXcd::Zero(n);

        Operators op = assemble_operators(model);
        Eigen::VectorXcd v = random_vec(n);
        SolvedState st = solve_state(model, v);
        Eigen::VectorXcd a_r = op.W_vTx_aR * v;
        FarFieldPattern af;
        af.grid = grid;
        af.a = Eigen::Matrix2Xcd::Zero(2, grid->n_nodes());
        for (Eigen::Index e = 0; e < m; ++e) af.a += model.radiating.patterns[e].a * a_r(e);
        const double rel = (af.a - st.a_f.a).cwiseAbs().maxCoeff() /
                           std::max(1e-300, st.a_f.a.cwiseAbs().maxCoeff());
        worst = std::max(worst, rel);
    }
    req(worst < 1e-10, "operator vs direct solve disagree");
    std::ostringstream ss;
    ss << "max relative a_F deviation = " << worst;
    return ss.str();
}

std::string c3_gain_ordering() {
    auto grid = AngularGrid::regular(2.0);
    RadiatingStructure rad = synthesize_array(4, 4, 0.25, ElementModel{}, 0.9, ctx, grid);
    TileGeometry geo;  // realistic default switches
    std::vector<TileConfig> cfgs = SwitchConfig::all_pass(geo, 1).tiles;
    std::vector<std::vector<int>> tmap = {
        {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15}};
    BenchmarkRecipe recipe = benchmark_model(BenchmarkKind::Proposed, rad, geo, &cfgs, &tmap);
    Operators op = assemble_operators(recipe.model);
    GainOperator g0 = make_gain_operator(recipe.model, op, GainLevel::Rems);
    GainOperator g1 = make_gain_operator(recipe.model, op, GainLevel::Tuning);
    GainOperator g2 = make_gain_operator(recipe.model, op, GainLevel::Radiating);
    double worst = -1e300;
    for (Eigen::Index node : grid->hemisphere_nodes()) {
        const double a = rayleigh_maximize(g0, node).value;
        const double b = rayleigh_maximize(g1, node).value;
        const double c = rayleigh_maximize(g2, node).value;
        worst = std::max({worst, (a - b) / std::max(1.0, b), (b - c) / std::max(1.0, c)});
    }
    req(worst <= 1e-9, "gain ordering violated on the 2-degree hemisphere map");
    std::ostringstream ss;
    ss << "max relative ordering slack = " << worst;
    return ss.str();
}

std::string c4_benchmark_identities() {
    auto grid = AngularGrid::regular(10.0);
    RadiatingStructure rad = synthesize_array(4, 4, 0.25, ElementModel{}, 0.9, ctx, grid);
    TileGeometry geo;
    std::vector<TileConfig> cfgs = SwitchConfig::all_pass(geo, 1).tiles;
    std::vector<std::vector<int>> tmap = {
        {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15}};

    BenchmarkRecipe ideal = benchmark_model(BenchmarkKind::AllDigitalIdeal, rad, geo);
    BenchmarkRecipe prop = benchmark_model(BenchmarkKind::Proposed, rad, geo, &cfgs, &tmap);
    BenchmarkRecipe prop_ideal =
        benchmark_model(BenchmarkKind::ProposedIdeal, rad, geo, &cfgs, &tmap);
    req(ideal.level == GainLevel::Radiating, "ALL_DIGITAL_IDEAL must evaluate the radiating gain");
    req(prop_ideal.level == GainLevel::Tuning, "PROPOSED_IDEAL must evaluate the tuning gain");
    req((prop_ideal.model.tuning.S - prop.model.tuning.S).cwiseAbs().maxCoeff() == 0.0,
        "PROPOSED_IDEAL must share the PROPOSED tuning network");

    // zero-coupling orthonormal structure: matched feedthrough attains the ceiling
    RadiatingStructure flat;
    flat.ctx = ctx;
    flat.grid = grid;
    flat.S_RR = Eigen::MatrixXcd::Zero(2, 2);
    flat.ports = {PortSpec(ctx.R0), PortSpec(ctx.R0)};
    for (int e = 0; e < 2; ++e) {
        FarFieldPattern p;
        p.grid = grid;
        p.a = Eigen::Matrix2Xcd::Zero(2, grid->n_nodes());
        p.a.row(e).setConstant(1.0 / std::sqrt(4.0 * pi));
        flat.patterns.push_back(std::move(p));
    }
    BenchmarkRecipe conv = benchmark_model(BenchmarkKind::AllDigitalConventional, flat, geo);
    Operators op = assemble_operators(conv.model);
    GainOperator gr = make_gain_operator(conv.model, op, GainLevel::Rems);
    GainOperator gc = make_gain_operator(conv.model, op, GainLevel::Radiating);
    double worst = 0.0;
    for (Eigen::Index node : grid->hemisphere_nodes()) {
        const double a = rayleigh_maximize(gr, node).value;
        const double c = rayleigh_maximize(gc, node).value;
        worst = std::max(worst, std::abs(a - c) / std::max(1.0, c));
    }
    req(worst < 1e-8, "matched feedthrough chain misses the radiating ceiling");
    std::ostringstream ss;
    ss << "matched-chain ceiling deviation = " << worst;
    return ss.str();
}

std::string c5_rayleigh() {
    auto grid = AngularGrid::regular(30.0);
    double worst_dense = 0.0, worst_scale = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng() % 8);
        const Eigen::Index node = static_cast<Eigen::Index>(rng()) % grid->n_nodes();
        RadiatingStructure rs;
        rs.ctx = ctx;
        rs.grid = grid;
        rs.S_RR = Eigen::MatrixXcd::Zero(n, n);
        rs.ports.assign(static_cast<size_t>(n), PortSpec(ctx.R0));
        for (Eigen::Index e = 0; e < n; ++e) {
            FarFieldPattern p;
            p.grid = grid;
            p.a = Eigen::Matrix2Xcd::Zero(2, grid->n_nodes());
            p.a.col(node) = random_vec(2);
            rs.patterns.push_back(std::move(p));
        }
        Eigen::MatrixXcd h = random_mat(n, n);
        Eigen::MatrixXcd B = h * h.adjoint() + 0.1 * Eigen::MatrixXcd::Identity(n, n);
        GainOperator g;
        g.level = GainLevel::Radiating;
        g.B = B;
        g.B_inv_sqrt = rems::detail::inv_sqrt_pd(B);
        g.chain = random_mat(n, n);
        g.radiating = &rs;
        RayleighMax fast = rayleigh_maximize(g, node);

        Eigen::Matrix2Xcd f = rs.pattern_slice(node) * g.chain;
        Eigen::MatrixXcd A = 4.0 * pi * f.adjoint() * f;
        Eigen::MatrixXcd C = g.B_inv_sqrt * A * g.B_inv_sqrt;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es((C + C.adjoint()) / 2.0);
        const double dense = es.eigenvalues().maxCoeff();
        worst_dense = std::max(worst_dense, std::abs(fast.value - dense) / std::max(1.0, dense));

        auto quotient = [&](const Eigen::VectorXcd& x) {
            return 4.0 * pi * (f * x).squaredNorm() / (x.adjoint() * B * x)(0).real();
        };
        for (int s = 0; s < 10000; ++s)
            req(quotient(random_vec(n)) <= fast.value * (1.0 + 1e-9) + 1e-12,
                "a random excitation beats the claimed optimum");
        const double q1 = quotient(fast.x);
        const double q2 = quotient(cplx(0.0, -3.25) * fast.x);
        worst_scale = std::max(worst_scale, std::abs(q1 - q2) / std::max(1.0, q1));
    }
    req(worst_dense < 1e-10, "fast path deviates from the dense eigensolve");
    req(worst_scale < 1e-12, "quotient is not scale invariant");
    std::ostringstream ss;
    ss << "max dense-eig deviation = " << worst_dense;
    return ss.str();
}

std::string c6_matched_splitter() {
    std::vector<double> z(17, 50.0);
    z[0] = 50.0 / 16.0;
    MultiportNetwork split = junction(z, ctx);
    const double s11 = std::abs(split.S(0, 0));
    req(s11 < 1e-12, "feed port of the 17-way splitter is mismatched");
    std::ostringstream ss;
    ss << "|S11| at the feed port = " << s11;
    return ss.str();
}

std::string c7_switch_unit_states() {
    TileGeometry geo;
    geo.switches = SwitchModel::ideal();
    MultiportNetwork pass = build_switch_unit(UnitState::Pass, geo, ctx);
    MultiportNetwork pass180 = build_switch_unit(UnitState::Pass180, geo, ctx);
    MultiportNetwork open = build_switch_unit(UnitState::OpenReflect, geo, ctx);
    MultiportNetwork shorted = build_switch_unit(UnitState::ShortReflect, geo, ctx);
    const double dt = std::abs(std::abs(std::arg(pass180.S(1, 0) / pass.S(1, 0))) - pi);
    req(dt < 1e-9, "PASS/PASS_180 transmission phases do not differ by pi");
    req(std::abs(std::abs(open.S(0, 0)) - 1.0) < 1e-9, "OPEN_REFLECT is not fully reflective");
    req(std::abs(std::abs(shorted.S(0, 0)) - 1.0) < 1e-9, "SHORT_REFLECT is not fully reflective");
    const double dr = std::abs(std::abs(std::arg(shorted.S(0, 0) / open.S(0, 0))) - pi);
    req(dr < 1e-9, "open/short reflection phases do not differ by pi");
    std::ostringstream ss;
    ss << "phase errors: transmission " << dt << ", reflection " << dr;
    return ss.str();
}

std::string c8_optimizer_quality() {
    auto grid = AngularGrid::regular(10.0);
    RadiatingStructure rad = synthesize_array(1, 3, 0.25, ElementModel{}, 0.9, ctx, grid);
    TileGeometry geo;
    geo.antennas_per_tile = 3;
    geo.stub_count = 2;  // 4 + 6 bits: 2^10 states
    geo.switches = SwitchModel::ideal();

    const auto t0 = std::chrono::steady_clock::now();
    std::uniform_real_distribution<double> off(-30.0, 30.0);
    int hits = 0;
    double exhaustive_seconds = 0.0;
    for (unsigned seed = 1; seed <= 50; ++seed) {
        Objective obj;
        obj.radiating = &rad;
        obj.geometry = geo;
        obj.tile_map = {{0, 1, 2}};
        std::mt19937 dir_rng(seed);
        const double th = std::abs(off(dir_rng)) * pi / 180.0;
        const double ph = (off(dir_rng) + 30.0) * 6.0 * pi / 180.0;
        obj.nodes = {grid->nearest(th, ph).node};

        SearchSpace space;
        space.base = SwitchConfig::all_pass(geo, 1);
        SearchReport oracle = exhaustive_search(space, obj);
        exhaustive_seconds += oracle.seconds;
        SearchReport rep = coordinate_ascent(obj, nullptr, 8, 50, seed);
        req(rep.best_db <= oracle.best_db + 1e-12, "ascent exceeded the exhaustive optimum");
        if (rep.best_db >= oracle.best_db - 1e-9) ++hits;
    }
    req(exhaustive_seconds / 50.0 < 60.0, "a 2^10 exhaustive search took over a minute");
    req(hits >= 45, "ascent reached the optimum on fewer than 90% of seeds");
    std::ostringstream ss;
    ss << "optimum reached on " << hits << "/50 directions; total "
       << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() << " s";
    return ss.str();
}

std::string c9_qualitative_comparison() {
    auto grid = AngularGrid::regular(5.0);
    RadiatingStructure rad = synthesize_array(4, 4, 0.5, ElementModel{}, 0.9, ctx, grid);
    TileGeometry geo;  // realistic default switches
    std::vector<std::vector<int>> tmap = {
        {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15}};
    std::vector<Eigen::Index> nodes = grid->hemisphere_nodes();
    const Eigen::Index nn = static_cast<Eigen::Index>(nodes.size());

    // ceiling and the conventional benchmark
    BenchmarkRecipe conv = benchmark_model(BenchmarkKind::AllDigitalConventional, rad, geo);
    Operators conv_op = assemble_operators(conv.model);
    GainOperator conv_g = make_gain_operator(conv.model, conv_op, GainLevel::Rems);
    GainOperator ceil_g = make_gain_operator(conv.model, conv_op, GainLevel::Radiating);
    Eigen::VectorXd conv_gain(nn), ceiling(nn);
    for (Eigen::Index i = 0; i < nn; ++i) {
        conv_gain(i) = rayleigh_maximize(conv_g, nodes[i]).value;
        ceiling(i) = rayleigh_maximize(ceil_g, nodes[i]).value;
    }

    // per-direction switch optimization, warm-started from the neighbor node
    Eigen::VectorXd prop_gain(nn);
    SwitchConfig warm = SwitchConfig::all_pass(geo, 1);
    for (Eigen::Index i = 0; i < nn; ++i) {
        Objective obj;
        obj.radiating = &rad;
        obj.geometry = geo;
        obj.tile_map = tmap;
        obj.nodes = {nodes[i]};
        SearchReport rep = coordinate_ascent(obj, &warm, 2, 20, 1 + static_cast<unsigned>(i));
        prop_gain(i) = std::pow(10.0, rep.best_db / 10.0);
        warm = SwitchConfig{rep.best};
    }

    ComparisonReport rep =
        compare({"PROPOSED", "ALL_DIGITAL_CONVENTIONAL"}, {prop_gain, conv_gain}, {1, 16},
                ceiling);
    const double med = rep.entries[0].median_relative_db;
    const double cam_gap = rep.entries[0].cam_db - rep.entries[1].cam_db;
    req(med >= -8.0 && med <= 0.0,
        "median relative gain " + std::to_string(med) + " dB outside [-8, 0] dB");
    req(cam_gap > 5.0, "gain per RF chain advantage " + std::to_string(cam_gap) +
                           " dB is at most 5 dB");
    std::ostringstream ss;
    ss << "median relative gain = " << med << " dB, per-chain advantage = " << cam_gap
       << " dB";
    return ss.str();
}

std::string c10_parser_robustness() {
    const std::string dir = std::filesystem::temp_directory_path() / "rems_acceptance";
    std::filesystem::create_directories(dir);
    struct Cleanup {
        std::string d;
        ~Cleanup() { std::filesystem::remove_all(d); }
    } cleanup{dir};

    // touchstone round trips through every format
    double worst = 0.0;
    MultiportNetwork net = make_network(
        random_passive(3), std::vector<PortSpec>(3, PortSpec(50.0)), ctx);
    const std::string tpath = dir + "/net.s3p";
    save_touchstone(tpath, net);
    worst = std::max(worst,
                     (load_touchstone(tpath, ctx).network.S - net.S).cwiseAbs().maxCoeff());

    // hand-written MA and DB fixtures of the same matrix
    for (const std::string fmt : {"MA", "DB"}) {
        const std::string path = dir + "/net_" + fmt + ".s3p";
        std::ofstream out(path);
        out.precision(17);
        out << "# GHz S " << fmt << " R 50\n" << ctx.f / 1e9;
        for (Eigen::Index r = 0; r < 3; ++r) {
            for (Eigen::Index c = 0; c < 3; ++c) {
                const double mag = std::abs(net.S(r, c));
                out << " " << (fmt == "MA" ? mag : 20.0 * std::log10(mag)) << " "
                    << std::arg(net.S(r, c)) * 180.0 / pi;
            }
            out << "\n";
        }
        out.close();
        worst = std::max(worst,
                         (load_touchstone(path, ctx).network.S - net.S).cwiseAbs().maxCoeff());
    }

    auto grid = AngularGrid::regular(15.0);
    RadiatingStructure rs = synthesize_array(2, 2, 0.25, ElementModel{}, 1.0, ctx, grid);
    const std::string ppath = dir + "/pat.csv";
    save_patterns(ppath, rs.patterns, ctx);
    PatternLoadResult pl = load_patterns(ppath, grid, ctx);
    for (size_t e = 0; e < 4; ++e)
        worst = std::max(worst, (pl.patterns[e].a - rs.patterns[e].a).cwiseAbs().maxCoeff());
    req(worst < 1e-12, "file round trips exceed 1e-12");

    // malformed inputs carry line numbers
    {
        std::ofstream bad(dir + "/bad.s2p");
        bad << "# GHz S RI R 50\n12 0.1 0.2 0.3\n";
    }
    bool line_numbered = false;
    try {
        (void)load_touchstone(dir + "/bad.s2p", ctx);
    } catch (const ParseError& e) {
        line_numbered = std::string(e.what()).find(":2:") != std::string::npos;
    }
    req(line_numbered, "malformed touchstone error lacks a line number");
    {
        std::ofstream bad(dir + "/bad.csv");
        bad << "port,theta_deg,phi_deg,re_Etheta,im_Etheta,re_Ephi,im_Ephi\n1,0,0,nonsense\n";
    }
    line_numbered = false;
    try {
        (void)load_patterns(dir + "/bad.csv", grid, ctx);
    } catch (const ParseError& e) {
        line_numbered = std::string(e.what()).find(":2:") != std::string::npos;
    }
    req(line_numbered, "malformed pattern error lacks a line number");
    std::ostringstream ss;
    ss << "max round-trip deviation = " << worst;
    return ss.str();
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* title;
        std::function<std::string()> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "physical consistency of the synthetic array", c1_physical_consistency},
        {2, "gain operator matches the direct signal-flow solve", c2_operator_oracle},
        {3, "gain ordering on a 2-degree hemisphere map", c3_gain_ordering},
        {4, "benchmark architecture identities", c4_benchmark_identities},
        {5, "Rayleigh maximizer fast path and optimality", c5_rayleigh},
        {6, "matched 17-way splitter", c6_matched_splitter},
        {7, "switch unit states", c7_switch_unit_states},
        {8, "optimizer quality on the 2^10 tile", c8_optimizer_quality},
        {9, "qualitative architecture comparison", c9_qualitative_comparison},
        {10, "parser robustness and round trips", c10_parser_robustness},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = true;
        try {
            detail = c.run();
        } catch (const std::exception& e) {
            ok = false;
            detail = e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s  criterion %2d: %s (%s; %.1f s)\n", ok ? "PASS" : "FAIL", c.id,
                    c.title, detail.c_str(), secs);
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
