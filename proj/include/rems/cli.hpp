#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>

#include "rems/optimize.hpp"
#include "rems/patterns_io.hpp"
#include "rems/touchstone.hpp"

namespace rems {

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& j, const std::string& where,
                                std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ParseError("config: '" + where + "' must be an object");
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) ok = true;
        if (!ok) throw ParseError("config: unknown key '" + where + "." + key + "'");
    }
}

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

}  // namespace detail

/// One JSON document drives a run end to end; every setting has a default so
/// a minimal config only names what deviates.
struct RunConfig {
    double frequency_hz = 12e9;
    double grid_deg = 5.0;
    unsigned seed = 1;
    int threads = 0;
    std::string out_dir = ".";

    // radiating structure: synthetic planar array or measured files
    bool synthetic = true;
    int rows = 4, cols = 4;
    double spacing_wavelengths = 0.25;
    int element_exponent = 1;
    bool theta_polarized = true;
    double efficiency = 1.0;
    std::string touchstone_path, patterns_path;

    TileGeometry geometry;
    std::vector<std::vector<int>> tile_map;  // default: one tile over all antennas
    std::vector<BenchmarkKind> benchmarks = {
        BenchmarkKind::AllDigitalIdeal, BenchmarkKind::AllDigitalConventional,
        BenchmarkKind::ProposedIdeal, BenchmarkKind::Proposed};
    SwitchConfig switch_config;
    bool have_switch_config = false;

    // objective: one direction, or the median over the hemisphere map
    double objective_theta_deg = 0.0, objective_phi_deg = 0.0;
    bool objective_median = false;

    std::string method = "coordinate_ascent";  // or "exhaustive"
    int restarts = 8, max_passes = 50;
    long cap = 1l << 24;
    bool enumerate_matching = true, enumerate_units = true;
    bool follow_with_gain_map = false;

    nlohmann::json echo;  // the parsed document, for reproducible summaries
};

inline RunConfig parse_run_config(const nlohmann::json& j) {
    detail::reject_unknown_keys(
        j, "", {"frequency_hz", "grid_deg", "seed", "threads", "out_dir", "radiating",
                "geometry", "tile_map", "benchmarks", "switch_config", "switch_config_hex",
                "objective", "optimize"});
    RunConfig c;
    c.echo = j;
    if (j.contains("frequency_hz")) c.frequency_hz = j["frequency_hz"].get<double>();
    if (j.contains("grid_deg")) c.grid_deg = j["grid_deg"].get<double>();
    if (j.contains("seed")) c.seed = j["seed"].get<unsigned>();
    if (j.contains("threads")) c.threads = j["threads"].get<int>();
    if (j.contains("out_dir")) c.out_dir = j["out_dir"].get<std::string>();
    if (!(c.frequency_hz > 0.0)) throw ParseError("config: frequency_hz must be > 0");
    if (!(c.grid_deg > 0.0) || c.grid_deg > 90.0)
        throw ParseError("config: grid_deg must be in (0, 90]");

    if (j.contains("radiating")) {
        const auto& r = j["radiating"];
        detail::reject_unknown_keys(r, "radiating",
                                    {"type", "rows", "cols", "spacing_wavelengths",
                                     "element_exponent", "theta_polarized", "efficiency",
                                     "touchstone", "patterns"});
        const std::string type = r.value("type", std::string("synthetic"));
        if (type == "synthetic") {
            c.synthetic = true;
            if (r.contains("rows")) c.rows = r["rows"].get<int>();
            if (r.contains("cols")) c.cols = r["cols"].get<int>();
            if (r.contains("spacing_wavelengths"))
                c.spacing_wavelengths = r["spacing_wavelengths"].get<double>();
            if (r.contains("element_exponent"))
                c.element_exponent = r["element_exponent"].get<int>();
            if (r.contains("theta_polarized"))
                c.theta_polarized = r["theta_polarized"].get<bool>();
            if (r.contains("efficiency")) c.efficiency = r["efficiency"].get<double>();
            if (c.rows < 1 || c.cols < 1) throw ParseError("config: radiating rows/cols >= 1");
            if (!(c.efficiency > 0.0) || c.efficiency > 1.0)
                throw ParseError("config: radiating.efficiency must be in (0, 1]");
        } else if (type == "files") {
            c.synthetic = false;
            if (!r.contains("touchstone") || !r.contains("patterns"))
                throw ParseError("config: radiating type 'files' needs touchstone and patterns");
            c.touchstone_path = r["touchstone"].get<std::string>();
            c.patterns_path = r["patterns"].get<std::string>();
        } else {
            throw ParseError("config: radiating.type must be 'synthetic' or 'files'");
        }
    }

    if (j.contains("geometry")) {
        const auto& g = j["geometry"];
        detail::reject_unknown_keys(
            g, "geometry",
            {"antennas_per_tile", "stub_count", "series_length", "series_zc", "stub_length",
             "stub_zc", "phase_branch_length", "feed_zc", "feed_length", "branch_zc",
             "branch_length", "switches"});
        auto& geo = c.geometry;
        if (g.contains("antennas_per_tile")) geo.antennas_per_tile = g["antennas_per_tile"];
        if (g.contains("stub_count")) geo.stub_count = g["stub_count"];
        if (g.contains("series_length")) geo.series_length = g["series_length"];
        if (g.contains("series_zc")) geo.series_zc = g["series_zc"];
        if (g.contains("stub_length")) geo.stub_length = g["stub_length"];
        if (g.contains("stub_zc")) geo.stub_zc = g["stub_zc"];
        if (g.contains("phase_branch_length"))
            geo.phase_branch_length = g["phase_branch_length"];
        if (g.contains("feed_zc")) geo.feed_line.zc = g["feed_zc"];
        if (g.contains("feed_length")) geo.feed_line.length = g["feed_length"];
        if (g.contains("branch_zc")) geo.branch_line.zc = g["branch_zc"];
        if (g.contains("branch_length")) geo.branch_line.length = g["branch_length"];
        if (g.contains("switches")) {
            const auto& s = g["switches"];
            detail::reject_unknown_keys(s, "geometry.switches",
                                        {"ideal", "insertion_loss_db", "isolation_db",
                                         "return_loss_on_db", "return_loss_off_db",
                                         "transmission_phase"});
            if (s.value("ideal", false)) {
                geo.switches = SwitchModel::ideal();
            } else {
                if (s.contains("insertion_loss_db"))
                    geo.switches.insertion_loss_db = s["insertion_loss_db"];
                if (s.contains("isolation_db")) geo.switches.isolation_db = s["isolation_db"];
                if (s.contains("return_loss_on_db"))
                    geo.switches.return_loss_on_db = s["return_loss_on_db"];
                if (s.contains("return_loss_off_db"))
                    geo.switches.return_loss_off_db = s["return_loss_off_db"];
                if (s.contains("transmission_phase"))
                    geo.switches.transmission_phase = s["transmission_phase"];
            }
        }
        geo.validate();
    }

    if (j.contains("tile_map")) {
        for (const auto& t : j["tile_map"]) {
            std::vector<int> tile;
            for (const auto& a : t) tile.push_back(a.get<int>());
            c.tile_map.push_back(std::move(tile));
        }
    }

    if (j.contains("benchmarks")) {
        c.benchmarks.clear();
        for (const auto& b : j["benchmarks"]) {
            const std::string name = b.get<std::string>();
            if (name == "ALL_DIGITAL_IDEAL") c.benchmarks.push_back(BenchmarkKind::AllDigitalIdeal);
            else if (name == "ALL_DIGITAL_CONVENTIONAL")
                c.benchmarks.push_back(BenchmarkKind::AllDigitalConventional);
            else if (name == "PROPOSED_IDEAL") c.benchmarks.push_back(BenchmarkKind::ProposedIdeal);
            else if (name == "PROPOSED") c.benchmarks.push_back(BenchmarkKind::Proposed);
            else throw ParseError("config: unknown benchmark '" + name + "'");
        }
        if (c.benchmarks.empty()) throw ParseError("config: benchmarks list is empty");
    }

    if (j.contains("switch_config") && j.contains("switch_config_hex"))
        throw ParseError("config: give switch_config or switch_config_hex, not both");
    if (j.contains("switch_config")) {
        c.switch_config = SwitchConfig::from_json(j["switch_config"]);
        c.have_switch_config = true;
    }
    if (j.contains("switch_config_hex")) {
        const int n_tiles = c.tile_map.empty() ? 1 : static_cast<int>(c.tile_map.size());
        c.switch_config = SwitchConfig::from_bitstring(j["switch_config_hex"].get<std::string>(),
                                                       c.geometry, n_tiles);
        c.have_switch_config = true;
    }

    if (j.contains("objective")) {
        const auto& o = j["objective"];
        detail::reject_unknown_keys(o, "objective", {"theta_deg", "phi_deg", "aggregate"});
        c.objective_theta_deg = o.value("theta_deg", 0.0);
        c.objective_phi_deg = o.value("phi_deg", 0.0);
        c.objective_median = o.value("aggregate", std::string("direction")) == "median";
        if (c.objective_theta_deg < 0.0 || c.objective_theta_deg > 90.0 + 1e-12)
            throw ParseError("config: objective.theta_deg must lie in the front hemisphere");
    }

    if (j.contains("optimize")) {
        const auto& o = j["optimize"];
        detail::reject_unknown_keys(o, "optimize",
                                    {"method", "restarts", "max_passes", "cap",
                                     "enumerate_matching", "enumerate_units",
                                     "follow_with_gain_map"});
        c.method = o.value("method", std::string("coordinate_ascent"));
        if (c.method != "coordinate_ascent" && c.method != "exhaustive")
            throw ParseError("config: optimize.method must be coordinate_ascent or exhaustive");
        c.restarts = o.value("restarts", 8);
        c.max_passes = o.value("max_passes", 50);
        c.cap = o.value("cap", 1l << 24);
        c.enumerate_matching = o.value("enumerate_matching", true);
        c.enumerate_units = o.value("enumerate_units", true);
        c.follow_with_gain_map = o.value("follow_with_gain_map", false);
    }
    return c;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("config '" + path + "': " + e.what());
    }
    return parse_run_config(j);
}

inline RadiatingStructure load_radiating(const RunConfig& cfg, const WaveContext& ctx,
                                         std::shared_ptr<const AngularGrid> grid) {
    if (cfg.synthetic) {
        ElementModel elem;
        elem.exponent = cfg.element_exponent;
        elem.theta_polarized = cfg.theta_polarized;
        return synthesize_array(cfg.rows, cfg.cols, cfg.spacing_wavelengths, elem,
                                cfg.efficiency, ctx, grid);
    }
    TouchstoneResult ts = load_touchstone(cfg.touchstone_path, ctx);
    PatternLoadResult pl = load_patterns(cfg.patterns_path, grid, ctx);
    RadiatingStructure rs;
    rs.ctx = ctx;
    rs.grid = grid;
    rs.S_RR = ts.network.S;
    rs.ports = ts.network.ports;
    rs.patterns = std::move(pl.patterns);
    if (rs.patterns.size() != static_cast<size_t>(rs.S_RR.rows()))
        throw ParseError("radiating files disagree on port count");
    return rs;
}

/// Fill defaulted run pieces that depend on the radiating structure size.
inline void finalize_run(RunConfig& cfg, Eigen::Index n_elements) {
    if (cfg.tile_map.empty()) {
        std::vector<int> all(static_cast<size_t>(n_elements));
        for (Eigen::Index i = 0; i < n_elements; ++i) all[static_cast<size_t>(i)] = static_cast<int>(i);
        cfg.tile_map = {std::move(all)};
        cfg.geometry.antennas_per_tile = static_cast<int>(n_elements);
    }
    if (!cfg.have_switch_config)
        cfg.switch_config =
            SwitchConfig::all_pass(cfg.geometry, static_cast<int>(cfg.tile_map.size()));
    cfg.switch_config.validate(cfg.geometry);
}

/// Per-architecture map rows: optimal gains of all three levels plus the
/// power breakdown at the system-level optimum.
struct ArchitectureMap {
    std::string name;
    int rf_chains = 0;
    GainLevel level = GainLevel::Rems;       // the level defining this architecture's gain
    Eigen::VectorXd headline;                // linear, per node, at `level`
    Eigen::VectorXd g_rems, g_t, g_r;        // linear, per node
    Eigen::VectorXd eta_m, eta_t, eta_r, d;  // at the REMS optimum
};

inline ArchitectureMap evaluate_architecture(const BenchmarkRecipe& recipe,
                                             const std::vector<Eigen::Index>& nodes) {
    ArchitectureMap am;
    am.name = to_string(recipe.kind);
    am.rf_chains = recipe.rf_chains;
    am.level = recipe.level;
    Operators op = assemble_operators(recipe.model);
    GainOperator g_rems = make_gain_operator(recipe.model, op, GainLevel::Rems);
    GainOperator g_tun = make_gain_operator(recipe.model, op, GainLevel::Tuning);
    GainOperator g_rad = make_gain_operator(recipe.model, op, GainLevel::Radiating);

    const Eigen::Index n = static_cast<Eigen::Index>(nodes.size());
    am.g_rems.resize(n);
    am.g_t.resize(n);
    am.g_r.resize(n);
    am.eta_m.resize(n);
    am.eta_t.resize(n);
    am.eta_r.resize(n);
    am.d.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        RayleighMax rm = rayleigh_maximize(g_rems, nodes[i]);
        am.g_rems(i) = rm.value;
        am.g_t(i) = rayleigh_maximize(g_tun, nodes[i]).value;
        am.g_r(i) = rayleigh_maximize(g_rad, nodes[i]).value;
        if (rm.value > 0.0) {
            GainResult full = gain_at(recipe.model, op, rm.x, GainLevel::Rems, nodes[i]);
            am.eta_m(i) = full.powers.eta_matching;
            am.eta_t(i) = full.powers.eta_tuning;
            am.eta_r(i) = full.powers.eta_radiating;
            am.d(i) = full.directivity;
        } else {
            am.eta_m(i) = am.eta_t(i) = am.eta_r(i) = am.d(i) = 0.0;
        }
    }
    switch (recipe.level) {
        case GainLevel::Rems: am.headline = am.g_rems; break;
        case GainLevel::Tuning: am.headline = am.g_t; break;
        case GainLevel::Radiating: am.headline = am.g_r; break;
    }
    return am;
}

inline void write_gain_map_csv(const std::string& path, const ArchitectureMap& am,
                               const AngularGrid& grid,
                               const std::vector<Eigen::Index>& nodes) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << "theta_deg,phi_deg,G_rems_dBi,G_t_dBi,G_r_dBi,eta_matching,eta_tuning,"
           "eta_radiating,D_dBi\n";
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(nodes.size()); ++i) {
        const Eigen::Index node = nodes[static_cast<size_t>(i)];
        const Eigen::Index it = node / grid.n_phi(), jp = node % grid.n_phi();
        out << detail::fmt(grid.theta(it) * 180.0 / pi) << ','
            << detail::fmt(grid.phi(jp) * 180.0 / pi) << ',' << detail::fmt(to_db(am.g_rems(i)))
            << ',' << detail::fmt(to_db(am.g_t(i))) << ',' << detail::fmt(to_db(am.g_r(i)))
            << ',' << detail::fmt(am.eta_m(i)) << ',' << detail::fmt(am.eta_t(i)) << ','
            << detail::fmt(am.eta_r(i)) << ',' << detail::fmt(to_db(am.d(i))) << '\n';
    }
}

inline std::string architecture_file_stem(const std::string& name) {
    std::string s = name;
    for (char& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return s;
}

/// gain-map command: per-architecture gain maps, a comparison table against
/// the radiating ceiling, and a summary JSON. Returns the summary.
inline nlohmann::json cmd_gain_map(RunConfig cfg) {
    const WaveContext ctx = WaveContext::at(cfg.frequency_hz);
    auto grid = AngularGrid::regular(cfg.grid_deg);
    RadiatingStructure rad = load_radiating(cfg, ctx, grid);
    finalize_run(cfg, static_cast<Eigen::Index>(rad.patterns.size()));
    std::filesystem::create_directories(cfg.out_dir);

    std::vector<Eigen::Index> nodes = grid->hemisphere_nodes();
    std::sort(nodes.begin(), nodes.end());  // stable (theta, phi) order

    std::vector<ArchitectureMap> maps;
    for (BenchmarkKind kind : cfg.benchmarks) {
        BenchmarkRecipe recipe = benchmark_model(kind, rad, cfg.geometry,
                                                 &cfg.switch_config.tiles, &cfg.tile_map);
        maps.push_back(evaluate_architecture(recipe, nodes));
    }

    // the ceiling is architecture-independent: take it from any evaluated map
    const Eigen::VectorXd ceiling = maps.front().g_r;
    std::vector<std::string> names;
    std::vector<Eigen::VectorXd> gains;
    std::vector<int> chains;
    for (const auto& am : maps) {
        names.push_back(am.name);
        gains.push_back(am.headline);
        chains.push_back(am.rf_chains);
    }
    ComparisonReport rep = compare(names, gains, chains, ceiling);

    for (const auto& am : maps)
        write_gain_map_csv(
            (std::filesystem::path(cfg.out_dir) /
             ("gain_map_" + architecture_file_stem(am.name) + ".csv")).string(),
            am, *grid, nodes);

    {
        std::ofstream out(std::filesystem::path(cfg.out_dir) / "comparison.csv");
        out << "theta_deg,phi_deg";
        for (const auto& e : rep.entries) out << ",rel_" << architecture_file_stem(e.name) << "_db";
        out << '\n';
        for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(nodes.size()); ++i) {
            const Eigen::Index node = nodes[static_cast<size_t>(i)];
            out << detail::fmt(grid->theta(node / grid->n_phi()) * 180.0 / pi) << ','
                << detail::fmt(grid->phi(node % grid->n_phi()) * 180.0 / pi);
            for (const auto& e : rep.entries) out << ',' << detail::fmt(e.relative_db(i));
            out << '\n';
        }
        out << "median,";
        for (const auto& e : rep.entries) out << ',' << detail::fmt(e.median_relative_db);
        out << "\ncam_db,";
        for (const auto& e : rep.entries) out << ',' << detail::fmt(e.cam_db);
        out << '\n';
    }

    nlohmann::json summary;
    summary["config"] = cfg.echo;
    summary["seed"] = cfg.seed;
    summary["frequency_hz"] = cfg.frequency_hz;
    summary["grid_deg"] = cfg.grid_deg;
    summary["n_directions"] = nodes.size();
    for (const auto& e : rep.entries) {
        nlohmann::json ej;
        ej["median_relative_db"] = e.median_relative_db;
        ej["cam_db"] = e.cam_db;
        summary["architectures"][e.name] = std::move(ej);
    }
    std::ofstream(std::filesystem::path(cfg.out_dir) / "summary.json")
        << summary.dump(2) << '\n';
    return summary;
}

/// optimize command: runs the configured search and writes the report (best
/// config in both forms included). Returns the report JSON.
inline nlohmann::json cmd_optimize(RunConfig cfg) {
    const WaveContext ctx = WaveContext::at(cfg.frequency_hz);
    auto grid = AngularGrid::regular(cfg.grid_deg);
    RadiatingStructure rad = load_radiating(cfg, ctx, grid);
    finalize_run(cfg, static_cast<Eigen::Index>(rad.patterns.size()));
    std::filesystem::create_directories(cfg.out_dir);

    Objective obj;
    obj.radiating = &rad;
    obj.geometry = cfg.geometry;
    obj.tile_map = cfg.tile_map;
    if (cfg.objective_median) {
        obj.nodes = grid->hemisphere_nodes();
    } else {
        AngularGrid::Snap snap = grid->nearest(cfg.objective_theta_deg * pi / 180.0,
                                               cfg.objective_phi_deg * pi / 180.0);
        obj.nodes = {snap.node};
    }

    SearchReport report;
    if (cfg.method == "exhaustive") {
        SearchSpace space;
        space.base = cfg.switch_config;
        space.enumerate_matching = cfg.enumerate_matching;
        space.enumerate_units = cfg.enumerate_units;
        report = exhaustive_search(space, obj, cfg.cap);
    } else {
        const SwitchConfig* init = cfg.have_switch_config ? &cfg.switch_config : nullptr;
        report = coordinate_ascent(obj, init, cfg.restarts, cfg.max_passes, cfg.seed);
    }

    nlohmann::json rj = report.to_json(cfg.geometry);
    rj["config"] = cfg.echo;
    rj["seed"] = cfg.seed;
    rj["method"] = cfg.method;
    std::ofstream(std::filesystem::path(cfg.out_dir) / "search_report.json")
        << rj.dump(2) << '\n';

    if (cfg.follow_with_gain_map) {
        RunConfig follow = cfg;
        follow.switch_config = SwitchConfig{report.best};
        follow.have_switch_config = true;
        cmd_gain_map(follow);
    }
    return rj;
}

/// inspect command: report what a touchstone, pattern, or config file holds.
inline nlohmann::json cmd_inspect(const std::string& path, double frequency_hz = 12e9,
                                  double grid_deg = 5.0) {
    const std::string ext = std::filesystem::path(path).extension().string();
    nlohmann::json info;
    info["path"] = path;
    const WaveContext ctx = WaveContext::at(frequency_hz);
    if (ext.size() > 2 && ext[1] == 's' && ext.back() == 'p') {
        TouchstoneResult ts = load_touchstone(path, ctx);
        Classification c = classify(ts.network);
        info["kind"] = "touchstone";
        info["ports"] = ts.network.size();
        info["file_frequency_hz"] = ts.file_frequency;
        info["passive"] = c.passive;
        info["lossless"] = c.lossless;
        info["reciprocal"] = c.reciprocal;
        info["passivity_margin"] = c.passivity_margin;
        for (const auto& w : ts.warnings) info["warnings"].push_back(w);
    } else if (ext == ".csv") {
        auto grid = AngularGrid::regular(grid_deg);
        PatternLoadResult pl = load_patterns(path, grid, ctx);
        info["kind"] = "patterns";
        info["ports"] = pl.patterns.size();
        info["grid_deg"] = grid_deg;
        info["max_snap_deg"] = pl.max_snap_deg;
        for (const auto& p : pl.patterns)
            info["pattern_power_w"].push_back(l2_norm_sq(p));
    } else if (ext == ".json") {
        RunConfig cfg = load_run_config(path);
        info["kind"] = "config";
        info["frequency_hz"] = cfg.frequency_hz;
        info["grid_deg"] = cfg.grid_deg;
        info["radiating"] = cfg.synthetic ? "synthetic" : "files";
        info["method"] = cfg.method;
    } else {
        throw ParseError("inspect: unrecognized file type '" + path + "'");
    }
    return info;
}

/// Map errors to the documented process exit codes:
/// 0 ok, 1 internal, 2 input error, 3 refused (cap exceeded).
inline int run_with_exit_codes(const std::function<void()>& body) {
    try {
        body();
        return 0;
    } catch (const SearchCapExceeded& e) {
        std::cerr << "refused: " << e.what() << '\n';
        return 3;
    } catch (const ParseError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace rems
