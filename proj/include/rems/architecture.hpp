#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "rems/gain.hpp"
#include "rems/model.hpp"

namespace rems {

/// Four states of one antenna switch unit. The two-bit encoding is
/// (low bit = direct branch switch on, high bit = delay branch switch on).
enum class UnitState : int {
    OpenReflect = 0,   // both off: wave reflected at an open
    Pass = 1,          // direct branch on
    Pass180 = 2,       // delay branch on: extra half-wave of line
    ShortReflect = 3,  // both on: reflected at a short
};

inline const char* to_string(UnitState s) {
    switch (s) {
        case UnitState::OpenReflect: return "OPEN_REFLECT";
        case UnitState::Pass: return "PASS";
        case UnitState::Pass180: return "PASS_180";
        default: return "SHORT_REFLECT";
    }
}

inline UnitState unit_state_from_string(const std::string& s) {
    if (s == "OPEN_REFLECT") return UnitState::OpenReflect;
    if (s == "PASS") return UnitState::Pass;
    if (s == "PASS_180") return UnitState::Pass180;
    if (s == "SHORT_REFLECT") return UnitState::ShortReflect;
    throw ParseError("unknown switch unit state: " + s);
}

struct LineSpec {
    double zc = 50.0;      // characteristic impedance, ohm
    double length = 0.25;  // in wavelengths
};

/// Geometry and component models of one tile: a stub matching network feeding
/// a 1:K splitter whose branches each carry a switch unit.
struct TileGeometry {
    int antennas_per_tile = 16;
    int stub_count = 3;
    double series_length = 0.125;       // line between stub taps, wavelengths
    double series_zc = 50.0 / 16.0;     // matcher lives in the feed section
    double stub_length = 0.1;           // wavelengths
    double stub_zc = 50.0;
    double phase_branch_length = 0.5;   // delay branch of a switch unit
    LineSpec feed_line{50.0 / 16.0, 0.25};
    LineSpec branch_line{50.0, 0.25};
    SwitchModel switches;

    int bits_per_tile() const { return 2 * stub_count + 2 * antennas_per_tile; }

    void validate() const {
        if (antennas_per_tile < 1 || stub_count < 1)
            throw std::invalid_argument("tile geometry: counts must be positive");
        if (series_length < 0.0 || stub_length < 0.0 || phase_branch_length < 0.0 ||
            feed_line.length < 0.0 || branch_line.length < 0.0)
            throw std::invalid_argument("tile geometry: negative line length");
        if (!(series_zc > 0.0) || !(stub_zc > 0.0) || !(feed_line.zc > 0.0) ||
            !(branch_line.zc > 0.0))
            throw std::invalid_argument("tile geometry: impedances must be > 0");
    }
};

/// Switch settings of one tile: per stub a (series-connect, terminate-short)
/// bit pair, plus one four-valued state per antenna branch.
struct TileConfig {
    std::vector<bool> matching;    // 2 * stub_count bits
    std::vector<UnitState> units;  // antennas_per_tile states

    void validate(const TileGeometry& geo) const {
        if (matching.size() != static_cast<size_t>(2 * geo.stub_count))
            throw std::invalid_argument("tile config: wrong matching bit count");
        if (units.size() != static_cast<size_t>(geo.antennas_per_tile))
            throw std::invalid_argument("tile config: wrong unit state count");
    }
};

struct SwitchConfig {
    std::vector<TileConfig> tiles;

    void validate(const TileGeometry& geo) const {
        if (tiles.empty()) throw std::invalid_argument("switch config: no tiles");
        for (const auto& t : tiles) t.validate(geo);
    }

    static SwitchConfig all_pass(const TileGeometry& geo, int n_tiles) {
        SwitchConfig c;
        c.tiles.assign(static_cast<size_t>(n_tiles),
                       TileConfig{std::vector<bool>(static_cast<size_t>(2 * geo.stub_count), false),
                                  std::vector<UnitState>(static_cast<size_t>(geo.antennas_per_tile),
                                                         UnitState::Pass)});
        return c;
    }

    nlohmann::json to_json() const {
        nlohmann::json tiles_j = nlohmann::json::array();
        for (const auto& t : tiles) {
            nlohmann::json tj;
            tj["matching"] = nlohmann::json::array();
            for (bool b : t.matching) tj["matching"].push_back(b ? 1 : 0);
            tj["units"] = nlohmann::json::array();
            for (UnitState u : t.units) tj["units"].push_back(to_string(u));
            tiles_j.push_back(std::move(tj));
        }
        return nlohmann::json{{"tiles", std::move(tiles_j)}};
    }

    static SwitchConfig from_json(const nlohmann::json& j) {
        if (!j.contains("tiles") || !j["tiles"].is_array())
            throw ParseError("switch config JSON: missing 'tiles' array");
        SwitchConfig c;
        for (const auto& tj : j["tiles"]) {
            TileConfig t;
            for (const auto& b : tj.at("matching")) t.matching.push_back(b.get<int>() != 0);
            for (const auto& u : tj.at("units"))
                t.units.push_back(unit_state_from_string(u.get<std::string>()));
            c.tiles.push_back(std::move(t));
        }
        return c;
    }

    /// Compact hex form. Per tile the bit layout is: stub bits low-to-high
    /// (series then terminate-short per stub), then the two-bit unit states.
    /// Hex character i encodes global bits 4i..4i+3, least significant first.
    std::string to_bitstring(const TileGeometry& geo) const {
        validate(geo);
        const int bpt = geo.bits_per_tile();
        const size_t total = tiles.size() * static_cast<size_t>(bpt);
        std::vector<int> bits(total, 0);
        for (size_t t = 0; t < tiles.size(); ++t) {
            size_t base = t * static_cast<size_t>(bpt);
            for (size_t b = 0; b < tiles[t].matching.size(); ++b)
                bits[base + b] = tiles[t].matching[b] ? 1 : 0;
            for (size_t u = 0; u < tiles[t].units.size(); ++u) {
                const int v = static_cast<int>(tiles[t].units[u]);
                bits[base + tiles[t].matching.size() + 2 * u] = v & 1;
                bits[base + tiles[t].matching.size() + 2 * u + 1] = (v >> 1) & 1;
            }
        }
        std::string out((total + 3) / 4, '0');
        for (size_t b = 0; b < total; ++b)
            if (bits[b]) {
                int nib = out[b / 4] >= 'a' ? out[b / 4] - 'a' + 10 : out[b / 4] - '0';
                nib |= 1 << (b % 4);
                out[b / 4] = static_cast<char>(nib < 10 ? '0' + nib : 'a' + nib - 10);
            }
        return out;
    }

    static SwitchConfig from_bitstring(const std::string& hex, const TileGeometry& geo,
                                       int n_tiles) {
        const int bpt = geo.bits_per_tile();
        const size_t total = static_cast<size_t>(n_tiles) * static_cast<size_t>(bpt);
        if (hex.size() != (total + 3) / 4)
            throw ParseError("switch config bitstring: wrong length");
        std::vector<int> bits(total, 0);
        for (size_t b = 0; b < total; ++b) {
            const char c = hex[b / 4];
            int nib;
            if (c >= '0' && c <= '9') nib = c - '0';
            else if (c >= 'a' && c <= 'f') nib = c - 'a' + 10;
            else if (c >= 'A' && c <= 'F') nib = c - 'A' + 10;
            else throw ParseError("switch config bitstring: invalid hex character");
            bits[b] = (nib >> (b % 4)) & 1;
        }
        SwitchConfig cfg;
        for (int t = 0; t < n_tiles; ++t) {
            TileConfig tc;
            const size_t base = static_cast<size_t>(t) * static_cast<size_t>(bpt);
            for (int b = 0; b < 2 * geo.stub_count; ++b)
                tc.matching.push_back(bits[base + static_cast<size_t>(b)] != 0);
            for (int u = 0; u < geo.antennas_per_tile; ++u) {
                const size_t p = base + static_cast<size_t>(2 * geo.stub_count + 2 * u);
                tc.units.push_back(static_cast<UnitState>(bits[p] | (bits[p + 1] << 1)));
            }
            cfg.tiles.push_back(std::move(tc));
        }
        return cfg;
    }
};

/// Stub matching network: stub_count shunt taps joined by series lines. Each
/// tap carries a series-connect switch, the stub line, and a grounded
/// termination switch (closed = short at the stub end, open = open).
inline MultiportNetwork build_matching_network(const std::vector<bool>& bits,
                                               const TileGeometry& geo, const WaveContext& ctx) {
    geo.validate();
    if (bits.size() != static_cast<size_t>(2 * geo.stub_count))
        throw std::invalid_argument("matching network: wrong bit count");

    auto stub_one_port = [&](bool series_on, bool term_short) {
        MultiportNetwork sw1 =
            switch_two_port(geo.switches, series_on ? SwitchState::On : SwitchState::Off, ctx);
        MultiportNetwork line = transmission_line(geo.stub_zc, geo.stub_length, ctx);
        if (std::abs(geo.stub_zc - ctx.R0) > 1e-12)
            line = renormalize(line, {PortSpec(ctx.R0), PortSpec(ctx.R0)});
        MultiportNetwork sw2 =
            switch_two_port(geo.switches, term_short ? SwitchState::On : SwitchState::Off, ctx);
        MultiportNetwork branch = connect(sw1, 1, line, 0);
        branch = connect(branch, 1, sw2, 0);
        return terminate(branch, 1, -1.0);  // grounded termination switch
    };

    auto tap = [&](int i) {
        MultiportNetwork j = junction({geo.series_zc, geo.series_zc, ctx.R0}, ctx);
        return connect(j, 2, stub_one_port(bits[static_cast<size_t>(2 * i)],
                                           bits[static_cast<size_t>(2 * i + 1)]),
                       0);
    };

    MultiportNetwork net = tap(0);
    for (int i = 1; i < geo.stub_count; ++i) {
        net = connect(net, 1, transmission_line(geo.series_zc, geo.series_length, ctx), 0);
        net = connect(net, 1, tap(i), 0);
    }
    return net;
}

/// Switch unit: two parallel branches between two 3-way junctions; the direct
/// branch is one switch, the delay branch a switch plus a half-wave line.
inline MultiportNetwork build_switch_unit(UnitState state, const TileGeometry& geo,
                                          const WaveContext& ctx) {
    geo.validate();
    const int v = static_cast<int>(state);
    const bool direct_on = (v & 1) != 0;
    const bool delay_on = (v & 2) != 0;

    MultiportNetwork j1 = junction({ctx.R0, ctx.R0, ctx.R0}, ctx);
    MultiportNetwork j2 = junction({ctx.R0, ctx.R0, ctx.R0}, ctx);
    MultiportNetwork direct =
        switch_two_port(geo.switches, direct_on ? SwitchState::On : SwitchState::Off, ctx);
    MultiportNetwork delay = connect(
        switch_two_port(geo.switches, delay_on ? SwitchState::On : SwitchState::Off, ctx), 1,
        transmission_line(ctx.R0, geo.phase_branch_length, ctx), 0);

    // stacked port layout: j1=0..2, j2=3..5, direct=6..7, delay=8..9
    MultiportNetwork all = stack(stack(j1, j2), stack(direct, delay));
    return interconnect(all, {{1, 6}, {2, 8}, {7, 4}, {9, 5}});
}

/// One tile: matcher -> feed line -> 1:K splitter -> per-branch line and
/// switch unit. Returned with every port renormalized to the model reference.
inline TuningNetwork build_tile(const TileConfig& config, const TileGeometry& geo,
                                const WaveContext& ctx) {
    geo.validate();
    config.validate(geo);
    const int k = geo.antennas_per_tile;

    MultiportNetwork net = build_matching_network(config.matching, geo, ctx);
    net = connect(net, 1, transmission_line(geo.feed_line.zc, geo.feed_line.length, ctx), 0);

    std::vector<double> split_z(static_cast<size_t>(k) + 1, geo.branch_line.zc);
    split_z[0] = geo.feed_line.zc;
    net = connect(net, 1, junction(split_z, ctx), 0);

    for (int a = 0; a < k; ++a) {
        MultiportNetwork branch =
            connect(transmission_line(geo.branch_line.zc, geo.branch_line.length, ctx), 1,
                    build_switch_unit(config.units[static_cast<size_t>(a)], geo, ctx), 0);
        // splitter outputs are consumed front to back; antenna ports append in order
        net = connect(net, 1, branch, 0);
    }

    MultiportNetwork renorm =
        renormalize(net, std::vector<PortSpec>(static_cast<size_t>(net.size()), PortSpec(ctx.R0)));
    return TuningNetwork::from_network(renorm, 1);
}

/// Block-diagonal array tuning network: one inner port per tile, outer ports
/// arranged in antenna order via tile_map (a partition of 0..M-1).
inline TuningNetwork build_array_tuning(const std::vector<TileConfig>& configs,
                                        const std::vector<std::vector<int>>& tile_map,
                                        const TileGeometry& geo, const WaveContext& ctx) {
    if (configs.size() != tile_map.size())
        throw std::invalid_argument("array tuning: configs/tile_map size mismatch");
    const Eigen::Index n = static_cast<Eigen::Index>(configs.size());
    Eigen::Index m = 0;
    for (const auto& tm : tile_map) m += static_cast<Eigen::Index>(tm.size());
    std::vector<char> seen(static_cast<size_t>(m), 0);
    for (const auto& tm : tile_map)
        for (int a : tm) {
            if (a < 0 || a >= m || seen[static_cast<size_t>(a)])
                throw std::invalid_argument("array tuning: tile_map is not a partition");
            seen[static_cast<size_t>(a)] = 1;
        }

    TuningNetwork out;
    out.n = n;
    out.m = m;
    out.S = Eigen::MatrixXcd::Zero(n + m, n + m);
    for (Eigen::Index t = 0; t < n; ++t) {
        const auto& tm = tile_map[static_cast<size_t>(t)];
        TileGeometry g = geo;
        g.antennas_per_tile = static_cast<int>(tm.size());
        TuningNetwork tile = build_tile(configs[static_cast<size_t>(t)], g, ctx);
        // local port 0 = inner, local 1+j = antenna tm[j]
        auto global = [&](Eigen::Index local) {
            return local == 0 ? t : n + static_cast<Eigen::Index>(tm[static_cast<size_t>(local - 1)]);
        };
        for (Eigen::Index r = 0; r < tile.S.rows(); ++r)
            for (Eigen::Index c = 0; c < tile.S.cols(); ++c)
                out.S(global(r), global(c)) = tile.S(r, c);
    }
    return out;
}

enum class BenchmarkKind { AllDigitalIdeal, AllDigitalConventional, ProposedIdeal, Proposed };

inline const char* to_string(BenchmarkKind k) {
    switch (k) {
        case BenchmarkKind::AllDigitalIdeal: return "ALL_DIGITAL_IDEAL";
        case BenchmarkKind::AllDigitalConventional: return "ALL_DIGITAL_CONVENTIONAL";
        case BenchmarkKind::ProposedIdeal: return "PROPOSED_IDEAL";
        default: return "PROPOSED";
    }
}

/// How to evaluate one benchmark architecture: a concrete model plus the gain
/// level whose per-direction optimum defines the architecture's gain map.
struct BenchmarkRecipe {
    BenchmarkKind kind;
    GainLevel level = GainLevel::Rems;
    RemsModel model;
    int rf_chains = 0;
};

inline BenchmarkRecipe benchmark_model(BenchmarkKind kind, const RadiatingStructure& radiating,
                                       const TileGeometry& geo,
                                       const std::vector<TileConfig>* configs = nullptr,
                                       const std::vector<std::vector<int>>* tile_map = nullptr) {
    const Eigen::Index m = static_cast<Eigen::Index>(radiating.patterns.size());
    BenchmarkRecipe r;
    r.kind = kind;
    r.model.ctx = radiating.ctx;
    r.model.radiating = radiating;

    switch (kind) {
        case BenchmarkKind::AllDigitalIdeal:
            // ideal per-chain matching: the map is the radiating-level optimum
            r.level = GainLevel::Radiating;
            r.model.tuning = TuningNetwork::feedthrough(m);
            r.model.frontend.z_tx = Eigen::VectorXcd::Constant(m, radiating.ctx.R0);
            r.rf_chains = static_cast<int>(m);
            break;
        case BenchmarkKind::AllDigitalConventional:
            r.level = GainLevel::Rems;
            r.model.tuning = TuningNetwork::feedthrough(m);
            r.model.frontend.z_tx = Eigen::VectorXcd::Constant(m, 50.0);
            r.rf_chains = static_cast<int>(m);
            break;
        case BenchmarkKind::ProposedIdeal:
        case BenchmarkKind::Proposed: {
            if (!configs || !tile_map)
                throw std::invalid_argument("benchmark: PROPOSED kinds need a switch config");
            r.level = kind == BenchmarkKind::ProposedIdeal ? GainLevel::Tuning : GainLevel::Rems;
            r.model.tuning = build_array_tuning(*configs, *tile_map, geo, radiating.ctx);
            r.model.frontend.z_tx =
                Eigen::VectorXcd::Constant(r.model.tuning.n, geo.feed_line.zc);
            r.rf_chains = static_cast<int>(r.model.tuning.n);
            break;
        }
    }
    r.model.frontend.v_tx = Eigen::VectorXcd::Zero(r.model.tuning.n);
    r.model.check_dimensions();
    return r;
}

inline double median(Eigen::VectorXd v) {
    if (v.size() == 0) throw std::invalid_argument("median of empty vector");
    std::sort(v.data(), v.data() + v.size());
    const Eigen::Index h = v.size() / 2;
    return v.size() % 2 ? v(h) : 0.5 * (v(h - 1) + v(h));
}

struct ComparisonEntry {
    std::string name;
    Eigen::VectorXd relative_db;  // per node, vs the radiating ceiling
    double median_relative_db = 0.0;
    double cam_db = 0.0;  // median gain per RF chain, dB
};

struct ComparisonReport {
    std::vector<ComparisonEntry> entries;
};

/// Per-direction gains of each architecture against the radiating ceiling of
/// the same structure on the same nodes, plus medians and gain per RF chain.
inline ComparisonReport compare(const std::vector<std::string>& names,
                                const std::vector<Eigen::VectorXd>& gains_linear,
                                const std::vector<int>& rf_chain_counts,
                                const Eigen::VectorXd& ceiling_linear) {
    if (names.size() != gains_linear.size() || names.size() != rf_chain_counts.size())
        throw std::invalid_argument("compare: inconsistent input sizes");
    ComparisonReport rep;
    for (size_t a = 0; a < names.size(); ++a) {
        const Eigen::VectorXd& g = gains_linear[a];
        if (g.size() != ceiling_linear.size())
            throw std::invalid_argument("compare: gain maps evaluated on different grids");
        ComparisonEntry e;
        e.name = names[a];
        e.relative_db.resize(g.size());
        Eigen::VectorXd cam(g.size());
        for (Eigen::Index i = 0; i < g.size(); ++i) {
            e.relative_db(i) = to_db(g(i)) - to_db(ceiling_linear(i));
            cam(i) = to_db(g(i) / rf_chain_counts[a]);
        }
        e.median_relative_db = median(e.relative_db);
        e.cam_db = median(cam);
        rep.entries.push_back(std::move(e));
    }
    return rep;
}

}  // namespace rems
