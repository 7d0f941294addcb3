#pragma once

#include <chrono>
#include <random>
#include <unordered_map>

#include "rems/architecture.hpp"

namespace rems {

struct SearchCapExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// What a switch configuration is scored on: the per-direction optimal
/// system-level gain of the PROPOSED model at one node, or the median of it
/// over a set of nodes.
struct Objective {
    const RadiatingStructure* radiating = nullptr;
    TileGeometry geometry;
    std::vector<std::vector<int>> tile_map;
    std::vector<Eigen::Index> nodes;

    void validate() const {
        if (!radiating) throw std::invalid_argument("objective: no radiating structure");
        if (nodes.empty()) throw std::invalid_argument("objective: no target direction");
        if (tile_map.empty()) throw std::invalid_argument("objective: empty tile map");
    }
};

/// Best achievable system gain (dB) of the configuration; model failures map
/// to -inf with the reason recorded.
inline double evaluate_config(const std::vector<TileConfig>& configs, const Objective& obj,
                              std::string* reason = nullptr) {
    obj.validate();
    try {
        BenchmarkRecipe recipe = benchmark_model(BenchmarkKind::Proposed, *obj.radiating,
                                                 obj.geometry, &configs, &obj.tile_map);
        Operators op = assemble_operators(recipe.model);
        GainOperator g = make_gain_operator(recipe.model, op, GainLevel::Rems);
        Eigen::VectorXd db(static_cast<Eigen::Index>(obj.nodes.size()));
        for (size_t i = 0; i < obj.nodes.size(); ++i)
            db(static_cast<Eigen::Index>(i)) = to_db(rayleigh_maximize(g, obj.nodes[i]).value);
        return obj.nodes.size() == 1 ? db(0) : median(db);
    } catch (const std::exception& e) {
        if (reason) *reason = e.what();
        return -std::numeric_limits<double>::infinity();
    }
}

struct SearchReport {
    std::vector<TileConfig> best;
    double best_db = -std::numeric_limits<double>::infinity();
    long evaluations = 0;
    std::vector<double> trajectory;  // objective after each accepted improvement
    double seconds = 0.0;
    std::vector<std::string> failures;  // reasons behind -inf evaluations

    nlohmann::json to_json(const TileGeometry& geo) const {
        SwitchConfig cfg{best};
        nlohmann::json j;
        j["best_config"] = cfg.to_json();
        j["best_config_hex"] = cfg.to_bitstring(geo);
        j["best_objective_db"] = best_db;
        j["evaluations"] = evaluations;
        j["trajectory_db"] = trajectory;
        j["seconds"] = seconds;
        return j;
    }
};

/// Which coordinates an exhaustive enumeration sweeps; the rest stay at the
/// values of `base`.
struct SearchSpace {
    SwitchConfig base;
    bool enumerate_matching = true;
    bool enumerate_units = true;

    long bit_count(const TileGeometry& geo) const {
        long bits = 0;
        for (size_t t = 0; t < base.tiles.size(); ++t) {
            if (enumerate_matching) bits += 2 * geo.stub_count;
            if (enumerate_units) bits += 2 * geo.antennas_per_tile;
        }
        return bits;
    }
};

namespace detail {

inline std::vector<TileConfig> decode_space_index(const SearchSpace& space,
                                                  const TileGeometry& geo, unsigned long index) {
    std::vector<TileConfig> cfg = space.base.tiles;
    for (auto& tile : cfg) {
        if (space.enumerate_matching)
            for (int b = 0; b < 2 * geo.stub_count; ++b) {
                tile.matching[static_cast<size_t>(b)] = (index & 1ul) != 0;
                index >>= 1;
            }
        if (space.enumerate_units)
            for (int u = 0; u < geo.antennas_per_tile; ++u) {
                tile.units[static_cast<size_t>(u)] = static_cast<UnitState>(index & 3ul);
                index >>= 2;
            }
    }
    return cfg;
}

}  // namespace detail

inline SearchReport exhaustive_search(const SearchSpace& space, const Objective& obj,
                                      long cap = 1l << 24) {
    obj.validate();
    space.base.validate(obj.geometry);
    const TileGeometry& geo = obj.geometry;
    const long bits = space.bit_count(geo);
    if (bits >= 63 || (1l << bits) > cap)
        throw SearchCapExceeded("exhaustive search refused: 2^" + std::to_string(bits) +
                                " states exceed the cap of " + std::to_string(cap));
    const auto t0 = std::chrono::steady_clock::now();
    SearchReport rep;
    const unsigned long total = 1ul << bits;
    for (unsigned long idx = 0; idx < total; ++idx) {
        std::vector<TileConfig> cfg = detail::decode_space_index(space, geo, idx);
        std::string reason;
        const double v = evaluate_config(cfg, obj, &reason);
        ++rep.evaluations;
        if (!reason.empty()) rep.failures.push_back(std::move(reason));
        if (v > rep.best_db) {
            rep.best_db = v;
            rep.best = cfg;
            rep.trajectory.push_back(v);
        }
    }
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

/// Coordinate ascent over four-state groups (each stub's switch pair, each
/// switch unit), in fixed tile-major order. A group move is accepted only on
/// strict improvement; a pass with no accepted move terminates the restart.
inline SearchReport coordinate_ascent(const Objective& obj, const SwitchConfig* init = nullptr,
                                      int restarts = 8, int max_passes = 50,
                                      unsigned seed = 1) {
    obj.validate();
    if (restarts < 1) throw std::invalid_argument("coordinate ascent: restarts must be >= 1");
    const TileGeometry& geo = obj.geometry;
    const int n_tiles = static_cast<int>(obj.tile_map.size());
    std::mt19937 rng(seed);
    const auto t0 = std::chrono::steady_clock::now();

    // memoize objective values: configs recur across passes and restarts
    std::unordered_map<std::string, double> memo;
    SearchReport rep;
    auto score = [&](const std::vector<TileConfig>& cfg) {
        const std::string key = SwitchConfig{cfg}.to_bitstring(geo);
        auto it = memo.find(key);
        if (it != memo.end()) return it->second;
        std::string reason;
        const double v = evaluate_config(cfg, obj, &reason);
        ++rep.evaluations;
        if (!reason.empty()) rep.failures.push_back(std::move(reason));
        memo.emplace(key, v);
        return v;
    };

    for (int restart = 0; restart < restarts; ++restart) {
        std::vector<TileConfig> cfg;
        if (init && restart == 0) {
            init->validate(geo);
            cfg = init->tiles;
        } else {
            cfg.resize(static_cast<size_t>(n_tiles));
            for (auto& t : cfg) {
                for (int b = 0; b < 2 * geo.stub_count; ++b) t.matching.push_back(rng() % 2 != 0);
                for (int u = 0; u < geo.antennas_per_tile; ++u)
                    t.units.push_back(static_cast<UnitState>(rng() % 4));
            }
        }

        double current = score(cfg);
        std::vector<double> traj{current};
        for (int pass = 0; pass < max_passes; ++pass) {
            bool moved = false;
            for (int t = 0; t < n_tiles; ++t) {
                TileConfig& tile = cfg[static_cast<size_t>(t)];
                for (int s = 0; s < geo.stub_count; ++s) {
                    const size_t b0 = static_cast<size_t>(2 * s);
                    const std::pair<bool, bool> keep{tile.matching[b0], tile.matching[b0 + 1]};
                    std::pair<bool, bool> best = keep;
                    for (int v = 0; v < 4; ++v) {
                        const std::pair<bool, bool> cand{(v & 1) != 0, (v & 2) != 0};
                        if (cand == keep) continue;
                        tile.matching[b0] = cand.first;
                        tile.matching[b0 + 1] = cand.second;
                        const double sv = score(cfg);
                        if (sv > current + 1e-12) {
                            current = sv;
                            best = cand;
                            moved = true;
                            traj.push_back(sv);
                        }
                    }
                    tile.matching[b0] = best.first;
                    tile.matching[b0 + 1] = best.second;
                }
                for (size_t u = 0; u < tile.units.size(); ++u) {
                    UnitState best = tile.units[u];
                    const UnitState keep = best;
                    for (int v = 0; v < 4; ++v) {
                        const UnitState cand = static_cast<UnitState>(v);
                        if (cand == keep) continue;
                        tile.units[u] = cand;
                        const double sv = score(cfg);
                        if (sv > current + 1e-12) {
                            current = sv;
                            best = cand;
                            moved = true;
                            traj.push_back(sv);
                        }
                    }
                    tile.units[u] = best;
                }
            }
            if (!moved) break;
        }
        if (current > rep.best_db) {
            rep.best_db = current;
            rep.best = cfg;
            rep.trajectory = std::move(traj);
        }
    }
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

}  // namespace rems
