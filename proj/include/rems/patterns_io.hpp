#pragma once

#include <fstream>
#include <map>
#include <sstream>

#include "rems/grid.hpp"

namespace rems {

struct PatternLoadResult {
    std::vector<FarFieldPattern> patterns;
    double max_snap_deg = 0.0;  // worst node-snapping deviation seen
};

/// Pattern CSV reader. Columns:
///   port,theta_deg,phi_deg,re_Etheta,im_Etheta,re_Ephi,im_Ephi
/// Electric-field values (V, far-field normalized) are divided by sqrt(Z0)
/// to obtain power-wave pattern samples. Rows snap to the nearest grid node;
/// every node of every port must be covered exactly once.
inline PatternLoadResult load_patterns(const std::string& path,
                                       std::shared_ptr<const AngularGrid> grid,
                                       const WaveContext& ctx) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");

    PatternLoadResult res;
    const Eigen::Index nn = grid->n_nodes();
    std::map<int, Eigen::Matrix2Xcd> data;
    std::map<int, std::vector<char>> seen;

    std::string line;
    int lineno = 0;
    bool any = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        for (char& c : line)
            if (c == ',') c = ' ';
        std::istringstream ls(line);
        int port;
        double th_deg, ph_deg, ret, imt, rep, imp;
        if (!(ls >> port)) {
            if (lineno == 1) continue;  // header row
            throw ParseError(path + ":" + std::to_string(lineno) + ": malformed row");
        }
        if (!(ls >> th_deg >> ph_deg >> ret >> imt >> rep >> imp))
            throw ParseError(path + ":" + std::to_string(lineno) + ": malformed row");
        any = true;
        auto snap = grid->nearest(th_deg * pi / 180.0, ph_deg * pi / 180.0);
        res.max_snap_deg = std::max(res.max_snap_deg, snap.distance * 180.0 / pi);
        auto [it, fresh] = data.try_emplace(port, Eigen::Matrix2Xcd::Zero(2, nn));
        if (fresh) seen[port].assign(static_cast<size_t>(nn), 0);
        if (seen[port][snap.node])
            throw ParseError(path + ":" + std::to_string(lineno) + ": duplicate row for port " +
                             std::to_string(port));
        seen[port][snap.node] = 1;
        const double s = 1.0 / std::sqrt(ctx.Z0);
        it->second(0, snap.node) = cplx(ret, imt) * s;
        it->second(1, snap.node) = cplx(rep, imp) * s;
    }
    if (!any) throw ParseError(path + ": no rows");

    for (auto& [port, flags] : seen) {
        std::string missing;
        int count = 0;
        for (Eigen::Index n = 0; n < nn; ++n) {
            if (!flags[n]) {
                if (count < 10) {
                    const Eigen::Index i = n / grid->n_phi(), j = n % grid->n_phi();
                    missing += " (" + std::to_string(grid->theta(i) * 180.0 / pi) + "," +
                               std::to_string(grid->phi(j) * 180.0 / pi) + ")";
                }
                ++count;
            }
        }
        if (count > 0)
            throw ParseError(path + ": port " + std::to_string(port) + " misses " +
                             std::to_string(count) + " grid nodes, first:" + missing);
    }

    for (auto& [port, mat] : data) {
        FarFieldPattern p;
        p.grid = grid;
        p.a = std::move(mat);
        res.patterns.push_back(std::move(p));
    }
    return res;
}

/// Writer emitting the exact format load_patterns reads.
inline void save_patterns(const std::string& path, const std::vector<FarFieldPattern>& patterns,
                          const WaveContext& ctx) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write '" + path + "'");
    out.precision(17);
    out << "port,theta_deg,phi_deg,re_Etheta,im_Etheta,re_Ephi,im_Ephi\n";
    const double s = std::sqrt(ctx.Z0);
    for (size_t m = 0; m < patterns.size(); ++m) {
        const auto& g = *patterns[m].grid;
        for (Eigen::Index i = 0; i < g.n_theta(); ++i) {
            for (Eigen::Index j = 0; j < g.n_phi(); ++j) {
                const Eigen::Index n = g.node(i, j);
                const cplx et = patterns[m].a(0, n) * s;
                const cplx ep = patterns[m].a(1, n) * s;
                out << (m + 1) << "," << g.theta(i) * 180.0 / pi << "," << g.phi(j) * 180.0 / pi
                    << "," << et.real() << "," << et.imag() << "," << ep.real() << ","
                    << ep.imag() << "\n";
            }
        }
    }
}

}  // namespace rems
