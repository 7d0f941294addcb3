#pragma once

#include <Eigen/Dense>
#include <cctype>
#include <fstream>
#include <sstream>

#include "rems/network.hpp"

namespace rems {

namespace detail {

inline double freq_unit_scale(const std::string& u) {
    std::string s;
    for (char c : u) s.push_back(static_cast<char>(std::tolower(c)));
    if (s == "hz") return 1.0;
    if (s == "khz") return 1e3;
    if (s == "mhz") return 1e6;
    if (s == "ghz") return 1e9;
    throw ParseError("unknown frequency unit '" + u + "'");
}

inline cplx touchstone_value(double a, double b, const std::string& fmt) {
    if (fmt == "RI") return {a, b};
    if (fmt == "MA") return std::polar(a, b * pi / 180.0);
    if (fmt == "DB") return std::polar(std::pow(10.0, a / 20.0), b * pi / 180.0);
    throw ParseError("unknown data format '" + fmt + "'");
}

inline int ports_from_filename(const std::string& path) {
    auto dot = path.rfind('.');
    if (dot == std::string::npos) return -1;
    std::string ext = path.substr(dot + 1);
    if (ext.size() < 3 || (ext.front() != 's' && ext.front() != 'S')) return -1;
    char last = ext.back();
    if (last != 'p' && last != 'P') return -1;
    try {
        return std::stoi(ext.substr(1, ext.size() - 2));
    } catch (...) {
        return -1;
    }
}

}  // namespace detail

struct TouchstoneResult {
    MultiportNetwork network;
    double file_frequency;    // Hz, the frequency point actually used
    std::vector<std::string> warnings;
};

/// Touchstone v1 (.sNp) reader. If the file holds several frequency points,
/// the one nearest ctx.f is returned and reported in `file_frequency`.
inline TouchstoneResult load_touchstone(const std::string& path, const WaveContext& ctx) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");

    std::string line;
    int lineno = 0;
    double fscale = 1e9;
    std::string fmt = "MA";
    double rref = 50.0;
    bool have_option = false;
    std::vector<double> values;
    std::vector<int> value_lines;

    while (std::getline(in, line)) {
        ++lineno;
        auto bang = line.find('!');
        if (bang != std::string::npos) line.erase(bang);
        std::istringstream ls(line);
        std::string tok;
        if (!(ls >> tok)) continue;
        if (tok == "#") {
            if (have_option) continue;  // v1: later option lines are ignored
            have_option = true;
            std::vector<std::string> opts;
            while (ls >> tok) opts.push_back(tok);
            for (size_t i = 0; i < opts.size(); ++i) {
                std::string up;
                for (char c : opts[i]) up.push_back(static_cast<char>(std::toupper(c)));
                if (up == "S") continue;
                if (up == "RI" || up == "MA" || up == "DB") {
                    fmt = up;
                } else if (up == "R") {
                    if (i + 1 >= opts.size())
                        throw ParseError(path + ":" + std::to_string(lineno) +
                                         ": option 'R' without value");
                    rref = std::stod(opts[++i]);
                } else {
                    fscale = detail::freq_unit_scale(opts[i]);
                }
            }
            continue;
        }
        // data line
        ls.clear();
        ls.str(line);
        double v;
        while (ls >> v) {
            values.push_back(v);
            value_lines.push_back(lineno);
        }
        if (!ls.eof()) {
            std::string bad;
            ls.clear();
            ls >> bad;
            throw ParseError(path + ":" + std::to_string(lineno) + ": unexpected token '" + bad +
                             "'");
        }
    }
    if (!have_option) throw ParseError(path + ": missing '#' option line");
    if (values.empty()) throw ParseError(path + ": no data rows");

    // Infer port count: each frequency block holds 1 + 2n^2 numbers.
    int n = -1;
    const int hinted = detail::ports_from_filename(path);
    for (int cand = 1; cand <= 64; ++cand) {
        if (values.size() % (1 + 2 * static_cast<size_t>(cand) * cand) == 0) {
            n = cand;
            if (hinted <= 0 || cand == hinted) break;
        }
    }
    if (n <= 0) {
        // point at the start of the trailing incomplete block
        const int nb = hinted > 0 ? hinted : 1;
        const size_t block = 1 + 2 * static_cast<size_t>(nb) * nb;
        const size_t tail = (values.size() / block) * block;
        const int at = value_lines[std::min(tail, values.size() - 1)];
        throw ParseError(path + ":" + std::to_string(at) +
                         ": data size fits no whole number of frequency points");
    }

    TouchstoneResult res{MultiportNetwork{}, 0.0, {}};
    if (hinted > 0 && hinted != n)
        res.warnings.push_back("port count inferred from data (" + std::to_string(n) +
                               ") differs from filename suffix (" + std::to_string(hinted) + ")");

    const size_t block = 1 + 2 * static_cast<size_t>(n) * n;
    const size_t npoints = values.size() / block;
    size_t best = 0;
    double bestdist = std::numeric_limits<double>::infinity();
    for (size_t p = 0; p < npoints; ++p) {
        const double f = values[p * block] * fscale;
        if (std::abs(f - ctx.f) < bestdist) {
            bestdist = std::abs(f - ctx.f);
            best = p;
        }
    }
    res.file_frequency = values[best * block] * fscale;

    Eigen::MatrixXcd S(n, n);
    const double* d = &values[best * block + 1];
    if (n == 2) {
        // Touchstone v1 two-port order: S11 S21 S12 S22.
        S(0, 0) = detail::touchstone_value(d[0], d[1], fmt);
        S(1, 0) = detail::touchstone_value(d[2], d[3], fmt);
        S(0, 1) = detail::touchstone_value(d[4], d[5], fmt);
        S(1, 1) = detail::touchstone_value(d[6], d[7], fmt);
    } else {
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c)
                S(r, c) = detail::touchstone_value(d[2 * (r * n + c)], d[2 * (r * n + c) + 1], fmt);
    }
    res.network = make_network(S, std::vector<PortSpec>(static_cast<size_t>(n), PortSpec(rref)),
                               ctx);
    return res;
}

/// Touchstone v1 writer (RI format, single frequency point).
inline void save_touchstone(const std::string& path, const MultiportNetwork& net) {
    const double rref = net.ports.empty() ? 50.0 : net.ports[0].zref.real();
    for (const auto& p : net.ports)
        if (std::abs(p.zref - cplx(rref)) > 1e-12 * rref)
            throw std::invalid_argument("save_touchstone: mixed port references not representable");
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write '" + path + "'");
    out.precision(17);
    out << "# Hz S RI R " << rref << "\n";
    const Eigen::Index n = net.size();
    if (n == 2) {
        out << net.ctx.f << " " << net.S(0, 0).real() << " " << net.S(0, 0).imag() << " "
            << net.S(1, 0).real() << " " << net.S(1, 0).imag() << " " << net.S(0, 1).real() << " "
            << net.S(0, 1).imag() << " " << net.S(1, 1).real() << " " << net.S(1, 1).imag()
            << "\n";
        return;
    }
    out << net.ctx.f;
    for (Eigen::Index r = 0; r < n; ++r) {
        for (Eigen::Index c = 0; c < n; ++c)
            out << " " << net.S(r, c).real() << " " << net.S(r, c).imag();
        out << "\n";
    }
}

}  // namespace rems
