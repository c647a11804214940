#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "classical_solver.hpp"
#include "lattice.hpp"
#include "splitting.hpp"

namespace dqw {

inline std::string format_double(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// --- flat key = value config files -------------------------------------------

struct ConfigFile {
    std::map<std::string, std::string> kv;
    std::vector<std::string> order; // original key order for echoing

    bool has(const std::string& k) const { return kv.count(k) != 0; }

    std::string get_str(const std::string& k, const std::string& fallback) const {
        auto it = kv.find(k);
        return it == kv.end() ? fallback : it->second;
    }
    std::string require_str(const std::string& k) const {
        auto it = kv.find(k);
        if (it == kv.end()) throw std::invalid_argument("config: missing key '" + k + "'");
        return it->second;
    }
    double get_num(const std::string& k, double fallback) const {
        auto it = kv.find(k);
        if (it == kv.end()) return fallback;
        return parse_num(k, it->second);
    }
    double require_num(const std::string& k) const { return parse_num(k, require_str(k)); }
    int get_int(const std::string& k, int fallback) const {
        const double v = get_num(k, fallback);
        if (v != static_cast<double>(static_cast<long long>(v)))
            throw std::invalid_argument("config: key '" + k + "' must be an integer");
        return static_cast<int>(v);
    }

    static double parse_num(const std::string& k, const std::string& s) {
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &pos);
        } catch (const std::exception&) {
            throw std::invalid_argument("config: key '" + k + "' has a non-numeric value '" + s + "'");
        }
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        if (pos != s.size())
            throw std::invalid_argument("config: key '" + k + "' has a non-numeric value '" + s + "'");
        return v;
    }
};

inline ConfigFile parse_config(std::istream& in) {
    ConfigFile cfg;
    std::string line;
    int ln = 0;
    while (std::getline(in, line)) {
        ++ln;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: line " + std::to_string(ln) + " is not 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty()) throw std::invalid_argument("config: empty key on line " + std::to_string(ln));
        if (!cfg.kv.count(key)) cfg.order.push_back(key);
        cfg.kv[key] = val;
    }
    return cfg;
}

inline ConfigFile load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
    return parse_config(in);
}

// --- simulation setup from a config ------------------------------------------

struct SimSetup {
    LatticeSpec spec;       // as requested
    LatticeSpec run_spec;   // possibly refined so every scheme shift is integral
    int refinement = 0;     // levels applied
    Potentials potentials;
    SplittingScheme scheme;
    int order = 2;
    std::uint64_t seed = 0;
    ConfigFile raw;
};

inline SpinorField build_initial_field(const ConfigFile& cfg, const LatticeSpec& spec);

inline SimSetup build_setup(const ConfigFile& cfg, int order_override = 0) {
    SimSetup s;
    s.raw = cfg;
    const int n_x = cfg.get_int("n_x", 0), n_y = cfg.get_int("n_y", 0), n_z = cfg.get_int("n_z", 0);
    const double ell = cfg.require_num("ell");
    const double n_star = cfg.get_num("n_star", 1.0);
    const Vec3 origin{cfg.get_num("origin_x", 0.0), cfg.get_num("origin_y", 0.0),
                      cfg.get_num("origin_z", 0.0)};
    s.spec = make_lattice(n_x, n_y, n_z, ell, n_star, origin, cfg.get_num("c", 1.0));

    s.order = order_override > 0 ? order_override : cfg.get_int("order", 2);
    if (s.order == 2)
        s.scheme = scheme_second_order();
    else if (s.order == 3)
        s.scheme = scheme_third_order();
    else
        throw std::invalid_argument("config: order must be 2 or 3");

    Potentials pot;
    pot.mass = cfg.get_num("mass", 0.0);
    pot.charge = cfg.get_num("charge", -1.0);
    const std::string vk = cfg.get_str("v_kind", "zero");
    if (vk == "zero") {
        pot.scalar_kind = ScalarKind::Zero;
    } else if (vk == "constant") {
        pot.scalar_kind = ScalarKind::Constant;
        pot.scalar_const = cfg.require_num("v_const");
    } else if (vk == "linear") {
        pot.scalar_kind = ScalarKind::LinearE;
        pot.electric_field = {cfg.get_num("e_x", 0.0), cfg.get_num("e_y", 0.0),
                              cfg.get_num("e_z", 0.0)};
    } else {
        throw std::invalid_argument("config: unsupported potential kind '" + vk + "'");
    }
    const std::string ak = cfg.get_str("a_kind", "none");
    if (ak == "constant") {
        const Vec3 a{cfg.get_num("a_x", 0.0), cfg.get_num("a_y", 0.0), cfg.get_num("a_z", 0.0)};
        pot.vector_potential = [a](double) { return a; };
    } else if (ak == "cosine") {
        const Vec3 a{cfg.get_num("a_x", 0.0), cfg.get_num("a_y", 0.0), cfg.get_num("a_z", 0.0)};
        const double w = cfg.require_num("a_omega");
        pot.vector_potential = [a, w](double t) {
            return Vec3{a[0] * std::cos(w * t), a[1] * std::cos(w * t), a[2] * std::cos(w * t)};
        };
    } else if (ak == "linear-bz") {
        // A(x,t) = (0, 0, b x): a uniform magnetic field along y
        const double b = cfg.require_num("b_gradient");
        pot.magnetic_mode = true;
        pot.vector_potential_x = [b](const Vec3& x, double) { return Vec3{0.0, 0.0, b * x[0]}; };
    } else if (ak != "none") {
        throw std::invalid_argument("config: unsupported vector potential kind '" + ak + "'");
    }
    s.potentials = pot;
    s.seed = static_cast<std::uint64_t>(cfg.get_num("seed", 0.0));

    // refine until every streaming coefficient is an integer site count
    s.run_spec = s.spec;
    for (int level = 0; level < 8; ++level) {
        bool ok = true;
        for (const SplitStep& st : s.scheme.steps) {
            if (st.tag != OpTag::X && st.tag != OpTag::Y && st.tag != OpTag::Z) continue;
            const Rational sites = st.coeff * Rational(s.run_spec.twice_n_star, 2);
            if (!sites.is_integer()) {
                ok = false;
                break;
            }
        }
        if (ok) break;
        s.run_spec = s.run_spec.refined(1);
        ++s.refinement;
    }
    return s;
}

inline SpinorField build_initial_field(const ConfigFile& cfg, const LatticeSpec& spec) {
    const std::string kind = cfg.require_str("init");
    SpinorField f(spec);
    auto spinor_weights = [&]() {
        std::array<cd, 4> w{1.0, 0.0, 0.0, 0.0};
        if (cfg.has("spinor")) {
            std::istringstream in(cfg.require_str("spinor"));
            std::string tok;
            int i = 0;
            while (std::getline(in, tok, ',') && i < 4)
                w[i++] = ConfigFile::parse_num("spinor", tok);
            if (i != 4) throw std::invalid_argument("config: spinor needs 4 comma-separated values");
        }
        return w;
    }();

    if (kind == "spike") {
        const int comp = cfg.get_int("spike_component", 0);
        if (comp < 0 || comp > 3) throw std::invalid_argument("config: spike_component in 0..3");
        const std::int64_t i = cfg.get_int("spike_i", 0), j = cfg.get_int("spike_j", 0),
                           k = cfg.get_int("spike_k", 0);
        if (i >= spec.points(Axis::X) || j >= spec.points(Axis::Y) || k >= spec.points(Axis::Z))
            throw std::invalid_argument("config: spike site out of range");
        f.at(comp, i, j, k) = 1.0;
    } else if (kind == "uniform") {
        for (int s = 0; s < 4; ++s)
            if (spinor_weights[s] != cd(0.0))
                for (std::int64_t p = 0; p < spec.total_points(); ++p)
                    f.amps[s * spec.total_points() + p] = spinor_weights[s];
    } else if (kind == "gaussian") {
        const double sigma = cfg.get_num("sigma", 4.0 * spec.ell);
        const Vec3 c0{cfg.get_num("center_x", 0.0), cfg.get_num("center_y", 0.0),
                      cfg.get_num("center_z", 0.0)};
        const Vec3 p0{cfg.get_num("p_x", 0.0), cfg.get_num("p_y", 0.0), cfg.get_num("p_z", 0.0)};
        for (std::int64_t i = 0; i < spec.points(Axis::X); ++i)
            for (std::int64_t j = 0; j < spec.points(Axis::Y); ++j)
                for (std::int64_t k = 0; k < spec.points(Axis::Z); ++k) {
                    const Vec3 x = centroid(spec, i, j, k);
                    const double r2 = (x[0] - c0[0]) * (x[0] - c0[0]) +
                                      (x[1] - c0[1]) * (x[1] - c0[1]) +
                                      (x[2] - c0[2]) * (x[2] - c0[2]);
                    const double ph = p0[0] * x[0] + p0[1] * x[1] + p0[2] * x[2];
                    const cd env = std::exp(-r2 / (4.0 * sigma * sigma)) * std::polar(1.0, ph);
                    for (int s = 0; s < 4; ++s)
                        if (spinor_weights[s] != cd(0.0)) f.at(s, i, j, k) = spinor_weights[s] * env;
                }
    } else if (kind == "file") {
        throw std::invalid_argument("config: init=file is resolved by the caller");
    } else {
        throw std::invalid_argument("config: unknown init kind '" + kind + "'");
    }
    return normalize(f);
}

// --- field snapshots -----------------------------------------------------------

inline void write_snapshot(std::ostream& os, const SpinorField& f) {
    os << "n_x,n_y,n_z,ell,components\n";
    os << f.spec.n[0] << "," << f.spec.n[1] << "," << f.spec.n[2] << ","
       << format_double(f.spec.ell) << ",phi1|phi2|chi1|chi2\n";
    os << "re,im\n";
    for (const cd& a : f.amps)
        os << format_double(a.real()) << "," << format_double(a.imag()) << "\n";
}

inline void write_snapshot(const std::string& path, const SpinorField& f) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("snapshot: cannot open '" + path + "' for writing");
    write_snapshot(os, f);
}

inline SpinorField read_snapshot(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("snapshot: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line != "n_x,n_y,n_z,ell,components")
        throw std::runtime_error("snapshot: bad header in '" + path + "'");
    if (!std::getline(in, line)) throw std::runtime_error("snapshot: truncated header");
    std::istringstream hdr(line);
    std::string tok;
    int n[3];
    for (int i = 0; i < 3; ++i) {
        std::getline(hdr, tok, ',');
        n[i] = std::stoi(tok);
    }
    std::getline(hdr, tok, ',');
    const double ell = std::stod(tok);
    LatticeSpec spec = make_lattice(n[0], n[1], n[2], ell, 1.0);
    SpinorField f(spec);
    if (!std::getline(in, line) || line != "re,im")
        throw std::runtime_error("snapshot: missing amplitude header");
    for (cd& a : f.amps) {
        if (!std::getline(in, line)) throw std::runtime_error("snapshot: truncated amplitudes");
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw std::runtime_error("snapshot: bad amplitude row");
        a = cd(std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
    }
    return f;
}

// Echo the configuration into an output file header for provenance.
inline void write_config_echo(std::ostream& os, const ConfigFile& cfg) {
    for (const std::string& k : cfg.order) os << "# " << k << " = " << cfg.kv.at(k) << "\n";
}

} // namespace dqw
