#pragma once

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "dirac_circuits.hpp"
#include "io.hpp"
#include "resources.hpp"
#include "spectral.hpp"
#include "stateprep.hpp"

namespace dqw {

namespace cli_detail {

inline SpinorField initial_field_for(const ConfigFile& cfg, const LatticeSpec& run_spec,
                                     int refinement) {
    if (cfg.get_str("init", "") == "file") {
        if (refinement > 0)
            throw std::invalid_argument(
                "init=file cannot be combined with automatic lattice refinement");
        SpinorField f = read_snapshot(cfg.require_str("init_file"));
        for (int a = 0; a < 3; ++a)
            if (f.spec.n[a] != run_spec.n[a])
                throw std::invalid_argument("init_file: snapshot dimensions do not match the config");
        SpinorField out(run_spec);
        out.amps = f.amps;
        return normalize(out);
    }
    return build_initial_field(cfg, run_spec);
}

inline void write_norm_series_header(std::ostream& os, const ConfigFile& cfg,
                                     const SimSetup& setup) {
    write_config_echo(os, cfg);
    if (setup.refinement > 0)
        os << "# refined " << setup.refinement << " level(s): ell = "
           << format_double(setup.run_spec.ell) << ", n_star = "
           << format_double(setup.run_spec.n_star()) << "\n";
    os << "step,t,norm,x_mean\n";
}

struct RangeArg {
    int lo = 0, hi = 0;
};

inline RangeArg parse_range(const std::string& s) {
    RangeArg r;
    const auto dots = s.find("..");
    if (dots == std::string::npos) {
        r.lo = r.hi = std::stoi(s);
    } else {
        r.lo = std::stoi(s.substr(0, dots));
        r.hi = std::stoi(s.substr(dots + 2));
    }
    if (r.hi < r.lo) throw std::invalid_argument("bad range '" + s + "'");
    return r;
}

inline int run_evolve(const std::string& config_path, int steps, int order,
                      const std::string& out_prefix, bool quantum, bool reduced) {
    const ConfigFile cfg = load_config(config_path);
    const SimSetup setup = build_setup(cfg, order);
    const LatticeSpec spec = setup.run_spec;
    SpinorField field = initial_field_for(cfg, spec, setup.refinement);

    std::ofstream norms(out_prefix + "_norms.csv");
    if (!norms) throw std::runtime_error("cannot open output '" + out_prefix + "_norms.csv'");
    write_norm_series_header(norms, cfg, setup);

    auto emit_row = [&](int k, const SpinorField& f) {
        norms << k << "," << format_double(k * spec.dt) << ","
              << format_double(std::sqrt(f.discrete_norm_sq())) << ","
              << format_double(position_mean(f, Axis::X)) << "\n";
    };

    if (!quantum) {
        emit_row(0, field);
        for (int k = 1; k <= steps; ++k) {
            field = step(field, setup.scheme, setup.potentials, (k - 1) * spec.dt);
            emit_row(k, field);
        }
        write_snapshot(out_prefix + "_final.csv", field);
        return 0;
    }

    const Axis axis1d = spec.n[2] > 0 ? Axis::Z : (spec.n[1] > 0 ? Axis::Y : Axis::X);
    const RegisterLayout lay = make_layout(spec, reduced, axis1d);
    QuantumState st = encode_field(field, lay);
    emit_row(0, field);
    std::string dump;
    for (int k = 1; k <= steps; ++k) {
        const Circuit c = build_time_step(lay, setup.scheme, setup.potentials, (k - 1) * spec.dt);
        if (k == 1) dump = c.text_dump();
        apply(st, c);
        const SpinorField snap = decode_field(st);
        emit_row(k, snap);
        if (k == steps) write_snapshot(out_prefix + "_final.csv", snap);
    }
    if (steps == 0) write_snapshot(out_prefix + "_final.csv", field);
    std::ofstream cdump(out_prefix + "_circuit.txt");
    cdump << dump;
    return 0;
}

inline int run_prepare(const std::string& field_path, const std::string& circuit_path) {
    const SpinorField target = normalize(read_snapshot(field_path));
    const RegisterLayout lay = make_layout(target.spec, false, Axis::Z, 0, 0);
    const Circuit c = prepare_state(target, lay);

    QuantumState st(lay);
    apply(st, c);
    const QuantumState ref = encode_field(target, lay);
    cd ov = 0.0;
    for (std::size_t i = 0; i < st.dim(); ++i) ov += std::conj(ref.amps()[i]) * st.amps()[i];

    std::ofstream os(circuit_path);
    if (!os) throw std::runtime_error("cannot open '" + circuit_path + "'");
    os << "# prepared-state fidelity " << format_double(std::abs(ov)) << "\n";
    os << "# gate count " << c.gates.size() << "\n";
    os << c.text_dump();
    std::cout << "prepared-state fidelity " << format_double(std::abs(ov)) << ", "
              << c.gates.size() << " gates\n";
    return 0;
}

inline int run_feit_fleck(const std::string& config_path, double energy, double t_f,
                          const std::string& out_prefix, const std::string& window_name_s,
                          bool stochastic, std::uint64_t seed) {
    const ConfigFile cfg = load_config(config_path);
    const SimSetup setup = build_setup(cfg, 0);
    const LatticeSpec spec = setup.run_spec;
    const SpinorField trial = initial_field_for(cfg, spec, setup.refinement);

    WindowKind window = WindowKind::Hann;
    if (window_name_s == "rectangular")
        window = WindowKind::Rectangular;
    else if (window_name_s == "blackman")
        window = WindowKind::Blackman;
    else if (window_name_s != "hann")
        throw std::invalid_argument("unknown window '" + window_name_s + "'");

    const int n_t = static_cast<int>(std::round(t_f / spec.dt));
    if (n_t < 2) throw std::invalid_argument("feit-fleck: tf must cover at least 2 steps");

    const auto series = autocorrelation_quantum(trial, setup.scheme, setup.potentials, n_t);
    const SpectralDensity sd = spectral_density(series, window, spec.dt);

    {
        std::ofstream os(out_prefix + "_autocorr.csv");
        write_config_echo(os, cfg);
        os << "k,t,re,im\n";
        for (std::size_t k = 0; k < series.size(); ++k)
            os << k << "," << format_double(k * spec.dt) << "," << format_double(series[k].real())
               << "," << format_double(series[k].imag()) << "\n";
    }
    {
        std::ofstream os(out_prefix + "_spectrum.csv");
        write_config_echo(os, cfg);
        os << "# resolution " << format_double(sd.resolution) << "\n";
        os << "E,abs,re,im\n";
        for (std::size_t i = 0; i < sd.energy.size(); ++i)
            os << format_double(sd.energy[i]) << "," << format_double(std::abs(sd.density[i]))
               << "," << format_double(sd.density[i].real()) << ","
               << format_double(sd.density[i].imag()) << "\n";
    }
    {
        std::ofstream os(out_prefix + "_peaks.csv");
        os << "E\n";
        for (double p : sd.peaks()) os << format_double(p) << "\n";
    }

    const FilterResult fr =
        stochastic ? feit_fleck_filter_stochastic(trial, energy, n_t, setup.scheme,
                                                  setup.potentials, window, seed)
                   : feit_fleck_filter(trial, energy, n_t, setup.scheme, setup.potentials, window);
    write_snapshot(out_prefix + "_filtered.csv", fr.filtered);
    {
        std::ofstream os(out_prefix + "_summary.csv");
        write_config_echo(os, cfg);
        os << "energy,n_t,t_f,resolution,success_probability,bound,final_branch_probability,attempts\n";
        os << format_double(energy) << "," << n_t << "," << format_double(n_t * spec.dt) << ","
           << format_double(sd.resolution) << "," << format_double(fr.success_probability) << ","
           << format_double(success_probability_bound(n_t)) << ","
           << format_double(fr.final_branch_probability) << "," << fr.attempts << "\n";
    }
    std::cout << "feit-fleck: success probability " << format_double(fr.success_probability)
              << " (bound " << format_double(success_probability_bound(n_t)) << "), "
              << sd.peaks().size() << " spectral peak(s)\n";
    return 0;
}

inline int run_dispersion(double n_star, const std::string& axis_s, double ell, int points,
                          int order, const std::string& out_path) {
    Axis axis = Axis::X;
    if (axis_s == "y")
        axis = Axis::Y;
    else if (axis_s == "z")
        axis = Axis::Z;
    else if (axis_s != "x")
        throw std::invalid_argument("axis must be x, y or z");
    const SplittingScheme scheme = order == 3 ? scheme_third_order() : scheme_second_order();
    const DispersionResult res = dispersion_scan(scheme, ell, n_star, axis, points);

    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path);
        if (!file) throw std::runtime_error("cannot open '" + out_path + "'");
        os = &file;
    }
    *os << "# n_star = " << format_double(n_star) << ", ell = " << format_double(ell)
        << ", axis = " << axis_s << ", order = " << order << "\n";
    *os << "# doublers = " << res.doubler_momenta.size() << "\n";
    *os << "p,E1,E2,E3,E4\n";
    for (std::size_t i = 0; i < res.momenta.size(); ++i) {
        *os << format_double(res.momenta[i][static_cast<int>(axis)]);
        for (double e : res.energies[i]) *os << "," << format_double(e);
        *os << "\n";
    }
    return 0;
}

inline int run_search(int m, const std::string& r_range, std::int64_t pmax,
                      const std::string& out_path) {
    const RangeArg r = parse_range(r_range);
    SearchOptions opt;
    opt.m = m;
    opt.r_min = r.lo;
    opt.r_max = r.hi;
    opt.p_max = pmax;
    const auto sols = search_rational_splittings(opt);

    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path);
        os = &file;
    }
    for (const auto& s : sols) *os << s.csv_row() << "\n";
    return 0;
}

inline int run_resources(int dims, const std::string& n_range, double epsilon, int order,
                         bool reduced, const std::string& out_path,
                         const std::string& example_path) {
    if (!example_path.empty()) {
        // 1-D massive step on 8 sites, spinor-compressed, lowered at 5 digits
        LatticeSpec spec = make_lattice(0, 0, 3, 1.0, 1.0);
        Potentials pot = Potentials::free_particle(1.0);
        const RegisterLayout lay = make_layout(spec, true, Axis::Z);
        const Circuit stepc = build_time_step(lay, scheme_second_order(), pot, 0.0);
        LoweringOptions lopt;
        lopt.epsilon = 1e-2;
        lopt.ancilla_pool = ancilla_pool_of(lay);
        const LoweringResult low = lower_to_fundamental(stepc, lopt);
        std::ofstream os(example_path);
        if (!os) throw std::runtime_error("cannot open '" + example_path + "'");
        os << "# one time step, 1-D massive, n_z = 3, reduced register\n";
        os << "# H " << low.report.counts.h << ", S " << low.report.counts.s << ", T "
           << low.report.counts.t << ", CNOT " << low.report.counts.cnot << ", width "
           << low.report.width << "\n";
        os << low.circuit.text_dump();
    }
    if (n_range.empty()) return 0;

    const RangeArg r = parse_range(n_range);
    ScalingStudyOptions opt;
    opt.n_lo = r.lo;
    opt.n_hi = r.hi;
    opt.epsilon = epsilon;
    opt.order = order;
    opt.dims = dims;
    opt.reduced = reduced;
    if (reduced) opt.vector_potential = {0.0, 0.0, 0.0};
    const auto rows = scaling_study(opt);

    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path);
        if (!file) throw std::runtime_error("cannot open '" + out_path + "'");
        os = &file;
    }
    *os << "# dims = " << dims << ", order = " << order << ", epsilon = " << format_double(epsilon)
        << (reduced ? ", reduced" : "") << "\n";
    *os << "n,H,S,T,CNOT,total,width\n";
    for (const auto& row : rows) {
        const GateCounts& c = row.report.counts;
        *os << row.n << "," << c.h << "," << c.s << "," << c.t << "," << c.cnot << "," << c.total()
            << "," << row.report.width << "\n";
    }
    if (rows.size() >= 3 && rows.back().n - rows.front().n >= 2) {
        const QuadraticFit fit = fit_quadratic(rows, rows.front().n, rows.back().n);
        *os << "# fit c2 = " << format_double(fit.c2) << ", c1 = " << format_double(fit.c1)
            << ", c0 = " << format_double(fit.c0) << ", R2 = " << format_double(fit.r_squared)
            << ", loglog_slope = " << format_double(fit.loglog_slope) << "\n";
    }
    return 0;
}

} // namespace cli_detail

inline int run_cli(int argc, const char* const* argv) {
    CLI::App app{"split-operator Dirac solver and its quantum-walk circuit implementation"};
    app.require_subcommand(1);

    std::string config_path, out_prefix = "out", out_path, example_path, field_path, circuit_path;
    std::string axis = "x", window = "hann", r_range = "7..9", n_range = "2..60";
    int steps = 1, order = 0, points = 256, m = 3, dims = 3;
    double energy = 0.0, t_f = 0.0, n_star = 1.0, ell = 1.0, epsilon = 1e-10;
    std::int64_t pmax = 12;
    bool reduced = false, stochastic = false;
    std::uint64_t seed = 1;

    auto* evolve = app.add_subcommand("evolve", "classical split-operator evolution");
    evolve->add_option("--config", config_path)->required();
    evolve->add_option("--steps", steps)->required();
    evolve->add_option("--order", order);
    evolve->add_option("--out", out_prefix);

    auto* qevolve = app.add_subcommand("qevolve", "gate-level statevector evolution");
    qevolve->add_option("--config", config_path)->required();
    qevolve->add_option("--steps", steps)->required();
    qevolve->add_option("--order", order);
    qevolve->add_option("--out", out_prefix);
    qevolve->add_flag("--reduced-1d", reduced, "compress the redundant 1-D spinor components");

    auto* prepare = app.add_subcommand("prepare", "state-initialization circuit for a snapshot");
    prepare->add_option("--field", field_path)->required();
    prepare->add_option("--emit-circuit", circuit_path)->required();

    auto* ff = app.add_subcommand("feit-fleck", "autocorrelation spectrum and eigenstate filter");
    ff->add_option("--config", config_path)->required();
    ff->add_option("--energy", energy)->required();
    ff->add_option("--tf", t_f)->required();
    ff->add_option("--out", out_prefix);
    ff->add_option("--window", window);
    ff->add_flag("--stochastic", stochastic);
    ff->add_option("--seed", seed);

    auto* disp = app.add_subcommand("dispersion", "Von Neumann dispersion branches");
    disp->add_option("--nstar", n_star);
    disp->add_option("--axis", axis);
    disp->add_option("--ell", ell);
    disp->add_option("--points", points);
    disp->add_option("--order", order);
    disp->add_option("--out", out_path);

    auto* search = app.add_subcommand("search-splittings", "rational Suzuki coefficient search");
    search->add_option("--m", m);
    search->add_option("--r", r_range);
    search->add_option("--pmax", pmax);
    search->add_option("--out", out_path);

    auto* res = app.add_subcommand("resources", "fundamental-gate counts of one time step");
    res->add_option("--dims", dims);
    res->add_option("--n", n_range);
    res->add_option("--epsilon", epsilon);
    res->add_option("--order", order);
    res->add_flag("--reduced", reduced);
    res->add_option("--out", out_path);
    res->add_option("--emit-example", example_path);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*evolve)
            return cli_detail::run_evolve(config_path, steps, order, out_prefix, false, false);
        if (*qevolve)
            return cli_detail::run_evolve(config_path, steps, order, out_prefix, true, reduced);
        if (*prepare) return cli_detail::run_prepare(field_path, circuit_path);
        if (*ff)
            return cli_detail::run_feit_fleck(config_path, energy, t_f, out_prefix, window,
                                              stochastic, seed);
        if (*disp)
            return cli_detail::run_dispersion(n_star, axis, ell, points, order == 3 ? 3 : 2,
                                              out_path);
        if (*search) return cli_detail::run_search(m, r_range, pmax, out_path);
        if (*res)
            return cli_detail::run_resources(dims, n_range, epsilon, order == 3 ? 3 : 2, reduced,
                                             out_path, example_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

} // namespace dqw
