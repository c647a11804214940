#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "classical_solver.hpp"
#include "dirac_circuits.hpp"
#include "qcore.hpp"

namespace dqw {

// --- Von Neumann dispersion analysis -----------------------------------------

struct DispersionResult {
    std::vector<Vec3> momenta;
    std::vector<std::array<double, 4>> energies; // branches per momentum
    std::vector<Vec3> doubler_momenta;           // interior zeros of E(p)
    double dt = 0.0;
};

namespace detail {

// 4x4 symbol of one split step at momentum p: streaming factors only (the
// massless free scheme), S_a diag(e^{+ip d}, e^{-ip d}) S_a per axis factor.
inline Mat4 step_symbol(const SplittingScheme& scheme, double ell, double n_star, const Vec3& p) {
    Mat4 u = Mat4::identity();
    for (const SplitStep& st : scheme.steps) {
        if (st.tag != OpTag::X && st.tag != OpTag::Y && st.tag != OpTag::Z) continue;
        const int ax = st.tag == OpTag::X ? 0 : st.tag == OpTag::Y ? 1 : 2;
        const double d = st.coeff.value() * n_star * ell;
        const cd up = std::polar(1.0, p[ax] * d);
        Mat4 t;
        t(0, 0) = t(1, 1) = up;
        t(2, 2) = t(3, 3) = std::conj(up);
        const Mat4 s = spin_rotation_mat(static_cast<Axis>(ax));
        u = (s * t * s) * u;
    }
    return u;
}

inline std::array<double, 4> symbol_energies(const Mat4& u, double dt) {
    Eigen::Matrix4cd m;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) m(r, c) = u(r, c);
    Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(m, false);
    std::array<double, 4> e{};
    for (int i = 0; i < 4; ++i) {
        const cd lam = es.eigenvalues()(i);
        if (std::abs(std::abs(lam) - 1.0) > 1e-10)
            throw std::runtime_error("dispersion: one-step symbol is not unitary");
        e[i] = -std::arg(lam) / dt; // E dt = i ln(lambda)
    }
    std::sort(e.begin(), e.end());
    return e;
}

} // namespace detail

inline DispersionResult dispersion(const SplittingScheme& scheme, double ell, double n_star,
                                   const std::vector<Vec3>& momenta, double c_light = 1.0) {
    // M/V/A factors are the identity in the massless free case; only the
    // streaming factors enter the symbol.
    DispersionResult res;
    res.dt = n_star * ell / c_light;
    res.momenta = momenta;
    res.energies.reserve(momenta.size());
    const double zero_tol = 1e-9 / res.dt;
    for (const Vec3& p : momenta) {
        const auto e = detail::symbol_energies(detail::step_symbol(scheme, ell, n_star, p), res.dt);
        res.energies.push_back(e);
        const double pn = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
        double emin = 1e300;
        for (double x : e) emin = std::min(emin, std::abs(x));
        if (pn > 1e-9 / ell && emin < zero_tol) res.doubler_momenta.push_back(p);
    }
    return res;
}

// 1-D scan along one axis over the first Brillouin zone (-pi/ell, pi/ell].
inline DispersionResult dispersion_scan(const SplittingScheme& scheme, double ell, double n_star,
                                        Axis axis, int n_points, double c_light = 1.0) {
    if (n_points < 2) throw std::invalid_argument("dispersion_scan: need at least 2 points");
    std::vector<Vec3> ps;
    ps.reserve(n_points);
    for (int j = 1; j <= n_points; ++j) {
        Vec3 p{0.0, 0.0, 0.0};
        p[static_cast<int>(axis)] = -M_PI / ell + j * (2.0 * M_PI / ell) / n_points;
        ps.push_back(p);
    }
    return dispersion(scheme, ell, n_star, ps, c_light);
}

// --- quantum autocorrelation --------------------------------------------------

// C(t_k) = <psi(0)|psi(t_k)> via the ancilla protocol: H on the probe wire,
// evolution controlled on probe=1, exact <(sigma_x + i sigma_y) (x) I> readout.
inline std::vector<cd> autocorrelation_quantum(const SpinorField& trial,
                                               const SplittingScheme& scheme,
                                               const Potentials& pot, int n_t) {
    if (n_t < 0) throw std::invalid_argument("autocorrelation: n_t must be >= 0");
    const RegisterLayout lay = make_layout(trial.spec, false, Axis::Z, 1);
    const int probe = lay.extra(0);
    QuantumState st = encode_field(trial, lay);
    apply(st, make_gate(GateKind::H, probe));
    std::vector<cd> series;
    series.reserve(n_t + 1);
    series.push_back(expectation(st, PauliProbe::SigmaXPlusISigmaY, probe));
    for (int k = 1; k <= n_t; ++k) {
        const Circuit u = build_time_step(lay, scheme, pot, (k - 1) * trial.spec.dt);
        apply(st, u.controlled_on(probe, true));
        series.push_back(expectation(st, PauliProbe::SigmaXPlusISigmaY, probe));
    }
    return series;
}

// Classical reference for the same series.
inline std::vector<cd> autocorrelation_classical(const SpinorField& trial,
                                                 const SplittingScheme& scheme,
                                                 const Potentials& pot, int n_t) {
    std::vector<cd> series;
    series.reserve(n_t + 1);
    SpinorField cur = trial;
    const double cell = trial.spec.cell_volume();
    for (int k = 0; k <= n_t; ++k) {
        cd ov = 0.0;
        for (std::size_t i = 0; i < trial.amps.size(); ++i)
            ov += std::conj(trial.amps[i]) * cur.amps[i];
        series.push_back(cell * ov);
        if (k < n_t) cur = step(cur, scheme, pot, k * trial.spec.dt);
    }
    return series;
}

// --- windowed spectral density -------------------------------------------------

enum class WindowKind { Hann, Rectangular, Blackman };

inline double window_value(WindowKind w, double t, double t_f) {
    const double x = t / t_f;
    switch (w) {
        case WindowKind::Hann: return 0.5 * (1.0 - std::cos(2.0 * M_PI * x));
        case WindowKind::Rectangular: return 1.0;
        case WindowKind::Blackman:
            return 0.42 - 0.5 * std::cos(2.0 * M_PI * x) + 0.08 * std::cos(4.0 * M_PI * x);
    }
    return 1.0;
}

inline const char* window_name(WindowKind w) {
    switch (w) {
        case WindowKind::Hann: return "hann";
        case WindowKind::Rectangular: return "rectangular";
        case WindowKind::Blackman: return "blackman";
    }
    return "?";
}

// Trapezoidal quadrature weights a_0 = a_N = 1/2, interior 1.
inline std::vector<double> trapezoid_weights(int n_t) {
    std::vector<double> a(n_t + 1, 1.0);
    a.front() = 0.5;
    a.back() = 0.5;
    return a;
}

struct SpectralDensity {
    std::vector<double> energy;
    std::vector<cd> density;
    double resolution = 0.0; // pi / t_f
    double t_f = 0.0;
    WindowKind window = WindowKind::Hann;

    std::vector<double> peaks(double rel_threshold = 0.25) const {
        std::vector<double> out;
        double peak = 0.0;
        for (const cd& v : density) peak = std::max(peak, std::abs(v));
        for (std::size_t i = 1; i + 1 < density.size(); ++i) {
            const double m = std::abs(density[i]);
            if (m < rel_threshold * peak) continue;
            if (m >= std::abs(density[i - 1]) && m > std::abs(density[i + 1]))
                out.push_back(energy[i]);
        }
        return out;
    }
};

// C(E) = (1/t_f) integral_0^{t_f} w(t) e^{iEt} C(t) dt on a uniform energy
// grid over the representable band [-pi/dt, pi/dt].
inline SpectralDensity spectral_density(const std::vector<cd>& series, WindowKind window, double dt,
                                        int n_energy = 0) {
    if (series.size() < 2) throw std::invalid_argument("spectral_density: series too short");
    const int n_t = static_cast<int>(series.size()) - 1;
    SpectralDensity sd;
    sd.window = window;
    sd.t_f = n_t * dt;
    sd.resolution = M_PI / sd.t_f;
    if (n_energy <= 0) n_energy = 16 * n_t + 1;
    const auto quad = trapezoid_weights(n_t);
    sd.energy.reserve(n_energy);
    sd.density.reserve(n_energy);
    for (int j = 0; j < n_energy; ++j) {
        const double e = -M_PI / dt + j * (2.0 * M_PI / dt) / (n_energy - 1);
        cd acc = 0.0;
        for (int k = 0; k <= n_t; ++k) {
            const double t = k * dt;
            acc += quad[k] * window_value(window, t, sd.t_f) * std::polar(1.0, e * t) * series[k];
        }
        sd.energy.push_back(e);
        sd.density.push_back(acc * dt / sd.t_f);
    }
    return sd;
}

// --- Feit-Fleck eigenstate filtering -------------------------------------------

struct FilterPlan {
    double energy = 0.0;
    int n_t = 0;
    double dt = 0.0;
    WindowKind window = WindowKind::Hann;
    std::vector<double> quad_weights;
    std::vector<cd> b_coeffs;             // B_k = (dt/t_f) a_k w(t_k) e^{iE t_k}
    std::vector<double> singular_values;  // per-step contraction a_i in (0, 1]
};

namespace detail {

inline double filter_singular_value(double babs) {
    const double root = std::sqrt(1.0 + babs * babs / 4.0);
    const double den = 1.0 + babs * babs / 2.0 + babs * root;
    const double num = 1.0 + babs * babs / 2.0 - babs * root;
    return std::sqrt(num / den);
}

inline Mat2 filter_gate(cd b) {
    const double babs = std::abs(b);
    const double root = std::sqrt(1.0 + babs * babs / 4.0);
    const double nu = std::sqrt(1.0 + babs * babs / 2.0 + babs * root);
    return mat2(cd(1.0 / nu), 0.0, b / nu, cd(1.0 / nu));
}

} // namespace detail

inline FilterPlan make_filter_plan(double energy, int n_t, double dt,
                                   WindowKind window = WindowKind::Hann) {
    if (n_t < 1) throw std::invalid_argument("filter: n_t must be >= 1");
    FilterPlan plan;
    plan.energy = energy;
    plan.n_t = n_t;
    plan.dt = dt;
    plan.window = window;
    plan.quad_weights = trapezoid_weights(n_t);
    const double t_f = n_t * dt;
    for (int k = 0; k <= n_t; ++k) {
        const double t = k * dt;
        const cd b = (dt / t_f) * plan.quad_weights[k] * window_value(window, t, t_f) *
                     std::polar(1.0, energy * t);
        plan.b_coeffs.push_back(b);
        const double sv = detail::filter_singular_value(std::abs(b));
        if (!(sv > 0.0 && sv <= 1.0 + 1e-12))
            throw std::logic_error("filter: singular value outside (0, 1]");
        plan.singular_values.push_back(std::min(sv, 1.0));
    }
    return plan;
}

struct FilterResult {
    SpinorField filtered;
    double success_probability = 1.0;       // product of realization projections
    double final_branch_probability = 0.0;  // weight of the accumulator branch
    FilterPlan plan;
    int attempts = 1; // > 1 only in stochastic mode
};

namespace detail {

// Realize the non-unitary filter gate on the accumulator wire c via its SVD:
// V^dag on c, the two-qubit controlled contraction against a fresh realization
// ancilla, a projective |0><0| on the ancilla, then U on c.
inline double apply_filter_gate(QuantumState& st, cd b, int c_wire, int r_wire,
                                std::mt19937_64* rng, bool* failed) {
    const Mat2 bhat = filter_gate(b);
    Eigen::Matrix2cd m;
    m << bhat(0, 0), bhat(0, 1), bhat(1, 0), bhat(1, 1);
    Eigen::JacobiSVD<Eigen::Matrix2cd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const double s0 = svd.singularValues()(0);
    const double a = std::min(1.0, svd.singularValues()(1) / s0);
    Mat2 u, v;
    for (int r = 0; r < 2; ++r)
        for (int cc = 0; cc < 2; ++cc) {
            u(r, cc) = svd.matrixU()(r, cc);
            v(r, cc) = svd.matrixV()(r, cc);
        }
    if ((u * mat2(s0, 0, 0, s0 * a) * v.adjoint()).max_abs_diff(bhat) > 1e-12)
        throw std::logic_error("filter: SVD reconstruction failed");

    apply(st, make_u2_gate(v.adjoint(), c_wire, {}, GroupTag::Filter));
    // c-P in the (ancilla, c) ordering: rotates the ancilla only when c = 1
    const double rt = std::sqrt(std::max(0.0, 1.0 - a * a));
    Mat4 cp;
    cp(0, 0) = 1.0;
    cp(0, 1) = 0.0;
    cp(1, 1) = a;
    cp(1, 3) = rt;
    cp(2, 2) = 1.0;
    cp(3, 1) = -rt;
    cp(3, 3) = a;
    apply(st, make_u4_gate(cp, r_wire, c_wire, {}, GroupTag::Filter));
    if (rng) {
        // sampled outcome; failure aborts the run
        double p1 = 0.0;
        const std::size_t m1 = st.wire_mask(r_wire);
        for (std::size_t i = 0; i < st.dim(); ++i)
            if (i & m1) p1 += std::norm(st.amps()[i]);
        std::uniform_real_distribution<double> dist(0.0, 1.0);
        if (dist(*rng) < p1) {
            *failed = true;
            return 1.0 - p1;
        }
    }
    const double p = project_wire(st, r_wire, false);
    apply(st, make_u2_gate(u, c_wire, {}, GroupTag::Filter));
    return p;
}

inline FilterResult run_filter(const SpinorField& trial, double energy, int n_t,
                               const SplittingScheme& scheme, const Potentials& pot,
                               WindowKind window, std::mt19937_64* rng, int max_attempts) {
    const double dt = trial.spec.dt;
    if (std::abs(energy) > M_PI / dt + 1e-12)
        throw std::invalid_argument("filter: energy outside the representable band [-pi/dt, pi/dt]");
    const FilterPlan plan = make_filter_plan(energy, n_t, dt, window);
    const RegisterLayout lay = make_layout(trial.spec, false, Axis::Z, 2);
    const int c_wire = lay.extra(0);
    const int r_wire = lay.extra(1);

    for (int attempt = 1;; ++attempt) {
        QuantumState st = encode_field(trial, lay);
        double success = 1.0;
        bool failed = false;
        for (int k = 0; k <= n_t; ++k) {
            success *= detail::apply_filter_gate(st, plan.b_coeffs[k], c_wire, r_wire, rng, &failed);
            if (failed) break;
            if (k < n_t) {
                const Circuit u = build_time_step(lay, scheme, pot, k * dt);
                apply(st, u.controlled_on(c_wire, false)); // accumulated branch stays frozen
            }
        }
        if (failed) {
            if (attempt >= max_attempts)
                throw std::runtime_error("filter: stochastic mode exhausted max attempts");
            continue;
        }
        FilterResult res;
        res.plan = plan;
        res.success_probability = success;
        res.attempts = attempt;
        res.final_branch_probability = [&] {
            double p1 = 0.0;
            const std::size_t m1 = st.wire_mask(c_wire);
            for (std::size_t i = 0; i < st.dim(); ++i)
                if (i & m1) p1 += std::norm(st.amps()[i]);
            return p1;
        }();
        if (!(res.final_branch_probability > 1e-300))
            throw std::runtime_error("filter: zero post-projection norm");
        project_wire(st, c_wire, true);
        apply(st, make_gate(GateKind::X, c_wire));
        res.filtered = normalize(decode_field(st));
        return res;
    }
}

} // namespace detail

inline FilterResult feit_fleck_filter(const SpinorField& trial, double energy, int n_t,
                                      const SplittingScheme& scheme, const Potentials& pot,
                                      WindowKind window = WindowKind::Hann) {
    return detail::run_filter(trial, energy, n_t, scheme, pot, window, nullptr, 1);
}

// Repeat-on-failure protocol with sampled projections.
inline FilterResult feit_fleck_filter_stochastic(const SpinorField& trial, double energy, int n_t,
                                                 const SplittingScheme& scheme,
                                                 const Potentials& pot, WindowKind window,
                                                 std::uint64_t seed, int max_attempts = 1000) {
    std::mt19937_64 rng(seed);
    return detail::run_filter(trial, energy, n_t, scheme, pot, window, &rng, max_attempts);
}

// Lower bound on the cumulative projection success probability (Hann plans).
inline double success_probability_bound(int n_t) {
    if (n_t < 2) throw std::invalid_argument("success_probability_bound: n_t must be >= 2");
    return (1.0 / M_E) * (1.0 - 1.0 / n_t);
}

// |<a|b>| with the discrete measure.
inline double field_fidelity(const SpinorField& a, const SpinorField& b) {
    cd ov = 0.0;
    for (std::size_t i = 0; i < a.amps.size(); ++i) ov += std::conj(a.amps[i]) * b.amps[i];
    return std::abs(ov) * a.spec.cell_volume();
}

} // namespace dqw
