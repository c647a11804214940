#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "dqw/classical_solver.hpp"
#include "dqw/dirac_matrices.hpp"

using namespace dqw;

namespace {

// scaling-and-squaring Taylor exponential, test-only oracle
Mat4 expm_oracle(Mat4 a) {
    double norm = 0.0;
    for (const cd& v : a.a) norm = std::max(norm, std::abs(v));
    int squarings = 0;
    while (norm > 0.25) {
        norm /= 2.0;
        ++squarings;
    }
    const double scale = std::pow(2.0, -squarings);
    for (cd& v : a.a) v *= scale;
    Mat4 result = Mat4::identity();
    Mat4 term = Mat4::identity();
    for (int k = 1; k <= 24; ++k) {
        term = term * a;
        for (cd& v : term.a) v /= static_cast<double>(k);
        result = result + term;
    }
    for (int s = 0; s < squarings; ++s) result = result * result;
    return result;
}

Mat2 expm2_oracle(const Mat2& a) {
    Mat2 result = Mat2::identity();
    Mat2 term = Mat2::identity();
    for (int k = 1; k <= 30; ++k) {
        term = term * a;
        for (cd& v : term.a) v /= static_cast<double>(k);
        result = result + term;
    }
    return result;
}

SpinorField random_field(const LatticeSpec& spec, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    SpinorField f(spec);
    for (cd& a : f.amps) a = cd(g(rng), g(rng));
    return normalize(f);
}

double max_amp_diff(const SpinorField& a, const SpinorField& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.amps.size(); ++i) m = std::max(m, std::abs(a.amps[i] - b.amps[i]));
    return m;
}

double aligned_field_deviation(const SpinorField& a, const SpinorField& b) {
    return aligned_max_deviation(a.amps, b.amps);
}

// exact mode evolution of the continuum operator the streaming approximates:
// H(p) = -c alpha_x p + beta m c^2
Mat4 analytic_propagator_1d(double p, double mass, double c, double t) {
    Mat4 h;
    h = (cd(-c * p) * alpha_mat(Axis::X)) + (cd(mass * c * c) * beta_mat());
    const double e = std::sqrt(c * c * p * p + mass * mass * c * c * c * c);
    if (e == 0.0) return Mat4::identity();
    Mat4 u;
    const double ce = std::cos(e * t), se = std::sin(e * t);
    const Mat4 id = Mat4::identity();
    for (std::size_t i = 0; i < 16; ++i) u.a[i] = ce * id.a[i] - cd(0, se / e) * h.a[i];
    return u;
}

struct ModeSpec {
    int k;               // lattice mode number, p = 2 pi k / L
    std::array<cd, 4> u; // spinor part
};

SpinorField mode_field(const LatticeSpec& spec, const std::vector<ModeSpec>& modes, double mass,
                       double t) {
    SpinorField f(spec);
    const double L = spec.points(Axis::X) * spec.ell;
    for (std::int64_t i = 0; i < spec.points(Axis::X); ++i) {
        const double x = centroid_1d(spec, Axis::X, i);
        for (const ModeSpec& m : modes) {
            const double p = 2.0 * M_PI * m.k / L;
            const auto ut = analytic_propagator_1d(p, mass, spec.c, t).apply(m.u);
            const cd phase = std::polar(1.0, p * x);
            for (int s = 0; s < 4; ++s) f.at(s, i, 0, 0) += ut[s] * phase;
        }
    }
    return f;
}

} // namespace

TEST_CASE("spin rotation matches the frozen matrix action") {
    const LatticeSpec spec = make_lattice(2, 0, 0, 1.0, 1.0);
    SpinorField f(spec);
    f.at(0, 1, 0, 0) = 1.0;
    const SpinorField r = spin_rotate(f, Axis::X);
    const double inv = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(r.at(0, 1, 0, 0) - inv) < 1e-14); // (1,0,0,0) -> (1,0,0,1)/sqrt(2)
    CHECK(std::abs(r.at(3, 1, 0, 0) - inv) < 1e-14);
    CHECK(std::abs(r.at(1, 1, 0, 0)) < 1e-14);
    CHECK(std::abs(r.at(2, 1, 0, 0)) < 1e-14);
}

TEST_CASE("spin rotation is involutory and unitary") {
    const LatticeSpec spec = make_lattice(2, 1, 1, 0.5, 1.0);
    const SpinorField f = random_field(spec, 3);
    for (Axis a : {Axis::X, Axis::Y, Axis::Z}) {
        const SpinorField back = spin_rotate(spin_rotate(f, a), a, RotationSense::Inverse);
        CHECK(max_amp_diff(back, f) < 1e-15);
        CHECK(std::abs(spin_rotate(f, a).discrete_norm_sq() - 1.0) < 1e-13);
    }
}

TEST_CASE("stream moves spikes with periodic wrap and is exactly reversible") {
    const LatticeSpec spec = make_lattice(3, 0, 0, 1.0, 1.0);
    SpinorField f(spec);
    f.at(0, 3, 0, 0) = 1.0; // phi1 spike at i=3
    f.at(3, 7, 0, 0) = 1.0; // chi2 spike at i=7
    const SpinorField s = stream(f, Axis::X, 1);
    CHECK(s.at(0, 2, 0, 0) == cd(1.0)); // phi moves down
    CHECK(s.at(3, 0, 0, 0) == cd(1.0)); // chi wraps up
    const SpinorField back = stream(s, Axis::X, -1);
    for (std::size_t i = 0; i < f.amps.size(); ++i) CHECK(back.amps[i] == f.amps[i]);
}

TEST_CASE("streaming a full lattice period restores the field bit-for-bit") {
    const LatticeSpec spec = make_lattice(3, 0, 0, 0.3, 1.0);
    const SpinorField f = random_field(spec, 5);
    SpinorField cur = f;
    for (int k = 0; k < 8; ++k) cur = stream(cur, Axis::X, 1);
    for (std::size_t i = 0; i < f.amps.size(); ++i) CHECK(cur.amps[i] == f.amps[i]);
}

TEST_CASE("mass phase: identity at m=0, global sign at m c^2 dt = pi") {
    const LatticeSpec spec = make_lattice(2, 0, 0, 1.0, 1.0);
    const SpinorField f = random_field(spec, 7);
    CHECK(max_amp_diff(apply_mass(f, 0.0, 1.0, 0.7), f) == 0.0);
    const SpinorField g = apply_mass(f, 1.0, 1.0, M_PI);
    for (std::size_t i = 0; i < f.amps.size(); ++i) CHECK(std::abs(g.amps[i] + f.amps[i]) < 1e-13);
    CHECK(std::abs(apply_mass(f, 0.37, 1.0, 0.11).discrete_norm_sq() - 1.0) < 1e-13);
}

TEST_CASE("scalar potential: zero and constant kinds leave observables unchanged") {
    const LatticeSpec spec = make_lattice(2, 1, 0, 0.5, 1.0);
    const SpinorField f = random_field(spec, 9);
    Potentials zero;
    CHECK(max_amp_diff(apply_scalar_potential(f, zero, 0.0, 0.3), f) == 0.0);

    Potentials constant;
    constant.scalar_kind = ScalarKind::Constant;
    constant.scalar_const = 1.7;
    const SpinorField g = apply_scalar_potential(f, constant, 0.0, 0.3);
    const cd ratio = g.amps[0] / f.amps[0];
    CHECK(std::abs(std::abs(ratio) - 1.0) < 1e-13);
    for (std::size_t i = 0; i < f.amps.size(); ++i)
        CHECK(std::abs(g.amps[i] - ratio * f.amps[i]) < 1e-13);
    for (Axis a : {Axis::X, Axis::Y})
        CHECK(position_mean(g, a) == Catch::Approx(position_mean(f, a)).margin(1e-12));
}

TEST_CASE("linear scalar potential applies the per-site field phases") {
    const LatticeSpec spec = make_lattice(2, 0, 0, 1.0, 1.0);
    const SpinorField f = random_field(spec, 11);
    Potentials pot;
    pot.charge = -1.0;
    pot.scalar_kind = ScalarKind::LinearE;
    pot.electric_field = {0.8, 0.0, 0.0};
    const double dt_eff = 0.4;
    const SpinorField g = apply_scalar_potential(f, pot, 0.0, dt_eff);
    for (std::int64_t i = 0; i < spec.points(Axis::X); ++i) {
        const double x = centroid_1d(spec, Axis::X, i);
        const cd expected = std::polar(1.0, pot.charge * 0.8 * x * dt_eff); // e^{+i e E x dt}
        for (int s = 0; s < 4; ++s)
            CHECK(std::abs(g.at(s, i, 0, 0) - expected * f.at(s, i, 0, 0)) < 1e-14);
    }
}

TEST_CASE("scalar potential rejects non-finite values") {
    const LatticeSpec spec = make_lattice(1, 0, 0, 1.0, 1.0);
    const SpinorField f = random_field(spec, 12);
    Potentials pot;
    pot.scalar_kind = ScalarKind::Tabulated;
    pot.scalar_table = {0.0, std::numeric_limits<double>::infinity()};
    CHECK_THROWS_AS(apply_scalar_potential(f, pot, 0.0, 0.1), std::domain_error);
}

TEST_CASE("vector potential matches the dense matrix exponential oracle") {
    const LatticeSpec spec = make_lattice(2, 0, 0, 1.0, 1.0);
    const SpinorField f = random_field(spec, 13);
    std::mt19937_64 rng(15);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (int trial = 0; trial < 25; ++trial) {
        const Vec3 a{u(rng), u(rng), u(rng)};
        const double dt_eff = u(rng);
        const double charge = -1.0;
        Potentials pot;
        pot.charge = charge;
        pot.vector_potential = [a](double) { return a; };
        const SpinorField got = apply_vector_potential(f, pot, 0.0, dt_eff);

        Mat4 gen;
        for (int ax = 0; ax < 3; ++ax)
            gen = gen + (cd(0.0, charge * dt_eff * a[ax]) * alpha_mat(static_cast<Axis>(ax)));
        const SpinorField ref = apply_spinor_matrix(f, expm_oracle(gen));
        CHECK(max_amp_diff(got, ref) < 1e-12);
    }
}

TEST_CASE("euler angles reconstruct the SU(2) block") {
    SECTION("A = 0 gives the identity") {
        const EulerAngles e = euler_angles({0.0, 0.0, 0.0}, 0.5, -1.0);
        CHECK(e.delta == 0.0);
        CHECK(e.theta == 0.0);
        CHECK(e.xi == 0.0);
    }
    SECTION("z-aligned A degenerates to pure Rz") {
        const EulerAngles e = euler_angles({0.0, 0.0, 0.7}, 0.4, -1.0);
        CHECK(std::abs(e.theta) < 1e-12);
        CHECK(e.delta == Catch::Approx(e.xi));
    }
    SECTION("random A reconstructs within 1e-10 after phase alignment") {
        std::mt19937_64 rng(19);
        std::uniform_real_distribution<double> u(-2.0, 2.0);
        for (int trial = 0; trial < 200; ++trial) {
            const Vec3 a{u(rng), u(rng), u(rng)};
            const double dt_eff = u(rng);
            const EulerAngles e = euler_angles(a, dt_eff, -1.0);
            const Mat2 q = su2_exp(-dt_eff * a[0], -dt_eff * a[1], -dt_eff * a[2]);
            const Mat2 rec = e.phase * (rz_mat(e.delta) * ry_mat(e.theta) * rz_mat(e.xi));
            CHECK(rec.max_abs_diff(q) < 1e-10);
        }
    }
    SECTION("oracle agreement with the series exponential") {
        const Vec3 a{0.3, -1.1, 0.6};
        const double dt_eff = 0.8, charge = -1.0;
        const EulerAngles e = euler_angles(a, dt_eff, charge);
        Mat2 gen;
        gen = gen + (cd(0, -charge * dt_eff * a[0]) * pauli_x());
        gen = gen + (cd(0, -charge * dt_eff * a[1]) * pauli_y());
        gen = gen + (cd(0, -charge * dt_eff * a[2]) * pauli_z());
        const Mat2 q_oracle = expm2_oracle(gen);
        const Mat2 rec = e.phase * (rz_mat(e.delta) * ry_mat(e.theta) * rz_mat(e.xi));
        CHECK(rec.max_abs_diff(q_oracle) < 1e-12);
    }
}

TEST_CASE("one free massless step splits a spike into the two chirality movers") {
    const LatticeSpec spec = make_lattice(3, 0, 0, 1.0, 1.0);
    SpinorField f(spec);
    f.at(0, 3, 0, 0) = 1.0;
    f = normalize(f);
    const double amp = std::abs(f.at(0, 3, 0, 0));
    const SpinorField g = step(f, scheme_second_order(), Potentials::free_particle(0.0), 0.0);
    // S_x T_x S_x on e1: half weight at i-1 on (e1+e4)/2, half at i+1 on (e1-e4)/2
    CHECK(std::abs(g.at(0, 2, 0, 0) - 0.5 * amp) < 1e-13);
    CHECK(std::abs(g.at(3, 2, 0, 0) - 0.5 * amp) < 1e-13);
    CHECK(std::abs(g.at(0, 4, 0, 0) - 0.5 * amp) < 1e-13);
    CHECK(std::abs(g.at(3, 4, 0, 0) + 0.5 * amp) < 1e-13);
    CHECK(std::abs(g.at(1, 2, 0, 0)) < 1e-14);
    CHECK(std::abs(g.at(0, 3, 0, 0)) < 1e-14);
}

TEST_CASE("free massless second-order step equals the bare walk product") {
    const LatticeSpec spec = make_lattice(2, 2, 2, 0.5, 1.0);
    const SpinorField f = random_field(spec, 21);
    const SpinorField via_step = step(f, scheme_second_order(), Potentials::free_particle(0.0), 0.0);
    SpinorField manual = f;
    for (Axis a : {Axis::X, Axis::Y, Axis::Z}) {
        manual = spin_rotate(manual, a, RotationSense::Inverse);
        manual = stream(manual, a, 1);
        manual = spin_rotate(manual, a, RotationSense::Forward);
    }
    CHECK(max_amp_diff(via_step, manual) == 0.0);
}

TEST_CASE("when all factors commute the two schemes agree up to a global phase") {
    const LatticeSpec spec = make_lattice(3, 0, 0, 0.5, 1.0).refined(1);
    const SpinorField f = random_field(spec, 23);
    Potentials pot; // m = 0, A = 0, V constant
    pot.scalar_kind = ScalarKind::Constant;
    pot.scalar_const = 0.9;
    const SpinorField a = step(f, scheme_second_order(), pot, 0.0);
    const SpinorField b = step(f, scheme_third_order(), pot, 0.0);
    CHECK(aligned_field_deviation(a, b) < 1e-12);
}

TEST_CASE("step rejects streaming amounts the lattice cannot represent") {
    const LatticeSpec spec = make_lattice(3, 0, 0, 0.5, 0.5); // N* = 1/2, base lattice
    const SpinorField f = random_field(spec, 25);
    CHECK_THROWS_AS(step(f, scheme_second_order(), Potentials::free_particle(0.0), 0.0),
                    std::invalid_argument);
    const LatticeSpec fine = spec.refined(1); // doubled resolution carries the staggered mesh
    const SpinorField g = random_field(fine, 25);
    CHECK_NOTHROW(step(g, scheme_second_order(), Potentials::free_particle(0.0), 0.0));
}

TEST_CASE("norm is preserved over a hundred interacting steps") {
    const LatticeSpec spec = make_lattice(2, 2, 0, 0.4, 1.0);
    SpinorField f = random_field(spec, 27);
    Potentials pot = Potentials::free_particle(0.8);
    pot.scalar_kind = ScalarKind::LinearE;
    pot.electric_field = {0.3, -0.2, 0.0};
    pot.vector_potential = [](double t) { return Vec3{0.2 * std::cos(t), 0.1, -0.3}; };
    f = evolve(f, scheme_second_order(), pot, 0.0, 100);
    CHECK(std::abs(std::sqrt(f.discrete_norm_sq()) - 1.0) < 1e-10);
}

TEST_CASE("global error slopes match the scheme orders on the free massive line") {
    const std::vector<ModeSpec> modes = {
        {1, {cd(1.0), cd(0.3), cd(0.0, -0.2), cd(0.1)}},
        {-2, {cd(0.2), cd(-0.5), cd(0.4), cd(0.0, 0.7)}},
    };
    const double mass = 1.0, t_total = 2.0, L = 8.0;
    auto global_error = [&](int n_qubits, const SplittingScheme& scheme) {
        const std::int64_t n_pts = std::int64_t(1) << n_qubits;
        const double ell = L / static_cast<double>(n_pts);
        const LatticeSpec spec = make_lattice(n_qubits, 0, 0, ell, 2.0); // N* = 2: dt = 2 ell
        const int steps = static_cast<int>(std::round(t_total / spec.dt));
        REQUIRE(steps * spec.dt == Catch::Approx(t_total).epsilon(1e-12));
        SpinorField f = normalize(mode_field(spec, modes, mass, 0.0));
        const double scale0 = std::sqrt(mode_field(spec, modes, mass, 0.0).discrete_norm_sq());
        f = evolve(f, scheme, Potentials::free_particle(mass), 0.0, steps);
        SpinorField exact = mode_field(spec, modes, mass, t_total);
        for (cd& v : exact.amps) v /= scale0; // unitary evolution keeps the initial normalization
        return max_amp_diff(f, exact) / exact.max_abs(); // relative, refinement-stable
    };
    for (int order = 2; order <= 3; ++order) {
        const SplittingScheme scheme = order == 2 ? scheme_second_order() : scheme_third_order();
        std::vector<double> errs;
        for (int n : {7, 8, 9}) errs.push_back(global_error(n, scheme));
        const double slope = 0.5 * (std::log2(errs[0] / errs[1]) + std::log2(errs[1] / errs[2]));
        CHECK(slope == Catch::Approx(order - 1.0).margin(0.35));
    }
}

TEST_CASE("halving dt cuts the one-step third-order error by about eight") {
    const std::vector<ModeSpec> modes = {{1, {cd(0.8), cd(0.1), cd(0.3), cd(0.0, -0.4)}}};
    const double mass = 1.0, L = 8.0;
    auto one_step_error = [&](int n_qubits) {
        const std::int64_t n_pts = std::int64_t(1) << n_qubits;
        const double ell = L / static_cast<double>(n_pts);
        const LatticeSpec spec = make_lattice(n_qubits, 0, 0, ell, 2.0);
        SpinorField f = normalize(mode_field(spec, modes, mass, 0.0));
        const double scale0 = std::sqrt(mode_field(spec, modes, mass, 0.0).discrete_norm_sq());
        const SpinorField stepped =
            step(f, scheme_third_order(), Potentials::free_particle(mass), 0.0);
        SpinorField exact = mode_field(spec, modes, mass, spec.dt);
        for (cd& v : exact.amps) v /= scale0;
        return max_amp_diff(stepped, exact) / exact.max_abs();
    };
    const double e1 = one_step_error(7);
    const double e2 = one_step_error(8);
    CHECK(e1 / e2 == Catch::Approx(8.0).epsilon(0.30));
}
