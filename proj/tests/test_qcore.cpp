#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "dqw/qcore.hpp"

using namespace dqw;

namespace {

// a bare register without field semantics, for raw gate tests
RegisterLayout bare_register(int n_wires) {
    RegisterLayout lay;
    lay.spec = make_lattice(1, 0, 0, 1.0, 1.0);
    lay.n_spinor = 0;
    lay.n_anc = 0;
    lay.n_extra = 0;
    lay.n_total = n_wires;
    return lay;
}

QuantumState random_state(const RegisterLayout& lay, std::uint64_t seed) {
    QuantumState st(lay);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    for (cd& a : st.amps()) a = cd(g(rng), g(rng));
    st.renormalize();
    return st;
}

// dense matrix of a gate on n wires, for the chain oracle
std::vector<cd> dense_of(const Gate& g, int n) {
    const std::size_t dim = std::size_t(1) << n;
    std::vector<cd> m(dim * dim, cd(0.0));
    for (std::size_t col = 0; col < dim; ++col) {
        // apply the gate to the basis state |col>
        LatticeSpec spec = make_lattice(n, 0, 0, 1.0, 1.0);
        RegisterLayout lay;
        lay.spec = spec;
        lay.n_spinor = 0;
        lay.n_anc = 0;
        lay.n_extra = 0;
        lay.n_total = n;
        QuantumState st(lay);
        st.amps().assign(dim, cd(0.0));
        st.amps()[col] = 1.0;
        apply(st, g);
        for (std::size_t row = 0; row < dim; ++row) m[row * dim + col] = st.amps()[row];
    }
    return m;
}

std::vector<cd> matmul(const std::vector<cd>& a, const std::vector<cd>& b, std::size_t dim) {
    std::vector<cd> c(dim * dim, cd(0.0));
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t k = 0; k < dim; ++k) {
            const cd v = a[i * dim + k];
            if (v == cd(0.0)) continue;
            for (std::size_t j = 0; j < dim; ++j) c[i * dim + j] += v * b[k * dim + j];
        }
    return c;
}

Gate random_gate(std::mt19937_64& rng, int n) {
    std::uniform_int_distribution<int> kind_pick(0, 7);
    std::uniform_int_distribution<int> wire_pick(0, n - 1);
    std::uniform_real_distribution<double> angle(-M_PI, M_PI);
    const GateKind kinds[] = {GateKind::H,  GateKind::S,  GateKind::T,     GateKind::X,
                              GateKind::Y,  GateKind::Rz, GateKind::Ry,    GateKind::Phase};
    Gate g = make_gate(kinds[kind_pick(rng)], wire_pick(rng), {}, angle(rng));
    if (rng() % 2) {
        int c = wire_pick(rng);
        if (c != g.t0) g.controls.push_back({c, (rng() % 2) != 0});
    }
    return g;
}

} // namespace

TEST_CASE("elementary gate actions") {
    const RegisterLayout lay = bare_register(1);
    SECTION("H on |0>") {
        QuantumState st(lay);
        apply(st, make_gate(GateKind::H, 0));
        CHECK(std::abs(st.amps()[0] - 1.0 / std::sqrt(2.0)) < 1e-15);
        CHECK(std::abs(st.amps()[1] - 1.0 / std::sqrt(2.0)) < 1e-15);
    }
    SECTION("CNOT on |10>") {
        const RegisterLayout lay2 = bare_register(2);
        QuantumState st(lay2);
        st.amps().assign(4, cd(0.0));
        st.amps()[0b10] = 1.0; // control wire 0 set
        apply(st, make_gate(GateKind::X, 1, {{0, true}}));
        CHECK(std::abs(st.amps()[0b11] - 1.0) < 1e-15);
        CHECK(std::abs(st.amps()[0b10]) < 1e-15);
    }
}

TEST_CASE("gate application rejects overlapping or bad wires") {
    const RegisterLayout lay = bare_register(4);
    QuantumState st(lay);
    CHECK_THROWS_AS(apply(st, make_gate(GateKind::X, 0, {{0, true}})), std::invalid_argument);
    CHECK_THROWS_AS(apply(st, make_gate(GateKind::X, lay.n_total, {})), std::invalid_argument);
    CHECK_THROWS_AS(apply(st, make_gate(GateKind::X, 1, {{0, true}, {0, false}})),
                    std::invalid_argument);
}

TEST_CASE("random circuits match the dense matrix chain oracle") {
    const int n = 3;
    const RegisterLayout lay = bare_register(n);
    std::mt19937_64 rng(31);
    const std::size_t dim = 8;
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<Gate> gates;
        for (int k = 0; k < 12; ++k) gates.push_back(random_gate(rng, n));
        // identity matrix
        std::vector<cd> u(dim * dim, cd(0.0));
        for (std::size_t i = 0; i < dim; ++i) u[i * dim + i] = 1.0;
        for (const Gate& g : gates) u = matmul(dense_of(g, n), u, dim);

        QuantumState st = random_state(lay, 100 + rep);
        const std::vector<cd> in = st.amps();
        for (const Gate& g : gates) apply(st, g);
        for (std::size_t r = 0; r < dim; ++r) {
            cd expect = 0.0;
            for (std::size_t c = 0; c < dim; ++c) expect += u[r * dim + c] * in[c];
            CHECK(std::abs(st.amps()[r] - expect) < 1e-12);
        }
        CHECK(std::abs(st.norm_sq() - 1.0) < 1e-12);
    }
}

TEST_CASE("two-target generic gates act on the paired amplitudes") {
    const RegisterLayout lay = bare_register(2);
    // swap-like U4 exchanging |01> and |10>
    Mat4 swap = Mat4::identity();
    swap(1, 1) = swap(2, 2) = 0.0;
    swap(1, 2) = swap(2, 1) = 1.0;
    QuantumState st(lay);
    st.amps().assign(4, cd(0.0));
    st.amps()[0b01] = 1.0;
    apply(st, make_u4_gate(swap, 0, 1));
    CHECK(std::abs(st.amps()[0b10] - 1.0) < 1e-15);
}

TEST_CASE("multi-controlled X flips exactly the matching basis states") {
    const RegisterLayout lay = bare_register(8);
    QuantumState st(lay);
    SECTION("single control behaves like CNOT") {
        st.amps().assign(st.dim(), cd(0.0));
        st.amps()[st.wire_mask(0)] = 1.0;
        apply_multi_controlled_x(st, {{0, true}}, 1, {});
        CHECK(std::abs(st.amps()[st.wire_mask(0) | st.wire_mask(1)] - 1.0) < 1e-15);
    }
    SECTION("three controls on |111> with ancilla restored") {
        st.amps().assign(st.dim(), cd(0.0));
        const std::size_t idx = st.wire_mask(0) | st.wire_mask(1) | st.wire_mask(2);
        st.amps()[idx] = 1.0;
        const std::vector<int> anc{7};
        const auto gates =
            apply_multi_controlled_x(st, {{0, true}, {1, true}, {2, true}}, 3, anc);
        CHECK(gates.size() == 3); // 2k-3 Toffolis for k = 3
        CHECK(std::abs(st.amps()[idx | st.wire_mask(3)] - 1.0) < 1e-14);
    }
    SECTION("ancillas return to |0> on random states") {
        QuantumState rnd = random_state(lay, 55);
        // wires 6,7 are the ancilla pool: clear them first
        for (std::size_t i = 0; i < rnd.dim(); ++i)
            if (rnd.bit(i, 6) || rnd.bit(i, 7)) rnd.amps()[i] = 0.0;
        rnd.renormalize();
        const std::vector<int> anc{6, 7};
        apply_multi_controlled_x(rnd, {{0, true}, {1, false}, {2, true}, {3, true}}, 4, anc);
        double leak = 0.0;
        for (std::size_t i = 0; i < rnd.dim(); ++i)
            if (rnd.bit(i, 6) || rnd.bit(i, 7)) leak += std::norm(rnd.amps()[i]);
        CHECK(leak < 1e-24);
    }
    SECTION("insufficient ancillas throw") {
        CHECK_THROWS_AS(expand_mcx({{0, true}, {1, true}, {2, true}, {3, true}}, 4, {}),
                        std::invalid_argument);
    }
}

TEST_CASE("mcx decomposition grows linearly with the control count") {
    std::vector<int> anc;
    for (int i = 20; i < 40; ++i) anc.push_back(i);
    std::vector<std::size_t> counts;
    for (int k = 3; k <= 12; ++k) {
        std::vector<Control> ctl;
        for (int i = 0; i < k; ++i) ctl.push_back({i, true});
        counts.push_back(expand_mcx(ctl, 15, anc).size());
    }
    for (std::size_t i = 0; i + 1 < counts.size(); ++i)
        CHECK(counts[i + 1] - counts[i] == 2); // exactly 2k-3
}

TEST_CASE("encode/decode is an exact bijection on the field amplitudes") {
    // unit cell: the register scale is exactly 1 and the round trip is bitwise
    const LatticeSpec spec = make_lattice(2, 1, 1, 1.0, 1.0);
    const RegisterLayout lay = make_layout(spec);
    std::mt19937_64 rng(77);
    std::normal_distribution<double> g(0.0, 1.0);
    SpinorField f(spec);
    for (cd& a : f.amps) a = cd(g(rng), g(rng));
    f = normalize(f);
    const QuantumState st = encode_field(f, lay);
    CHECK(std::abs(st.norm_sq() - 1.0) < 1e-12);
    const SpinorField back = decode_field(st);
    for (std::size_t i = 0; i < f.amps.size(); ++i) CHECK(back.amps[i] == f.amps[i]);

    // generic cell: scaling and unscaling stay within one ulp per amplitude
    const LatticeSpec spec2 = make_lattice(2, 1, 1, 0.5, 1.0);
    const RegisterLayout lay2 = make_layout(spec2);
    SpinorField f2(spec2);
    for (cd& a : f2.amps) a = cd(g(rng), g(rng));
    f2 = normalize(f2);
    const SpinorField back2 = decode_field(encode_field(f2, lay2));
    for (std::size_t i = 0; i < f2.amps.size(); ++i)
        CHECK(std::abs(back2.amps[i] - f2.amps[i]) <= 2.3e-16 * std::abs(f2.amps[i]));
}

TEST_CASE("a basis spike encodes to a computational basis state") {
    const LatticeSpec spec = make_lattice(2, 1, 1, 1.0, 1.0);
    const RegisterLayout lay = make_layout(spec);
    SpinorField f(spec);
    f.at(0, 0, 0, 0) = 1.0; // phi1 at the origin site
    f = normalize(f);
    const QuantumState st = encode_field(f, lay);
    CHECK(std::abs(st.amps()[0] - 1.0) < 1e-14);
    SpinorField g(spec);
    g.at(2, 1, 0, 1) = 1.0; // chi1: s1=1, s2=0
    g = normalize(g);
    const QuantumState st2 = encode_field(g, lay);
    // index bits: s1 s2 | i(2) | j(1) | k(1) | anc(2)
    const std::size_t expect = (std::size_t(0b10'01'0'1)) << lay.n_anc;
    CHECK(std::abs(st2.amps()[expect] - 1.0) < 1e-14);
}

TEST_CASE("encode rejects unnormalized fields; decode rejects ancilla leakage") {
    const LatticeSpec spec = make_lattice(2, 0, 0, 1.0, 1.0);
    const RegisterLayout lay = make_layout(spec);
    SpinorField f(spec);
    f.at(0, 0, 0, 0) = 0.5;
    CHECK_THROWS_AS(encode_field(f, lay), std::invalid_argument);
    // an extra ancilla wire that gets entangled must fail decode
    const RegisterLayout lay2 = make_layout(spec, false, Axis::Z, 1);
    QuantumState st2 = encode_field(normalize(f), lay2);
    apply(st2, make_gate(GateKind::H, lay2.extra(0)));
    CHECK_THROWS_AS(decode_field(st2), std::runtime_error);
}

TEST_CASE("reduced-mode encode keeps only the surviving sector") {
    const LatticeSpec spec = make_lattice(0, 0, 3, 1.0, 1.0);
    const RegisterLayout lay = make_layout(spec, true, Axis::Z);
    SpinorField f(spec);
    f.at(0, 0, 0, 1) = 1.0;
    f.at(2, 0, 0, 5) = cd(0.0, 1.0);
    f = normalize(f);
    const QuantumState st = encode_field(f, lay);
    const SpinorField back = decode_field(st);
    for (std::size_t i = 0; i < f.amps.size(); ++i) CHECK(back.amps[i] == f.amps[i]);
    SpinorField bad(spec);
    bad.at(1, 0, 0, 0) = 1.0; // phi2 is outside the reduced sector
    CHECK_THROWS_AS(encode_field(normalize(bad), lay), std::invalid_argument);
}

TEST_CASE("ancilla expectation values") {
    const LatticeSpec spec = make_lattice(1, 0, 0, 1.0, 1.0);
    const RegisterLayout lay = make_layout(spec, false, Axis::Z, 1);
    SpinorField f(spec);
    f.at(0, 0, 0, 0) = 1.0;
    f = normalize(f);
    QuantumState st = encode_field(f, lay);
    const int probe = lay.extra(0);
    CHECK(std::abs(expectation(st, PauliProbe::SigmaXPlusISigmaY, probe)) < 1e-15);
    apply(st, make_gate(GateKind::H, probe));
    CHECK(std::abs(expectation(st, PauliProbe::SigmaXPlusISigmaY, probe) - cd(1.0)) < 1e-14);
    CHECK(std::abs(expectation(st, PauliProbe::SigmaX, probe) - cd(1.0)) < 1e-14);
    CHECK(std::abs(expectation(st, PauliProbe::SigmaY, probe)) < 1e-14);
}

TEST_CASE("controlled circuits carry tracked phases as physical gates") {
    const LatticeSpec spec = make_lattice(1, 0, 0, 1.0, 1.0);
    const RegisterLayout lay = make_layout(spec, false, Axis::Z, 1);
    Circuit c(lay.n_total);
    c.add(make_gate(GateKind::X, lay.s2()));
    c.add_phase(0.7);
    const Circuit cc = c.controlled_on(lay.extra(0), true);
    REQUIRE(cc.gates.size() == 2);
    CHECK(cc.gates[0].controls.size() == 1);
    CHECK(cc.gates[1].kind == GateKind::Phase);
    CHECK(cc.global_phase == 0.0);

    // action check: |probe=1> branch picks up X and the phase
    QuantumState st(lay);
    apply(st, make_gate(GateKind::H, lay.extra(0)));
    apply(st, cc);
    const std::size_t probe_mask = st.wire_mask(lay.extra(0));
    const std::size_t s2_mask = st.wire_mask(lay.s2());
    CHECK(std::abs(st.amps()[probe_mask | s2_mask] -
                   std::polar(1.0 / std::sqrt(2.0), 0.7)) < 1e-14);
    CHECK(std::abs(st.amps()[0] - 1.0 / std::sqrt(2.0)) < 1e-14);
}

TEST_CASE("projection records the outcome probability and renormalizes") {
    const LatticeSpec spec = make_lattice(1, 0, 0, 1.0, 1.0);
    const RegisterLayout lay = make_layout(spec, false, Axis::Z, 1);
    QuantumState st(lay);
    apply(st, make_gate(GateKind::Ry, lay.extra(0), {}, 2.0 * std::acos(std::sqrt(0.3))));
    const double p0 = project_wire(st, lay.extra(0), false);
    CHECK(p0 == Catch::Approx(0.3).epsilon(1e-12));
    CHECK(std::abs(st.norm_sq() - 1.0) < 1e-12);
}

TEST_CASE("circuit text dump is stable across runs") {
    Circuit c(3, "demo");
    c.add(make_gate(GateKind::Rz, 1, {{0, true}, {2, false}}, M_PI / 3));
    c.add(make_gate(GateKind::H, 0));
    c.add_phase(0.25);
    const std::string a = c.text_dump();
    const std::string b = c.text_dump();
    CHECK(a == b);
    CHECK(a.find("RZ(") != std::string::npos);
    CHECK(a.find("[0+ 2-]") != std::string::npos);
    CHECK(a.find("# wires 3") != std::string::npos);
}
