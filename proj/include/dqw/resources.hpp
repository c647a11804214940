#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "dirac_circuits.hpp"
#include "qcore.hpp"
#include "smallmat.hpp"

namespace dqw {

struct GateCounts {
    std::int64_t h = 0, s = 0, t = 0, cnot = 0;
    std::int64_t total() const { return h + s + t + cnot; }

    GateCounts& operator+=(const GateCounts& o) {
        h += o.h;
        s += o.s;
        t += o.t;
        cnot += o.cnot;
        return *this;
    }
    GateCounts operator*(std::int64_t k) const { return {h * k, s * k, t * k, cnot * k}; }
};

struct ResourceReport {
    GateCounts counts;
    std::int64_t width = 0;
    double epsilon = 0.0;
    std::int64_t synthesized_rotations = 0;
    std::map<GroupTag, GateCounts> breakdown;

    void tally(GroupTag g, const GateCounts& c) {
        counts += c;
        breakdown[g] += c;
    }
};

// Operator-norm distance up to global phase between 2x2 unitaries.
inline double phase_aligned_distance(const Mat2& a, const Mat2& b) {
    // ||a - e^{i phi} b|| minimized over phi; for unitaries this equals
    // sqrt(2 - 2 smin(a^dag b))-style, computed via the trace alignment.
    const Mat2 d = a.adjoint() * b;
    const cd tr = d(0, 0) + d(1, 1);
    const cd phase = std::abs(tr) > 1e-300 ? tr / std::abs(tr) : cd(1.0);
    Mat2 diff = a - std::conj(phase) * b;
    // spectral norm of a 2x2 via its Gram matrix
    const Mat2 g = diff.adjoint() * diff;
    const double tr2 = (g(0, 0) + g(1, 1)).real();
    const cd det = g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0);
    const double disc = std::max(0.0, tr2 * tr2 / 4.0 - std::abs(det));
    return std::sqrt(std::max(0.0, tr2 / 2.0 + std::sqrt(disc)));
}

struct Synthesized {
    std::vector<GateKind> word; // application order
    double phase = 0.0;         // target ~ e^{i phase} * product(word)
    double error = 0.0;
    GateCounts counts;
};

namespace detail {

inline GateCounts count_kinds(const std::vector<GateKind>& word) {
    GateCounts c;
    for (GateKind k : word) {
        switch (k) {
            case GateKind::H: ++c.h; break;
            case GateKind::S:
            case GateKind::Sdg: ++c.s; break;
            case GateKind::T:
            case GateKind::Tdg: ++c.t; break;
            default: throw std::logic_error("count_kinds: non-fundamental gate in word");
        }
    }
    return c;
}

inline Mat2 word_matrix(const std::vector<GateKind>& word) {
    Mat2 m = Mat2::identity();
    for (GateKind k : word) {
        Gate g;
        g.kind = k;
        g.t0 = 0;
        m = gate_matrix_1q(g) * m;
    }
    return m;
}

// Cheapest fundamental spelling of a run of j T gates (j in 1..7), using the
// adjoint gates at unit cost.
inline std::vector<GateKind> t_run_word(int j) {
    switch (j) {
        case 1: return {GateKind::T};
        case 2: return {GateKind::S};
        case 3: return {GateKind::S, GateKind::T};
        case 4: return {GateKind::S, GateKind::S};
        case 5: return {GateKind::Sdg, GateKind::Tdg};
        case 6: return {GateKind::Sdg};
        case 7: return {GateKind::Tdg};
        default: throw std::logic_error("t_run_word: bad run length");
    }
}

// All distinct <H,T> words up to a gate budget, deduplicated projectively.
// Words alternate T-runs and single H gates; runs are re-spelled via
// t_run_word so S/Sdg/Tdg keep the budget honest.
struct WordTable {
    std::vector<std::pair<Mat2, std::vector<GateKind>>> entries;

    static const WordTable& instance() {
        static WordTable table = build(14);
        return table;
    }

    static std::uint64_t key_of(const Mat2& u) {
        // canonical phase: rotate so the largest entry is real positive
        std::size_t best = 0;
        for (std::size_t i = 1; i < 4; ++i)
            if (std::abs(u.a[i]) > std::abs(u.a[best]) + 1e-12) best = i;
        const cd ph = std::abs(u.a[best]) > 1e-300 ? u.a[best] / std::abs(u.a[best]) : cd(1.0);
        std::uint64_t h = 1469598103934665603ull;
        for (const cd& v : u.a) {
            const cd w = v / ph;
            for (double x : {w.real(), w.imag()}) {
                const std::int64_t q = llround(x * 1e7);
                h = (h ^ static_cast<std::uint64_t>(q + 100000000)) * 1099511628211ull;
            }
        }
        return h;
    }

    static WordTable build(int budget) {
        WordTable table;
        std::unordered_map<std::uint64_t, std::size_t> seen;
        auto consider = [&](const Mat2& m, const std::vector<GateKind>& w) -> bool {
            const std::uint64_t k = key_of(m);
            auto it = seen.find(k);
            if (it != seen.end()) {
                if (w.size() < table.entries[it->second].second.size())
                    table.entries[it->second].second = w;
                return false;
            }
            seen.emplace(k, table.entries.size());
            table.entries.emplace_back(m, w);
            return true;
        };
        // breadth-first over (optional H) (T-run H)* (optional T-run)
        struct Node {
            Mat2 m;
            std::vector<GateKind> w;
            bool after_h; // last emitted element was H
        };
        std::vector<Node> frontier;
        frontier.push_back({Mat2::identity(), {}, false});
        consider(Mat2::identity(), {});
        const Mat2 hm = hadamard_mat();
        while (!frontier.empty()) {
            std::vector<Node> next;
            for (const Node& nd : frontier) {
                // extend with H (only after a run or at the start)
                if (!nd.after_h) {
                    auto w = nd.w;
                    w.push_back(GateKind::H);
                    if (static_cast<int>(w.size()) <= budget) {
                        Node nn{hm * nd.m, std::move(w), true};
                        if (consider(nn.m, nn.w)) next.push_back(std::move(nn));
                    }
                }
                // extend with a T-run (only at the start or after H)
                if (nd.after_h || nd.w.empty()) {
                    for (int j = 1; j <= 7; ++j) {
                        const auto run = t_run_word(j);
                        auto w = nd.w;
                        w.insert(w.end(), run.begin(), run.end());
                        if (static_cast<int>(w.size()) > budget) continue;
                        Mat2 m = nd.m;
                        for (int jj = 0; jj < j; ++jj) m = phase_mat(M_PI / 4) * m;
                        Node nn{m, std::move(w), false};
                        if (consider(nn.m, nn.w)) next.push_back(std::move(nn));
                    }
                }
            }
            frontier = std::move(next);
        }
        return table;
    }
};

} // namespace detail

// Deterministic rotation synthesizer: exact words for pi/4 multiples, a
// bounded search over <H,T> words otherwise, and a calibrated logarithmic
// cost model for precisions the search cannot reach (counting only).
class RotationSynthesizer {
public:
    virtual ~RotationSynthesizer() = default;

    virtual std::optional<Synthesized> synthesize(const Mat2& target, double eps) const {
        if (auto exact = exact_diagonal(target)) return exact;
        const auto& table = detail::WordTable::instance();
        const Synthesized* ignore = nullptr;
        (void)ignore;
        std::optional<Synthesized> best;
        for (const auto& [m, w] : table.entries) {
            const double d = phase_aligned_distance(target, m);
            if (d > eps) continue;
            if (!best || detail::count_kinds(w).total() < best->counts.total()) {
                Synthesized s;
                s.word = w;
                s.error = d;
                s.counts = detail::count_kinds(w);
                const Mat2 got = detail::word_matrix(w);
                const Mat2 dd = got.adjoint() * target;
                const cd tr = dd(0, 0) + dd(1, 1);
                s.phase = std::abs(tr) > 1e-300 ? std::arg(tr) : 0.0;
                best = std::move(s);
            }
        }
        return best;
    }

    // Documented fallback for counting when the search cannot reach eps:
    // count(eps) = a + b log2(1/eps), split across kinds by calibrated
    // fractions.
    virtual GateCounts count_estimate(double eps) const {
        calibrate();
        const double bits = std::log2(1.0 / eps);
        const double total = std::max(1.0, model_a_ + model_b_ * bits);
        GateCounts c;
        c.t = static_cast<std::int64_t>(std::lround(total * frac_t_));
        c.h = static_cast<std::int64_t>(std::lround(total * frac_h_));
        c.s = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::lround(total)) - c.t - c.h);
        return c;
    }

    double model_a() const { calibrate(); return model_a_; }
    double model_b() const { calibrate(); return model_b_; }

private:
    static std::optional<Synthesized> exact_diagonal(const Mat2& target) {
        // Rz-like rotations whose angle is a multiple of pi/4 have exact words
        if (std::abs(target(0, 1)) > 1e-14 || std::abs(target(1, 0)) > 1e-14) return std::nullopt;
        const double rel = std::arg(target(1, 1) / target(0, 0));
        const double steps = rel / (M_PI / 4);
        const double rounded = std::round(steps);
        if (std::abs(steps - rounded) > 1e-12) return std::nullopt;
        int j = static_cast<int>(rounded) & 7;
        Synthesized s;
        if (j != 0) {
            s.word = detail::t_run_word(j);
            s.counts = detail::count_kinds(s.word);
        }
        const Mat2 got = detail::word_matrix(s.word);
        s.phase = std::arg(target(0, 0) / got(0, 0));
        s.error = 0.0;
        return s;
    }

    void calibrate() const {
        if (calibrated_) return;
        calibrated_ = true;
        // fit the model on angles the bounded search can reach
        const double angles[] = {0.31, 0.83, 1.21, 2.05};
        const double epses[] = {0.2, 0.1, 0.05};
        std::vector<double> xs, ys;
        double th = 0, tt = 0, ts = 0;
        for (double eps : epses) {
            double avg = 0.0;
            int got = 0;
            for (double a : angles) {
                const auto s = synthesize(rz_mat(a), eps);
                if (!s) continue;
                avg += s->counts.total();
                th += s->counts.h;
                tt += s->counts.t;
                ts += s->counts.s;
                ++got;
            }
            if (!got) continue;
            xs.push_back(std::log2(1.0 / eps));
            ys.push_back(avg / got);
        }
        if (xs.size() >= 2) {
            double sx = 0, sy = 0, sxx = 0, sxy = 0;
            for (std::size_t i = 0; i < xs.size(); ++i) {
                sx += xs[i];
                sy += ys[i];
                sxx += xs[i] * xs[i];
                sxy += xs[i] * ys[i];
            }
            const double n = static_cast<double>(xs.size());
            const double b = (n * sxy - sx * sy) / std::max(1e-12, n * sxx - sx * sx);
            model_b_ = std::max(1.0, b);
            model_a_ = std::max(0.0, (sy - model_b_ * sx) / n);
        }
        const double tot = std::max(1.0, th + tt + ts);
        frac_h_ = th / tot;
        frac_t_ = tt / tot;
    }

    mutable bool calibrated_ = false;
    mutable double model_a_ = 8.0;
    mutable double model_b_ = 4.0;
    mutable double frac_h_ = 0.30;
    mutable double frac_t_ = 0.45;
};

inline const RotationSynthesizer& default_synthesizer() {
    static RotationSynthesizer s;
    return s;
}

struct LoweringOptions {
    double epsilon = 1e-10;
    bool counting_only = false;
    const RotationSynthesizer* synthesizer = nullptr;
    std::vector<int> ancilla_pool; // wires known to hold |0> between macro gates
};

struct LoweringResult {
    Circuit circuit; // empty in counting mode
    ResourceReport report;
};

namespace detail {

struct LoweringContext {
    LoweringOptions opt;
    Circuit* out = nullptr; // null in counting mode
    ResourceReport report;
    std::vector<int> free_ancillas; // |0> wires available for chains
    int next_new_wire = 0;

    const RotationSynthesizer& synth() const {
        return opt.synthesizer ? *opt.synthesizer : default_synthesizer();
    }

    void emit(GateKind k, int target, std::vector<Control> ctl, GroupTag g) {
        GateCounts c;
        switch (k) {
            case GateKind::H: c.h = 1; break;
            case GateKind::S:
            case GateKind::Sdg: c.s = 1; break;
            case GateKind::T:
            case GateKind::Tdg: c.t = 1; break;
            case GateKind::X:
                if (ctl.size() == 1 && ctl[0].value) { c.cnot = 1; break; }
                throw std::logic_error("emit: only CNOT may carry a control");
            default: throw std::logic_error("emit: non-fundamental gate");
        }
        report.tally(g, c);
        if (out) out->add(make_gate(k, target, std::move(ctl), 0.0, g));
    }

    void emit_phase(double phi) {
        if (out) out->add_phase(phi);
    }

    int borrow_ancilla() {
        if (!free_ancillas.empty()) {
            const int w = free_ancillas.back();
            free_ancillas.pop_back();
            return w;
        }
        return next_new_wire++;
    }
    void return_ancilla(int w) { free_ancillas.push_back(w); }
};

inline void lower_gate(LoweringContext& ctx, const Gate& g);

// one uncontrolled fundamental-or-rotation target gate
inline void lower_single(LoweringContext& ctx, GateKind k, double param, const Mat2* mat,
                         int target, GroupTag grp) {
    switch (k) {
        case GateKind::H:
        case GateKind::S:
        case GateKind::T:
        case GateKind::Sdg:
        case GateKind::Tdg:
            ctx.emit(k, target, {}, grp);
            return;
        case GateKind::Z:
            ctx.emit(GateKind::S, target, {}, grp);
            ctx.emit(GateKind::S, target, {}, grp);
            return;
        case GateKind::X:
            ctx.emit(GateKind::H, target, {}, grp);
            ctx.emit(GateKind::S, target, {}, grp);
            ctx.emit(GateKind::S, target, {}, grp);
            ctx.emit(GateKind::H, target, {}, grp);
            return;
        case GateKind::Y: // Y = S X Sdg, exact
            ctx.emit(GateKind::Sdg, target, {}, grp);
            ctx.emit(GateKind::H, target, {}, grp);
            ctx.emit(GateKind::S, target, {}, grp);
            ctx.emit(GateKind::S, target, {}, grp);
            ctx.emit(GateKind::H, target, {}, grp);
            ctx.emit(GateKind::S, target, {}, grp);
            return;
        default: break;
    }

    // rotations and generic 2x2: synthesize (Rx/Ry via exact Clifford
    // conjugation into Rz, generic via ZYZ)
    Mat2 m;
    if (k == GateKind::U2) {
        m = *mat;
    } else {
        Gate tmp;
        tmp.kind = k;
        tmp.param = param;
        tmp.t0 = 0;
        m = gate_matrix_1q(tmp);
    }
    if (k == GateKind::Rx) {
        ctx.emit(GateKind::H, target, {}, grp);
        lower_single(ctx, GateKind::Rz, param, nullptr, target, grp);
        ctx.emit(GateKind::H, target, {}, grp);
        return;
    }
    if (k == GateKind::Ry) { // Ry = S H Rz H Sdg
        ctx.emit(GateKind::Sdg, target, {}, grp);
        ctx.emit(GateKind::H, target, {}, grp);
        lower_single(ctx, GateKind::Rz, param, nullptr, target, grp);
        ctx.emit(GateKind::H, target, {}, grp);
        ctx.emit(GateKind::S, target, {}, grp);
        return;
    }
    if (k == GateKind::U2) {
        const ZyzAngles z = zyz_decompose(m);
        lower_single(ctx, GateKind::Rz, z.xi, nullptr, target, grp);
        lower_single(ctx, GateKind::Ry, z.theta, nullptr, target, grp);
        lower_single(ctx, GateKind::Rz, z.delta, nullptr, target, grp);
        ctx.emit_phase(z.phase);
        return;
    }

    // Rz / Phase
    double rz_angle = param;
    double extra_phase = 0.0;
    if (k == GateKind::Phase) {
        rz_angle = param;
        extra_phase = param / 2.0;
    }
    const Mat2 target_m = rz_mat(rz_angle);
    ++ctx.report.synthesized_rotations;
    const auto s = ctx.synth().synthesize(target_m, ctx.opt.epsilon);
    if (s) {
        for (GateKind wk : s->word) ctx.emit(wk, target, {}, grp);
        ctx.emit_phase(s->phase + extra_phase);
        return;
    }
    if (!ctx.opt.counting_only)
        throw std::runtime_error(
            "lowering: bounded synthesis cannot reach epsilon; use counting mode or a coarser epsilon");
    ctx.report.tally(grp, ctx.synth().count_estimate(ctx.opt.epsilon));
}

// controlled-U via the ABC decomposition (exact up to synthesized rotations)
inline void lower_controlled_u(LoweringContext& ctx, const Mat2& u, int target, Control ctl,
                               GroupTag grp) {
    const ZyzAngles z = zyz_decompose(u);
    std::vector<Control> cv{ctl};
    if (!ctl.value) {
        lower_single(ctx, GateKind::X, 0, nullptr, ctl.wire, grp);
        cv[0].value = true;
    }
    // C
    lower_single(ctx, GateKind::Rz, (z.xi - z.delta) / 2.0, nullptr, target, grp);
    ctx.emit(GateKind::X, target, cv, grp);
    // B
    lower_single(ctx, GateKind::Rz, -(z.delta + z.xi) / 2.0, nullptr, target, grp);
    lower_single(ctx, GateKind::Ry, -z.theta / 2.0, nullptr, target, grp);
    ctx.emit(GateKind::X, target, cv, grp);
    // A
    lower_single(ctx, GateKind::Ry, z.theta / 2.0, nullptr, target, grp);
    lower_single(ctx, GateKind::Rz, z.delta, nullptr, target, grp);
    // block phase on the control wire
    if (z.phase != 0.0) lower_single(ctx, GateKind::Phase, z.phase, nullptr, cv[0].wire, grp);
    if (!ctl.value) lower_single(ctx, GateKind::X, 0, nullptr, ctl.wire, grp);
}

inline void lower_toffoli(LoweringContext& ctx, int target, Control c0, Control c1, GroupTag grp) {
    for (const Control& c : {c0, c1})
        if (!c.value) lower_single(ctx, GateKind::X, 0, nullptr, c.wire, grp);
    const std::vector<Control> k0{{c0.wire, true}};
    const std::vector<Control> k1{{c1.wire, true}};
    ctx.emit(GateKind::H, target, {}, grp);
    ctx.emit(GateKind::X, target, k1, grp);
    ctx.emit(GateKind::Tdg, target, {}, grp);
    ctx.emit(GateKind::X, target, k0, grp);
    ctx.emit(GateKind::T, target, {}, grp);
    ctx.emit(GateKind::X, target, k1, grp);
    ctx.emit(GateKind::Tdg, target, {}, grp);
    ctx.emit(GateKind::X, target, k0, grp);
    ctx.emit(GateKind::T, c1.wire, {}, grp);
    ctx.emit(GateKind::T, target, {}, grp);
    ctx.emit(GateKind::H, target, {}, grp);
    ctx.emit(GateKind::X, c1.wire, k0, grp);
    ctx.emit(GateKind::T, c0.wire, {}, grp);
    ctx.emit(GateKind::Tdg, c1.wire, {}, grp);
    ctx.emit(GateKind::X, c1.wire, k0, grp);
    for (const Control& c : {c0, c1})
        if (!c.value) lower_single(ctx, GateKind::X, 0, nullptr, c.wire, grp);
}

// multi-controlled X via the ancilla v-chain
inline void lower_mcx(LoweringContext& ctx, const Gate& g) {
    const int k = static_cast<int>(g.controls.size());
    if (k == 0) {
        lower_single(ctx, GateKind::X, 0, nullptr, g.t0, g.group);
        return;
    }
    if (k == 1) {
        if (g.controls[0].value) {
            ctx.emit(GateKind::X, g.t0, g.controls, g.group);
        } else {
            lower_single(ctx, GateKind::X, 0, nullptr, g.t0, g.group);
            ctx.emit(GateKind::X, g.t0, {{g.controls[0].wire, true}}, g.group);
        }
        return;
    }
    if (k == 2) {
        lower_toffoli(ctx, g.t0, g.controls[0], g.controls[1], g.group);
        return;
    }
    std::vector<int> chain;
    for (int i = 0; i < k - 2; ++i) chain.push_back(ctx.borrow_ancilla());
    std::vector<Gate> tof = expand_mcx(g.controls, g.t0, chain, g.group);
    for (const Gate& tg : tof) lower_gate(ctx, tg);
    for (int w : chain) ctx.return_ancilla(w);
}

inline void lower_gate(LoweringContext& ctx, const Gate& g) {
    if (g.kind == GateKind::U4)
        throw std::invalid_argument("lowering: generic two-qubit gates are not supported");
    const int k = static_cast<int>(g.controls.size());

    if (g.kind == GateKind::X && k >= 1) {
        lower_mcx(ctx, g);
        return;
    }
    if (k == 0) {
        const Mat2 m = (g.kind == GateKind::U2) ? gate_matrix_1q(g) : Mat2{};
        lower_single(ctx, g.kind, g.param, &m, g.t0, g.group);
        return;
    }
    if (k == 1 && g.kind == GateKind::Z && g.controls[0].value) { // CZ = H CX H
        ctx.emit(GateKind::H, g.t0, {}, g.group);
        ctx.emit(GateKind::X, g.t0, g.controls, g.group);
        ctx.emit(GateKind::H, g.t0, {}, g.group);
        return;
    }
    if (k == 1) {
        lower_controlled_u(ctx, gate_matrix_1q(g), g.t0, g.controls[0], g.group);
        return;
    }
    // k >= 2 controls on a non-X gate: AND the controls into one clean wire
    std::vector<int> chain;
    for (int i = 0; i < k - 1; ++i) chain.push_back(ctx.borrow_ancilla());
    std::vector<Gate> compute;
    compute.push_back(make_gate(GateKind::X, chain[0], {g.controls[0], g.controls[1]}, 0.0, g.group));
    for (int i = 2; i < k; ++i)
        compute.push_back(make_gate(GateKind::X, chain[i - 1],
                                    {g.controls[i], Control{chain[i - 2], true}}, 0.0, g.group));
    for (const Gate& cg : compute) lower_gate(ctx, cg);
    lower_controlled_u(ctx, gate_matrix_1q(g), g.t0, {chain[k - 2], true}, g.group);
    for (auto it = compute.rbegin(); it != compute.rend(); ++it) lower_gate(ctx, *it);
    for (int w : chain) ctx.return_ancilla(w);
}

} // namespace detail

// Lower a circuit onto {H, S, T, CNOT} (adjoint phases allowed at unit cost).
// Parameterized rotations are synthesized to within epsilon each; Clifford
// structure is mapped exactly. In counting mode unreachable precisions fall
// back to the calibrated count model and no circuit is materialized.
inline LoweringResult lower_to_fundamental(const Circuit& circuit, const LoweringOptions& opt) {
    if (!(opt.epsilon > 0.0) || opt.epsilon > 0.1)
        throw std::invalid_argument("lowering: epsilon must be in (0, 0.1]");
    detail::LoweringContext ctx;
    ctx.opt = opt;
    Circuit lowered(circuit.n_wires, circuit.label + "-fundamental");
    if (!opt.counting_only) ctx.out = &lowered;
    ctx.free_ancillas = opt.ancilla_pool;
    ctx.next_new_wire = circuit.n_wires;
    ctx.report.epsilon = opt.epsilon;
    if (!opt.counting_only) lowered.global_phase = circuit.global_phase;

    for (const Gate& g : circuit.gates) detail::lower_gate(ctx, g);

    ctx.report.width = ctx.next_new_wire;
    LoweringResult res;
    res.report = ctx.report;
    if (!opt.counting_only) {
        lowered.n_wires = ctx.next_new_wire;
        res.circuit = std::move(lowered);
    } else {
        res.circuit.n_wires = ctx.next_new_wire;
    }
    return res;
}

inline std::vector<int> ancilla_pool_of(const RegisterLayout& lay) {
    std::vector<int> pool;
    for (int i = 0; i < lay.n_anc; ++i) pool.push_back(lay.ancilla(i));
    return pool;
}

inline ResourceReport count_resources(const Circuit& circuit, double epsilon,
                                      std::vector<int> ancilla_pool = {},
                                      const RotationSynthesizer* synth = nullptr) {
    LoweringOptions opt;
    opt.epsilon = epsilon;
    opt.counting_only = true;
    opt.synthesizer = synth;
    opt.ancilla_pool = std::move(ancilla_pool);
    return lower_to_fundamental(circuit, opt).report;
}

// --- scaling study -------------------------------------------------------------

struct ScalingRow {
    int n = 0;
    ResourceReport report;
};

struct ScalingStudyOptions {
    int n_lo = 2;
    int n_hi = 100;
    double epsilon = 1e-10;
    int order = 2;
    int dims = 3;        // symmetric n per axis for dims = 3; single axis otherwise
    bool reduced = false; // 1-D spinor-compressed register
    double mass = 1.0;
    Vec3 vector_potential{0.3, 0.2, 0.1}; // homogeneous; V = 0 throughout
};

// Fundamental-gate counts of one time step as a function of the per-axis
// qubit count. Counting-only: no state is ever materialized.
inline std::vector<ScalingRow> scaling_study(const ScalingStudyOptions& opt) {
    std::vector<ScalingRow> rows;
    const SplittingScheme scheme = opt.order == 3 ? scheme_third_order() : scheme_second_order();
    for (int n = opt.n_lo; n <= opt.n_hi; ++n) {
        const int nx = opt.dims >= 1 ? n : 0;
        const int ny = opt.dims >= 2 ? n : 0;
        const int nz = opt.dims >= 3 ? n : 0;
        // order 3 streams half cells; N* = 2 keeps every shift an integer site
        const double n_star = opt.order == 3 ? 2.0 : 1.0;
        LatticeSpec spec = opt.dims == 1 ? make_lattice(0, 0, n, 1.0, n_star)
                                         : make_lattice(nx, ny, nz, 1.0, n_star);
        Potentials pot = Potentials::free_particle(opt.mass);
        const Vec3 a = opt.vector_potential;
        if (a[0] != 0.0 || a[1] != 0.0 || a[2] != 0.0) {
            Vec3 av = a;
            if (opt.reduced) av = {0.0, 0.0, a[2]}; // reduced register: axis component only
            pot.vector_potential = [av](double) { return av; };
        }
        const RegisterLayout lay = make_layout(spec, opt.reduced, Axis::Z);
        const Circuit step = build_time_step(lay, scheme, pot, 0.0);
        ScalingRow row;
        row.n = n;
        row.report = count_resources(step, opt.epsilon, ancilla_pool_of(lay));
        row.report.width = std::max<std::int64_t>(row.report.width, lay.n_total);
        rows.push_back(std::move(row));
    }
    return rows;
}

struct QuadraticFit {
    double c2 = 0.0, c1 = 0.0, c0 = 0.0;
    double r_squared = 0.0;
    double loglog_slope = 0.0;
};

inline QuadraticFit fit_quadratic(const std::vector<ScalingRow>& rows, int n_lo, int n_hi) {
    std::vector<double> xs, ys;
    for (const auto& r : rows)
        if (r.n >= n_lo && r.n <= n_hi) {
            xs.push_back(r.n);
            ys.push_back(static_cast<double>(r.report.counts.total()));
        }
    if (xs.size() < 3) throw std::invalid_argument("fit_quadratic: need at least 3 rows in range");
    // normal equations for y = c2 x^2 + c1 x + c0
    double s[5] = {0, 0, 0, 0, 0}, b[3] = {0, 0, 0};
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double p = 1.0;
        for (int d = 0; d <= 4; ++d) {
            s[d] += p;
            p *= xs[i];
        }
        b[0] += ys[i];
        b[1] += ys[i] * xs[i];
        b[2] += ys[i] * xs[i] * xs[i];
    }
    double m[3][4] = {{s[0], s[1], s[2], b[0]}, {s[1], s[2], s[3], b[1]}, {s[2], s[3], s[4], b[2]}};
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
        std::swap(m[piv], m[col]);
        for (int r = 0; r < 3; ++r) {
            if (r == col) continue;
            const double f = m[r][col] / m[col][col];
            for (int cc = col; cc < 4; ++cc) m[r][cc] -= f * m[col][cc];
        }
    }
    QuadraticFit fit;
    fit.c0 = m[0][3] / m[0][0];
    fit.c1 = m[1][3] / m[1][1];
    fit.c2 = m[2][3] / m[2][2];
    double ss_res = 0.0, ss_tot = 0.0, mean = 0.0;
    for (double y : ys) mean += y;
    mean /= ys.size();
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double pred = fit.c2 * xs[i] * xs[i] + fit.c1 * xs[i] + fit.c0;
        ss_res += (ys[i] - pred) * (ys[i] - pred);
        ss_tot += (ys[i] - mean) * (ys[i] - mean);
    }
    fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    // log-log slope
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double lx = std::log(xs[i]), ly = std::log(ys[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double n = static_cast<double>(xs.size());
    fit.loglog_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return fit;
}

} // namespace dqw
