#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "rational.hpp"

namespace dqw {

// One-step split-operator factors: streaming along an axis (X/Y/Z), the mass
// phase (M), the scalar-potential phase (V), the vector-potential rotation (A),
// and the bookkeeping shift of the evaluation time (TimeShift).
enum class OpTag { X, Y, Z, M, V, A, TimeShift };

inline const char* op_tag_name(OpTag t) {
    switch (t) {
        case OpTag::X: return "X";
        case OpTag::Y: return "Y";
        case OpTag::Z: return "Z";
        case OpTag::M: return "M";
        case OpTag::V: return "V";
        case OpTag::A: return "A";
        case OpTag::TimeShift: return "TimeShift";
    }
    return "?";
}

struct SplitStep {
    OpTag tag;
    Rational coeff;       // fraction of dt this factor advances
    Rational time_offset; // evaluation time of t-dependent factors, in units of dt

    bool operator==(const SplitStep& o) const {
        return tag == o.tag && coeff == o.coeff && time_offset == o.time_offset;
    }
};

// Ordered product of exponential factors; steps[0] is applied first.
struct SplittingScheme {
    std::vector<SplitStep> steps;
    int order = 0; // local accuracy exponent q

    std::map<OpTag, Rational> coefficient_sums() const {
        std::map<OpTag, Rational> sums;
        for (const auto& s : steps) {
            auto [it, inserted] = sums.emplace(s.tag, s.coeff);
            if (!inserted) it->second += s.coeff;
        }
        return sums;
    }

    std::vector<SplitStep> operator_steps() const {
        std::vector<SplitStep> out;
        for (const auto& s : steps)
            if (s.tag != OpTag::TimeShift) out.push_back(s);
        return out;
    }

    bool is_palindrome() const {
        const auto ops = operator_steps();
        const std::size_t n = ops.size();
        for (std::size_t i = 0; i < n / 2; ++i)
            if (!(ops[i].tag == ops[n - 1 - i].tag && ops[i].coeff == ops[n - 1 - i].coeff))
                return false;
        return true;
    }
};

// Q_A Q_V Q_m Q_z Q_y Q_x applied to the state: streaming first, local phases
// last, everything evaluated at t_n.
inline SplittingScheme scheme_second_order() {
    SplittingScheme s;
    s.order = 2;
    const Rational one(1), zero(0);
    for (OpTag t : {OpTag::X, OpTag::Y, OpTag::Z, OpTag::M, OpTag::V, OpTag::A})
        s.steps.push_back({t, one, zero});
    return s;
}

// Symmetric half-step palindrome around a full A step; time-dependent factors
// evaluate at t_n + dt/2.
inline SplittingScheme scheme_third_order() {
    SplittingScheme s;
    s.order = 3;
    const Rational half(1, 2);
    for (OpTag t : {OpTag::X, OpTag::Y, OpTag::Z, OpTag::M, OpTag::V})
        s.steps.push_back({t, half, half});
    s.steps.push_back({OpTag::A, Rational(1), half});
    for (OpTag t : {OpTag::V, OpTag::M, OpTag::Z, OpTag::Y, OpTag::X})
        s.steps.push_back({t, half, half});
    return s;
}

// F_m(dt) = F_{m-1}(p_1 dt) ... F_{m-1}(p_r dt); `p` is given in application
// order. Requires sum p = 1 and sum p^m = 0 exactly; m = 0 infers the
// smallest exponent >= 2 the family cancels.
inline SplittingScheme suzuki_compose(const SplittingScheme& base, const std::vector<Rational>& p,
                                      int m = 0) {
    if (p.empty()) throw std::invalid_argument("suzuki_compose: empty coefficient list");
    Rational sum(0);
    for (const auto& pi : p) {
        if (pi.is_zero()) throw std::invalid_argument("suzuki_compose: zero coefficient");
        sum += pi;
    }
    if (sum != Rational(1))
        throw std::invalid_argument("suzuki_compose: coefficients must sum to 1");
    auto power_sum_zero = [&](int e) {
        Rational s(0);
        for (const auto& pi : p) s += pi.pow(e);
        return s.is_zero();
    };
    if (m == 0) {
        for (int e = 2; e <= 6 && m == 0; ++e)
            if (power_sum_zero(e)) m = e;
        if (m == 0)
            throw std::invalid_argument("suzuki_compose: no order condition sum p^m = 0 holds");
    } else if (!power_sum_zero(m)) {
        throw std::invalid_argument("suzuki_compose: order condition sum p^m = 0 violated");
    }

    SplittingScheme out;
    out.order = base.order + 1;
    Rational clock(0);
    for (const auto& pi : p) {
        for (const auto& st : base.steps) {
            SplitStep ns = st;
            ns.coeff = st.coeff * pi;
            ns.time_offset = clock + st.time_offset * pi;
            out.steps.push_back(ns);
        }
        clock += pi;
    }
    return out;
}

// A solution of the reciprocal-integer Suzuki conditions.
struct RationalSolution {
    int r = 0;
    std::vector<std::int64_t> p_tilde; // canonical: positives desc, then negatives desc
    // true when this is a smaller valid solution plus a cancelling (v, -v)
    // pair; such extensions exist for every solution and are flagged so a
    // consumer can tell the irreducible rows apart
    bool null_pair_padding = false;

    std::vector<Rational> coefficients() const {
        std::vector<Rational> p;
        p.reserve(p_tilde.size());
        for (auto v : p_tilde) p.emplace_back(1, v);
        return p;
    }

    std::string csv_row() const {
        std::string s;
        for (std::size_t i = 0; i < p_tilde.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(p_tilde[i]);
        }
        return s;
    }
};

inline bool verify_suzuki_conditions(const std::vector<std::int64_t>& p_tilde, int m) {
    Rational s1(0), sm(0);
    std::int64_t max_abs = 0;
    for (auto v : p_tilde) {
        if (v == 0) return false;
        s1 += Rational(1, v);
        sm += Rational(1, v).pow(m);
        max_abs = std::max(max_abs, std::abs(v));
    }
    if (s1 != Rational(1) || !sm.is_zero()) return false;
    for (auto v : p_tilde)
        if (max_abs % std::abs(v) != 0) return false; // every p a multiple of the smallest
    return true;
}

struct SearchOptions {
    int m = 3;
    int r_min = 1;
    int r_max = 9;
    std::int64_t p_max = 12;
};

namespace detail {

inline bool is_null_pair_padding(const std::vector<std::int64_t>& sol, int m) {
    std::vector<std::int64_t> sorted = sol;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const std::int64_t v = sorted[i];
        if (v >= 0) break;
        if (i > 0 && sorted[i] == sorted[i - 1]) continue;
        if (!std::binary_search(sorted.begin(), sorted.end(), -v)) continue;
        std::vector<std::int64_t> reduced = sorted;
        reduced.erase(std::find(reduced.begin(), reduced.end(), -v));
        reduced.erase(std::find(reduced.begin(), reduced.end(), v));
        if (!reduced.empty() && verify_suzuki_conditions(reduced, m)) return true;
    }
    return false;
}

inline std::vector<std::int64_t> canonical_order(std::vector<std::int64_t> v) {
    std::vector<std::int64_t> pos, neg;
    for (auto x : v) (x > 0 ? pos : neg).push_back(x);
    std::sort(pos.rbegin(), pos.rend());
    std::sort(neg.rbegin(), neg.rend());
    pos.insert(pos.end(), neg.begin(), neg.end());
    return pos;
}

} // namespace detail

// Exhaustive search over integer reciprocals |p~| <= p_max for multisets
// satisfying sum 1/p~ = 1, sum (1/p~)^m = 0, and the divisibility requirement.
// Enumeration is exact: sums are tracked as integers scaled by lcm(1..p_max).
inline std::vector<RationalSolution> search_rational_splittings(const SearchOptions& opt) {
    if (opt.m < 2 || opt.m > 4) throw std::invalid_argument("search: m must be in [2,4]");
    if (opt.p_max < 1) throw std::invalid_argument("search: p_max must be >= 1");
    if (opt.r_min < 1 || opt.r_max < opt.r_min)
        throw std::invalid_argument("search: bad r range");

    std::int64_t lcm = 1;
    for (std::int64_t v = 2; v <= opt.p_max; ++v) lcm = std::lcm(lcm, v);
    // w^m must fit __int128 with room for r-fold sums
    long double bound = 1.0L;
    for (int i = 0; i < opt.m; ++i) bound *= static_cast<long double>(lcm);
    if (bound * (opt.r_max + 1) > 1.0e37L)
        throw std::invalid_argument("search: p_max too large for exact integer arithmetic");

    // candidate values ordered by decreasing w = lcm/p so partial sums prune
    std::vector<std::int64_t> values;
    for (std::int64_t v = 1; v <= opt.p_max; ++v) values.push_back(v);
    for (std::int64_t v = -opt.p_max; v <= -1; ++v) values.push_back(v);
    std::sort(values.begin(), values.end(),
              [&](std::int64_t a, std::int64_t b) { return lcm / a > lcm / b; });
    std::vector<__int128> w, wm;
    for (auto v : values) {
        const __int128 wi = lcm / v;
        w.push_back(wi);
        __int128 p = 1;
        for (int i = 0; i < opt.m; ++i) p *= wi;
        wm.push_back(p);
    }
    const __int128 target = lcm;
    const __int128 w_min = w.back();

    std::vector<RationalSolution> out;
    std::vector<std::int64_t> current;
    for (int r = opt.r_min; r <= opt.r_max; ++r) {
        auto rec = [&](auto&& self, std::size_t start, int depth, __int128 s1, __int128 sm) -> void {
            if (depth == r) {
                if (s1 != target || sm != 0) return;
                std::int64_t max_abs = 0;
                for (auto v : current) max_abs = std::max(max_abs, std::abs(v));
                for (auto v : current)
                    if (max_abs % std::abs(v) != 0) return;
                RationalSolution sol;
                sol.r = r;
                sol.p_tilde = detail::canonical_order(current);
                sol.null_pair_padding = detail::is_null_pair_padding(current, opt.m);
                out.push_back(std::move(sol));
                return;
            }
            const int remaining = r - depth;
            for (std::size_t i = start; i < values.size(); ++i) {
                if (s1 + remaining * w[i] < target) break;                       // values only get smaller
                if (s1 + w[i] + (remaining - 1) * w_min > target) continue;      // cannot come back down
                current.push_back(values[i]);
                self(self, i, depth + 1, s1 + w[i], sm + wm[i]);
                current.pop_back();
            }
        };
        rec(rec, 0, 0, 0, 0);
    }

    // independent exact verification of everything emitted
    for (const auto& sol : out)
        if (!verify_suzuki_conditions(sol.p_tilde, opt.m))
            throw std::logic_error("search: emitted solution failed rational verification");
    return out;
}

} // namespace dqw
