#include <catch2/catch_amalgamated.hpp>

#include "dqw/splitting.hpp"

using namespace dqw;

TEST_CASE("second-order scheme is the six-factor product") {
    const SplittingScheme s = scheme_second_order();
    REQUIRE(s.steps.size() == 6);
    CHECK(s.order == 2);
    const OpTag expect[] = {OpTag::X, OpTag::Y, OpTag::Z, OpTag::M, OpTag::V, OpTag::A};
    for (int i = 0; i < 6; ++i) {
        CHECK(s.steps[i].tag == expect[i]);
        CHECK(s.steps[i].coeff == Rational(1));
        CHECK(s.steps[i].time_offset == Rational(0));
    }
    for (const auto& [tag, sum] : s.coefficient_sums()) CHECK(sum == Rational(1));
}

TEST_CASE("third-order scheme is the half-step palindrome") {
    const SplittingScheme s = scheme_third_order();
    REQUIRE(s.steps.size() == 11);
    CHECK(s.order == 3);
    CHECK(s.is_palindrome());
    CHECK(s.steps[5].tag == OpTag::A);
    CHECK(s.steps[5].coeff == Rational(1));
    for (const auto& [tag, sum] : s.coefficient_sums()) CHECK(sum == Rational(1));
    for (const auto& st : s.steps) CHECK(st.time_offset == Rational(1, 2));
    // reversing the operator list reproduces it
    auto ops = s.operator_steps();
    auto rev = ops;
    std::reverse(rev.begin(), rev.end());
    for (std::size_t i = 0; i < ops.size(); ++i) {
        CHECK(ops[i].tag == rev[i].tag);
        CHECK(ops[i].coeff == rev[i].coeff);
    }
}

TEST_CASE("suzuki composition of the table's r=7 coefficients") {
    const SplittingScheme base = scheme_second_order();
    const std::vector<Rational> p{{1, 6}, {1, 6}, {1, 6}, {1, 3}, {1, 3}, {1, 3}, {-1, 2}};
    const SplittingScheme composed = suzuki_compose(base, p);
    CHECK(composed.steps.size() == 42);
    CHECK(composed.order == 3);
    for (const auto& [tag, sum] : composed.coefficient_sums()) CHECK(sum == Rational(1));
    // block clocks accumulate the partial sums of p
    CHECK(composed.steps[0].time_offset == Rational(0));
    CHECK(composed.steps[6].time_offset == Rational(1, 6));
    CHECK(composed.steps[12].time_offset == Rational(1, 3));
}

TEST_CASE("suzuki composition rejects invalid coefficient lists") {
    const SplittingScheme base = scheme_second_order();
    CHECK_THROWS_AS(suzuki_compose(base, {Rational(1)}), std::invalid_argument);
    CHECK_THROWS_AS(suzuki_compose(base, {Rational(1, 2), Rational(1, 2)}), std::invalid_argument);
    CHECK_THROWS_AS(suzuki_compose(base, {}), std::invalid_argument);
    CHECK_THROWS_AS(
        suzuki_compose(base, {Rational(1, 2), Rational(0), Rational(1, 2)}),
        std::invalid_argument);
}

TEST_CASE("search finds the complete m=3 solution set, a superset of the published table") {
    SearchOptions opt;
    opt.m = 3;
    opt.r_min = 1;
    opt.r_max = 9;
    opt.p_max = 12;
    const auto sols = search_rational_splittings(opt);
    // the six published rows plus the two valid null-pair extensions of the
    // r=7 solution that the published table omits
    REQUIRE(sols.size() == 8);
    const std::vector<std::vector<std::int64_t>> table = {
        {6, 6, 6, 3, 3, 3, -2},
        {6, 4, 4, 4, 3, 3, -2, -12},
        {6, 6, 6, 6, 6, 6, 6, 6, -3},
        {6, 6, 6, 3, 3, 3, 2, -2, -2},
        {6, 6, 6, 3, 3, 3, 3, -2, -3},
        {12, 6, 6, 6, 3, 3, 3, -2, -12},
    };
    const std::vector<std::vector<std::int64_t>> extras = {
        {6, 6, 6, 3, 3, 3, 1, -1, -2},
        {6, 6, 6, 6, 3, 3, 3, -2, -6},
    };
    for (const auto& e : table) {
        bool found = false;
        for (const auto& s : sols) found = found || s.p_tilde == e;
        CHECK(found);
    }
    for (const auto& e : extras) {
        bool found = false;
        for (const auto& s : sols) found = found || (s.p_tilde == e && s.null_pair_padding);
        CHECK(found);
    }
    for (const auto& s : sols) CHECK((s.r == 7 || s.r == 8 || s.r == 9));
    // the irreducible rows are exactly r7, r8 and the all-sixes r9 row
    int irreducible = 0;
    for (const auto& s : sols)
        if (!s.null_pair_padding) ++irreducible;
    CHECK(irreducible == 3);
}

TEST_CASE("search finds nothing below r = 7") {
    SearchOptions opt;
    opt.m = 3;
    opt.r_min = 1;
    opt.r_max = 6;
    opt.p_max = 12;
    CHECK(search_rational_splittings(opt).empty());
}

TEST_CASE("every emitted solution passes the exact rational verification") {
    SearchOptions opt;
    opt.m = 3;
    opt.r_min = 7;
    opt.r_max = 9;
    opt.p_max = 12;
    for (const auto& s : search_rational_splittings(opt)) {
        Rational s1(0), s3(0);
        std::int64_t max_abs = 0;
        for (auto v : s.p_tilde) {
            s1 += Rational(1, v);
            s3 += Rational(1, v).pow(3);
            max_abs = std::max(max_abs, std::abs(v));
        }
        CHECK(s1 == Rational(1));
        CHECK(s3 == Rational(0));
        for (auto v : s.p_tilde) CHECK(max_abs % std::abs(v) == 0);
        // canonical ordering: positives descending, then negatives descending
        bool seen_negative = false;
        for (std::size_t i = 0; i + 1 < s.p_tilde.size(); ++i) {
            if (s.p_tilde[i] < 0) seen_negative = true;
            if (seen_negative) CHECK(s.p_tilde[i + 1] < 0);
            if ((s.p_tilde[i] > 0) == (s.p_tilde[i + 1] > 0))
                CHECK(s.p_tilde[i] >= s.p_tilde[i + 1]);
        }
    }
}

TEST_CASE("composed schemes stream in exact multiples of the finest substep") {
    SearchOptions opt;
    opt.m = 3;
    opt.r_min = 7;
    opt.r_max = 7;
    opt.p_max = 12;
    const auto sols = search_rational_splittings(opt);
    REQUIRE(sols.size() == 1);
    const SplittingScheme f3 = suzuki_compose(scheme_second_order(), sols[0].coefficients());
    Rational finest(1);
    for (const auto& st : f3.steps)
        if (st.coeff.den() > finest.den()) finest = Rational(1, st.coeff.den());
    for (const auto& st : f3.steps) CHECK((st.coeff / finest).is_integer());
}

TEST_CASE("search input validation") {
    SearchOptions opt;
    opt.m = 5;
    CHECK_THROWS_AS(search_rational_splittings(opt), std::invalid_argument);
    opt.m = 3;
    opt.r_min = 3;
    opt.r_max = 2;
    CHECK_THROWS_AS(search_rational_splittings(opt), std::invalid_argument);
}
