#include <catch2/catch_amalgamated.hpp>

#include "gietlab/permutation.hpp"
#include "gietlab/rauzy.hpp"

using namespace gietlab;

namespace {

std::vector<Permutation> all_irreducible(int d) {
    std::vector<int> v(d);
    for (int i = 0; i < d; ++i) v[i] = i + 1;
    std::vector<Permutation> out;
    do {
        Permutation p(v);
        if (p.irreducible()) out.push_back(p);
    } while (std::next_permutation(v.begin(), v.end()));
    return out;
}

}  // namespace

TEST_CASE("permutation validation") {
    CHECK_THROWS_AS(Permutation({1}), InvalidInputError);
    CHECK_THROWS_AS(Permutation({1, 1}), InvalidInputError);
    CHECK_THROWS_AS(Permutation({0, 1}), InvalidInputError);
    CHECK(Permutation({2, 1}).irreducible());
    CHECK_FALSE(Permutation({1, 2}).irreducible());
    CHECK_FALSE(Permutation({2, 1, 3}).irreducible());
    CHECK(Permutation({3, 1, 2}).irreducible());
}

TEST_CASE("elementary steps on two intervals") {
    const Permutation pi({2, 1});

    auto [pt, et] = rauzy_step(pi, StepKind::Top);
    CHECK(pt == pi);
    CHECK(et(0, 0) == 1);
    CHECK(et(0, 1) == 1);
    CHECK(et(1, 0) == 0);
    CHECK(et(1, 1) == 1);

    auto [pb, eb] = rauzy_step(pi, StepKind::Bottom);
    CHECK(pb == pi);
    CHECK(eb(0, 0) == 1);
    CHECK(eb(0, 1) == 0);
    CHECK(eb(1, 0) == 1);
    CHECK(eb(1, 1) == 1);

    // Composing the two elementary matrices gives the trace-3 unimodular
    // matrix of the length-2 loop.
    const IntMatrix a = eb * et;
    CHECK(a(0, 0) + a(1, 1) == 3);
    CHECK(a.determinant() == 1);

    CHECK_THROWS_AS(rauzy_step(Permutation({1, 2, 3}), StepKind::Top), ReducibleError);
}

TEST_CASE("empty step word is the identity") {
    const Permutation pi({3, 2, 1});
    Permutation cur = pi;
    IntMatrix m = IntMatrix::identity(3);
    CHECK(cur == pi);
    CHECK(m == IntMatrix::identity(3));
}

TEST_CASE("loop enumeration on two intervals") {
    const Permutation pi({2, 1});

    const auto len1 = enumerate_loops(pi, 1);
    // Both elementary steps fix (21), so the two singleton loops exist.
    REQUIRE(len1.size() == 2);
    CHECK(len1[0].word() == "t");
    CHECK(len1[1].word() == "b");

    const auto len2 = enumerate_loops(pi, 2);
    REQUIRE(len2.size() == 6);
    bool found_tb = false;
    for (const auto& l : len2) {
        CHECK(std::abs(l.matrix.determinant()) == 1);
        if (l.word() == "tb") {
            found_tb = true;
            CHECK(l.matrix(0, 0) + l.matrix(1, 1) == 3);
            CHECK(l.matrix.determinant() == 1);
        }
    }
    CHECK(found_tb);
}

TEST_CASE("loop matrix equals ordered product of step matrices") {
    const Permutation pi({4, 3, 2, 1});
    for (const auto& loop : enumerate_loops(pi, 5)) {
        Permutation cur = pi;
        IntMatrix m = IntMatrix::identity(4);
        for (auto k : loop.steps) {
            auto [np, e] = rauzy_step(cur, k);
            cur = np;
            m = e * m;
        }
        CHECK(cur == pi);
        CHECK(m == loop.matrix);
        CHECK(std::abs(loop.matrix.determinant()) == 1);
    }
}

TEST_CASE("loop concatenation is associative and multiplicative") {
    const Permutation pi({2, 1});
    const auto a = make_loop(pi, "tb");
    const auto b = make_loop(pi, "bt");
    const auto c = make_loop(pi, "ttb");

    const auto ab = concat(a, b);
    CHECK(ab.matrix == b.matrix * a.matrix);
    CHECK(concat(concat(a, b), c).matrix == concat(a, concat(b, c)).matrix);
    CHECK(concat(concat(a, b), c).word() == "tbbtttb");
}

TEST_CASE("genus and marked points") {
    const auto g2 = genus_and_marked_points(Permutation({2, 1}));
    CHECK(g2.genus == 1);
    CHECK(g2.marked_points == 1);

    const auto g3 = genus_and_marked_points(Permutation({3, 2, 1}));
    CHECK(g3.genus == 1);
    CHECK(g3.marked_points == 2);

    const auto g4 = genus_and_marked_points(Permutation({4, 3, 2, 1}));
    CHECK(g4.genus == 2);
    CHECK(g4.marked_points == 1);

    CHECK_THROWS_AS(genus_and_marked_points(Permutation({1, 2})), ReducibleError);
}

TEST_CASE("d = 2g + s - 1 for every irreducible permutation with d <= 6") {
    for (int d = 2; d <= 6; ++d) {
        for (const auto& p : all_irreducible(d)) {
            const auto sd = genus_and_marked_points(p);
            CHECK(d == 2 * sd.genus + sd.marked_points - 1);
            CHECK(sd.marked_points >= 1);
            CHECK(sd.genus >= 0);
        }
    }
}

TEST_CASE("admissibility reports") {
    const Permutation pi({2, 1});

    const auto tb = make_loop(pi, "tb");
    const auto rep = is_admissible_fixed_point(tb);
    CHECK(rep.positivity_power == 1);
    CHECK(rep.hyperbolic);
    CHECK(rep.genus == 1);
    CHECK(rep.marked_points == 1);
    CHECK_FALSE(rep.genus_assumption);  // flagged below the genus assumption
    CHECK_FALSE(rep.accepted);
    CHECK(rep.perron_value == Catch::Approx((3.0 + std::sqrt(5.0)) / 2.0).epsilon(1e-12));

    // A parabolic singleton loop is never positive at any power.
    const auto t = make_loop(pi, "t");
    const auto rep_t = is_admissible_fixed_point(t);
    CHECK(rep_t.positivity_power == 0);
    CHECK_FALSE(rep_t.accepted);
}

TEST_CASE("a d=4 admissible loop exists within length 8") {
    const Permutation pi({4, 3, 2, 1});
    const auto loops = enumerate_loops(pi, 8);
    CHECK_FALSE(loops.empty());
    int accepted = 0;
    for (const auto& l : loops) {
        const auto rep = is_admissible_fixed_point(l);
        if (rep.accepted) {
            ++accepted;
            CHECK(rep.genus == 2);
            CHECK(rep.marked_points == 1);
            CHECK(rep.perron_value > 1.0);
        }
    }
    CHECK(accepted > 0);
}

TEST_CASE("checked integer arithmetic throws on overflow") {
    IntMatrix m(2);
    m(0, 0) = INT64_MAX / 2;
    m(0, 1) = INT64_MAX / 2;
    m(1, 0) = 2;
    m(1, 1) = 2;
    CHECK_THROWS_AS(m * m, IntegerOverflowError);
}
