#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "gietlab/giet.hpp"
#include "gietlab/serialization.hpp"

using namespace gietlab;
using Catch::Approx;

namespace {

const double kGolden = (std::sqrt(5.0) - 1.0) / 2.0;  // 0.618...

Giet golden_rotation() {
    return iet_from_lengths(Permutation({2, 1}), {kGolden, 1.0 - kGolden});
}

MonotoneMap bump(double amp, double total = 0.0) {
    TrigEta spec;
    spec.c = total;
    spec.a = {amp};
    spec.b = {0.5 * amp};
    return profile_from_eta(spec);
}

}  // namespace

TEST_CASE("aiet constructors renormalise the two constraints") {
    Aiet a(Permutation({2, 1}), {0.7, 0.7}, {2.0, 1.0});
    CHECK(a.lambda[0] + a.lambda[1] == Approx(1.0).margin(1e-15));
    CHECK(a.rho[0] * a.lambda[0] + a.rho[1] * a.lambda[1] == Approx(1.0).margin(1e-12));

    CHECK_THROWS_AS(Aiet(Permutation({2, 1}), {0.5, -0.5}, {1.0, 1.0}), InvalidInputError);
    CHECK_THROWS_AS(Aiet(Permutation({2, 1}), {0.5, 0.5}, {1.0}), InvalidInputError);
}

TEST_CASE("pure AIET has identity profiles and zero total non-linearity") {
    const auto t = golden_rotation();
    CHECK(t.is_affine());
    CHECK(total_nonlinearity(t) == 0.0);
    CHECK(abs_nonlinearity(t) == 0.0);

    const auto prof = nonlinearity_profile(t);
    CHECK(prof.total == 0.0);
    CHECK(std::fabs(prof.quadrature_total - prof.total) <= prof.quadrature_tolerance);
}

TEST_CASE("golden rotation evaluates as the rotation by the short length") {
    const auto t = golden_rotation();
    const double alpha = 1.0 - kGolden;  // rotation number

    auto [y0, b0] = eval_giet(t, 0.0);
    CHECK(b0 == 0);
    CHECK(y0 == Approx(alpha).margin(1e-15));

    for (double x : {0.1, 0.3, kGolden - 1e-9}) {
        auto [y, b] = eval_giet(t, x);
        CHECK(b == 0);
        CHECK(y == Approx(x + alpha).margin(1e-12));
    }
    for (double x : {kGolden, 0.8, 1.0}) {
        auto [y, b] = eval_giet(t, x);
        CHECK(b == 1);
        CHECK(y == Approx(x - kGolden).margin(1e-12));
    }

    // Break point resolves to the right-hand branch, never an error.
    CHECK(branch_index(t, kGolden) == 1);
}

TEST_CASE("orbit of 0 equidistributes and matches continued-fraction oracle") {
    const auto t = golden_rotation();
    const double alpha = 1.0 - kGolden;

    // Convergent denominators of alpha = [0;2,1,1,...]: |q alpha - p| shrinks
    // along q = 2, 3, 5, 8, 13, 21 (Fibonacci).
    std::vector<int> q{2, 3, 5, 8, 13, 21};
    double x = 0.0;
    std::vector<double> orbit{x};
    for (int n = 1; n <= 1000; ++n) {
        x = eval_giet(t, x).first;
        orbit.push_back(x);
    }
    double prev = 1.0;
    for (int qi : q) {
        const double dist = std::min(orbit[qi], 1.0 - orbit[qi]);
        const double expected = std::fabs(qi * alpha - std::round(qi * alpha));
        CHECK(dist == Approx(expected).margin(1e-10));
        CHECK(dist < prev);
        prev = dist;
    }

    // Weyl equidistribution smoke test: 1001 orbit points leave no large gap.
    std::sort(orbit.begin(), orbit.end());
    double max_gap = orbit.front() + 1.0 - orbit.back();
    for (std::size_t i = 0; i + 1 < orbit.size(); ++i)
        max_gap = std::max(max_gap, orbit[i + 1] - orbit[i]);
    CHECK(max_gap < 0.01);
}

TEST_CASE("eval_giet is injective and branch images cover [0,1]") {
    Aiet a(Permutation({3, 1, 2}), {0.3, 0.45, 0.25}, {1.2, 0.9, 1.0});
    Giet t(a, {bump(0.4), bump(-0.3), bump(0.2)});

    Rng rng(17);
    std::vector<std::pair<double, double>> pts;
    for (int i = 0; i < 10000; ++i) {
        const double x = rng.uniform(0.0, 1.0);
        pts.emplace_back(x, eval_giet(t, x).first);
    }
    std::sort(pts.begin(), pts.end());
    // Distinct inputs in the same branch map to distinct outputs.
    int injective_violations = 0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        if (branch_index(t, pts[i].first) == branch_index(t, pts[i + 1].first) &&
            pts[i + 1].second <= pts[i].second)
            ++injective_violations;
    }
    CHECK(injective_violations == 0);

    // The bottom intervals tile [0,1] up to tiny measure defect.
    const auto v = t.affine.bottom_breaks();
    double covered = 0.0;
    for (int j = 0; j < t.intervals(); ++j) covered += t.affine.bottom_length(j);
    CHECK(covered == Approx(1.0).margin(1e-9));
    CHECK(v.back() == 1.0);
}

TEST_CASE("decompose(assemble) reproduces inputs bit-for-bit") {
    Aiet a(Permutation({2, 1}), {0.4, 0.6}, {1.1, 1.0});
    std::vector<MonotoneMap> profiles{bump(0.3, 0.1), bump(-0.2, -0.1)};
    const Giet t = assemble(a, profiles);
    auto [a2, p2] = decompose(t);
    CHECK(a2.lambda == a.lambda);
    CHECK(a2.rho == a.rho);
    for (int i = 0; i < 2; ++i) {
        CHECK(p2[i].values() == profiles[i].values());
        CHECK(p2[i].deriv1_data() == profiles[i].deriv1_data());
        CHECK(p2[i].deriv3_data() == profiles[i].deriv3_data());
    }
}

TEST_CASE("total non-linearity sums branch integrals") {
    Aiet a(Permutation({2, 1}), {0.5, 0.5}, {1.0, 1.0});
    Giet t(a, {bump(0.3, 0.2), bump(0.1, -0.05)});
    CHECK(total_nonlinearity(t) == Approx(0.15).margin(1e-12));

    const auto prof = nonlinearity_profile(t);
    CHECK(std::fabs(prof.quadrature_total - prof.total) <= prof.quadrature_tolerance);
}

TEST_CASE("cr norms and distances") {
    const auto t0 = golden_rotation();
    CHECK(cr_norm(t0, 1) == 0.0);
    CHECK(cr_norm(t0, 3, t0.affine) == 0.0);

    Giet t(t0.affine, {bump(0.2), MonotoneMap::identity()});
    CHECK(cr_norm(t, 0) > 0.0);
    CHECK(cr_norm(t, 1) >= cr_norm(t, 0));
    CHECK(cr_norm(t, 2) >= cr_norm(t, 1));
    CHECK(cr_distance(t, t0, 1) == Approx(cr_norm(t, 1, t0.affine)).margin(1e-12));
    CHECK(cr_distance(t, t, 2) == 0.0);
}

TEST_CASE("json round-trip preserves every bit") {
    Aiet a(Permutation({4, 3, 2, 1}), {0.1, 0.2, 0.3, 0.4}, {1.05, 0.95, 1.0, 1.02});
    Giet t(a, {bump(0.3, 0.07), bump(-0.25), bump(0.15, -0.07), MonotoneMap::identity()});

    const std::string text = to_json(t).dump();
    const Giet back = giet_from_json(json::parse(text));

    CHECK(back.affine.sigma == t.affine.sigma);
    CHECK(back.affine.lambda == t.affine.lambda);
    CHECK(back.affine.rho == t.affine.rho);
    for (int i = 0; i < t.intervals(); ++i) {
        CHECK(back.profiles[i].grid() == t.profiles[i].grid());
        CHECK(back.profiles[i].values() == t.profiles[i].values());
        CHECK(back.profiles[i].deriv1_data() == t.profiles[i].deriv1_data());
        CHECK(back.profiles[i].deriv2_data() == t.profiles[i].deriv2_data());
        CHECK(back.profiles[i].deriv3_data() == t.profiles[i].deriv3_data());
    }
}
