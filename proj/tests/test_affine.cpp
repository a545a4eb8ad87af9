#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "gietlab/systems.hpp"

using namespace gietlab;
using Catch::Approx;

namespace {
const double kGolden = (std::sqrt(5.0) - 1.0) / 2.0;
}

TEST_CASE("golden spectrum: (3 +- sqrt 5)/2, reciprocal pair, perron vector") {
    const auto sys = make_golden_system();
    const auto& s = sys.spec;

    CHECK(std::abs(s.eigenvalues[0]) == Approx((3.0 + std::sqrt(5.0)) / 2.0).epsilon(1e-12));
    CHECK(std::abs(s.eigenvalues[1]) == Approx((3.0 - std::sqrt(5.0)) / 2.0).epsilon(1e-12));
    CHECK(std::abs(s.eigenvalues[0] * s.eigenvalues[1] - 1.0) < 1e-12);
    CHECK(s.reciprocal_pairing_error < 1e-10);
    CHECK(s.perron_simple);
    CHECK(s.expanding == 1);
    CHECK(s.contracting == 1);

    CHECK(s.perron_vector[0] == Approx(kGolden).margin(1e-12));
    CHECK(s.perron_vector[1] == Approx(1.0 - kGolden).margin(1e-12));
}

TEST_CASE("fixed_aiet is fixed by renormalize to high accuracy") {
    for (const auto& sys : {make_golden_system(), make_d4_system()}) {
        const auto rt = renormalize(sys.t0, sys.loop);
        CHECK(cr_distance(rt, sys.t0, 0) < 1e-12);
        CHECK(cr_distance(rt, sys.t0, 1) < 1e-12);
    }
}

TEST_CASE("perron vector direction is unchanged when squaring the loop") {
    const auto sys = make_golden_system();
    const auto squared = concat(sys.loop, sys.loop);
    const auto s2 = spectrum(squared.matrix);
    for (int i = 0; i < 2; ++i)
        CHECK(s2.perron_vector[i] == Approx(sys.spec.perron_vector[i]).margin(1e-11));
    CHECK(s2.perron_value == Approx(sys.spec.perron_value * sys.spec.perron_value).epsilon(1e-10));
}

TEST_CASE("d4 spectrum: 2 expanding, 2 contracting, reciprocal symmetric") {
    const auto sys = make_d4_system();
    CHECK(sys.spec.expanding == 2);
    CHECK(sys.spec.contracting == 2);
    CHECK(sys.spec.indeterminate == 0);
    CHECK(sys.spec.reciprocal_pairing_error < 1e-8);
    CHECK(sys.surface.genus == 2);
    CHECK(sys.surface.marked_points == 1);
    CHECK(std::abs(sys.loop.matrix.determinant()) == 1);

    const auto rep = is_admissible_fixed_point(sys.loop);
    CHECK(rep.accepted);
}

TEST_CASE("geometric intersection counts equal the combinatorial product") {
    for (const auto& sys : {make_golden_system(), make_d4_system()}) {
        const IntMatrix counts = intersection_matrix_from_partition(sys.t0, sys.loop);
        CHECK(counts == sys.loop.matrix);
        // Level-2 counts realise the cocycle property.
        const IntMatrix counts2 = intersection_matrix_from_partition(sys.t0, sys.loop, 2);
        CHECK(counts2 == sys.loop.matrix.power(2));
    }
}

TEST_CASE("geometric counts for every admissible loop with d <= 5 base (4321)") {
    // Cross-validate the two constructions on the enumerated admissible set
    // (the shortest admissible words on (4321) have length 8).
    const auto loops = enumerate_loops(Permutation({4, 3, 2, 1}), 8);
    int checked = 0;
    for (const auto& loop : loops) {
        const auto rep = is_admissible_fixed_point(loop);
        if (!rep.accepted) continue;
        const auto t0 = fixed_aiet(loop);
        CHECK(intersection_matrix_from_partition(t0, loop) == loop.matrix);
        ++checked;
    }
    CHECK(checked > 0);
}

TEST_CASE("slope cocycle: exact image and measured error") {
    const auto sys = make_golden_system();
    Rng rng(23);

    // mu = 0 stays 0: IETs stay IETs.
    Giet iet = sys.t0;
    CHECK(slope_cocycle_error(iet, sys.loop) < 1e-12);

    // Small admissible log-slopes: prediction matches measurement.
    for (int trial = 0; trial < 20; ++trial) {
        const Aiet a = random_aiet(sys, rng, 1e-3);
        Giet t(a, std::vector<MonotoneMap>(2, MonotoneMap::identity(2)));
        CHECK(slope_cocycle_error(t, sys.loop) < 1e-9);
    }

    // Same canonical mu, different lambda: identical image mu. The length
    // perturbation must preserve both constraints (sum lambda = 1 and
    // sum rho lambda = 1) for the two AIETs to share log-slopes; that space
    // is 2-dimensional for d = 4.
    const auto d4 = make_d4_system();
    const Aiet base = aiet_from_chart(d4, Eigen::VectorXd::Zero(3), random_ball(rng, 3, 2e-3));
    Eigen::MatrixXd constraints(2, 4);
    for (int i = 0; i < 4; ++i) {
        constraints(0, i) = 1.0;
        constraints(1, i) = base.rho[i];
    }
    const Eigen::MatrixXd null_space =
        constraints.fullPivLu().kernel();  // 4 x 2 for generic rho
    REQUIRE(null_space.cols() >= 1);
    std::vector<double> lam2(4);
    for (int i = 0; i < 4; ++i) lam2[i] = base.lambda[i] + 1e-3 * null_space(i, 0) / null_space.col(0).norm();
    const Aiet moved(d4.loop.base, lam2, base.rho);
    for (int i = 0; i < 4; ++i)
        REQUIRE(moved.rho[i] == Approx(base.rho[i]).margin(1e-13));  // constraints preserved

    const auto id4 = std::vector<MonotoneMap>(4, MonotoneMap::identity(2));
    const auto mu1 = renormalize(Giet(base, id4), d4.loop).affine.log_slopes();
    const auto mu2 = renormalize(Giet(moved, id4), d4.loop).affine.log_slopes();
    const auto pred = slope_cocycle(d4.loop.matrix, base.log_slopes());
    for (int i = 0; i < 4; ++i) {
        CHECK(mu1[i] == Approx(pred[i]).margin(1e-9));
        CHECK(mu1[i] == Approx(mu2[i]).margin(1e-9));
    }
}

TEST_CASE("splitting dimensions: golden 1+0 unstable, d4 3+1 unstable / 2 stable") {
    const auto golden = make_golden_system();
    CHECK(golden.split.unstable_dim() == 1);
    CHECK(golden.split.stable_dim() == 1);
    CHECK(golden.split.constraint_invariance_error < 1e-9);

    const auto d4 = make_d4_system();
    CHECK(d4.split.unstable_dim() == 4);  // (d-1) + (g-1) = 3 + 1
    CHECK(d4.split.stable_dim() == 2);    // (2d-2) - 4
    CHECK(d4.split.constraint_invariance_error < 1e-9);

    // Orthonormality of the stored bases.
    for (const auto* m : {&d4.split.unstable_mu, &d4.split.stable_mu}) {
        if (m->cols() == 0) continue;
        const Eigen::MatrixXd gram = m->transpose() * (*m);
        CHECK((gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).norm() < 1e-10);
    }
}

TEST_CASE("tangent decomposition round-trips chart points") {
    const auto sys = make_d4_system();
    Rng rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::VectorXd a = random_ball(rng, 3, 1e-4);
        const Eigen::VectorXd b = random_ball(rng, 3, 1e-4);
        const Aiet t = aiet_from_chart(sys, a, b);
        auto [a2, b2] = chart_from_aiet(sys, t);
        CHECK((a - a2).norm() < 1e-10);
        CHECK((b - b2).norm() < 1e-8);
    }
}

TEST_CASE("derivative blocks at T0") {
    for (const auto& sys : {make_golden_system(), make_d4_system()}) {
        const auto rep = derivative_block_check(sys);
        CAPTURE(sys.name, rep.step_used);

        // (D_lambda R_mu) = 0.
        CHECK(rep.lambda_to_mu_norm < 1e-6);
        // (D_lambda R_lambda) is alpha-expanding with alpha > 1.
        CHECK(rep.lambda_expansion > 1.0);
        // (D_mu R_mu) acts as A on the constraint space.
        CHECK(rep.mu_block_vs_a_error < 1e-4);
        // Full spectrum = {perron/|mu|} u {|mu|} over non-Perron eigenvalues.
        CHECK(rep.spectrum_match_error < 1e-4);

        const int expected_unstable = sys.d() - 1 + sys.surface.genus - 1;
        CHECK(rep.unstable_count == expected_unstable);
        CHECK(rep.borderline_count == 0);
        CHECK(rep.stable_count == 2 * sys.d() - 2 - expected_unstable);
    }
}
