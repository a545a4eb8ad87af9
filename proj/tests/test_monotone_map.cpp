#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "gietlab/monotone_map.hpp"
#include "gietlab/numeric.hpp"

using namespace gietlab;
using Catch::Approx;

namespace {

/// The x/(2-x) map used throughout as a closed-form oracle (t = 2 in the
/// fixed-endpoint Moebius family).
const Moebius kMoebius2{2.0};

MonotoneMap wiggly(double amp, int n = kDefaultGridSize, double total = 0.0) {
    TrigEta spec;
    spec.c = total;
    spec.a = {amp, -0.4 * amp};
    spec.b = {0.7 * amp, 0.3 * amp};
    return profile_from_eta(spec, n);
}

}  // namespace

TEST_CASE("identity map evaluates exactly") {
    const auto id = MonotoneMap::identity();
    for (double x : {0.0, 0.125, 0.33333, 0.5, 0.99, 1.0}) {
        CHECK(id.eval(x) == x);
        CHECK(id.deriv(x) == 1.0);
        CHECK(id.deriv2(x) == 0.0);
        CHECK(id.eta(x) == 0.0);
    }
    CHECK(id.is_identity());
    CHECK(id.total_eta() == 0.0);
}

TEST_CASE("construction rejects bad data") {
    auto g = MonotoneMap::uniform_grid(5);
    std::vector<double> ones(5, 1.0), zero(5, 0.0);
    auto bad_values = g;
    std::swap(bad_values[1], bad_values[2]);
    CHECK_THROWS_AS(MonotoneMap(g, bad_values, ones, zero, zero), NonMonotoneError);

    auto neg = ones;
    neg[2] = -0.5;
    CHECK_THROWS_AS(MonotoneMap(g, g, neg, zero, zero), NonMonotoneError);

    // Steep opposing derivatives make the quintic dip: rejected, not clamped.
    std::vector<double> vals{0.0, 0.5, 1.0};
    std::vector<double> d1{30.0, 30.0, 30.0}, d2{0.0, 0.0, 0.0}, d3{0.0, 0.0, 0.0};
    CHECK_THROWS_AS(MonotoneMap(MonotoneMap::uniform_grid(3), vals, d1, d2, d3), NonMonotoneError);

    CHECK_THROWS_AS(MonotoneMap::identity().eval(1.5), InvalidInputError);
    CHECK_THROWS_AS(MonotoneMap::identity().eval(-0.1), InvalidInputError);
}

TEST_CASE("moebius oracle: values, derivatives, eta") {
    const auto f = kMoebius2.sample();
    CHECK(f.eval(0.5) == Approx(1.0 / 3.0).margin(1e-13));
    for (double x : {0.05, 0.3, 0.55, 0.8, 0.975}) {
        const double den = 2.0 - x;
        CHECK(f.eval(x) == Approx(x / den).margin(1e-12));
        CHECK(f.deriv(x) == Approx(2.0 / (den * den)).margin(1e-10));
        CHECK(f.eta(x) == Approx(2.0 / den).margin(1e-8));
    }
}

TEST_CASE("interpolation error decays like a high power of the grid step") {
    const auto oracle = [&](double x) { return kMoebius2.eval_all(x); };
    std::vector<double> log_h, log_err;
    for (int n : {9, 17, 33, 65}) {
        const auto f = MonotoneMap::from_jets(oracle, n);
        double err = 0.0;
        for (int k = 0; k <= 1000; ++k) {
            const double x = k / 1000.0;
            err = std::max(err, std::fabs(f.eval(x) - kMoebius2.eval(x)));
        }
        log_h.push_back(std::log(1.0 / (n - 1)));
        log_err.push_back(std::log(err));
    }
    const auto fit = fit_line(log_h, log_err);
    CHECK(fit.slope >= 3.5);  // empirical order; quintic cells give ~6
    CHECK(fit.r2 > 0.99);
}

TEST_CASE("invert: moebius closed form and involution") {
    CHECK(invert(MonotoneMap::identity()).is_identity());

    const auto f = kMoebius2.sample();
    const auto g = invert(f);
    for (double x : {0.1, 0.25, 0.5, 0.77, 0.9}) {
        CHECK(g.eval(x) == Approx(2.0 * x / (1.0 + x)).margin(1e-10));
        CHECK(g.eval(f.eval(x)) == Approx(x).margin(1e-10));
    }
    const auto ff = invert(g);
    double worst = 0.0;
    for (double x : dense_samples({&f}))
        worst = std::max(worst, std::fabs(ff.eval(x) - f.eval(x)));
    CHECK(worst < 2e-10);
}

TEST_CASE("compose: identity neutral, chain-rule identity at nodes, moebius product") {
    const auto f = wiggly(0.3);
    CHECK(profile_cr_distance(compose(f, MonotoneMap::identity()), f, 3) == 0.0);
    CHECK(profile_cr_distance(compose(MonotoneMap::identity(), f), f, 3) == 0.0);

    const auto g = wiggly(0.2, 129);
    const auto h = compose(f, g);
    // eta(f o g) = g' * eta_f o g + eta_g, exactly at the merged nodes.
    for (double x : h.grid()) {
        const Jet3 jg = g.eval_all(x);
        const double expected = jg.d1 * f.eta(std::clamp(jg.v, 0.0, 1.0)) + jg.d2 / jg.d1;
        CHECK(h.eta(x) == Approx(expected).margin(1e-12));
    }

    // Moebius composition corresponds to multiplying the parameters.
    const Moebius a{1.7}, b{0.6};
    const auto ab = compose(a.sample(), b.sample());
    const Moebius prod = a.composed_with(b);
    for (double x : {0.2, 0.5, 0.8})
        CHECK(ab.eval(x) == Approx(prod.eval(x)).margin(1e-11));
    CHECK(ab.total_eta() == Approx(prod.total_eta()).margin(1e-10));
}

TEST_CASE("restrict_normalized and branch normalisation") {
    // Affine restriction of the identity is the identity profile.
    CHECK(restrict_normalized(MonotoneMap::identity(), 0.2, 0.7).is_identity());

    const auto f = kMoebius2.sample();
    const auto r = restrict_normalized(f, 0.25, 0.75);
    const double fa = kMoebius2.eval(0.25), fb = kMoebius2.eval(0.75);
    for (double s : {0.0, 0.3, 0.5, 0.9, 1.0}) {
        const double expected = (kMoebius2.eval(0.25 + 0.5 * s) - fa) / (fb - fa);
        CHECK(r.eval(s) == Approx(expected).margin(1e-11));
    }
    CHECK_THROWS_AS(restrict_normalized(f, 0.5, 0.5), InvalidInputError);
}

TEST_CASE("normalisation scaling laws") {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const auto phi = wiggly(rng.uniform(0.05, 0.6), 129, rng.uniform(-0.2, 0.2));
        const double a = rng.uniform(0.02, 0.7);
        const double b = rng.uniform(a + 0.2, std::min(a + 0.9, 1.0));
        BranchMap f{Interval{a, b}, Interval{0.1, 0.7}, phi};

        // || N(f)'' || <= ||(f^{-1})'|| * ||f''|| * |I| with N(f) = profile.
        double lhs = 0;
        for (double s : dense_samples({&phi})) lhs = std::max(lhs, std::fabs(phi.eval_all(s).d2));
        const double rhs = f.sup_inverse_deriv() * f.sup_abs_deriv2() * f.dom.len();
        CHECK(lhs <= rhs * (1.0 + 1e-9));

        // |D eta(N(f))| <= (||f'''|| ||f'|| + ||f''||^2) ||(f^{-1})'||^4 |I|^2.
        // This one needs inf f' <= 1, which holds whenever |J| <= |I| (mean
        // slope at most 1); domain/codomain of equal length realise that.
        const double c = rng.uniform(0.0, 1.0 - f.dom.len());
        BranchMap g{f.dom, Interval{c, c + f.dom.len()}, phi};
        double lhs3 = 0, sup_d1 = 0;
        for (double s : dense_samples({&phi})) {
            lhs3 = std::max(lhs3, std::fabs(phi.eta_deriv(s)));
            sup_d1 = std::max(sup_d1, phi.eval_all(s).d1);
        }
        const double rhs3 = (g.sup_abs_deriv3() * sup_d1 + g.sup_abs_deriv2() * g.sup_abs_deriv2()) *
                            std::pow(g.sup_inverse_deriv(), 4) * g.dom.len() * g.dom.len();
        CHECK(lhs3 <= rhs3 * (1.0 + 1e-9));
    }
}

TEST_CASE("eta scaling laws of rescaling") {
    const auto phi = wiggly(0.4);
    Rng rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        // eta(f o m_a) = a * eta(f) o m_a: the restriction of phi to [0,a]
        // renormalised has eta(s) = a' * eta_phi at the pulled-back point with
        // a' the domain length. Verify through restrict_normalized.
        const double a = rng.uniform(0.1, 1.0);
        const auto r = restrict_normalized(phi, 0.0, a);
        // Exact at the restriction's nodes (they sit on phi's grid).
        for (int k = 1; k + 1 < r.nodes(); k += 7) {
            const double s = r.grid()[k];
            CHECK(r.eta(s) == Approx(a * phi.eta(std::min(a * s, 1.0))).margin(1e-10));
        }

        // eta(c * f) = eta(f): target rescaling is invisible to the profile.
        BranchMap scaled{Interval{0.0, 1.0}, Interval{0.0, rng.uniform(0.1, 10.0)}, phi};
        for (double s : {0.1, 0.4, 0.8}) {
            const Jet3 j = scaled.eval_all(s);
            CHECK(j.d2 / j.d1 == Approx(phi.eta(s)).margin(1e-12));
        }
    }
}

TEST_CASE("eta distance: exact values and metric properties") {
    const auto id = MonotoneMap::identity();
    const auto f = kMoebius2.sample();

    CHECK(eta_distance(f, f) == 0.0);

    double tol = 0.0;
    const double d = eta_distance(id, f, &tol);
    CHECK(d == Approx(2.0 * std::log(2.0)).margin(1e-9));
    CHECK(tol < 1e-8);

    // Symmetry and triangle inequality on random triples.
    Rng rng(3);
    for (int trial = 0; trial < 8; ++trial) {
        const auto a = wiggly(rng.uniform(0.05, 0.5), 65);
        const auto b = wiggly(rng.uniform(0.05, 0.5), 65, rng.uniform(-0.1, 0.1));
        const auto c = wiggly(rng.uniform(0.05, 0.5), 65, rng.uniform(-0.1, 0.1));
        const double ab = eta_distance(a, b), ba = eta_distance(b, a);
        CHECK(ab == Approx(ba).margin(1e-10));
        CHECK(ab <= eta_distance(a, c) + eta_distance(c, b) + 1e-9);
    }
}

TEST_CASE("profile_from_eta produces the prescribed non-linearity") {
    TrigEta spec;
    spec.c = 0.15;
    spec.a = {0.3};
    spec.b = {-0.2, 0.1};
    const auto f = profile_from_eta(spec);
    CHECK(f.total_eta() == Approx(0.15).margin(1e-12));
    for (double x : {0.0, 0.21, 0.5, 0.83, 1.0})
        CHECK(f.eta(x) == Approx(spec.e(x)).margin(1e-9));
    // eta_deriv matches de at nodes (exact data there).
    for (double x : f.grid())
        CHECK(f.eta_deriv(x) == Approx(spec.de(x)).margin(1e-10));
}

TEST_CASE("moebius_fit matches total non-linearity") {
    const auto m = Moebius::from_total_eta(0.2);
    CHECK(moebius_fit(m.sample()).c1_residual < 1e-9);
    CHECK(moebius_fit(MonotoneMap::identity()).moebius.t == Approx(1.0));
    CHECK(moebius_fit(MonotoneMap::identity()).c1_residual == 0.0);

    const auto f = wiggly(0.5, kDefaultGridSize, 0.2);
    const auto fit = moebius_fit(f);
    CHECK(fit.moebius.total_eta() == Approx(0.2).margin(1e-10));
    CHECK(fit.c1_residual > 1e-4);  // wiggly map is genuinely not Moebius
}

TEST_CASE("inverse_eval solves the interpolant") {
    const auto f = wiggly(0.45);
    for (double y : {0.0, 0.13, 0.5, 0.86, 1.0}) {
        const double x = f.inverse_eval(y);
        CHECK(f.eval(x) == Approx(y).margin(1e-13));
    }
}
