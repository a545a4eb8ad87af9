#pragma once

#include "gietlab/affine.hpp"

namespace gietlab {

/// The two reference systems of the lab. The d=4 loop is the shortest
/// admissible word on (4321) found by enumeration (positive power,
/// hyperbolic, g = 2, s = 1), fixed here once and re-derived by the tests.
inline constexpr const char* kGoldenWord = "bt";
inline constexpr const char* kD4Word = "ttbtbbtb";

inline System make_golden_system() {
    return make_system("golden", make_loop(Permutation({2, 1}), kGoldenWord));
}

inline System make_d4_system() {
    return make_system("d4", make_loop(Permutation({4, 3, 2, 1}), kD4Word));
}

inline System make_named_system(const std::string& name) {
    if (name == "golden") return make_golden_system();
    if (name == "d4") return make_d4_system();
    throw ConfigError("unknown system name: " + name);
}

/// Random chart coordinates in the ball of the given radius.
inline Eigen::VectorXd random_ball(Rng& rng, int dim, double radius) {
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v(i) = rng.uniform(-1.0, 1.0);
    const double n = v.norm();
    if (n > 0) v *= rng.uniform(0.0, radius) / n;
    return v;
}

/// Random AIET within the chart ball of the given radius around T0.
inline Aiet random_aiet(const System& sys, Rng& rng, double radius) {
    const int d = sys.d();
    return aiet_from_chart(sys, random_ball(rng, d - 1, radius), random_ball(rng, d - 1, radius));
}

/// Random branch profiles with non-linearity amplitude `amp`; when
/// `zero_total` is set the total non-linearity over all branches vanishes
/// (the natural slice of the convergence theorem).
inline std::vector<MonotoneMap> random_profiles(int d, Rng& rng, double amp, bool zero_total,
                                                int grid = kDefaultGridSize) {
    std::vector<TrigEta> specs(d);
    double csum = 0.0;
    for (int i = 0; i < d; ++i) {
        specs[i].c = rng.uniform(-amp, amp);
        specs[i].a = {rng.uniform(-amp, amp), rng.uniform(-0.3 * amp, 0.3 * amp)};
        specs[i].b = {rng.uniform(-amp, amp)};
        csum += specs[i].c;
    }
    if (zero_total)
        for (int i = 0; i < d; ++i) specs[i].c -= csum / d;
    std::vector<MonotoneMap> out;
    out.reserve(d);
    for (int i = 0; i < d; ++i) out.push_back(profile_from_eta(specs[i], grid));
    return out;
}

}  // namespace gietlab
