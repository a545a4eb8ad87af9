#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "gietlab/monotone_map.hpp"
#include "gietlab/permutation.hpp"

namespace gietlab {

/// Affine interval exchange: top lengths lambda (summing to 1), slopes rho
/// (with sum rho_i lambda_i = 1) and the permutation. Constructors renormalise
/// both constraints.
struct Aiet {
    Permutation sigma;
    std::vector<double> lambda;
    std::vector<double> rho;

    Aiet() = default;
    Aiet(Permutation s, std::vector<double> lam, std::vector<double> slopes)
        : sigma(std::move(s)), lambda(std::move(lam)), rho(std::move(slopes)) {
        const int d = sigma.size();
        if (static_cast<int>(lambda.size()) != d || static_cast<int>(rho.size()) != d)
            throw InvalidInputError("Aiet: dimension mismatch");
        double ls = 0.0;
        for (double l : lambda) {
            if (!(l > 0.0)) throw InvalidInputError("Aiet: lengths must be positive");
            ls += l;
        }
        for (double& l : lambda) l /= ls;
        double rs = 0.0;
        for (int i = 0; i < d; ++i) {
            if (!(rho[i] > 0.0)) throw InvalidInputError("Aiet: slopes must be positive");
            rs += rho[i] * lambda[i];
        }
        for (double& r : rho) r /= rs;
    }

    /// Standard IET: unit slopes.
    static Aiet iet(Permutation s, std::vector<double> lam) {
        return Aiet(std::move(s), std::move(lam), std::vector<double>(lam.size(), 1.0));
    }

    int intervals() const { return sigma.size(); }

    /// Top break points u_0 = 0 < u_1 < ... < u_d = 1.
    std::vector<double> top_breaks() const {
        std::vector<double> u(lambda.size() + 1, 0.0);
        for (std::size_t i = 0; i < lambda.size(); ++i) u[i + 1] = u[i] + lambda[i];
        u.back() = 1.0;
        return u;
    }

    /// Length of the j-th bottom interval (0-based).
    double bottom_length(int j) const {
        const int i = sigma.inverse(j);
        return rho[i] * lambda[i];
    }

    /// Bottom break points v_0 = 0 < ... < v_d = 1.
    std::vector<double> bottom_breaks() const {
        const int d = intervals();
        std::vector<double> v(d + 1, 0.0);
        for (int j = 0; j < d; ++j) v[j + 1] = v[j] + bottom_length(j);
        v.back() = 1.0;
        return v;
    }

    /// Log-slopes mu_i = log rho_i.
    std::vector<double> log_slopes() const {
        std::vector<double> m(rho.size());
        for (std::size_t i = 0; i < rho.size(); ++i) m[i] = std::log(rho[i]);
        return m;
    }
};

/// A generalised interval exchange transformation in the coordinates
/// (affine part, branch profiles): the restriction of T to its i-th top
/// interval is the affine map onto [0,1], then the profile, then the affine
/// map onto the sigma(i)-th bottom interval.
struct Giet {
    Aiet affine;
    std::vector<MonotoneMap> profiles;

    Giet() = default;
    Giet(Aiet a, std::vector<MonotoneMap> p) : affine(std::move(a)), profiles(std::move(p)) {
        if (static_cast<int>(profiles.size()) != affine.intervals())
            throw InvalidInputError("Giet: need one profile per interval");
    }

    int intervals() const { return affine.intervals(); }

    bool is_affine() const {
        for (const auto& p : profiles)
            if (!p.is_identity()) return false;
        return true;
    }
};

/// assemble/decompose realise the identification of GIETs with
/// (affine part) x (profiles)^d; they are inverse to each other on the nose.
inline Giet assemble(const Aiet& a, std::vector<MonotoneMap> profiles) {
    return Giet(a, std::move(profiles));
}
inline std::pair<Aiet, std::vector<MonotoneMap>> decompose(const Giet& t) {
    return {t.affine, t.profiles};
}

inline Giet iet_from_lengths(const Permutation& sigma, const std::vector<double>& lambda) {
    std::vector<MonotoneMap> p(lambda.size(), MonotoneMap::identity());
    return Giet(Aiet::iet(sigma, lambda), std::move(p));
}

/// Branch index for a point under the half-open convention [u_i, u_{i+1});
/// x = 1 belongs to the last branch.
inline int branch_index(const Giet& t, double x) {
    if (x < 0.0 || x > 1.0) throw InvalidInputError("branch_index: point outside [0,1]");
    const auto u = t.affine.top_breaks();
    int i = static_cast<int>(std::upper_bound(u.begin(), u.end(), x) - u.begin()) - 1;
    return std::clamp(i, 0, t.intervals() - 1);
}

/// Value and derivatives of T at x together with the branch used.
struct GietJet {
    Jet3 jet;
    int branch = 0;
};

inline GietJet eval_giet_all(const Giet& t, double x) {
    const int i = branch_index(t, x);
    const auto u = t.affine.top_breaks();
    const auto v = t.affine.bottom_breaks();
    const int j = t.affine.sigma(i);
    const double lt = t.affine.lambda[i];
    const double lb = t.affine.bottom_length(j);
    const double s = std::clamp((x - u[i]) / lt, 0.0, 1.0);
    const Jet3 p = t.profiles[i].eval_all(s);
    GietJet out;
    out.branch = i;
    out.jet.v = v[j] + lb * p.v;
    out.jet.d1 = p.d1 * lb / lt;
    out.jet.d2 = p.d2 * lb / (lt * lt);
    out.jet.d3 = p.d3 * lb / (lt * lt * lt);
    return out;
}

/// eval_giet returns the image point and the branch index.
inline std::pair<double, int> eval_giet(const Giet& t, double x) {
    const GietJet g = eval_giet_all(t, x);
    return {g.jet.v, g.branch};
}

inline double deriv_giet(const Giet& t, double x) { return eval_giet_all(t, x).jet.d1; }

/// The i-th branch as a map between its top and bottom intervals.
inline BranchMap branch_map(const Giet& t, int i) {
    const auto u = t.affine.top_breaks();
    const auto v = t.affine.bottom_breaks();
    const int j = t.affine.sigma(i);
    return BranchMap{Interval{u[i], u[i + 1]}, Interval{v[j], v[j] + t.affine.bottom_length(j)},
                     t.profiles[i]};
}

/// Total non-linearity int_0^1 eta_T, exactly (per-branch closed form).
inline double total_nonlinearity(const Giet& t) {
    double s = 0.0;
    for (const auto& p : t.profiles) s += p.total_eta();
    return s;
}

/// Per-branch sampled non-linearity with the exact and quadrature totals.
struct NonLinearityProfile {
    std::vector<std::vector<double>> sample_x;    // per branch, profile grid
    std::vector<std::vector<double>> sample_eta;  // eta of the profile at the grid
    double total = 0.0;                           // exact: sum of branch integrals
    double quadrature_total = 0.0;
    double quadrature_tolerance = 0.0;
};

inline NonLinearityProfile nonlinearity_profile(const Giet& t) {
    NonLinearityProfile out;
    for (const auto& p : t.profiles) {
        std::vector<double> xs = p.grid(), es(p.nodes());
        for (int i = 0; i < p.nodes(); ++i)
            es[i] = p.deriv2_data()[i] / p.deriv1_data()[i];
        out.sample_x.push_back(std::move(xs));
        out.sample_eta.push_back(std::move(es));
        out.total += p.total_eta();
        out.quadrature_total += simpson([&](double x) { return p.eta(x); }, 0.0, 1.0, 256);
        out.quadrature_tolerance += 1e-9 + 1e-6 * std::fabs(p.total_eta());
    }
    return out;
}

/// Integral of |eta_T| over [0,1] (branch-wise change of variables).
inline double abs_nonlinearity(const Giet& t) {
    double s = 0.0;
    for (const auto& p : t.profiles) {
        if (p.is_identity()) continue;
        s += simpson([&](double x) { return std::fabs(p.eta(x)); }, 0.0, 1.0, 512);
    }
    return s;
}

/// eta-distance between the profile tuples of two GIETs (sum over branches).
inline double eta_distance_profiles(const Giet& a, const Giet& b) {
    if (a.intervals() != b.intervals()) throw InvalidInputError("eta_distance_profiles: dimension mismatch");
    double s = 0.0;
    for (int i = 0; i < a.intervals(); ++i) s += eta_distance(a.profiles[i], b.profiles[i]);
    return s;
}

/// Product-coordinate C^r norms. cr_norm measures the distance of the profile
/// tuple from the identity tuple, plus (when a reference affine part is
/// supplied) the distance of the affine part to the reference.
inline double cr_norm(const Giet& t, int r, const std::optional<Aiet>& reference = std::nullopt) {
    double mx = 0.0;
    for (const auto& p : t.profiles) mx = std::max(mx, profile_cr_norm(p, r));
    if (reference) {
        const auto& ref = *reference;
        if (ref.intervals() != t.intervals()) throw InvalidInputError("cr_norm: reference dimension mismatch");
        double aff = 0.0;
        for (int i = 0; i < t.intervals(); ++i) {
            aff = std::max(aff, std::fabs(t.affine.lambda[i] - ref.lambda[i]));
            aff = std::max(aff, std::fabs(std::log(t.affine.rho[i]) - std::log(ref.rho[i])));
        }
        mx += aff;
    }
    return mx;
}

inline double cr_distance(const Giet& a, const Giet& b, int r) {
    if (!(a.affine.sigma == b.affine.sigma)) throw InvalidInputError("cr_distance: different permutations");
    double mx = 0.0;
    for (int i = 0; i < a.intervals(); ++i)
        mx = std::max(mx, profile_cr_distance(a.profiles[i], b.profiles[i], r));
    double aff = 0.0;
    for (int i = 0; i < a.intervals(); ++i) {
        aff = std::max(aff, std::fabs(a.affine.lambda[i] - b.affine.lambda[i]));
        aff = std::max(aff, std::fabs(std::log(a.affine.rho[i]) - std::log(b.affine.rho[i])));
    }
    return mx + aff;
}

}  // namespace gietlab
