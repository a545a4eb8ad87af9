#pragma once

#include <string>
#include <vector>

#include "gietlab/renorm.hpp"

namespace gietlab {

/// Outcome of one executable inequality: measured left side, bound on the
/// right, and the witnesses achieving the extremes.
struct BoundReport {
    std::string checker;
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;  ///< rhs - lhs
    bool pass = false;
    std::string witness;

    static BoundReport make(std::string name, double lhs, double rhs, std::string witness = {},
                            double report_tol = 1e-12) {
        BoundReport r;
        r.checker = std::move(name);
        r.lhs = lhs;
        r.rhs = rhs;
        r.margin = rhs - lhs;
        r.pass = r.margin >= -report_tol;
        r.witness = std::move(witness);
        return r;
    }
};

// ---------------------------------------------------------------------------
// Distortion along disjoint singularity-free orbits

/// D(T^n)(x)/D(T^n)(y) <= exp(int |eta_T|) for x, y in J when the iterates
/// J, T(J), ..., T^n(J) are pairwise disjoint and free of break points.
/// The hypotheses are verified, not assumed.
inline BoundReport distortion_check(const Giet& t, Interval j0, int n, int samples = 15) {
    const auto u = t.affine.top_breaks();
    std::vector<Interval> orbit{j0};
    Interval cur = j0;
    for (int k = 0; k < n; ++k) {
        const int b = branch_index(t, 0.5 * (cur.a + cur.b));
        if (cur.a < u[b] - 1e-12 || cur.b > u[b + 1] + 1e-12)
            throw HypothesisError("iterate straddles a break point of T", k);
        const BranchMap bm = branch_map(t, b);
        cur = Interval{bm.eval(std::max(cur.a, u[b])), bm.eval(std::min(cur.b, u[b + 1]))};
        orbit.push_back(cur);
    }
    std::vector<std::pair<double, int>> lefts;
    for (int k = 0; k <= n; ++k) lefts.emplace_back(orbit[k].a, k);
    std::sort(lefts.begin(), lefts.end());
    for (std::size_t i = 0; i + 1 < lefts.size(); ++i) {
        const Interval& a = orbit[lefts[i].second];
        if (a.b > lefts[i + 1].first + 1e-12)
            throw HypothesisError("iterates of J are not pairwise disjoint", lefts[i + 1].second);
    }

    double mn = std::numeric_limits<double>::infinity(), mx = 0.0;
    double wit_x = j0.a;
    for (int m = 0; m < samples; ++m) {
        double x = j0.a + (j0.b - j0.a) * (m + 0.5) / samples;
        double logd = 0.0;
        for (int k = 0; k < n; ++k) {
            const GietJet g = eval_giet_all(t, x);
            logd += std::log(g.jet.d1);
            x = g.jet.v;
        }
        const double dv = std::exp(logd);
        if (dv > mx) {
            mx = dv;
            wit_x = j0.a + (j0.b - j0.a) * (m + 0.5) / samples;
        }
        mn = std::min(mn, dv);
    }
    const double lhs = mx / mn;
    const double rhs = std::exp(abs_nonlinearity(t));
    return BoundReport::make("distortion", lhs, rhs, "max derivative at x=" + std::to_string(wit_x));
}

// ---------------------------------------------------------------------------
// Profile bounds along renormalisation

/// Sum over branches of the C^r norm of (profile - Id), the norm the paper
/// puts on the profile coordinate.
inline double profile_norm_sum(const Giet& t, int r) {
    double s = 0.0;
    for (const auto& p : t.profiles) s += profile_cr_norm(p, r);
    return s;
}

/// Per-level ratios ||pi_P(R^n T) - Id||_{C^1} / ||pi_P(T) - Id||_{C^2}. The
/// constant M of the bound is measured as the sup of the ratios; the report
/// compares against a configured regression baseline.
struct ProfileSequenceReport {
    std::vector<double> numerators;
    std::vector<double> ratios;
    double measured_constant = 0.0;
    double denominator = 0.0;
    std::vector<BoundReport> reports;
};

inline ProfileSequenceReport profile_c1_check(const RenormTrace& tr, double baseline_m) {
    ProfileSequenceReport out;
    out.denominator = profile_norm_sum(tr.levels[0].giet, 2);
    for (int n = 0; n <= tr.depth(); ++n) {
        const double num = profile_norm_sum(tr.levels[n].giet, 1);
        out.numerators.push_back(num);
        const double ratio = out.denominator > 0 ? num / out.denominator : 0.0;
        out.ratios.push_back(ratio);
        out.measured_constant = std::max(out.measured_constant, ratio);
        out.reports.push_back(BoundReport::make("profile_c1[n=" + std::to_string(n) + "]", num,
                                                baseline_m * out.denominator));
    }
    return out;
}

/// ||(phi_i^n)''|| <= M' ||(T^{-1})'|| ||T''|| with M' measured and compared
/// against a baseline.
struct C2SequenceReport {
    std::vector<double> sup_second;  ///< per level, max over branches
    double rhs_factor = 0.0;         ///< ||(T^{-1})'|| * ||T''||
    double measured_constant = 0.0;
    std::vector<BoundReport> reports;
};

inline double sup_deriv_giet(const Giet& t) {
    double mx = 0.0;
    for (int i = 0; i < t.intervals(); ++i) {
        const BranchMap b = branch_map(t, i);
        for (double s : dense_samples({&t.profiles[i]}))
            mx = std::max(mx, t.profiles[i].eval_all(s).d1 * b.cod.len() / b.dom.len());
    }
    return mx;
}

inline double inf_deriv_giet(const Giet& t) {
    double mn = std::numeric_limits<double>::infinity();
    for (int i = 0; i < t.intervals(); ++i) {
        const BranchMap b = branch_map(t, i);
        for (double s : dense_samples({&t.profiles[i]}))
            mn = std::min(mn, t.profiles[i].eval_all(s).d1 * b.cod.len() / b.dom.len());
    }
    return mn;
}

inline double sup_second_deriv_giet(const Giet& t) {
    double mx = 0.0;
    for (int i = 0; i < t.intervals(); ++i) {
        const BranchMap b = branch_map(t, i);
        for (double s : dense_samples({&t.profiles[i]}))
            mx = std::max(mx, std::fabs(t.profiles[i].eval_all(s).d2) * b.cod.len() / (b.dom.len() * b.dom.len()));
    }
    return mx;
}

inline C2SequenceReport c2_check(const RenormTrace& tr, double baseline_m) {
    C2SequenceReport out;
    const Giet& t = tr.levels[0].giet;
    out.rhs_factor = (1.0 / inf_deriv_giet(t)) * sup_second_deriv_giet(t);
    for (int n = 0; n <= tr.depth(); ++n) {
        double sup = 0.0;
        for (const auto& p : tr.levels[n].giet.profiles)
            for (double s : dense_samples({&p})) sup = std::max(sup, std::fabs(p.eval_all(s).d2));
        out.sup_second.push_back(sup);
        if (out.rhs_factor > 0) out.measured_constant = std::max(out.measured_constant, sup / out.rhs_factor);
        out.reports.push_back(BoundReport::make("c2[n=" + std::to_string(n) + "]", sup,
                                                baseline_m * out.rhs_factor));
    }
    return out;
}

/// sup |D eta(phi_i^n)| per level; the bound's K(.) is monotone in the input
/// size, so the suite checks the measured sups shrink along an amplitude ramp.
struct C3SequenceReport {
    std::vector<double> sup_eta_deriv;
    double overall_sup = 0.0;
};

inline C3SequenceReport c3_measure(const RenormTrace& tr) {
    C3SequenceReport out;
    for (int n = 0; n <= tr.depth(); ++n) {
        double sup = 0.0;
        for (const auto& p : tr.levels[n].giet.profiles)
            for (double s : dense_samples({&p})) sup = std::max(sup, std::fabs(p.eta_deriv(s)));
        out.sup_eta_deriv.push_back(sup);
        out.overall_sup = std::max(out.overall_sup, sup);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Composition formulas for second derivatives and D eta

/// Point data of a composition chain f_n = phi_n o ... o phi_1 evaluated at
/// one point, with both the direct recursion and the closed formulas of the
/// composition lemmas assembled from the same primitive evaluations.
struct ChainComparison {
    double direct_second = 0.0;
    double formula_second = 0.0;
    double direct_eta_deriv = 0.0;
    double formula_eta_deriv = 0.0;
};

inline ChainComparison compare_composition_formulas(const std::vector<const MonotoneMap*>& chain,
                                                    double x) {
    const int n = static_cast<int>(chain.size());
    std::vector<double> d1(n), d2(n), d3(n);  // phi_k data at the chain points
    std::vector<double> f1(n + 1), f2(n + 1), f3(n + 1);  // f_k derivatives at x
    f1[0] = 1.0;
    f2[0] = 0.0;
    f3[0] = 0.0;
    double y = x;
    for (int k = 0; k < n; ++k) {
        const Jet3 j = chain[k]->eval_all(std::clamp(y, 0.0, 1.0));
        d1[k] = j.d1;
        d2[k] = j.d2;
        d3[k] = j.d3;
        f1[k + 1] = d1[k] * f1[k];
        f2[k + 1] = d2[k] * f1[k] * f1[k] + d1[k] * f2[k];
        f3[k + 1] = d3[k] * f1[k] * f1[k] * f1[k] + 3.0 * d2[k] * f1[k] * f2[k] + d1[k] * f3[k];
        y = j.v;
    }

    ChainComparison out;
    out.direct_second = f2[n];
    out.direct_eta_deriv = f3[n] / f1[n] - (f2[n] / f1[n]) * (f2[n] / f1[n]);

    // Suffix derivative products: suffix[m] = (phi_n o ... o phi_{m+1})' at
    // the appropriate point = prod_{j > m} d1[j].
    std::vector<double> suffix(n + 1, 1.0);
    for (int m = n - 1; m >= 0; --m) suffix[m] = suffix[m + 1] * d1[m];

    // f_n'' = (f_{n-1}')^2 phi_n'' o f_{n-1} + sum_{k=2}^n (f_{n-k}')^2 *
    //         phi_{n-k+1}'' o f_{n-k} * (phi_n o ... o phi_{n-k+2})' o f_{n-k+1}.
    double formula = f1[n - 1] * f1[n - 1] * d2[n - 1];
    for (int k = 2; k <= n; ++k)
        formula += f1[n - k] * f1[n - k] * d2[n - k] * suffix[n - k + 1];
    out.formula_second = formula;

    // D eta(f_n) = sum_k [ Deta(phi_k) o f_{k-1} * (f_{k-1}')^2
    //                      + eta(phi_k) o f_{k-1} * f_{k-1}'' ].
    double formula3 = 0.0;
    for (int k = 0; k < n; ++k) {
        const double eta_k = d2[k] / d1[k];
        const double deta_k = d3[k] / d1[k] - eta_k * eta_k;
        formula3 += deta_k * f1[k] * f1[k] + eta_k * f2[k];
    }
    out.formula_eta_deriv = formula3;
    return out;
}

/// Second derivative of phi_n o ... o phi_1 at the sample points, assembled
/// through the closed composition formula.
inline std::vector<double> second_derivative_composition(const std::vector<const MonotoneMap*>& chain,
                                                         const std::vector<double>& xs) {
    std::vector<double> out;
    out.reserve(xs.size());
    for (double x : xs) out.push_back(compare_composition_formulas(chain, x).formula_second);
    return out;
}

/// D eta of the composition at the sample points, through the closed formula.
inline std::vector<double> eta_derivative_composition(const std::vector<const MonotoneMap*>& chain,
                                                      const std::vector<double>& xs) {
    std::vector<double> out;
    out.reserve(xs.size());
    for (double x : xs) out.push_back(compare_composition_formulas(chain, x).formula_eta_deriv);
    return out;
}

/// Max discrepancy of both composition formulas against the direct recursion
/// over a sample of points.
struct FormulaCheck {
    double second_error = 0.0;
    double eta_deriv_error = 0.0;
};

inline FormulaCheck composition_formula_check(const std::vector<const MonotoneMap*>& chain,
                                              int samples = 200) {
    FormulaCheck out;
    for (int m = 0; m <= samples; ++m) {
        const double x = static_cast<double>(m) / samples;
        const ChainComparison c = compare_composition_formulas(chain, x);
        out.second_error = std::max(out.second_error, std::fabs(c.direct_second - c.formula_second));
        out.eta_deriv_error =
            std::max(out.eta_deriv_error, std::fabs(c.direct_eta_deriv - c.formula_eta_deriv));
    }
    return out;
}

// ---------------------------------------------------------------------------
// The eta-Lipschitz constant of R restricted to profiles

/// d_eta(R_P T1, R_P T2) / d_eta(pi_P T1, pi_P T2) for two GIETs with equal
/// affine parts (the hypothesis of the Lipschitz proposition). The flag is
/// false when the input distance vanishes and the ratio is undefined.
struct LipschitzEstimate {
    double ratio = 0.0;
    bool defined = false;
    double distance_before = 0.0;
    double distance_after = 0.0;
};

inline LipschitzEstimate eta_lipschitz_estimate(const Giet& t1, const Giet& t2, const RauzyLoop& loop) {
    if (!(t1.affine.sigma == t2.affine.sigma)) throw InvalidInputError("eta_lipschitz: permutations differ");
    for (int i = 0; i < t1.intervals(); ++i) {
        if (std::fabs(t1.affine.lambda[i] - t2.affine.lambda[i]) > 1e-12 ||
            std::fabs(t1.affine.rho[i] - t2.affine.rho[i]) > 1e-12)
            throw InvalidInputError("eta_lipschitz: affine parts must coincide");
    }
    LipschitzEstimate out;
    out.distance_before = eta_distance_profiles(t1, t2);
    if (out.distance_before < 1e-14) return out;  // undefined ratio, flag stays false
    const Giet r1 = renormalize(t1, loop);
    const Giet r2 = renormalize(t2, loop);
    out.distance_after = eta_distance_profiles(r1, r2);
    out.ratio = out.distance_after / out.distance_before;
    out.defined = true;
    return out;
}

}  // namespace gietlab
