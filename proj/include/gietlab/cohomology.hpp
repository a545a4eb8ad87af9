#pragma once

#include <functional>

#include "gietlab/renorm.hpp"

namespace gietlab {

/// Piecewise-linear sampled function on [0,1] (sorted abscissae).
struct SampledFunction {
    std::vector<double> x;
    std::vector<double> y;

    double eval(double p) const {
        if (x.empty()) return 0.0;
        if (p <= x.front()) return y.front();
        if (p >= x.back()) return y.back();
        const auto it = std::upper_bound(x.begin(), x.end(), p);
        const std::size_t i = static_cast<std::size_t>(it - x.begin()) - 1;
        const double t = (p - x[i]) / (x[i + 1] - x[i]);
        return y[i] + t * (y[i + 1] - y[i]);
    }
};

// ---------------------------------------------------------------------------
// Special Birkhoff times

/// T^n(x) written through the renormalisation levels: an ascending sweep of
/// first-return applications (T-steps, then level-1 returns, ... up to the
/// deepest level that fits) followed by a descending sweep that consumes the
/// remainder exactly. Every coefficient is bounded by the largest return time
/// of one loop application.
struct SpecialDecomposition {
    std::vector<int> ascending;   ///< ascending[i] = applications of the level-i return map
    std::vector<int> descending;  ///< descending[i] = applications in the downward sweep
    int top_level = 0;
    double endpoint = 0.0;  ///< T^n(x) computed through the levels
    int max_coefficient = 0;
};

namespace detail {

/// Return time (in T-steps) of z under the first-return map to [0, x_i].
inline std::int64_t level_cost(const RenormTrace& tr, int level, double z) {
    const Level& lv = tr.levels[level];
    const int b = branch_index(lv.giet, std::clamp(z / lv.x, 0.0, 1.0));
    return lv.heights[b];
}

/// One application of the level-i return map.
inline double level_apply(const RenormTrace& tr, int level, double z) {
    const Level& lv = tr.levels[level];
    return lv.x * eval_giet(lv.giet, std::clamp(z / lv.x, 0.0, 1.0)).first;
}

}  // namespace detail

inline SpecialDecomposition special_birkhoff_decomposition(const RenormTrace& tr, std::int64_t n,
                                                           double x) {
    if (n < 0) throw InvalidInputError("special_birkhoff_decomposition: negative time");
    const int depth = tr.depth();
    SpecialDecomposition out;
    out.ascending.assign(depth + 1, 0);
    out.descending.assign(depth + 1, 0);
    std::int64_t remaining = n;
    double z = x;

    const Giet& base = tr.levels[0].giet;
    int level = 0;
    // Ascending sweep: prefer the deepest applicable level, consuming steps
    // of increasing size while they fit the budget.
    while (remaining > 0) {
        if (level < depth && z < tr.levels[level + 1].x &&
            detail::level_cost(tr, level + 1, z) <= remaining) {
            ++level;
            continue;
        }
        const std::int64_t cost = level == 0 ? 1 : detail::level_cost(tr, level, z);
        if (level > 0 && cost > remaining) break;  // descend
        z = level == 0 ? eval_giet(base, z).first : detail::level_apply(tr, level, z);
        remaining -= cost;
        ++out.ascending[level];
        if (out.ascending[level] > (1 << 20))
            throw InternalConsistencyError("special decomposition failed to ascend");
    }
    out.top_level = level;
    // Descending sweep.
    for (int j = level; j >= 0 && remaining > 0; --j) {
        while (remaining > 0) {
            const std::int64_t cost = j == 0 ? 1 : (z <= tr.levels[j].x ? detail::level_cost(tr, j, z)
                                                                        : remaining + 1);
            if (cost > remaining) break;
            z = j == 0 ? eval_giet(base, z).first : detail::level_apply(tr, j, z);
            remaining -= cost;
            ++out.descending[j];
        }
    }
    if (remaining != 0) throw InternalConsistencyError("special decomposition left a remainder");
    out.endpoint = z;
    for (int i = 0; i <= depth; ++i)
        out.max_coefficient = std::max({out.max_coefficient, out.ascending[i], out.descending[i]});
    return out;
}

// ---------------------------------------------------------------------------
// Birkhoff sums

/// S_n f(x) for a general observable, by direct iteration.
inline double birkhoff_sum_direct(const Giet& t, const std::function<double(double)>& f,
                                  std::int64_t n, double x) {
    double s = 0.0;
    for (std::int64_t j = 0; j < n; ++j) {
        s += f(x);
        x = eval_giet(t, x).first;
    }
    return s;
}

/// S_n log DT(x) through the special times: each level-i return application
/// at z contributes log D(R^i T)(z / x_i), so the cost is the number of
/// coefficients rather than n.
inline double birkhoff_sum_log_deriv_special(const RenormTrace& tr, std::int64_t n, double x) {
    const int depth = tr.depth();
    std::int64_t remaining = n;
    double z = x, sum = 0.0;
    const Giet& base = tr.levels[0].giet;
    auto contribute = [&](int level) {
        const Level& lv = tr.levels[level];
        const GietJet g = eval_giet_all(lv.giet, std::clamp(z / lv.x, 0.0, 1.0));
        sum += std::log(g.jet.d1);
        z = lv.x * g.jet.v;
    };
    int level = 0;
    while (remaining > 0) {
        if (level < depth && z < tr.levels[level + 1].x &&
            detail::level_cost(tr, level + 1, z) <= remaining) {
            ++level;
            continue;
        }
        const std::int64_t cost = level == 0 ? 1 : detail::level_cost(tr, level, z);
        if (level > 0 && cost > remaining) break;
        if (level == 0) {
            const GietJet g = eval_giet_all(base, z);
            sum += std::log(g.jet.d1);
            z = g.jet.v;
        } else {
            contribute(level);
        }
        remaining -= cost;
    }
    for (int j = level; j >= 0 && remaining > 0; --j) {
        while (remaining > 0) {
            const std::int64_t cost = j == 0 ? 1 : (z <= tr.levels[j].x ? detail::level_cost(tr, j, z)
                                                                        : remaining + 1);
            if (cost > remaining) break;
            if (j == 0) {
                const GietJet g = eval_giet_all(base, z);
                sum += std::log(g.jet.d1);
                z = g.jet.v;
            } else {
                contribute(j);
            }
            remaining -= cost;
        }
    }
    if (remaining != 0) throw InternalConsistencyError("special Birkhoff sum left a remainder");
    return sum;
}

/// sup over n <= N and over the sample points of |S_n f|.
struct BirkhoffBound {
    double sup = 0.0;
    std::int64_t worst_n = 0;
    double worst_x = 0.0;
};

inline BirkhoffBound birkhoff_bound(const Giet& t, const std::function<double(double)>& f,
                                    std::int64_t n_max, const std::vector<double>& xs) {
    BirkhoffBound out;
    for (double x0 : xs) {
        double s = 0.0, x = x0;
        for (std::int64_t n = 1; n <= n_max; ++n) {
            s += f(x);
            x = eval_giet(t, x).first;
            if (std::fabs(s) > out.sup) {
                out.sup = std::fabs(s);
                out.worst_n = n;
                out.worst_x = x0;
            }
        }
    }
    return out;
}

inline BirkhoffBound birkhoff_bound_log_deriv(const Giet& t, std::int64_t n_max,
                                              const std::vector<double>& xs) {
    return birkhoff_bound(t, [&](double x) { return std::log(eval_giet_all(t, x).jet.d1); }, n_max, xs);
}

// ---------------------------------------------------------------------------
// Cohomological equation

/// Solution of u o T - u = f along an orbit, resampled to a uniform grid.
/// The residual on fresh sample points is the correctness certificate.
struct CohomSolution {
    SampledFunction u;
    double residual_sup = 0.0;
    double birkhoff_sup = 0.0;     ///< certificate: sup |S_n f| over the probe
    double birkhoff_growth = 0.0;  ///< sup at 4N over sup at N
    std::int64_t orbit_length = 0;
    double min_orbit_gap = 0.0;  ///< conditioning indicator: largest gap between orbit points
};

struct CohomOptions {
    std::int64_t orbit_length = 200000;
    double base_point = 1e-7;
    int grid_nodes = 2049;
    std::int64_t certificate_n = 4000;
    double growth_tolerance = 1.5;
    int residual_samples = 2000;
};

inline CohomSolution solve_cohomological(const Giet& t, const std::function<double(double)>& f,
                                         const CohomOptions& opt = {}) {
    // Boundedness certificate first: the sups of |S_n f| must be stable when
    // the horizon is quadrupled.
    std::vector<double> probes{opt.base_point, 0.31, 0.77};
    const BirkhoffBound b1 = birkhoff_bound(t, f, opt.certificate_n, probes);
    const BirkhoffBound b4 = birkhoff_bound(t, f, 4 * opt.certificate_n, probes);
    CohomSolution sol;
    sol.birkhoff_sup = b4.sup;
    sol.birkhoff_growth = b1.sup > 0 ? b4.sup / b1.sup : 1.0;
    if (sol.birkhoff_growth > opt.growth_tolerance)
        throw BoundednessError("Birkhoff sums of the observable look unbounded (growth " +
                               std::to_string(sol.birkhoff_growth) + " from N to 4N)");

    // u(T^j x0) = S_j f(x0) along one long orbit.
    std::vector<std::pair<double, double>> pts;
    pts.reserve(static_cast<std::size_t>(opt.orbit_length));
    double x = opt.base_point, s = 0.0;
    for (std::int64_t j = 0; j < opt.orbit_length; ++j) {
        pts.emplace_back(x, s);
        s += f(x);
        x = eval_giet(t, x).first;
    }
    std::sort(pts.begin(), pts.end());
    sol.orbit_length = opt.orbit_length;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
        sol.min_orbit_gap = std::max(sol.min_orbit_gap, pts[i + 1].first - pts[i].first);

    // Monotone-neighbour resample onto the uniform grid, normalised to u(0)=0.
    std::vector<double> gx(opt.grid_nodes), gy(opt.grid_nodes);
    std::size_t cursor = 0;
    for (int i = 0; i < opt.grid_nodes; ++i) {
        const double p = static_cast<double>(i) / (opt.grid_nodes - 1);
        while (cursor + 1 < pts.size() && pts[cursor + 1].first <= p) ++cursor;
        if (cursor + 1 < pts.size() && pts[cursor + 1].first > pts[cursor].first) {
            const double tt =
                std::clamp((p - pts[cursor].first) / (pts[cursor + 1].first - pts[cursor].first), 0.0, 1.0);
            gy[i] = pts[cursor].second + tt * (pts[cursor + 1].second - pts[cursor].second);
        } else {
            gy[i] = pts[cursor].second;
        }
        gx[i] = p;
    }
    const double u0 = gy.front();
    for (double& v : gy) v -= u0;
    sol.u = SampledFunction{std::move(gx), std::move(gy)};

    // Residual on fresh points.
    Rng rng(1234567);
    double worst = 0.0;
    for (int i = 0; i < opt.residual_samples; ++i) {
        const double p = rng.uniform(1e-6, 1.0 - 1e-6);
        const double tp = eval_giet(t, p).first;
        worst = std::max(worst, std::fabs(sol.u.eval(tp) - sol.u.eval(p) - f(p)));
    }
    sol.residual_sup = worst;
    return sol;
}

// ---------------------------------------------------------------------------
// Invariant density and the conjugacy to the fixed point

struct ConjugacyMap {
    MonotoneMap h;  ///< conjugates T0 to T: h o T0 = T o h up to the residual
    double c0_residual = 0.0;
    double c1_distance_to_identity = 0.0;
    double break_point_mismatch = 0.0;
    SampledFunction density;  ///< the invariant density of T
    double density_min = 0.0;
    CohomSolution transfer;  ///< the underlying cohomological solution
};

inline ConjugacyMap invariant_density_and_conjugacy(const Giet& t, const Giet& t0,
                                                    const CohomOptions& opt = {}) {
    ConjugacyMap out;
    out.transfer = solve_cohomological(
        t, [&](double x) { return -std::log(eval_giet_all(t, x).jet.d1); }, opt);

    // mu = exp(u), normalised to integrate to one.
    const int n = static_cast<int>(out.transfer.u.x.size());
    std::vector<double> mu(n);
    for (int i = 0; i < n; ++i) mu[i] = std::exp(out.transfer.u.y[i]);
    double z = 0.0;
    for (int i = 0; i + 1 < n; ++i) z += 0.5 * (mu[i] + mu[i + 1]) / (n - 1);
    for (double& v : mu) v /= z;
    out.density = SampledFunction{out.transfer.u.x, mu};
    out.density_min = *std::min_element(mu.begin(), mu.end());
    if (out.density_min < 1e-6) throw Error("degenerate invariant density (vanishing somewhere)");

    // H(x) = int_0^x mu, an exchange of coordinates sending T to Lebesgue.
    std::vector<double> hx = out.transfer.u.x, hv(n, 0.0), hd1 = mu, hd2(n), hd3(n, 0.0);
    for (int i = 1; i < n; ++i) hv[i] = hv[i - 1] + 0.5 * (mu[i - 1] + mu[i]) / (n - 1);
    const double total = hv.back();
    for (int i = 0; i < n; ++i) {
        hv[i] /= total;
        hd1[i] = mu[i] / total;
    }
    hv.front() = 0.0;
    hv.back() = 1.0;
    const double dh = 1.0 / (n - 1);
    for (int i = 0; i < n; ++i) {
        const int a = std::max(0, i - 1), b = std::min(n - 1, i + 1);
        hd2[i] = (hd1[b] - hd1[a]) / ((b - a) * dh);
    }
    const MonotoneMap big_h(std::move(hx), std::move(hv), std::move(hd1), std::move(hd2), std::move(hd3));
    out.h = invert(big_h);

    // Residual of the conjugacy identity h o T0 = T o h and the image of the
    // break points of T0.
    Rng rng(7654321);
    double worst = 0.0;
    for (int i = 0; i < 2000; ++i) {
        const double p = rng.uniform(1e-6, 1.0 - 1e-6);
        const double lhs = out.h.eval(eval_giet(t0, p).first);
        const double rhs = eval_giet(t, out.h.eval(p)).first;
        worst = std::max(worst, std::fabs(lhs - rhs));
    }
    out.c0_residual = worst;
    out.c1_distance_to_identity = profile_cr_norm(out.h, 1);
    const auto u0 = t0.affine.top_breaks();
    const auto u1 = t.affine.top_breaks();
    for (int i = 1; i < t.intervals(); ++i)
        out.break_point_mismatch = std::max(out.break_point_mismatch, std::fabs(out.h.eval(u0[i]) - u1[i]));
    return out;
}

// ---------------------------------------------------------------------------
// Fine grids and the C^{1+delta} ratio criterion

struct FineGridReport {
    bool axioms_hold = false;
    int refinement_bound = 0;      ///< max atoms of level n+1 inside one atom of level n
    double adjacency_constant = 0.0;  ///< max ratio of adjacent atom lengths
    std::vector<double> ratio_discrepancy;  ///< per level: max | |I|/|J| - |hI|/|hJ| |
    DecayFit discrepancy_fit;
    double delta_estimate = 0.0;  ///< fitted exponent, reported not asserted
};

/// Atoms of the level-n dynamical partition sorted left to right.
inline std::vector<Interval> sorted_atoms(const DynamicalPartition& p) {
    std::vector<Interval> atoms;
    for (const auto& tower : p.towers) atoms.insert(atoms.end(), tower.begin(), tower.end());
    std::sort(atoms.begin(), atoms.end(), [](const Interval& a, const Interval& b) { return a.a < b.a; });
    return atoms;
}

inline FineGridReport fine_grid_ratio_test(const std::function<double(double)>& h,
                                           const RenormTrace& t0_trace, int max_level) {
    FineGridReport rep;
    std::vector<Interval> prev;
    rep.axioms_hold = true;
    for (int n = 1; n <= max_level; ++n) {
        const auto atoms = sorted_atoms(dynamical_partition(t0_trace, n));
        if (!prev.empty()) {
            std::size_t j = 0;
            for (const auto& big : prev) {
                int inside = 0;
                while (j < atoms.size() && atoms[j].b <= big.b + 1e-12) {
                    if (atoms[j].a >= big.a - 1e-12) ++inside;
                    ++j;
                }
                rep.refinement_bound = std::max(rep.refinement_bound, inside);
                if (inside == 0) rep.axioms_hold = false;
            }
        }
        double disc = 0.0;
        for (std::size_t i = 0; i + 1 < atoms.size(); ++i) {
            const double li = atoms[i].len(), lj = atoms[i + 1].len();
            rep.adjacency_constant = std::max({rep.adjacency_constant, li / lj, lj / li});
            const double hi = h(atoms[i].b) - h(atoms[i].a);
            const double hj = h(atoms[i + 1].b) - h(atoms[i + 1].a);
            if (hj > 0) disc = std::max(disc, std::fabs(li / lj - hi / hj));
        }
        rep.ratio_discrepancy.push_back(disc);
        prev = atoms;
    }
    rep.discrepancy_fit = fit_decay_prefix(rep.ratio_discrepancy);
    if (rep.discrepancy_fit.rate > 0 && rep.discrepancy_fit.rate < 1)
        rep.delta_estimate = -std::log(rep.discrepancy_fit.rate);
    return rep;
}

/// Strictly increasing singular homeomorphism (the Bernoulli-measure
/// distribution function with weight a != 1/2): continuous, monotone, and
/// nowhere differentiable in the relevant sense. Negative control for the
/// ratio test.
inline double singular_self_affine(double x, double a = 0.3, int bits = 48) {
    double y = 0.0, mass = 1.0;
    for (int i = 0; i < bits && x > 0.0; ++i) {
        x *= 2.0;
        if (x >= 1.0) {
            y += mass * a;
            mass *= (1.0 - a);
            x -= 1.0;
        } else {
            mass *= a;
        }
    }
    return y;
}

// ---------------------------------------------------------------------------
// Hoelder seminorm estimation

/// max over sampled pairs of |u(x)-u(y)| / |x-y|^delta, with pair subsampling.
inline double holder_seminorm(const SampledFunction& u, double delta, int max_points = 600) {
    if (delta <= 0.0 || delta > 1.0) throw InvalidInputError("holder_seminorm: delta in (0,1]");
    const int n = static_cast<int>(u.x.size());
    const int stride = std::max(1, n / max_points);
    double sup = 0.0;
    for (int i = 0; i < n; i += stride)
        for (int j = i + stride; j < n; j += stride) {
            const double dx = std::fabs(u.x[j] - u.x[i]);
            if (dx < 1e-12) continue;
            sup = std::max(sup, std::fabs(u.y[j] - u.y[i]) / std::pow(dx, delta));
        }
    return sup;
}

inline double sup_norm(const SampledFunction& u) {
    double s = 0.0;
    for (double v : u.y) s = std::max(s, std::fabs(v));
    return s;
}

}  // namespace gietlab
