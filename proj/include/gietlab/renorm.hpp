#pragma once

#include <cstdint>
#include <vector>

#include "gietlab/giet.hpp"
#include "gietlab/rauzy.hpp"

namespace gietlab {

inline constexpr double kConnectionTolerance = 1e-12;

/// One elementary Rauzy-Veech step applied to a GIET: induce on the interval
/// obtained by cutting the loser off the right end, and rescale back to
/// [0,1]. New branch profiles are resampled onto the standard uniform grid;
/// branches untouched by the step keep their exact data.
struct StepOutcome {
    Giet giet;
    double scale;  ///< length of the induction interval before rescaling
};

namespace detail {

/// Hermite data of t -> (y(t) - y(0)) / (y(1) - y(0)) on the uniform grid,
/// where jets(t) tracks y and its first three t-derivatives.
inline MonotoneMap normalized_from_jets(const std::function<Jet3(double)>& jets,
                                        int n = kDefaultGridSize) {
    const auto grid = MonotoneMap::uniform_grid(n);
    const double y0 = jets(0.0).v, y1 = jets(1.0).v;
    const double span = y1 - y0;
    std::vector<double> v(n), d1(n), d2(n), d3(n);
    for (int i = 0; i < n; ++i) {
        const Jet3 j = jets(grid[i]);
        v[i] = (j.v - y0) / span;
        d1[i] = j.d1 / span;
        d2[i] = j.d2 / span;
        d3[i] = j.d3 / span;
    }
    v.front() = 0.0;
    v.back() = 1.0;
    return MonotoneMap(std::vector<double>(grid), std::move(v), std::move(d1), std::move(d2), std::move(d3));
}

}  // namespace detail

inline StepOutcome rauzy_step_giet(const Giet& t, StepKind kind, int step_index = 0,
                                   int grid = kDefaultGridSize) {
    const int d = t.intervals();
    const auto& sig = t.affine.sigma;
    const auto u = t.affine.top_breaks();
    const auto v = t.affine.bottom_breaks();
    const int k = sig.inverse(d - 1);
    const double lam_last = t.affine.lambda[d - 1];
    const double beta_last = 1.0 - v[d - 1];

    if (std::fabs(lam_last - beta_last) < kConnectionTolerance)
        throw ConnectionError("winner and loser lengths coincide", step_index);
    const bool top_wins = lam_last > beta_last;
    if (top_wins != (kind == StepKind::Top))
        throw NotInDomainError("step kind does not match the geometry (wrong Rauzy path)");

    const auto [new_sigma, elem] = rauzy_step(sig, kind);
    const int jd = sig(d - 1);  // bottom interval hit by the last top branch

    std::vector<double> nl(d), nr(d);
    std::vector<MonotoneMap> np(d, MonotoneMap::identity(2));
    double scale;

    if (top_wins) {
        scale = v[d - 1];
        const double s_star = (v[d - 1] - u[d - 1]) / lam_last;
        const MonotoneMap& phi_d = t.profiles[d - 1];
        const MonotoneMap& phi_k = t.profiles[k];
        const double w_norm = phi_d.eval(s_star);           // split of the image interval
        const double beta_jd = t.affine.bottom_length(jd);  // length of that image interval

        for (int i = 0; i < d; ++i) {
            if (i == k) continue;
            nl[i] = t.affine.lambda[i];
            nr[i] = t.affine.rho[i];
            np[i] = t.profiles[i];
        }
        nl[d - 1] = v[d - 1] - u[d - 1];
        nr[d - 1] = beta_jd * w_norm / nl[d - 1];
        np[d - 1] = phi_d.is_identity()
                        ? MonotoneMap::identity()
                        : detail::normalized_from_jets(
                              [&](double tt) {
                                  Jet3 j = phi_d.eval_all(std::min(s_star * tt, 1.0));
                                  j.d1 *= s_star;
                                  j.d2 *= s_star * s_star;
                                  j.d3 *= s_star * s_star * s_star;
                                  return j;
                              },
                              grid);

        nl[k] = t.affine.lambda[k];
        nr[k] = beta_jd * (1.0 - w_norm) / nl[k];
        if (phi_d.is_identity() && phi_k.is_identity()) {
            np[k] = MonotoneMap::identity();
        } else {
            const double b = beta_last / lam_last;  // inner affine map has slope b, offset s*
            np[k] = detail::normalized_from_jets(
                [&](double tt) {
                    const Jet3 jk = phi_k.eval_all(tt);
                    const Jet3 inner{std::min(s_star + b * jk.v, 1.0), b * jk.d1, b * jk.d2, b * jk.d3};
                    return chain(phi_d.eval_all(inner.v), inner);
                },
                grid);
        }
    } else {
        scale = u[d - 1];
        const double q_star = (u[d - 1] - v[d - 1]) / beta_last;
        const MonotoneMap& phi_d = t.profiles[d - 1];
        const MonotoneMap& phi_k = t.profiles[k];
        const double t_p = phi_k.inverse_eval(q_star);
        const double lam_k = t.affine.lambda[k];
        const double beta_jd = t.affine.bottom_length(jd);

        for (int i = 0; i < k; ++i) {
            nl[i] = t.affine.lambda[i];
            nr[i] = t.affine.rho[i];
            np[i] = t.profiles[i];
        }
        for (int i = k + 1; i <= d - 2; ++i) {
            nl[i + 1] = t.affine.lambda[i];
            nr[i + 1] = t.affine.rho[i];
            np[i + 1] = t.profiles[i];
        }

        nl[k] = lam_k * t_p;
        nr[k] = (u[d - 1] - v[d - 1]) / nl[k];
        np[k] = phi_k.is_identity()
                    ? MonotoneMap::identity()
                    : detail::normalized_from_jets(
                          [&](double tt) {
                              Jet3 j = phi_k.eval_all(std::min(t_p * tt, 1.0));
                              j.d1 *= t_p;
                              j.d2 *= t_p * t_p;
                              j.d3 *= t_p * t_p * t_p;
                              return j;
                          },
                          grid);

        nl[k + 1] = lam_k * (1.0 - t_p);
        nr[k + 1] = beta_jd / nl[k + 1];
        if (phi_d.is_identity() && phi_k.is_identity()) {
            np[k + 1] = MonotoneMap::identity();
        } else {
            const double r = beta_last / t.affine.lambda[d - 1];
            np[k + 1] = detail::normalized_from_jets(
                [&](double tt) {
                    const double arg = std::min(t_p + (1.0 - t_p) * tt, 1.0);
                    Jet3 jk = phi_k.eval_all(arg);
                    const double sc = (1.0 - t_p) * r;
                    const Jet3 inner{std::clamp(r * (jk.v - q_star), 0.0, 1.0), sc * jk.d1,
                                     sc * (1.0 - t_p) * jk.d2, sc * (1.0 - t_p) * (1.0 - t_p) * jk.d3};
                    return chain(phi_d.eval_all(inner.v), inner);
                },
                grid);
        }
    }

    for (double& l : nl) l /= scale;
    Giet out(Aiet(new_sigma, nl, nr), std::move(np));
    return StepOutcome{std::move(out), scale};
}

/// R(T) for the full loop word. Throws ConnectionError with the failing step
/// index when the map leaves the renormalisable set.
struct RenormOutcome {
    Giet giet;
    double scale;  ///< X(T): right endpoint of the induction interval
};

inline RenormOutcome renormalize_once(const Giet& t, const RauzyLoop& loop,
                                      int grid = kDefaultGridSize) {
    if (!(t.affine.sigma == loop.base)) throw NotInDomainError("permutation differs from the loop base");
    Giet cur = t;
    double scale = 1.0;
    for (std::size_t s = 0; s < loop.steps.size(); ++s) {
        StepOutcome o = rauzy_step_giet(cur, loop.steps[s], static_cast<int>(s), grid);
        cur = std::move(o.giet);
        scale *= o.scale;
    }
    return RenormOutcome{std::move(cur), scale};
}

inline Giet renormalize(const Giet& t, const RauzyLoop& loop, int grid = kDefaultGridSize) {
    return renormalize_once(t, loop, grid).giet;
}

/// Snapshot of one renormalisation level.
struct Level {
    Giet giet;
    double x;                           ///< x_n: induction interval endpoint in the base map
    std::vector<std::int64_t> heights;  ///< first-return times l^j_n (exact integers)
};

/// The sequence T, RT, R^2 T, ..., each level an immutable snapshot.
struct RenormTrace {
    RauzyLoop loop;
    std::vector<Level> levels;

    int depth() const { return static_cast<int>(levels.size()) - 1; }
    const Giet& at(int n) const { return levels[n].giet; }
    double x(int n) const { return levels[n].x; }
};

/// Renormalise n_levels times, recording every level. x_n is the product of
/// the per-step induction scales; heights follow the loop matrix cocycle.
inline RenormTrace build_trace(const Giet& t, const RauzyLoop& loop, int n_levels,
                               int grid = kDefaultGridSize) {
    RenormTrace tr;
    tr.loop = loop;
    const int d = t.intervals();
    Level l0{t, 1.0, std::vector<std::int64_t>(d, 1)};
    tr.levels.push_back(std::move(l0));
    for (int n = 1; n <= n_levels; ++n) {
        const Level& prev = tr.levels.back();
        RenormOutcome o = renormalize_once(prev.giet, loop, grid);
        Level lv{std::move(o.giet), prev.x * o.scale, loop.matrix * prev.heights};
        if (lv.x >= prev.x)
            throw InternalConsistencyError("induction interval failed to shrink");
        tr.levels.push_back(std::move(lv));
    }
    return tr;
}

// ---------------------------------------------------------------------------
// Dynamical partitions

/// The towers of level n: floors I^j_n inside [0, x_n], their first-return
/// heights, and the tower intervals T^k(I^j_n). Interiors of tower intervals
/// avoid break points; the union tiles [0,1].
struct DynamicalPartition {
    int level = 0;
    double x_n = 1.0;
    std::vector<Interval> floors;
    std::vector<std::int64_t> heights;
    std::vector<std::vector<Interval>> towers;  ///< towers[j][k] = T^k(I^j_n)
    double delta = 0.0;                         ///< max interval length
    double measure = 0.0;                       ///< total length of all intervals
};

namespace detail {

/// Image of [a,b] under the branch of t whose interior contains it. The
/// endpoints may sit exactly on break points; the midpoint selects the branch
/// and the closure of the branch maps the endpoints. The slack scales with
/// the interval: floors of deep levels carry relative coordinate noise, while
/// a genuine straddle (a connection) overlaps by a length-sized amount and
/// still trips the check.
inline Interval map_interval(const Giet& t, const Interval& iv, const std::vector<double>& u) {
    const int i = branch_index(t, 0.5 * (iv.a + iv.b));
    const double slack = 1e-11 + 1e-2 * iv.len();
    if (iv.a < u[i] - slack || iv.b > u[i + 1] + slack)
        throw InternalConsistencyError("tower interval straddles a break point");
    const BranchMap b = branch_map(t, i);
    return Interval{b.eval(std::max(iv.a, u[i])), b.eval(std::min(iv.b, u[i + 1]))};
}

}  // namespace detail

/// Per-level partition statistics computed by streaming over all tower
/// intervals (nothing is stored). Throws BudgetError if the interval count
/// would exceed `budget`.
struct PartitionSummary {
    int level = 0;
    double x_n = 1.0;
    double delta = 0.0;
    double measure = 0.0;
    std::int64_t intervals = 0;
};

inline PartitionSummary partition_summary(const RenormTrace& tr, int n, std::int64_t budget = 80000000) {
    if (n > tr.depth()) throw InvalidInputError("partition_summary: level beyond the trace depth");
    const Level& lv = tr.levels[n];
    const Giet& base = tr.levels[0].giet;
    const auto u0 = base.affine.top_breaks();
    const auto breaks = lv.giet.affine.top_breaks();

    PartitionSummary s;
    s.level = n;
    s.x_n = lv.x;
    std::int64_t total = 0;
    for (auto h : lv.heights) total += h;
    if (total > budget)
        throw BudgetError("partition enumeration over budget: " + std::to_string(total) + " intervals");

    const int d = base.intervals();
    for (int j = 0; j < d; ++j) {
        Interval iv{lv.x * breaks[j], lv.x * breaks[j + 1]};
        for (std::int64_t k = 0; k < lv.heights[j]; ++k) {
            s.delta = std::max(s.delta, iv.len());
            s.measure += iv.len();
            ++s.intervals;
            if (k + 1 < lv.heights[j]) iv = detail::map_interval(base, iv, u0);
        }
    }
    return s;
}

/// Full tower structure with every interval stored; intended for moderate
/// levels (the interval count is checked against `budget`).
inline DynamicalPartition dynamical_partition(const RenormTrace& tr, int n, std::int64_t budget = 2000000) {
    if (n > tr.depth()) throw InvalidInputError("dynamical_partition: level beyond the trace depth");
    const Level& lv = tr.levels[n];
    const Giet& base = tr.levels[0].giet;
    const auto u0 = base.affine.top_breaks();
    const auto breaks = lv.giet.affine.top_breaks();

    DynamicalPartition p;
    p.level = n;
    p.x_n = lv.x;
    p.heights = lv.heights;

    std::int64_t total = 0;
    for (auto h : lv.heights) total += h;
    if (total > budget)
        throw BudgetError("dynamical_partition over budget: " + std::to_string(total) + " intervals");

    const int d = base.intervals();
    for (int j = 0; j < d; ++j) {
        Interval iv{lv.x * breaks[j], lv.x * breaks[j + 1]};
        p.floors.push_back(iv);
        std::vector<Interval> tower;
        tower.reserve(static_cast<std::size_t>(lv.heights[j]));
        for (std::int64_t k = 0; k < lv.heights[j]; ++k) {
            tower.push_back(iv);
            p.delta = std::max(p.delta, iv.len());
            p.measure += iv.len();
            if (k + 1 < lv.heights[j]) iv = detail::map_interval(base, iv, u0);
        }
        p.towers.push_back(std::move(tower));
    }
    return p;
}

// ---------------------------------------------------------------------------
// Exact orbit backend

/// Ground-truth evaluation of the j-th branch of R^n T at x (a point of the
/// branch's domain in level-n coordinates), by iterating the base map T
/// exactly l^j_n times. No per-level resampling enters; this is the oracle
/// the resampled backend is validated against.
inline double orbit_eval(const RenormTrace& tr, int n, int branch, double x,
                         std::int64_t budget = 10000000) {
    if (n > tr.depth()) throw InvalidInputError("orbit_eval: level beyond the trace depth");
    const Level& lv = tr.levels[n];
    const Giet& base = tr.levels[0].giet;
    const auto breaks = lv.giet.affine.top_breaks();
    if (branch < 0 || branch >= base.intervals()) throw InvalidInputError("orbit_eval: branch index");
    if (x < breaks[branch] - 1e-12 || x > breaks[branch + 1] + 1e-12)
        throw InvalidInputError("orbit_eval: point outside the branch domain");
    const std::int64_t steps = lv.heights[branch];
    if (steps > budget)
        throw BudgetError("orbit_eval over budget: " + std::to_string(steps) + " iterations");
    double p = lv.x * x;
    for (std::int64_t k = 0; k < steps; ++k) p = eval_giet(base, p).first;
    return p / lv.x;
}

}  // namespace gietlab
