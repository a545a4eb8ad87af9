#pragma once

#include <optional>

#include "gietlab/systems.hpp"

namespace gietlab {

/// Position of a GIET relative to the fixed point in the product coordinates
/// (unstable, stable, profile): chart coordinates of the affine part plus the
/// eta-distance of the profile tuple from the identities.
struct ProductCoords {
    Eigen::VectorXd u;
    Eigen::VectorXd s;
    double d_eta = 0.0;

    double radius() const { return std::max({u.size() ? u.lpNorm<Eigen::Infinity>() : 0.0,
                                             s.size() ? s.lpNorm<Eigen::Infinity>() : 0.0, d_eta}); }
};

inline ProductCoords product_coords(const System& sys, const Giet& t) {
    auto [a, b] = chart_from_aiet(sys, t.affine);
    const int nu = static_cast<int>(sys.split.unstable_mu.cols());
    ProductCoords c;
    c.u.resize(a.size() + nu);
    c.u.head(a.size()) = a;
    c.u.tail(nu) = b.head(nu);
    c.s = b.tail(b.size() - nu);
    double s = 0.0;
    for (const auto& p : t.profiles)
        if (!p.is_identity()) s += simpson([&](double x) { return std::fabs(p.eta(x)); }, 0.0, 1.0, 256);
    c.d_eta = s;
    return c;
}

/// Assemble the GIET with stable coordinates s, unstable coordinates u and
/// branch profiles h (identity profiles realise h = 0).
inline Giet giet_from_coords(const System& sys, const Eigen::VectorXd& s, const Eigen::VectorXd& u,
                             const std::vector<MonotoneMap>& h) {
    const int d = sys.d();
    const int nu = static_cast<int>(sys.split.unstable_mu.cols());
    Eigen::VectorXd a = u.head(d - 1);
    Eigen::VectorXd b(nu + s.size());
    b.head(nu) = u.tail(nu);
    b.tail(s.size()) = s;
    return Giet(aiet_from_chart(sys, a, b), h);
}

// ---------------------------------------------------------------------------
// Invariant cones

/// Membership of x in the cone C_base^delta (||s|| <= delta ||u||, profile
/// eta-distance <= delta ||u||) and the measured unstable expansion of the
/// difference under one application of R.
struct ConeCheck {
    bool in_cone = false;
    double u_norm = 0.0;
    double s_norm = 0.0;
    double d_eta = 0.0;
    double expansion = 0.0;        ///< ||u(Rx) - u(R base)|| / ||u(x) - u(base)||
    double delta_ratio_after = 0.0;  ///< max(s, d_eta)/||u|| of the image difference
};

inline ConeCheck cone_check(const System& sys, const Giet& x, const Giet& base, double delta) {
    ConeCheck out;
    const ProductCoords cx = product_coords(sys, x);
    const ProductCoords cb = product_coords(sys, base);
    out.u_norm = (cx.u - cb.u).norm();
    out.s_norm = (cx.s - cb.s).norm();
    double de = 0.0;
    for (int i = 0; i < x.intervals(); ++i) de += eta_distance(x.profiles[i], base.profiles[i]);
    out.d_eta = de;
    out.in_cone = out.s_norm <= delta * out.u_norm && out.d_eta <= delta * out.u_norm;

    if (out.u_norm > 0) {
        const Giet rx = renormalize(x, sys.loop);
        const Giet rb = renormalize(base, sys.loop);
        const ProductCoords rcx = product_coords(sys, rx);
        const ProductCoords rcb = product_coords(sys, rb);
        const double ru = (rcx.u - rcb.u).norm();
        out.expansion = ru / out.u_norm;
        double rde = 0.0;
        for (int i = 0; i < x.intervals(); ++i) rde += eta_distance(rx.profiles[i], rb.profiles[i]);
        if (ru > 0) out.delta_ratio_after = std::max((rcx.s - rcb.s).norm(), rde) / ru;
    }
    return out;
}

// ---------------------------------------------------------------------------
// The shooting scheme

struct ShadowingProblem {
    Eigen::VectorXd s;           ///< stable affine coordinates
    std::vector<MonotoneMap> h;  ///< branch profiles (identities for h = 0)
    int n_max = 10;
    double escape_radius = 1e-2;
    bool x0_slice = false;  ///< require vanishing total non-linearity
    enum class Method { Corrections, Bisection } method = Method::Corrections;
    double noise_floor = 1e-11;
    int grid = kDefaultGridSize;  ///< resampling grid for the deep runs
};

struct ShadowingResult {
    Eigen::VectorXd u_star;
    bool success = false;
    int achieved_depth = 0;
    int stall_depth = 0;  ///< first depth whose correction hit the numerical floor (0: none)
    std::vector<double> dist_c0;  ///< per level, distance to T0
    std::vector<double> dist_c1;
    std::vector<double> dist_eta;
    std::vector<double> correction_norms;  ///< ||v_n|| per depth (corrections method)
    DecayFit c1_fit;
    DecayFit correction_fit;
    std::vector<std::pair<double, int>> search_trace;  ///< bisection: (u, escape depth)
};

namespace detail {

struct OrbitProbe {
    int escape_depth;  ///< first level whose coordinates leave the ball; n_max+1 if none
    Eigen::VectorXd u_at_depth;  ///< unstable coordinates at min(escape, requested) level
    std::vector<Giet> levels;    ///< filled only when requested
};

inline OrbitProbe run_orbit(const System& sys, const ShadowingProblem& pb, const Eigen::VectorXd& u,
                            int depth, bool keep_levels) {
    OrbitProbe probe;
    probe.escape_depth = depth + 1;
    Giet cur;
    try {
        cur = giet_from_coords(sys, pb.s, u, pb.h);
    } catch (const Error&) {
        probe.escape_depth = 0;
        probe.u_at_depth = u;
        return probe;
    }
    if (keep_levels) probe.levels.push_back(cur);
    ProductCoords c = product_coords(sys, cur);
    probe.u_at_depth = c.u;
    for (int k = 1; k <= depth; ++k) {
        try {
            cur = renormalize(cur, sys.loop, pb.grid);
        } catch (const Error&) {
            probe.escape_depth = k;
            return probe;
        }
        c = product_coords(sys, cur);
        probe.u_at_depth = c.u;
        if (keep_levels) probe.levels.push_back(cur);
        if (c.radius() > pb.escape_radius) {
            probe.escape_depth = k;
            return probe;
        }
    }
    return probe;
}

}  // namespace detail

/// Unstable block of the derivative of R at T0, in the splitting's u-basis,
/// measured by central differences along the exact AIET path.
inline Eigen::MatrixXd unstable_linearization(const System& sys) {
    const int dim_u = sys.split.unstable_dim();
    const int dim_s = sys.split.stable_dim();
    const std::vector<MonotoneMap> id(sys.d(), MonotoneMap::identity(2));
    const double h = 1e-7;
    Eigen::MatrixXd lam(dim_u, dim_u);
    for (int c = 0; c < dim_u; ++c) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(dim_u);
        e(c) = h;
        const Giet tp = giet_from_coords(sys, Eigen::VectorXd::Zero(dim_s), e, id);
        const Giet tm = giet_from_coords(sys, Eigen::VectorXd::Zero(dim_s), -e, id);
        const ProductCoords cp = product_coords(sys, renormalize(tp, sys.loop));
        const ProductCoords cm = product_coords(sys, renormalize(tm, sys.loop));
        lam.col(c) = (cp.u - cm.u) / (2.0 * h);
    }
    return lam;
}

/// Find the unstable coordinate whose orbit shadows the fixed point: either
/// the depth-by-depth correction scheme (damped quasi-Newton on the unstable
/// coordinates of R^n, preconditioned by the inverse powers of the unstable
/// linearisation -- the numerical analogue of the correction lemma) or, for
/// one-dimensional unstable spaces, bisection on the escape side.
inline ShadowingResult shoot(const System& sys, const ShadowingProblem& pb) {
    const int dim_u = sys.split.unstable_dim();
    if (static_cast<int>(pb.h.size()) != sys.d())
        throw InvalidInputError("shoot: need one profile per interval");
    if (pb.x0_slice) {
        double total = 0.0;
        for (const auto& p : pb.h) total += p.total_eta();
        if (std::fabs(total) > 1e-9)
            throw InvalidInputError("shoot: profiles violate the zero total non-linearity slice");
    }

    ShadowingResult res;
    Eigen::VectorXd v = Eigen::VectorXd::Zero(dim_u);

    if (pb.method == ShadowingProblem::Method::Bisection) {
        if (dim_u != 1) throw InvalidInputError("bisection search needs a one-dimensional unstable space");
        auto escape = [&](double uu) {
            Eigen::VectorXd u1(1);
            u1(0) = uu;
            const auto probe = detail::run_orbit(sys, pb, u1, pb.n_max, false);
            res.search_trace.emplace_back(uu, probe.escape_depth);
            const double side = probe.u_at_depth(0);
            return std::make_pair(probe.escape_depth, side);
        };
        double lo = -pb.escape_radius, hi = pb.escape_radius;
        auto [dlo, side_lo] = escape(lo);
        auto [dhi, side_hi] = escape(hi);
        if (side_lo * side_hi > 0)
            throw NoShadowError("escape side does not flip across the search box", std::max(dlo, dhi));
        for (int it = 0; it < 80; ++it) {
            const double mid = 0.5 * (lo + hi);
            auto [dm, side_m] = escape(mid);
            (void)dm;
            if (side_m * side_lo > 0) lo = mid;
            else hi = mid;
            if (hi - lo < 1e-15) break;
        }
        v(0) = 0.5 * (lo + hi);
    } else {
        // Newton on the unstable coordinate of R^n, one depth at a time. The
        // unknown is expressed as w = Lambda^{-n} z: in the scaled variable z
        // the Jacobian has O(1) columns for every unstable direction, so the
        // finite differences stay conditioned even when the per-level
        // multipliers are orders of magnitude apart.
        const Eigen::MatrixXd lam_inv = unstable_linearization(sys).inverse();
        Eigen::MatrixXd lam_inv_n = Eigen::MatrixXd::Identity(dim_u, dim_u);
        for (int n = 1; n <= pb.n_max; ++n) {
            lam_inv_n = lam_inv_n * lam_inv;
            auto probe = detail::run_orbit(sys, pb, v, n, false);
            if (probe.escape_depth <= n - 1)
                throw NoShadowError("orbit escaped below the correction depth", probe.escape_depth);
            Eigen::VectorXd g = probe.u_at_depth;
            double best = g.norm();
            Eigen::VectorXd w = Eigen::VectorXd::Zero(dim_u), best_w = w;
            for (int newton = 0; newton < 6 && best > pb.noise_floor; ++newton) {
                const double dz = std::clamp(0.3 * best, 1e-13, 1e-3);
                Eigen::MatrixXd jz(dim_u, dim_u);
                bool fd_ok = true;
                for (int c = 0; c < dim_u && fd_ok; ++c) {
                    Eigen::VectorXd e = Eigen::VectorXd::Zero(dim_u);
                    e(c) = dz;
                    const auto pp = detail::run_orbit(sys, pb, v + w + lam_inv_n * e, n, false);
                    const auto pm = detail::run_orbit(sys, pb, v + w - lam_inv_n * e, n, false);
                    if (pp.escape_depth <= n - 1 || pm.escape_depth <= n - 1) {
                        fd_ok = false;
                        break;
                    }
                    jz.col(c) = (pp.u_at_depth - pm.u_at_depth) / (2.0 * dz);
                }
                if (!fd_ok) break;
                const Eigen::VectorXd dzstep = jz.colPivHouseholderQr().solve(g);
                double damp = 1.0;
                bool improved = false;
                for (int half = 0; half < 8; ++half) {
                    const Eigen::VectorXd cand = w - damp * (lam_inv_n * dzstep);
                    const auto pc = detail::run_orbit(sys, pb, v + cand, n, false);
                    if (pc.escape_depth > n - 1 && pc.u_at_depth.norm() < best) {
                        w = cand;
                        g = pc.u_at_depth;
                        best = g.norm();
                        best_w = w;
                        improved = true;
                        break;
                    }
                    damp *= 0.5;
                }
                if (!improved) break;
            }
            v += best_w;
            res.correction_norms.push_back(best_w.norm());
            // Deep levels cannot be corrected below the reinjected numerical
            // noise: stop deepening there and let the free orbit decide the
            // achieved depth. Only an immediate stall is a genuine failure.
            if (best > 0.05 * pb.escape_radius) {
                if (n <= 2) throw NoShadowError("correction stalled at depth " + std::to_string(n), n);
                res.stall_depth = n;
                break;
            }
        }
    }

    res.u_star = v;
    const auto final_probe = detail::run_orbit(sys, pb, v, pb.n_max, true);
    res.achieved_depth = std::min(final_probe.escape_depth - 1, pb.n_max);
    res.success = final_probe.escape_depth > pb.n_max;
    for (const auto& lv : final_probe.levels) {
        res.dist_c0.push_back(cr_distance(lv, sys.t0, 0));
        res.dist_c1.push_back(cr_distance(lv, sys.t0, 1));
        double de = 0.0;
        for (const auto& p : lv.profiles)
            if (!p.is_identity()) de += simpson([&](double x) { return std::fabs(p.eta(x)); }, 0.0, 1.0, 256);
        res.dist_eta.push_back(de);
    }
    res.c1_fit = fit_decay_prefix(res.dist_c1);
    res.correction_fit = fit_decay_prefix(res.correction_norms);
    return res;
}

// ---------------------------------------------------------------------------
// Convergence diagnostics

/// Per-level distances of R^n T to the fixed point, to the AIETs, and to the
/// Moebius GIETs, with log-linear decay fits and the partition size.
struct ConvergenceDiagnostics {
    std::vector<double> delta;       ///< partition size per level
    std::vector<double> d_moebius;   ///< max over branches of the Moebius C1 residual
    std::vector<double> d_affine;    ///< max over branches of ||profile - Id||_{C1}
    std::vector<double> d_t0;        ///< C1 distance to T0
    DecayFit delta_fit;
    DecayFit moebius_fit_rate;
    DecayFit affine_fit;
    DecayFit t0_fit;
};

inline ConvergenceDiagnostics convergence_diagnostics(const RenormTrace& tr, const System& sys,
                                                      std::int64_t partition_budget = 80000000) {
    ConvergenceDiagnostics out;
    for (int n = 0; n <= tr.depth(); ++n) {
        out.delta.push_back(partition_summary(tr, n, partition_budget).delta);
        double dm = 0.0, da = 0.0;
        for (const auto& p : tr.levels[n].giet.profiles) {
            dm = std::max(dm, moebius_fit(p).c1_residual);
            da = std::max(da, profile_cr_norm(p, 1));
        }
        out.d_moebius.push_back(dm);
        out.d_affine.push_back(da);
        out.d_t0.push_back(cr_distance(tr.levels[n].giet, sys.t0, 1));
    }
    out.delta_fit = fit_decay_prefix(out.delta);
    out.moebius_fit_rate = fit_decay_prefix(out.d_moebius);
    out.affine_fit = fit_decay_prefix(out.d_affine);
    out.t0_fit = fit_decay_prefix(out.d_t0);
    return out;
}

}  // namespace gietlab
