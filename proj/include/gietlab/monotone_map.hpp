#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "gietlab/errors.hpp"
#include "gietlab/numeric.hpp"

namespace gietlab {

inline constexpr int kDefaultGridSize = 257;

struct Interval {
    double a = 0.0;
    double b = 1.0;
    double len() const { return b - a; }
};

/// Value and first three derivatives of a map at a point.
struct Jet3 {
    double v = 0, d1 = 0, d2 = 0, d3 = 0;
};

/// Chain rule for jets: the jet of f at g(x) applied after the jet of g at x.
inline Jet3 chain(const Jet3& f, const Jet3& g) {
    Jet3 r;
    r.v = f.v;
    r.d1 = f.d1 * g.d1;
    r.d2 = f.d2 * g.d1 * g.d1 + f.d1 * g.d2;
    r.d3 = f.d3 * g.d1 * g.d1 * g.d1 + 3.0 * f.d2 * g.d1 * g.d2 + f.d1 * g.d3;
    return r;
}

/// An orientation-preserving C^3 diffeomorphism of [0,1], stored as Hermite
/// data of orders 0..3 at grid nodes. Cells interpolate with the quintic
/// determined by the order-0..2 data (C^2 joins); third derivatives are exact
/// at nodes and linearly interpolated between them. Construction rejects data
/// whose interpolant is not strictly increasing on every cell.
class MonotoneMap {
public:
    MonotoneMap() = default;

    MonotoneMap(std::vector<double> grid, std::vector<double> values, std::vector<double> deriv1,
                std::vector<double> deriv2, std::vector<double> deriv3)
        : x_(std::move(grid)), v_(std::move(values)), d1_(std::move(deriv1)),
          d2_(std::move(deriv2)), d3_(std::move(deriv3)) {
        validate();
        build_cells();
        detect_identity();
    }

    static std::vector<double> uniform_grid(int n) {
        std::vector<double> g(n);
        for (int i = 0; i < n; ++i) g[i] = static_cast<double>(i) / (n - 1);
        g.front() = 0.0;
        g.back() = 1.0;
        return g;
    }

    static MonotoneMap identity(int n = kDefaultGridSize) {
        auto g = uniform_grid(n);
        std::vector<double> d1(n, 1.0), zero(n, 0.0);
        MonotoneMap m(g, g, d1, zero, zero);
        m.ident_ = true;
        return m;
    }

    /// Sample a closed-form diffeo given by a jet-valued callable.
    static MonotoneMap from_jets(const std::function<Jet3(double)>& f, int n = kDefaultGridSize) {
        auto g = uniform_grid(n);
        std::vector<double> v(n), d1(n), d2(n), d3(n);
        for (int i = 0; i < n; ++i) {
            const Jet3 j = f(g[i]);
            v[i] = j.v;
            d1[i] = j.d1;
            d2[i] = j.d2;
            d3[i] = j.d3;
        }
        v.front() = 0.0;
        v.back() = 1.0;
        return MonotoneMap(std::move(g), std::move(v), std::move(d1), std::move(d2), std::move(d3));
    }

    int nodes() const { return static_cast<int>(x_.size()); }
    bool is_identity() const { return ident_; }
    const std::vector<double>& grid() const { return x_; }
    const std::vector<double>& values() const { return v_; }
    const std::vector<double>& deriv1_data() const { return d1_; }
    const std::vector<double>& deriv2_data() const { return d2_; }
    const std::vector<double>& deriv3_data() const { return d3_; }

    double max_cell_width() const {
        double h = 0;
        for (std::size_t i = 0; i + 1 < x_.size(); ++i) h = std::max(h, x_[i + 1] - x_[i]);
        return h;
    }

    Jet3 eval_all(double x) const {
        check_domain(x);
        if (ident_) return Jet3{x, 1.0, 0.0, 0.0};
        const int c = locate(x);
        // Exact node data beats the interpolant when we are sitting on a node.
        if (x == x_[c]) return Jet3{v_[c], d1_[c], d2_[c], d3_[c]};
        if (x == x_[c + 1]) return Jet3{v_[c + 1], d1_[c + 1], d2_[c + 1], d3_[c + 1]};
        const double h = x_[c + 1] - x_[c];
        const double t = (x - x_[c]) / h;
        const double* k = &coef_[6 * c];
        Jet3 r;
        r.v = ((((k[5] * t + k[4]) * t + k[3]) * t + k[2]) * t + k[1]) * t + k[0];
        r.d1 = ((((5 * k[5] * t + 4 * k[4]) * t + 3 * k[3]) * t + 2 * k[2]) * t + k[1]) / h;
        r.d2 = (((20 * k[5] * t + 12 * k[4]) * t + 6 * k[3]) * t + 2 * k[2]) / (h * h);
        r.d3 = d3_[c] + (d3_[c + 1] - d3_[c]) * t;
        return r;
    }

    double eval(double x) const { return eval_all(x).v; }
    double deriv(double x) const { return eval_all(x).d1; }
    double deriv2(double x) const { return eval_all(x).d2; }
    double deriv3(double x) const { return eval_all(x).d3; }
    /// Non-linearity eta = D log D at x.
    double eta(double x) const {
        const Jet3 j = eval_all(x);
        return j.d2 / j.d1;
    }
    /// Derivative of the non-linearity at x.
    double eta_deriv(double x) const {
        const Jet3 j = eval_all(x);
        return j.d3 / j.d1 - (j.d2 / j.d1) * (j.d2 / j.d1);
    }

    /// Exact value of the integral of the non-linearity over [0,1].
    double total_eta() const { return std::log(d1_.back()) - std::log(d1_.front()); }

    /// Preimage of y, solved on the interpolant to ~1e-15.
    double inverse_eval(double y) const {
        if (y < 0.0 || y > 1.0) throw InvalidInputError("inverse_eval: point outside [0,1]");
        if (ident_) return y;
        if (y <= v_.front()) return x_.front();
        if (y >= v_.back()) return x_.back();
        int c = static_cast<int>(std::upper_bound(v_.begin(), v_.end(), y) - v_.begin()) - 1;
        c = std::clamp(c, 0, nodes() - 2);
        if (y == v_[c]) return x_[c];
        // Newton inside a shrinking bisection bracket, run to the last bit:
        // the preimage feeds break-point bookkeeping, where any slack gets
        // amplified by the unstable dynamics.
        double lo = x_[c], hi = x_[c + 1];
        double x = lo + (hi - lo) * (y - v_[c]) / (v_[c + 1] - v_[c]);
        for (int it = 0; it < 200 && hi - lo > 1e-17 * (1.0 + std::fabs(x)); ++it) {
            const Jet3 j = eval_all(x);
            const double err = j.v - y;
            if (err == 0.0) break;
            if (err > 0) hi = x;
            else lo = x;
            double nx = x - err / j.d1;
            if (!(nx > lo && nx < hi)) nx = 0.5 * (lo + hi);
            if (nx == x) break;
            x = nx;
        }
        return x;
    }

private:
    void check_domain(double x) const {
        if (x < 0.0 || x > 1.0) throw InvalidInputError("MonotoneMap: point outside [0,1]");
    }

    void validate() const {
        const std::size_t n = x_.size();
        if (n < 2 || v_.size() != n || d1_.size() != n || d2_.size() != n || d3_.size() != n)
            throw InvalidInputError("MonotoneMap: inconsistent data sizes");
        if (x_.front() != 0.0 || x_.back() != 1.0) throw InvalidInputError("MonotoneMap: grid must span [0,1]");
        if (v_.front() != 0.0 || v_.back() != 1.0)
            throw InvalidInputError("MonotoneMap: values must satisfy v(0)=0, v(1)=1");
        for (std::size_t i = 0; i + 1 < n; ++i) {
            if (!(x_[i + 1] > x_[i])) throw InvalidInputError("MonotoneMap: grid not strictly increasing");
            if (!(v_[i + 1] > v_[i])) throw NonMonotoneError("MonotoneMap: values not strictly increasing");
        }
        for (double d : d1_)
            if (!(d > 0.0) || !std::isfinite(d)) throw NonMonotoneError("MonotoneMap: first derivatives must be positive");
    }

    void build_cells() {
        const int cells = nodes() - 1;
        coef_.resize(6 * static_cast<std::size_t>(cells));
        std::vector<double> roots;
        for (int c = 0; c < cells; ++c) {
            const double h = x_[c + 1] - x_[c];
            const double v0 = v_[c], v1 = v_[c + 1];
            const double m0 = d1_[c] * h, m1 = d1_[c + 1] * h;
            const double s0 = d2_[c] * h * h, s1 = d2_[c + 1] * h * h;
            double* k = &coef_[6 * c];
            k[0] = v0;
            k[1] = m0;
            k[2] = 0.5 * s0;
            k[3] = -10 * v0 - 6 * m0 - 1.5 * s0 + 10 * v1 - 4 * m1 + 0.5 * s1;
            k[4] = 15 * v0 + 8 * m0 + 1.5 * s0 - 15 * v1 + 7 * m1 - s1;
            k[5] = -6 * v0 - 3 * m0 - 0.5 * s0 + 6 * v1 - 3 * m1 + 0.5 * s1;

            // The cell is accepted only if the quintic is strictly increasing:
            // evaluate its derivative at the ends and at interior critical points.
            auto dq = [&](double t) {
                return (((5 * k[5] * t + 4 * k[4]) * t + 3 * k[3]) * t + 2 * k[2]) * t + k[1];
            };
            double mn = std::min(dq(0.0), dq(1.0));
            roots.clear();
            real_roots_in(20 * k[5], 12 * k[4], 6 * k[3], 2 * k[2], 0.0, 1.0, roots);
            for (double t : roots) mn = std::min(mn, dq(t));
            if (!(mn > 0.0))
                throw NonMonotoneError("MonotoneMap: cell interpolant is not strictly increasing");
        }
        uniform_ = true;
        const double h0 = x_[1] - x_[0];
        for (int c = 1; c < cells; ++c)
            if (std::fabs((x_[c + 1] - x_[c]) - h0) > 1e-12 * h0) {
                uniform_ = false;
                break;
            }
    }

    void detect_identity() {
        ident_ = true;
        for (int i = 0; i < nodes(); ++i) {
            if (v_[i] != x_[i] || d1_[i] != 1.0 || d2_[i] != 0.0 || d3_[i] != 0.0) {
                ident_ = false;
                return;
            }
        }
    }

    int locate(double x) const {
        const int cells = nodes() - 1;
        if (uniform_) {
            int c = static_cast<int>(x * cells);
            c = std::clamp(c, 0, cells - 1);
            // Guard against rounding at cell boundaries.
            if (x < x_[c]) --c;
            else if (x > x_[c + 1]) ++c;
            return std::clamp(c, 0, cells - 1);
        }
        int c = static_cast<int>(std::upper_bound(x_.begin(), x_.end(), x) - x_.begin()) - 1;
        return std::clamp(c, 0, cells - 1);
    }

    std::vector<double> x_, v_, d1_, d2_, d3_;
    std::vector<double> coef_;
    bool uniform_ = false;
    bool ident_ = false;
};

/// f composed after g, resampled on the merged grid (g's nodes joined with
/// the g-preimages of f's nodes, so f is never interpolated at its own cell
/// boundaries). All derivative orders propagate by exact chain-rule algebra.
inline MonotoneMap compose(const MonotoneMap& f, const MonotoneMap& g) {
    if (f.is_identity()) return g;
    if (g.is_identity()) return f;
    std::vector<double> grid = g.grid();
    for (int i = 1; i + 1 < f.nodes(); ++i) grid.push_back(g.inverse_eval(f.grid()[i]));
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end(),
                           [](double a, double b) { return std::fabs(a - b) < 1e-14; }),
               grid.end());
    grid.front() = 0.0;
    grid.back() = 1.0;

    const int n = static_cast<int>(grid.size());
    std::vector<double> v(n), d1(n), d2(n), d3(n);
    for (int i = 0; i < n; ++i) {
        const Jet3 jg = g.eval_all(grid[i]);
        const Jet3 jf = f.eval_all(std::clamp(jg.v, 0.0, 1.0));
        const Jet3 j = chain(jf, jg);
        v[i] = j.v;
        d1[i] = j.d1;
        d2[i] = j.d2;
        d3[i] = j.d3;
    }
    v.front() = 0.0;
    v.back() = 1.0;
    return MonotoneMap(std::move(grid), std::move(v), std::move(d1), std::move(d2), std::move(d3));
}

/// Inverse diffeomorphism, exact at the image of the grid.
inline MonotoneMap invert(const MonotoneMap& f) {
    if (f.is_identity()) return f;
    const int n = f.nodes();
    std::vector<double> grid = f.values();
    std::vector<double> v = f.grid();
    std::vector<double> d1(n), d2(n), d3(n);
    for (int i = 0; i < n; ++i) {
        const double fp = f.deriv1_data()[i];
        const double fpp = f.deriv2_data()[i];
        const double fppp = f.deriv3_data()[i];
        d1[i] = 1.0 / fp;
        d2[i] = -fpp / (fp * fp * fp);
        d3[i] = (3.0 * fpp * fpp - fp * fppp) / (fp * fp * fp * fp * fp);
    }
    return MonotoneMap(std::move(grid), std::move(v), std::move(d1), std::move(d2), std::move(d3));
}

/// N(f|[a,b]): the restriction of f to [a,b] rescaled to a diffeomorphism of
/// [0,1]. Exact at the f-nodes interior to (a,b).
inline MonotoneMap restrict_normalized(const MonotoneMap& f, double a, double b) {
    if (!(b > a)) throw InvalidInputError("restrict_normalized: degenerate interval");
    if (a < 0.0 || b > 1.0) throw InvalidInputError("restrict_normalized: interval outside [0,1]");
    if (f.is_identity()) return MonotoneMap::identity(2);
    const double fa = f.eval(a), fb = f.eval(b);
    const double len = b - a, flen = fb - fa;
    std::vector<double> grid{0.0};
    for (double xn : f.grid())
        if (xn > a + 1e-14 && xn < b - 1e-14) grid.push_back((xn - a) / len);
    grid.push_back(1.0);
    const int n = static_cast<int>(grid.size());
    std::vector<double> v(n), d1(n), d2(n), d3(n);
    for (int i = 0; i < n; ++i) {
        const double x = i == 0 ? a : (i == n - 1 ? b : a + grid[i] * len);
        const Jet3 j = f.eval_all(x);
        v[i] = (j.v - fa) / flen;
        d1[i] = j.d1 * len / flen;
        d2[i] = j.d2 * len * len / flen;
        d3[i] = j.d3 * len * len * len / flen;
    }
    v.front() = 0.0;
    v.back() = 1.0;
    return MonotoneMap(std::move(grid), std::move(v), std::move(d1), std::move(d2), std::move(d3));
}

/// An increasing C^3 diffeomorphism between arbitrary intervals, stored as a
/// unit-interval profile conjugated by the affine maps of its domain and
/// codomain. normalize() of such a branch is just its profile.
struct BranchMap {
    Interval dom;
    Interval cod;
    MonotoneMap profile;

    Jet3 eval_all(double x) const {
        const double s = (x - dom.a) / dom.len();
        Jet3 j = profile.eval_all(std::clamp(s, 0.0, 1.0));
        const double dl = dom.len(), cl = cod.len();
        return Jet3{cod.a + cl * j.v, j.d1 * cl / dl, j.d2 * cl / (dl * dl), j.d3 * cl / (dl * dl * dl)};
    }
    double eval(double x) const { return eval_all(x).v; }

    double sup_inverse_deriv() const;
    double sup_abs_deriv2() const;
    double sup_abs_deriv3() const;
};

/// Sample points covering [0,1]: all nodes of the given maps plus a few
/// interior points per cell.
inline std::vector<double> dense_samples(std::initializer_list<const MonotoneMap*> maps,
                                         int per_cell = 4) {
    std::vector<double> pts{0.0, 1.0};
    for (const MonotoneMap* m : maps) {
        const auto& g = m->grid();
        for (std::size_t i = 0; i + 1 < g.size(); ++i) {
            pts.push_back(g[i]);
            for (int k = 1; k <= per_cell; ++k)
                pts.push_back(g[i] + (g[i + 1] - g[i]) * k / (per_cell + 1.0));
        }
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

/// N(f): the rescaling of a branch map to a diffeomorphism of [0,1]. In the
/// (domain, codomain, profile) representation that is the profile itself.
inline const MonotoneMap& normalize(const BranchMap& f) { return f.profile; }

inline double BranchMap::sup_inverse_deriv() const {
    double mn = std::numeric_limits<double>::infinity();
    for (double s : dense_samples({&profile})) mn = std::min(mn, profile.eval_all(s).d1);
    return dom.len() / (cod.len() * mn);
}
inline double BranchMap::sup_abs_deriv2() const {
    double mx = 0;
    for (double s : dense_samples({&profile})) mx = std::max(mx, std::fabs(profile.eval_all(s).d2));
    return mx * cod.len() / (dom.len() * dom.len());
}
inline double BranchMap::sup_abs_deriv3() const {
    double mx = 0;
    for (double s : dense_samples({&profile})) mx = std::max(mx, std::fabs(profile.eval_all(s).d3));
    return mx * cod.len() / (dom.len() * dom.len() * dom.len());
}

/// Sup-norm of the r-th derivative of (f - id) over a dense sample.
inline double profile_cr_norm(const MonotoneMap& f, int r) {
    if (r < 0 || r > 3) throw InvalidInputError("profile_cr_norm: order must be 0..3");
    if (f.is_identity()) return 0.0;
    double mx = 0.0;
    for (double x : dense_samples({&f})) {
        const Jet3 j = f.eval_all(x);
        double vals[4] = {j.v - x, j.d1 - 1.0, j.d2, j.d3};
        for (int k = 0; k <= r; ++k) mx = std::max(mx, std::fabs(vals[k]));
    }
    return mx;
}

/// Sup-norm distance between the r-th derivative data of two profiles.
inline double profile_cr_distance(const MonotoneMap& f, const MonotoneMap& g, int r) {
    double mx = 0.0;
    for (double x : dense_samples({&f, &g})) {
        const Jet3 a = f.eval_all(x), b = g.eval_all(x);
        double vals[4] = {a.v - b.v, a.d1 - b.d1, a.d2 - b.d2, a.d3 - b.d3};
        for (int k = 0; k <= r; ++k) mx = std::max(mx, std::fabs(vals[k]));
    }
    return mx;
}

/// Integral of |eta_f - eta_g| (the eta-distance of the two profiles), by
/// composite Simpson over the merged grid with sign-aware cell splitting.
/// `tolerance_out`, when given, receives a Richardson-style error estimate.
inline double eta_distance(const MonotoneMap& f, const MonotoneMap& g, double* tolerance_out = nullptr) {
    if (f.is_identity() && g.is_identity()) {
        if (tolerance_out) *tolerance_out = 0.0;
        return 0.0;
    }
    std::vector<double> grid = f.grid();
    grid.insert(grid.end(), g.grid().begin(), g.grid().end());
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    auto diff = [&](double x) { return f.eta(x) - g.eta(x); };
    double total = 0.0, coarse = 0.0;
    auto add_piece = [&](double a, double b) {
        if (b - a < 1e-300) return;
        total += std::fabs(simpson(diff, a, b, 8));
        coarse += std::fabs(simpson(diff, a, b, 4));
    };
    for (std::size_t c = 0; c + 1 < grid.size(); ++c) {
        const double a = grid[c], b = grid[c + 1];
        const double da = diff(a), db = diff(b);
        if (da == 0.0 || db == 0.0 || (da > 0) == (db > 0)) {
            add_piece(a, b);
            continue;
        }
        // One sign change expected inside the cell: locate it by bisection.
        double lo = a, hi = b;
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            if ((diff(mid) > 0) == (da > 0)) lo = mid;
            else hi = mid;
        }
        add_piece(a, 0.5 * (lo + hi));
        add_piece(0.5 * (lo + hi), b);
    }
    if (tolerance_out) *tolerance_out = std::fabs(total - coarse) / 15.0 + 1e-15;
    return total;
}

// ---------------------------------------------------------------------------
// Moebius maps of [0,1] fixing the endpoints

/// m_t(x) = x / (t + (1-t) x), the one-parameter family of Moebius
/// diffeomorphisms of [0,1] fixing 0 and 1. Its non-linearity integrates to
/// 2 log t, so the family is parametrised by the total non-linearity.
struct Moebius {
    double t = 1.0;

    static Moebius from_total_eta(double tau) { return Moebius{std::exp(tau / 2.0)}; }
    double total_eta() const { return 2.0 * std::log(t); }

    Jet3 eval_all(double x) const {
        const double den = t + (1.0 - t) * x;
        Jet3 j;
        j.v = x / den;
        j.d1 = t / (den * den);
        j.d2 = -2.0 * t * (1.0 - t) / (den * den * den);
        j.d3 = 6.0 * t * (1.0 - t) * (1.0 - t) / (den * den * den * den);
        return j;
    }
    double eval(double x) const { return eval_all(x).v; }
    double eta(double x) const { return -2.0 * (1.0 - t) / (t + (1.0 - t) * x); }

    Moebius composed_with(const Moebius& inner) const { return Moebius{t * inner.t}; }
    Moebius inverse() const { return Moebius{1.0 / t}; }

    MonotoneMap sample(int n = kDefaultGridSize) const {
        return MonotoneMap::from_jets([this](double x) { return eval_all(x); }, n);
    }
};

/// The Moebius map with the same total non-linearity as f, and the C^1
/// residual of f against it.
struct MoebiusFit {
    Moebius moebius;
    double c1_residual = 0.0;
};

inline MoebiusFit moebius_fit(const MonotoneMap& f) {
    MoebiusFit fit;
    fit.moebius = Moebius::from_total_eta(f.total_eta());
    double mx = 0.0;
    for (double x : dense_samples({&f})) {
        const Jet3 a = f.eval_all(x);
        const Jet3 b = fit.moebius.eval_all(x);
        mx = std::max(mx, std::fabs(a.v - b.v));
        mx = std::max(mx, std::fabs(a.d1 - b.d1));
    }
    fit.c1_residual = mx;
    return fit;
}

// ---------------------------------------------------------------------------
// Profiles with prescribed non-linearity

/// A trigonometric polynomial e(x) = c + sum_m a_m cos(2 pi m x) + b_m sin(2
/// pi m x) used as a prescribed non-linearity. The diffeomorphism with eta =
/// e is phi(x) = int_0^x exp(E) / int_0^1 exp(E) with E the primitive of e;
/// its Hermite data is exact up to the quadrature of the two integrals.
struct TrigEta {
    double c = 0.0;
    std::vector<double> a;  // cosine coefficients, m = 1..
    std::vector<double> b;  // sine coefficients

    double total() const { return c; }

    double e(double x) const {
        double s = c;
        for (std::size_t m = 0; m < a.size(); ++m) s += a[m] * std::cos(2 * M_PI * (m + 1) * x);
        for (std::size_t m = 0; m < b.size(); ++m) s += b[m] * std::sin(2 * M_PI * (m + 1) * x);
        return s;
    }
    double de(double x) const {
        double s = 0;
        for (std::size_t m = 0; m < a.size(); ++m)
            s -= a[m] * 2 * M_PI * (m + 1) * std::sin(2 * M_PI * (m + 1) * x);
        for (std::size_t m = 0; m < b.size(); ++m)
            s += b[m] * 2 * M_PI * (m + 1) * std::cos(2 * M_PI * (m + 1) * x);
        return s;
    }
    double E(double x) const {
        double s = c * x;
        for (std::size_t m = 0; m < a.size(); ++m)
            s += a[m] * std::sin(2 * M_PI * (m + 1) * x) / (2 * M_PI * (m + 1));
        for (std::size_t m = 0; m < b.size(); ++m)
            s += b[m] * (1.0 - std::cos(2 * M_PI * (m + 1) * x)) / (2 * M_PI * (m + 1));
        return s;
    }
};

/// Build the profile whose non-linearity is exactly the given eta spec.
inline MonotoneMap profile_from_eta(const TrigEta& spec, int n = kDefaultGridSize) {
    const auto grid = MonotoneMap::uniform_grid(n);
    // 16-point Gauss-Legendre weights on [-1,1].
    static const double gx[8] = {0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
                                 0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
                                 0.9445750230732326, 0.9894009349916499};
    static const double gw[8] = {0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
                                 0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
                                 0.0622535239386479, 0.0271524594117541};
    auto cell_integral = [&](double a, double b) {
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        double s = 0;
        for (int i = 0; i < 8; ++i)
            s += gw[i] * (std::exp(spec.E(mid - half * gx[i])) + std::exp(spec.E(mid + half * gx[i])));
        return s * half;
    };
    std::vector<double> cum(n, 0.0);
    for (int i = 1; i < n; ++i) cum[i] = cum[i - 1] + cell_integral(grid[i - 1], grid[i]);
    const double z = cum.back();
    std::vector<double> v(n), d1(n), d2(n), d3(n);
    for (int i = 0; i < n; ++i) {
        v[i] = cum[i] / z;
        d1[i] = std::exp(spec.E(grid[i])) / z;
        d2[i] = spec.e(grid[i]) * d1[i];
        d3[i] = (spec.de(grid[i]) + spec.e(grid[i]) * spec.e(grid[i])) * d1[i];
    }
    v.front() = 0.0;
    v.back() = 1.0;
    return MonotoneMap(std::vector<double>(grid), std::move(v), std::move(d1), std::move(d2), std::move(d3));
}

}  // namespace gietlab
