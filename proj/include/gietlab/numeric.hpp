#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <thread>
#include <vector>

#include "gietlab/errors.hpp"

namespace gietlab {

/// Result of a least-squares line fit y = a + b*x.
struct LineFit {
    double intercept = 0.0;
    double slope = 0.0;
    double r2 = 0.0;
    int n = 0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    LineFit f;
    f.n = static_cast<int>(std::min(x.size(), y.size()));
    if (f.n < 2) return f;
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (int i = 0; i < f.n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
        syy += y[i] * y[i];
    }
    const double n = f.n;
    const double det = n * sxx - sx * sx;
    if (det == 0) return f;
    f.slope = (n * sxy - sx * sy) / det;
    f.intercept = (sy - f.slope * sx) / n;
    double ss_res = 0, ss_tot = 0;
    const double ybar = sy / n;
    for (int i = 0; i < f.n; ++i) {
        const double p = f.intercept + f.slope * x[i];
        ss_res += (y[i] - p) * (y[i] - p);
        ss_tot += (y[i] - ybar) * (y[i] - ybar);
    }
    f.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    return f;
}

/// Fit log(y) = log(C) + n*log(rate) over the entries with y above `floor`.
/// Returns {rate, r2, points used}.
struct DecayFit {
    double rate = 0.0;
    double r2 = 0.0;
    int points = 0;
};

inline DecayFit fit_decay(const std::vector<double>& y, double floor = 1e-13) {
    std::vector<double> xs, ys;
    for (std::size_t n = 0; n < y.size(); ++n) {
        if (y[n] > floor) {
            xs.push_back(static_cast<double>(n));
            ys.push_back(std::log(y[n]));
        }
    }
    const LineFit f = fit_line(xs, ys);
    DecayFit d;
    d.points = f.n;
    if (f.n >= 2) {
        d.rate = std::exp(f.slope);
        d.r2 = f.r2;
    }
    return d;
}

/// Decay fit over the decaying prefix only: sequences of this kind fall
/// geometrically until they hit the numerical floor and then wander, so the
/// fit stops at the global minimum.
inline DecayFit fit_decay_prefix(const std::vector<double>& y, double floor = 1e-13) {
    if (y.empty()) return DecayFit{};
    std::size_t cut = 0;
    for (std::size_t n = 1; n < y.size(); ++n)
        if (y[n] < y[cut]) cut = n;
    std::vector<double> head(y.begin(), y.begin() + cut + 1);
    return fit_decay(head, floor);
}

/// Composite Simpson integration of f over [a,b] with n panels (n even).
template <typename F>
double simpson(F&& f, double a, double b, int panels = 64) {
    if (panels % 2) ++panels;
    const double h = (b - a) / panels;
    double s = f(a) + f(b);
    for (int i = 1; i < panels; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

/// Real roots of c3 x^3 + c2 x^2 + c1 x + c0 in [lo, hi], appended to `out`.
/// Handles degenerate leading coefficients.
inline void real_roots_in(double c3, double c2, double c1, double c0, double lo, double hi,
                          std::vector<double>& out) {
    auto push = [&](double r) {
        if (r >= lo && r <= hi) out.push_back(r);
    };
    const double scale = std::max({std::fabs(c3), std::fabs(c2), std::fabs(c1), std::fabs(c0)});
    if (scale == 0) return;
    if (std::fabs(c3) < 1e-14 * scale) {
        if (std::fabs(c2) < 1e-14 * scale) {
            if (std::fabs(c1) < 1e-14 * scale) return;
            push(-c0 / c1);
            return;
        }
        const double disc = c1 * c1 - 4 * c2 * c0;
        if (disc < 0) return;
        const double q = -0.5 * (c1 + std::copysign(std::sqrt(disc), c1));
        push(q / c2);
        if (q != 0) push(c0 / q);
        else push(0.0);
        return;
    }
    // Depressed cubic via Cardano with trigonometric branch.
    const double a = c2 / c3, b = c1 / c3, c = c0 / c3;
    const double p = b - a * a / 3.0;
    const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    const double off = a / 3.0;
    const double disc = q * q / 4.0 + p * p * p / 27.0;
    if (disc > 0) {
        const double sq = std::sqrt(disc);
        const double u = std::cbrt(-q / 2.0 + sq);
        const double v = std::cbrt(-q / 2.0 - sq);
        push(u + v - off);
    } else if (disc == 0) {
        const double u = std::cbrt(-q / 2.0);
        push(2 * u - off);
        push(-u - off);
    } else {
        const double r = std::sqrt(-p * p * p / 27.0);
        const double phi = std::acos(std::clamp(-q / (2.0 * r), -1.0, 1.0));
        const double m = 2.0 * std::sqrt(-p / 3.0);
        for (int k = 0; k < 3; ++k) push(m * std::cos((phi + 2.0 * M_PI * k) / 3.0) - off);
    }
}

/// Deterministic parallel map: out[i] = f(i) for i in [0, n). The result does
/// not depend on the worker count; reductions happen on the caller side.
inline void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& f) {
    if (workers <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    workers = std::min<std::size_t>(workers, n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) f(i);
        });
    }
    for (auto& t : pool) t.join();
}

/// Seeded RNG for reproducible sampling across the suites.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform(double lo, double hi) {
        std::uniform_real_distribution<double> d(lo, hi);
        return d(gen_);
    }
    int uniform_int(int lo, int hi) {
        std::uniform_int_distribution<int> d(lo, hi);
        return d(gen_);
    }
    std::mt19937_64& engine() { return gen_; }

private:
    std::mt19937_64 gen_;
};

}  // namespace gietlab
