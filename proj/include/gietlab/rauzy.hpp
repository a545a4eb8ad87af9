#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <complex>
#include <string>
#include <vector>

#include "gietlab/permutation.hpp"

namespace gietlab {

/// A word in elementary induction steps returning to its base permutation,
/// together with the ordered product of the per-step matrices (later steps
/// multiply on the left). The matrix is the intersection matrix of the
/// periodic fixed point the loop determines.
struct RauzyLoop {
    Permutation base;
    std::vector<StepKind> steps;
    IntMatrix matrix;

    std::string word() const {
        std::string s;
        for (auto k : steps) s += to_char(k);
        return s;
    }
};

inline std::vector<StepKind> parse_loop_word(const std::string& word) {
    std::vector<StepKind> steps;
    for (char c : word) {
        if (c == 't') steps.push_back(StepKind::Top);
        else if (c == 'b') steps.push_back(StepKind::Bottom);
        else throw InvalidInputError("loop word must be over {t,b}, got '" + std::string(1, c) + "'");
    }
    return steps;
}

/// Assemble a loop from its base permutation and step word, validating that
/// the word actually returns to the base.
inline RauzyLoop make_loop(const Permutation& base, const std::vector<StepKind>& steps) {
    if (!base.irreducible()) throw ReducibleError("make_loop: reducible base permutation");
    Permutation pi = base;
    IntMatrix m = IntMatrix::identity(base.size());
    for (auto k : steps) {
        auto [np, e] = rauzy_step(pi, k);
        pi = np;
        m = e * m;
    }
    if (pi != base) throw InvalidInputError("step word does not return to the base permutation");
    return RauzyLoop{base, steps, m};
}

inline RauzyLoop make_loop(const Permutation& base, const std::string& word) {
    return make_loop(base, parse_loop_word(word));
}

/// Concatenation: `first` applied first, then `second`.
inline RauzyLoop concat(const RauzyLoop& first, const RauzyLoop& second) {
    if (!(first.base == second.base)) throw InvalidInputError("concat: loops have different bases");
    std::vector<StepKind> steps = first.steps;
    steps.insert(steps.end(), second.steps.begin(), second.steps.end());
    return RauzyLoop{first.base, steps, second.matrix * first.matrix};
}

/// All step words of length <= max_len that return to `pi`, in lexicographic
/// order with Top before Bottom, shorter words first.
inline std::vector<RauzyLoop> enumerate_loops(const Permutation& pi, int max_len) {
    if (max_len < 1) throw InvalidInputError("enumerate_loops: max_len must be >= 1");
    if (!pi.irreducible()) throw ReducibleError("enumerate_loops: reducible permutation");
    std::vector<RauzyLoop> out;
    std::vector<StepKind> word;
    std::function<void(const Permutation&, const IntMatrix&)> dfs =
        [&](const Permutation& cur, const IntMatrix& m) {
            if (!word.empty() && cur == pi) out.push_back(RauzyLoop{pi, word, m});
            if (static_cast<int>(word.size()) == max_len) return;
            for (StepKind k : {StepKind::Top, StepKind::Bottom}) {
                auto [np, e] = rauzy_step(cur, k);
                word.push_back(k);
                dfs(np, e * m);
                word.pop_back();
            }
        };
    dfs(pi, IntMatrix::identity(pi.size()));
    auto rank = [](StepKind k) { return k == StepKind::Top ? 0 : 1; };
    std::stable_sort(out.begin(), out.end(), [&](const RauzyLoop& a, const RauzyLoop& b) {
        if (a.steps.size() != b.steps.size()) return a.steps.size() < b.steps.size();
        for (std::size_t i = 0; i < a.steps.size(); ++i)
            if (a.steps[i] != b.steps[i]) return rank(a.steps[i]) < rank(b.steps[i]);
        return false;
    });
    return out;
}

/// Verdict on whether a loop supplies usable periodic data: a power of the
/// matrix must be strictly positive, the spectrum must avoid the unit circle,
/// and the suspension should sit in the stratum with g >= 2 and s = 1.
/// Failures are reported, never thrown.
struct AdmissibilityReport {
    int positivity_power = 0;  ///< smallest p <= d^2 with A^p > 0, or 0 if none
    bool hyperbolic = false;
    int indeterminate_eigenvalues = 0;    ///< |modulus - 1| below tolerance
    double hyperbolicity_tolerance = 1e-9;
    int genus = 0;
    int marked_points = 0;
    bool genus_assumption = false;  ///< g >= 2 and s = 1
    double perron_value = 0.0;
    bool accepted = false;

    std::string describe() const {
        std::string s;
        s += "power=" + std::to_string(positivity_power);
        s += hyperbolic ? " hyperbolic" : " not-hyperbolic";
        if (indeterminate_eigenvalues) s += " (indeterminate)";
        s += " g=" + std::to_string(genus) + " s=" + std::to_string(marked_points);
        if (genus > 0 && !genus_assumption) s += " below genus assumption";
        return s;
    }
};

inline std::vector<std::complex<double>> eigenvalues_of(const IntMatrix& a) {
    const int d = a.dim();
    Eigen::MatrixXd m(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = static_cast<double>(a(i, j));
    Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
    std::vector<std::complex<double>> ev(d);
    for (int i = 0; i < d; ++i) ev[i] = es.eigenvalues()(i);
    std::sort(ev.begin(), ev.end(), [](auto x, auto y) { return std::abs(x) > std::abs(y); });
    return ev;
}

inline AdmissibilityReport is_admissible_fixed_point(const RauzyLoop& loop) {
    AdmissibilityReport r;
    const int d = loop.matrix.dim();

    IntMatrix p = loop.matrix;
    for (int k = 1; k <= d * d; ++k) {
        if (p.all_positive()) {
            r.positivity_power = k;
            break;
        }
        try {
            p = p * loop.matrix;
        } catch (const IntegerOverflowError&) {
            break;  // entries exploded without turning positive on some index
        }
    }

    const auto ev = eigenvalues_of(loop.matrix);
    r.perron_value = std::abs(ev.front());
    r.hyperbolic = true;
    for (const auto& z : ev) {
        if (std::fabs(std::abs(z) - 1.0) < r.hyperbolicity_tolerance) {
            ++r.indeterminate_eigenvalues;  // within tolerance of the unit circle
            r.hyperbolic = false;
        }
    }

    const SurfaceData sd = genus_and_marked_points(loop.base);
    r.genus = sd.genus;
    r.marked_points = sd.marked_points;
    r.genus_assumption = sd.genus >= 2 && sd.marked_points == 1;
    r.accepted = r.positivity_power > 0 && r.hyperbolic && r.genus_assumption;
    return r;
}

}  // namespace gietlab
