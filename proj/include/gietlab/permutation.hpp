#pragma once

#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "gietlab/errors.hpp"
#include "gietlab/intmatrix.hpp"

namespace gietlab {

/// Which of the two rightmost intervals wins an elementary induction step.
enum class StepKind : char { Top = 't', Bottom = 'b' };

inline char to_char(StepKind k) { return static_cast<char>(k); }

/// Combinatorial datum of a GIET: the bijection sending the i-th top interval
/// to the sigma(i)-th bottom interval. Indices are 0-based internally; the
/// external literal form is the 1-based array of bottom images.
class Permutation {
public:
    Permutation() = default;

    /// Build from 1-based images, e.g. {2,1} for the exchange of two intervals.
    explicit Permutation(const std::vector<int>& one_based) {
        const int d = static_cast<int>(one_based.size());
        if (d < 2) throw InvalidInputError("permutation needs d >= 2");
        sigma_.assign(d, -1);
        std::vector<bool> seen(d, false);
        for (int i = 0; i < d; ++i) {
            const int v = one_based[i] - 1;
            if (v < 0 || v >= d || seen[v]) throw InvalidInputError("not a bijection of {1..d}");
            seen[v] = true;
            sigma_[i] = v;
        }
    }

    int size() const { return static_cast<int>(sigma_.size()); }
    int operator()(int i) const { return sigma_[i]; }

    int inverse(int j) const {
        for (int i = 0; i < size(); ++i)
            if (sigma_[i] == j) return i;
        throw InvalidInputError("inverse of value outside range");
    }

    bool operator==(const Permutation& o) const { return sigma_ == o.sigma_; }
    bool operator!=(const Permutation& o) const { return !(*this == o); }

    /// No k < d maps the prefix {1..k} onto itself.
    bool irreducible() const {
        int prefix_max = -1;
        for (int k = 0; k + 1 < size(); ++k) {
            prefix_max = std::max(prefix_max, sigma_[k]);
            if (prefix_max == k) return false;
        }
        return true;
    }

    std::vector<int> to_one_based() const {
        std::vector<int> v(sigma_.size());
        for (std::size_t i = 0; i < sigma_.size(); ++i) v[i] = sigma_[i] + 1;
        return v;
    }

    std::string to_string() const {
        std::string s = "(";
        for (int i = 0; i < size(); ++i) s += std::to_string(sigma_[i] + 1);
        return s + ")";
    }

private:
    std::vector<int> sigma_;
};

/// Genus and marked-point count of the suspended translation surface.
struct SurfaceData {
    int genus = 0;
    int marked_points = 0;
};

/// One elementary Rauzy-Veech step: the induced permutation together with the
/// elementary visitation matrix E. Row i of E counts how often the orbit
/// segment defining the i-th new interval visits each old top interval, so the
/// matrix of a composed word is the product of the per-step matrices with
/// later steps multiplying on the left.
inline std::pair<Permutation, IntMatrix> rauzy_step(const Permutation& pi, StepKind kind) {
    if (!pi.irreducible()) throw ReducibleError("rauzy_step: reducible permutation " + pi.to_string());
    const int d = pi.size();
    const int k = pi.inverse(d - 1);  // top interval whose image is the last bottom interval
    std::vector<int> ns(d, -1);
    IntMatrix e = IntMatrix::identity(d);
    if (kind == StepKind::Top) {
        const int sd = pi(d - 1);
        for (int i = 0; i < d; ++i) {
            if (i == k) continue;
            ns[i] = pi(i) <= sd ? pi(i) : pi(i) + 1;
        }
        ns[k] = sd + 1;
        e(k, d - 1) = 1;  // the split interval visits old top d before returning
    } else {
        e = IntMatrix(d);
        for (int i = 0; i < k; ++i) ns[i] = pi(i);
        ns[k] = d - 1;
        ns[k + 1] = pi(d - 1);
        for (int i = k + 1; i <= d - 2; ++i) ns[i + 1] = pi(i);
        for (int i = 0; i <= k; ++i) e(i, i) = 1;
        e(k + 1, k) = 1;
        e(k + 1, d - 1) = 1;
        for (int i = k + 1; i <= d - 2; ++i) e(i + 1, i) = 1;
    }
    std::vector<int> one_based(d);
    for (int i = 0; i < d; ++i) one_based[i] = ns[i] + 1;
    return {Permutation(one_based), e};
}

/// (g, s) of the suspension via the vertex identifications of the suspension
/// polygon: gluing the i-th edge identifies corner t_{i-1} with b_{pi(i)-1}
/// and t_i with b_{pi(i)}. Singularities are the identification classes; the
/// Euler relation then forces d = 2g + s - 1.
inline SurfaceData genus_and_marked_points(const Permutation& pi) {
    if (!pi.irreducible()) throw ReducibleError("genus_and_marked_points: reducible permutation");
    const int d = pi.size();
    std::vector<int> parent(2 * (d + 1));
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
    auto unite = [&](int a, int b) { parent[find(a)] = find(b); };
    auto top = [&](int i) { return i; };
    auto bot = [&](int j) { return d + 1 + j; };

    for (int i = 0; i < d; ++i) {
        unite(top(i), bot(pi(i)));          // left endpoints of edge i+1
        unite(top(i + 1), bot(pi(i) + 1));  // right endpoints
    }
    unite(top(0), bot(0));
    unite(top(d), bot(d));

    int classes = 0;
    for (int x = 0; x < 2 * (d + 1); ++x)
        if (find(x) == x) ++classes;

    SurfaceData out;
    out.marked_points = classes;
    out.genus = (d - classes + 1) / 2;
    if (d != 2 * out.genus + out.marked_points - 1)
        throw InternalConsistencyError("suspension cycle count violates d = 2g + s - 1");
    return out;
}

}  // namespace gietlab
