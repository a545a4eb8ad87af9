#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gietlab/errors.hpp"

namespace gietlab {

namespace detail {
inline std::int64_t checked_add(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_add_overflow(a, b, &r)) throw IntegerOverflowError("integer matrix addition overflow");
    return r;
}
inline std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_mul_overflow(a, b, &r)) throw IntegerOverflowError("integer matrix multiplication overflow");
    return r;
}
}  // namespace detail

/// Dense square matrix of non-negative visitation counts. Entries are exact
/// 64-bit integers; every arithmetic step is overflow-checked and throws
/// rather than wrapping.
class IntMatrix {
public:
    IntMatrix() = default;
    explicit IntMatrix(int d, std::int64_t diag = 0) : d_(d), a_(static_cast<std::size_t>(d) * d, 0) {
        for (int i = 0; i < d; ++i) (*this)(i, i) = diag;
    }

    static IntMatrix identity(int d) { return IntMatrix(d, 1); }

    int dim() const { return d_; }
    std::int64_t& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * d_ + j]; }
    std::int64_t operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * d_ + j]; }

    bool operator==(const IntMatrix& o) const { return d_ == o.d_ && a_ == o.a_; }

    IntMatrix operator*(const IntMatrix& o) const {
        IntMatrix r(d_);
        for (int i = 0; i < d_; ++i)
            for (int k = 0; k < d_; ++k) {
                const std::int64_t v = (*this)(i, k);
                if (v == 0) continue;
                for (int j = 0; j < d_; ++j)
                    r(i, j) = detail::checked_add(r(i, j), detail::checked_mul(v, o(k, j)));
            }
        return r;
    }

    std::vector<std::int64_t> operator*(const std::vector<std::int64_t>& v) const {
        std::vector<std::int64_t> r(d_, 0);
        for (int i = 0; i < d_; ++i)
            for (int j = 0; j < d_; ++j)
                r[i] = detail::checked_add(r[i], detail::checked_mul((*this)(i, j), v[j]));
        return r;
    }

    IntMatrix power(int n) const {
        IntMatrix r = identity(d_);
        IntMatrix base = *this;
        while (n > 0) {
            if (n & 1) r = r * base;
            base = n > 1 ? base * base : base;
            n >>= 1;
        }
        return r;
    }

    IntMatrix transposed() const {
        IntMatrix r(d_);
        for (int i = 0; i < d_; ++i)
            for (int j = 0; j < d_; ++j) r(j, i) = (*this)(i, j);
        return r;
    }

    bool all_positive() const {
        for (auto v : a_)
            if (v <= 0) return false;
        return true;
    }

    std::vector<std::int64_t> row_sums() const {
        std::vector<std::int64_t> r(d_, 0);
        for (int i = 0; i < d_; ++i)
            for (int j = 0; j < d_; ++j) r[i] = detail::checked_add(r[i], (*this)(i, j));
        return r;
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    std::int64_t determinant() const {
        std::vector<std::int64_t> m = a_;
        auto at = [&](int i, int j) -> std::int64_t& { return m[static_cast<std::size_t>(i) * d_ + j]; };
        std::int64_t sign = 1, prev = 1;
        for (int k = 0; k < d_ - 1; ++k) {
            if (at(k, k) == 0) {
                int p = -1;
                for (int i = k + 1; i < d_; ++i)
                    if (at(i, k) != 0) {
                        p = i;
                        break;
                    }
                if (p < 0) return 0;
                for (int j = 0; j < d_; ++j) std::swap(at(k, j), at(p, j));
                sign = -sign;
            }
            for (int i = k + 1; i < d_; ++i)
                for (int j = k + 1; j < d_; ++j) {
                    const std::int64_t num = detail::checked_add(
                        detail::checked_mul(at(i, j), at(k, k)),
                        -detail::checked_mul(at(i, k), at(k, j)));
                    at(i, j) = num / prev;  // Bareiss division is exact
                }
            prev = at(k, k);
        }
        return sign * at(d_ - 1, d_ - 1);
    }

    std::string to_string() const {
        std::string s;
        for (int i = 0; i < d_; ++i) {
            s += i ? "; " : "[";
            for (int j = 0; j < d_; ++j) s += (j ? " " : "") + std::to_string((*this)(i, j));
        }
        return s + "]";
    }

private:
    int d_ = 0;
    std::vector<std::int64_t> a_;
};

}  // namespace gietlab
