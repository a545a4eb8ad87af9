#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <complex>

#include "gietlab/renorm.hpp"

namespace gietlab {

/// Spectral data of an intersection matrix. perron_vector is the positive
/// eigenvector of the TRANSPOSE (the one carrying the fixed point's lengths),
/// normalised to sum 1 and computed by power iteration.
struct SpectrumReport {
    std::vector<std::complex<double>> eigenvalues;  ///< sorted by modulus, descending
    double perron_value = 0.0;
    std::vector<double> perron_vector;
    int expanding = 0;      ///< modulus > 1 + tol
    int contracting = 0;    ///< modulus < 1 - tol
    int indeterminate = 0;  ///< within tol of the unit circle
    double reciprocal_pairing_error = 0.0;
    bool perron_simple = false;
};

inline SpectrumReport spectrum(const IntMatrix& a, double tol = 1e-9) {
    SpectrumReport r;
    r.eigenvalues = eigenvalues_of(a);
    const int d = a.dim();
    for (const auto& z : r.eigenvalues) {
        const double m = std::abs(z);
        if (m > 1.0 + tol) ++r.expanding;
        else if (m < 1.0 - tol) ++r.contracting;
        else ++r.indeterminate;
    }
    for (const auto& z : r.eigenvalues) {
        const std::complex<double> inv = 1.0 / z;
        double best = std::numeric_limits<double>::infinity();
        for (const auto& w : r.eigenvalues) best = std::min(best, std::abs(inv - w));
        r.reciprocal_pairing_error = std::max(r.reciprocal_pairing_error, best);
    }

    // Power iteration on the transpose for the length eigenvector.
    const IntMatrix at = a.transposed();
    std::vector<double> v(d, 1.0 / d), w(d);
    double lam = 0.0;
    for (int it = 0; it < 20000; ++it) {
        double norm = 0.0;
        for (int i = 0; i < d; ++i) {
            w[i] = 0.0;
            for (int j = 0; j < d; ++j) w[i] += static_cast<double>(at(i, j)) * v[j];
            norm += w[i];
        }
        lam = norm;
        double drift = 0.0;
        for (int i = 0; i < d; ++i) {
            w[i] /= norm;
            drift = std::max(drift, std::fabs(w[i] - v[i]));
        }
        v = w;
        if (drift < 1e-16 && it > 4) break;
    }
    r.perron_value = lam;
    r.perron_vector = v;
    int near_top = 0;
    for (const auto& z : r.eigenvalues)
        if (std::abs(z) > lam * (1.0 - 1e-9)) ++near_top;
    r.perron_simple = near_top == 1;
    return r;
}

/// The standard IET fixed by the loop: lengths are the Perron vector of the
/// transposed intersection matrix, profiles are identities, slopes are one.
inline Giet fixed_aiet(const RauzyLoop& loop) {
    const SpectrumReport s = spectrum(loop.matrix);
    if (!s.perron_simple)
        throw InvalidInputError("fixed_aiet: Perron value is not simple for this loop");
    for (double x : s.perron_vector)
        if (!(x > 0)) throw InvalidInputError("fixed_aiet: Perron vector not positive");
    return iet_from_lengths(loop.base, s.perron_vector);
}

/// mu(RT) = A mu(T): the exact image of a log-slope vector under the cocycle.
inline std::vector<double> slope_cocycle(const IntMatrix& a, const std::vector<double>& mu) {
    const int d = a.dim();
    if (static_cast<int>(mu.size()) != d) throw InvalidInputError("slope_cocycle: dimension mismatch");
    std::vector<double> out(d, 0.0);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) out[i] += static_cast<double>(a(i, j)) * mu[j];
    return out;
}

/// Measured sup-error of the cocycle prediction against an actual
/// renormalisation of the AIET.
inline double slope_cocycle_error(const Giet& t, const RauzyLoop& loop) {
    if (!t.is_affine()) throw InvalidInputError("slope_cocycle_error: input must be an AIET");
    const auto predicted = slope_cocycle(loop.matrix, t.affine.log_slopes());
    const auto measured = renormalize(t, loop).affine.log_slopes();
    double err = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i)
        err = std::max(err, std::fabs(predicted[i] - measured[i]));
    return err;
}

// ---------------------------------------------------------------------------
// Geometric intersection counts

/// Intersection matrix recovered from the level-1 dynamical partition by
/// counting which continuity interval each tower element sits in. Must agree
/// exactly with the combinatorial loop matrix.
inline IntMatrix intersection_matrix_from_partition(const Giet& t0, const RauzyLoop& loop, int level = 1) {
    RenormTrace tr = build_trace(t0, loop, level);
    const DynamicalPartition p = dynamical_partition(tr, level);
    const int d = t0.intervals();
    IntMatrix counts(d);
    for (int i = 0; i < d; ++i)
        for (const auto& iv : p.towers[i]) {
            const int j = branch_index(t0, 0.5 * (iv.a + iv.b));
            counts(i, j) = counts(i, j) + 1;
        }
    return counts;
}

// ---------------------------------------------------------------------------
// The (d-1)+(g-1) splitting

/// Bases for the unstable/stable decomposition of the renormalisation
/// derivative restricted to AIETs at the fixed point. Tangent vectors are
/// pairs (delta lambda, mu) in R^d x R^d with sum(delta lambda) = 0 and
/// sum(mu_i lambda0_i) = 0. The unstable part is the whole lambda tangent
/// plus the expanding directions of A on the constraint space; the stable
/// part is the contracting directions of A there.
struct Splitting {
    int d = 0;
    int genus = 0;
    std::vector<double> lambda0;
    Eigen::MatrixXd unstable_lambda;  ///< d x (d-1), orthonormal, rows sum to zero per column
    Eigen::MatrixXd unstable_mu;      ///< d x (g-1), orthonormal, inside the constraint space
    Eigen::MatrixXd stable_mu;        ///< d x g, orthonormal
    double constraint_invariance_error = 0.0;  ///< ||(I-P) A P|| on {mu . lambda0 = 0}

    int unstable_dim() const { return static_cast<int>(unstable_lambda.cols() + unstable_mu.cols()); }
    int stable_dim() const { return static_cast<int>(stable_mu.cols()); }
};

inline Splitting splitting(const IntMatrix& a, const std::vector<double>& lambda0) {
    const int d = a.dim();
    Splitting sp;
    sp.d = d;
    sp.lambda0 = lambda0;

    Eigen::MatrixXd m(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = static_cast<double>(a(i, j));

    // Orthonormal basis of {sum = 0} in lambda space.
    Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(d, 1) / std::sqrt(static_cast<double>(d));
    Eigen::MatrixXd lam_proj = Eigen::MatrixXd::Identity(d, d) - ones * ones.transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd_lam(lam_proj, Eigen::ComputeThinU);
    sp.unstable_lambda = svd_lam.matrixU().leftCols(d - 1);

    // Eigenvectors of A away from the Perron value, split by modulus. All of
    // them lie in the constraint space automatically.
    Eigen::EigenSolver<Eigen::MatrixXd> es(m);
    const auto& ev = es.eigenvalues();
    double perron = 0.0;
    int perron_idx = 0;
    for (int i = 0; i < d; ++i)
        if (std::abs(ev(i)) > perron) {
            perron = std::abs(ev(i));
            perron_idx = i;
        }
    std::vector<Eigen::VectorXd> unstable, stable;
    std::vector<int> used(d, 0);
    for (int i = 0; i < d; ++i) {
        if (i == perron_idx || used[i]) continue;
        const double mod = std::abs(ev(i));
        Eigen::VectorXcd col = es.eigenvectors().col(i);
        if (std::fabs(ev(i).imag()) > 1e-12) {
            // complex pair: take real and imaginary parts once
            for (int j = i + 1; j < d; ++j)
                if (std::fabs(ev(j).real() - ev(i).real()) < 1e-10 &&
                    std::fabs(ev(j).imag() + ev(i).imag()) < 1e-10 && !used[j]) {
                    used[j] = 1;
                    break;
                }
            Eigen::VectorXd re = col.real(), im = col.imag();
            (mod > 1.0 ? unstable : stable).push_back(re);
            (mod > 1.0 ? unstable : stable).push_back(im);
        } else {
            (mod > 1.0 ? unstable : stable).push_back(col.real());
        }
    }
    auto orthonormalize = [](const std::vector<Eigen::VectorXd>& cols, int d_) {
        Eigen::MatrixXd b(d_, static_cast<int>(cols.size()));
        for (std::size_t c = 0; c < cols.size(); ++c) b.col(static_cast<int>(c)) = cols[c];
        if (cols.empty()) return Eigen::MatrixXd(d_, 0);
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(b);
        Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d_, static_cast<int>(cols.size()));
        return q;
    };
    sp.unstable_mu = orthonormalize(unstable, d);
    sp.stable_mu = orthonormalize(stable, d);
    sp.genus = static_cast<int>(sp.stable_mu.cols());  // g contracting directions on the constraint space

    // Invariance of {mu . lambda0 = 0}: ||(I - P) A P|| with P the orthogonal
    // projector onto the constraint space.
    Eigen::VectorXd l0(d);
    for (int i = 0; i < d; ++i) l0(i) = lambda0[i];
    l0.normalize();
    Eigen::MatrixXd proj = Eigen::MatrixXd::Identity(d, d) - l0 * l0.transpose();
    sp.constraint_invariance_error = ((Eigen::MatrixXd::Identity(d, d) - proj) * m * proj).norm();
    return sp;
}

/// Coordinates of an affine tangent vector (delta lambda, mu) in the
/// splitting bases; the mu part is decomposed over the joint
/// unstable/stable eigenbasis of the constraint space.
struct TangentCoords {
    Eigen::VectorXd u;  ///< (d-1) lambda coords followed by (g-1) mu coords
    Eigen::VectorXd s;  ///< g coords

    double u_norm() const { return u.norm(); }
    double s_norm() const { return s.norm(); }
};

inline TangentCoords decompose_tangent(const Splitting& sp, const Eigen::VectorXd& dlambda,
                                       const Eigen::VectorXd& mu) {
    Eigen::VectorXd l0(sp.d);
    for (int i = 0; i < sp.d; ++i) l0(i) = sp.lambda0[i];
    // Remove any component along lambda0 (second-order chart debris).
    Eigen::VectorXd mu_v = mu - (mu.dot(l0) / l0.dot(l0)) * l0;

    const int nu = static_cast<int>(sp.unstable_mu.cols());
    const int ns = static_cast<int>(sp.stable_mu.cols());
    Eigen::MatrixXd joint(sp.d, nu + ns);
    if (nu > 0) joint.leftCols(nu) = sp.unstable_mu;
    if (ns > 0) joint.rightCols(ns) = sp.stable_mu;
    Eigen::VectorXd c = joint.colPivHouseholderQr().solve(mu_v);

    TangentCoords out;
    out.u.resize(sp.d - 1 + nu);
    out.u.head(sp.d - 1) = sp.unstable_lambda.transpose() * dlambda;
    if (nu > 0) out.u.tail(nu) = c.head(nu);
    out.s = ns > 0 ? Eigen::VectorXd(c.tail(ns)) : Eigen::VectorXd(0);
    return out;
}

// ---------------------------------------------------------------------------
// Charts on the space of AIETs and finite-difference Jacobians

/// A reference periodic system: loop, fixed IET, splitting.
struct System {
    std::string name;
    RauzyLoop loop;
    Giet t0;
    SpectrumReport spec;
    Splitting split;
    SurfaceData surface;

    int d() const { return t0.intervals(); }
};

inline System make_system(std::string name, const RauzyLoop& loop) {
    System sys;
    sys.name = std::move(name);
    sys.loop = loop;
    sys.t0 = fixed_aiet(loop);
    sys.spec = spectrum(loop.matrix);
    sys.split = splitting(loop.matrix, sys.t0.affine.lambda);
    sys.surface = genus_and_marked_points(loop.base);
    return sys;
}

/// AIET whose chart coordinates are a (lambda directions) and b (mu
/// directions over the joint eigenbasis, unstable first).
inline Aiet aiet_from_chart(const System& sys, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const int d = sys.d();
    const int nu = static_cast<int>(sys.split.unstable_mu.cols());
    Eigen::VectorXd dl = sys.split.unstable_lambda * a;
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(d);
    if (nu > 0) mu += sys.split.unstable_mu * b.head(nu);
    if (b.size() > nu) mu += sys.split.stable_mu * b.tail(b.size() - nu);
    std::vector<double> lambda(d), rho(d);
    for (int i = 0; i < d; ++i) {
        lambda[i] = sys.t0.affine.lambda[i] + dl(i);
        if (!(lambda[i] > 0)) throw NotInDomainError("chart point leaves the simplex");
        rho[i] = std::exp(mu(i));
    }
    return Aiet(sys.loop.base, lambda, rho);
}

/// Chart coordinates of an AIET near the fixed point (inverse of
/// aiet_from_chart up to second-order normalisation corrections).
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> chart_from_aiet(const System& sys, const Aiet& t) {
    const int d = sys.d();
    Eigen::VectorXd dl(d), mu(d);
    for (int i = 0; i < d; ++i) {
        dl(i) = t.lambda[i] - sys.t0.affine.lambda[i];
        mu(i) = std::log(t.rho[i]);
    }
    const TangentCoords c = decompose_tangent(sys.split, dl, mu);
    Eigen::VectorXd a = c.u.head(d - 1);
    Eigen::VectorXd b(c.u.size() - (d - 1) + c.s.size());
    b.head(c.u.size() - (d - 1)) = c.u.tail(c.u.size() - (d - 1));
    b.tail(c.s.size()) = c.s;
    return {a, b};
}

/// Central finite-difference Jacobian of R restricted to AIETs at T0, in the
/// chart (a, b). AIETs renormalise through the exact branch-free path, so
/// steps down to 1e-7 stay clean.
inline Eigen::MatrixXd fd_jacobian_affine(const System& sys, double step) {
    const int d = sys.d();
    const int dim = 2 * d - 2;
    Eigen::MatrixXd jac(dim, dim);
    auto renorm_chart = [&](const Eigen::VectorXd& x) {
        Eigen::VectorXd a = x.head(d - 1), b = x.tail(d - 1);
        const Aiet in = aiet_from_chart(sys, a, b);
        const Giet out = renormalize(Giet(in, std::vector<MonotoneMap>(d, MonotoneMap::identity(2))), sys.loop);
        auto [a2, b2] = chart_from_aiet(sys, out.affine);
        Eigen::VectorXd y(dim);
        y.head(d - 1) = a2;
        y.tail(d - 1) = b2;
        return y;
    };
    for (int k = 0; k < dim; ++k) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(dim);
        e(k) = step;
        jac.col(k) = (renorm_chart(e) - renorm_chart(-e)) / (2.0 * step);
    }
    return jac;
}

/// Verdict of the derivative block structure at T0, with a step-size sweep.
struct BlockCheckReport {
    double step_used = 0.0;
    double lambda_to_mu_norm = 0.0;       ///< ||D_lambda R_mu||, must vanish
    double lambda_expansion = 0.0;        ///< smallest singular value of D_lambda R_lambda
    double mu_block_vs_a_error = 0.0;     ///< ||D_mu R_mu - A|_V|| in the eigen chart
    int unstable_count = 0;               ///< eigenvalues of the full Jacobian with |.| > 1+1e-3
    int stable_count = 0;                 ///< eigenvalues with |.| < 1-1e-3
    int borderline_count = 0;
    double spectrum_match_error = 0.0;    ///< Jacobian moduli vs predicted moduli
    std::vector<double> sweep_steps;
    std::vector<double> sweep_disagreement;
    Eigen::MatrixXd jacobian;
};

inline BlockCheckReport derivative_block_check(const System& sys) {
    BlockCheckReport rep;
    const int d = sys.d();
    const int dim = 2 * d - 2;

    const std::vector<double> steps{1e-4, 1e-5, 1e-6, 1e-7};
    std::vector<Eigen::MatrixXd> jacs;
    for (double h : steps) jacs.push_back(fd_jacobian_affine(sys, h));
    // Plateau selection: the step whose Jacobian moves least w.r.t. its
    // neighbours in the sweep.
    int best = 0;
    double best_disc = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < steps.size(); ++i) {
        double disc = 0.0;
        if (i > 0) disc = std::max(disc, (jacs[i] - jacs[i - 1]).norm());
        if (i + 1 < steps.size()) disc = std::max(disc, (jacs[i] - jacs[i + 1]).norm());
        rep.sweep_steps.push_back(steps[i]);
        rep.sweep_disagreement.push_back(disc);
        if (disc < best_disc) {
            best_disc = disc;
            best = static_cast<int>(i);
        }
    }
    rep.step_used = steps[best];
    const Eigen::MatrixXd& j = jacs[best];
    rep.jacobian = j;

    rep.lambda_to_mu_norm = j.bottomLeftCorner(d - 1, d - 1).norm();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(j.topLeftCorner(d - 1, d - 1));
    rep.lambda_expansion = svd.singularValues().minCoeff();

    // D_mu R_mu in the eigen chart must be A restricted to the constraint
    // space: diagonal with the non-Perron eigenvalues (possibly 2x2 blocks
    // for complex pairs after orthonormalisation; compare spectra instead).
    Eigen::MatrixXd mu_block = j.bottomRightCorner(d - 1, d - 1);
    Eigen::EigenSolver<Eigen::MatrixXd> es_mu(mu_block);
    std::vector<double> mu_mods;
    for (int i = 0; i < d - 1; ++i) mu_mods.push_back(std::abs(es_mu.eigenvalues()(i)));
    std::sort(mu_mods.begin(), mu_mods.end());
    std::vector<double> a_mods;
    for (std::size_t i = 1; i < sys.spec.eigenvalues.size(); ++i)
        a_mods.push_back(std::abs(sys.spec.eigenvalues[i]));
    std::sort(a_mods.begin(), a_mods.end());
    for (std::size_t i = 0; i < a_mods.size(); ++i)
        rep.mu_block_vs_a_error = std::max(rep.mu_block_vs_a_error, std::fabs(mu_mods[i] - a_mods[i]));

    // Full-Jacobian spectrum against the prediction {perron/|mu_e|} union
    // {|mu_e|} over the non-Perron eigenvalues mu_e of A.
    Eigen::EigenSolver<Eigen::MatrixXd> es(j);
    std::vector<double> jac_mods;
    for (int i = 0; i < dim; ++i) jac_mods.push_back(std::abs(es.eigenvalues()(i)));
    std::sort(jac_mods.begin(), jac_mods.end());
    std::vector<double> predicted;
    for (std::size_t i = 1; i < sys.spec.eigenvalues.size(); ++i) {
        predicted.push_back(sys.spec.perron_value / std::abs(sys.spec.eigenvalues[i]));
        predicted.push_back(std::abs(sys.spec.eigenvalues[i]));
    }
    std::sort(predicted.begin(), predicted.end());
    for (std::size_t i = 0; i < predicted.size(); ++i)
        rep.spectrum_match_error =
            std::max(rep.spectrum_match_error, std::fabs(jac_mods[i] - predicted[i]) /
                                                   std::max(1.0, predicted[i]));

    for (double m : jac_mods) {
        if (m > 1.0 + 1e-3) ++rep.unstable_count;
        else if (m < 1.0 - 1e-3) ++rep.stable_count;
        else ++rep.borderline_count;
    }
    return rep;
}

}  // namespace gietlab
