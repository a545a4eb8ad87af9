#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "gietlab/cohomology.hpp"
#include "gietlab/estimates.hpp"
#include "gietlab/serialization.hpp"
#include "gietlab/shadowing.hpp"

namespace gietlab {

// ---------------------------------------------------------------------------
// Configuration

struct ExperimentConfig {
    std::string system = "golden";  ///< "golden", "d4", or "custom"
    std::vector<int> permutation;   ///< custom system: 1-based bottom images
    std::string loop_word;          ///< custom system: word over {t,b}
    double neighbourhood_radius = 1e-3;
    int grid_size = kDefaultGridSize;
    int depth = 0;  ///< 0: per-experiment default
    int search_max_len = 8;
    int sample_count = 0;  ///< 0: per-experiment default
    std::uint64_t seed = 20260809;
    unsigned workers = 1;
    std::string label = "default";
    std::string out_root = "out";

    void validate() const {
        if (neighbourhood_radius <= 0) throw ConfigError("neighbourhood_radius must be positive");
        if (grid_size < 9) throw ConfigError("grid_size must be at least 9");
        if (depth < 0 || search_max_len < 1) throw ConfigError("depths must be positive");
        if (label.empty()) throw ConfigError("label must not be empty");
    }
};

inline json to_json(const ExperimentConfig& c) {
    return json{{"system", c.system},
                {"permutation", c.permutation},
                {"loop", c.loop_word},
                {"neighbourhood_radius", c.neighbourhood_radius},
                {"grid_size", c.grid_size},
                {"depth", c.depth},
                {"search_max_len", c.search_max_len},
                {"sample_count", c.sample_count},
                {"seed", c.seed},
                {"workers", c.workers},
                {"label", c.label},
                {"out_root", c.out_root}};
}

inline ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig c;
    try {
        if (j.contains("system")) c.system = j.at("system").get<std::string>();
        if (j.contains("permutation")) c.permutation = j.at("permutation").get<std::vector<int>>();
        if (j.contains("loop")) c.loop_word = j.at("loop").get<std::string>();
        if (j.contains("neighbourhood_radius")) c.neighbourhood_radius = j.at("neighbourhood_radius").get<double>();
        if (j.contains("grid_size")) c.grid_size = j.at("grid_size").get<int>();
        if (j.contains("depth")) c.depth = j.at("depth").get<int>();
        if (j.contains("search_max_len")) c.search_max_len = j.at("search_max_len").get<int>();
        if (j.contains("sample_count")) c.sample_count = j.at("sample_count").get<int>();
        if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("workers")) c.workers = j.at("workers").get<unsigned>();
        if (j.contains("label")) c.label = j.at("label").get<std::string>();
        if (j.contains("out_root")) c.out_root = j.at("out_root").get<std::string>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    c.validate();
    return c;
}

/// Apply one "key=value" override (the CLI's --set flag).
inline void apply_override(json& doc, const std::string& kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("override must be key=value: " + kv);
    const std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
    json parsed;
    try {
        parsed = json::parse(value);
    } catch (const json::exception&) {
        parsed = value;  // plain strings need no quoting on the command line
    }
    doc[key] = parsed;
}

inline System system_from_config(const ExperimentConfig& c) {
    if (c.system == "custom") {
        if (c.permutation.empty() || c.loop_word.empty())
            throw ConfigError("custom system needs 'permutation' and 'loop'");
        return make_system("custom", make_loop(Permutation(c.permutation), c.loop_word));
    }
    return make_named_system(c.system);
}

// ---------------------------------------------------------------------------
// Artifact helpers

inline std::string fmt15(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return buf;
}

inline void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path);
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << fmt15(row[i]);
        out << "\n";
    }
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

inline json to_json(const SampledFunction& f) {
    return json{{"x", f.x}, {"y", f.y}};
}

/// Eigenvalues are emitted as 15-significant-digit strings (re, im).
inline json spectrum_to_json(const SpectrumReport& s) {
    json evs = json::array();
    for (const auto& z : s.eigenvalues) evs.push_back(json::array({fmt15(z.real()), fmt15(z.imag())}));
    return json{{"eigenvalues", evs},
                {"perron_value", fmt15(s.perron_value)},
                {"perron_vector", s.perron_vector},
                {"expanding", s.expanding},
                {"contracting", s.contracting},
                {"indeterminate", s.indeterminate},
                {"reciprocal_pairing_error", s.reciprocal_pairing_error},
                {"perron_simple", s.perron_simple}};
}

inline json splitting_to_json(const Splitting& sp) {
    auto cols = [](const Eigen::MatrixXd& m) {
        json out = json::array();
        for (int c = 0; c < m.cols(); ++c) {
            json col = json::array();
            for (int i = 0; i < m.rows(); ++i) col.push_back(m(i, c));
            out.push_back(col);
        }
        return out;
    };
    return json{{"d", sp.d},
                {"genus", sp.genus},
                {"lambda0", sp.lambda0},
                {"unstable_lambda", cols(sp.unstable_lambda)},
                {"unstable_mu", cols(sp.unstable_mu)},
                {"stable_mu", cols(sp.stable_mu)},
                {"constraint_invariance_error", sp.constraint_invariance_error}};
}

inline json trace_level_to_json(const RenormTrace& tr, int n) {
    const Level& lv = tr.levels[n];
    json heights = json::array();
    for (auto h : lv.heights) heights.push_back(h);
    return json{{"n", n}, {"x", lv.x}, {"heights", heights}, {"giet", to_json(lv.giet)}};
}

inline std::string trace_to_jsonl(const RenormTrace& tr) {
    std::string out;
    for (int n = 0; n <= tr.depth(); ++n) out += trace_level_to_json(tr, n).dump() + "\n";
    return out;
}

// ---------------------------------------------------------------------------
// The acceptance checks (shared by the experiments and the acceptance suite)

struct CheckResult {
    std::string id;
    std::string name;
    bool pass = false;
    std::string detail;
    json data;  ///< series and measured constants for artifact export
};

namespace checks {

/// Shadowed maps reused by several checks: the canonical X0-slice shoot
/// outputs at the configured radius.
struct ShadowedMap {
    Giet giet;
    ShadowingResult result;
    Eigen::VectorXd s;
    std::vector<MonotoneMap> h;
};

inline ShadowedMap make_shadowed(const System& sys, Rng& rng, double radius, int n_max,
                                 bool x0_slice = true) {
    ShadowingProblem pb;
    pb.s = random_ball(rng, sys.split.stable_dim(), radius);
    pb.h = random_profiles(sys.d(), rng, radius, x0_slice);
    pb.n_max = n_max;
    pb.x0_slice = x0_slice;
    // The eta-distance of the profile tuple scales like d * radius; the
    // escape ball must contain the starting point with room to move.
    pb.escape_radius = std::max(1e-2, 30.0 * sys.d() * radius);
    pb.method = sys.split.unstable_dim() == 1 ? ShadowingProblem::Method::Bisection
                                              : ShadowingProblem::Method::Corrections;
    ShadowedMap out;
    out.result = shoot(sys, pb);
    out.giet = giet_from_coords(sys, pb.s, out.result.u_star, pb.h);
    out.s = pb.s;
    out.h = pb.h;
    return out;
}

/// Criterion 1: R(T0) = T0 within 1e-10 (C0) and 1e-8 (C1) on both systems.
inline CheckResult fixed_point() {
    CheckResult r{"C1", "fixed point R(T0) = T0"};
    r.pass = true;
    for (const auto& sys : {make_golden_system(), make_d4_system()}) {
        const Giet rt = renormalize(sys.t0, sys.loop);
        const double c0 = cr_distance(rt, sys.t0, 0);
        const double c1 = cr_distance(rt, sys.t0, 1);
        r.data[sys.name] = {{"c0_residual", c0}, {"c1_residual", c1}};
        if (!(c0 <= 1e-10 && c1 <= 1e-8)) r.pass = false;
        r.detail += sys.name + ": C0=" + fmt15(c0) + " C1=" + fmt15(c1) + "  ";
    }
    return r;
}

/// Criterion 2: geometric counts = combinatorial product, |det| = 1, Perron
/// vector residual <= 1e-10, reciprocal spectrum <= 1e-8, positive power.
inline CheckResult intersection_matrix() {
    CheckResult r{"C2", "intersection matrix facts"};
    r.pass = true;
    for (const auto& sys : {make_golden_system(), make_d4_system()}) {
        const bool counts_equal = intersection_matrix_from_partition(sys.t0, sys.loop) == sys.loop.matrix;
        const bool unimodular = std::abs(sys.loop.matrix.determinant()) == 1;
        // Eigen residual of the Perron pair on the transpose.
        const auto& lam = sys.t0.affine.lambda;
        double residual = 0.0;
        for (int i = 0; i < sys.d(); ++i) {
            double acc = 0.0;
            for (int j = 0; j < sys.d(); ++j)
                acc += static_cast<double>(sys.loop.matrix(j, i)) * lam[j];
            residual = std::max(residual, std::fabs(acc - sys.spec.perron_value * lam[i]));
        }
        residual /= sys.spec.perron_value;
        const bool reciprocal = sys.spec.reciprocal_pairing_error <= 1e-8;
        const auto adm = is_admissible_fixed_point(sys.loop);
        const bool positive = adm.positivity_power > 0;
        bool golden_oracle = true;
        if (sys.d() == 2) {
            const double g = (std::sqrt(5.0) - 1.0) / 2.0;
            golden_oracle = std::fabs(lam[0] - g) <= 1e-10 && std::fabs(lam[1] - (1.0 - g)) <= 1e-10;
        }
        const bool ok = counts_equal && unimodular && residual <= 1e-10 && reciprocal && positive &&
                        golden_oracle;
        if (!ok) r.pass = false;
        r.data[sys.name] = {{"counts_equal", counts_equal},
                            {"det", sys.loop.matrix.determinant()},
                            {"perron_residual", residual},
                            {"reciprocal_error", sys.spec.reciprocal_pairing_error},
                            {"positivity_power", adm.positivity_power}};
        r.detail += sys.name + ": perron_res=" + fmt15(residual) +
                    " recip=" + fmt15(sys.spec.reciprocal_pairing_error) + "  ";
    }
    return r;
}

/// Criterion 3: the finite-difference Jacobian of R restricted to AIETs has
/// exactly (d-1)+(g-1) eigenvalues of modulus > 1+1e-3 and the rest below
/// 1-1e-3.
inline CheckResult splitting_dimensions() {
    CheckResult r{"C3", "splitting dimensions"};
    r.pass = true;
    for (const auto& sys : {make_golden_system(), make_d4_system()}) {
        const auto rep = derivative_block_check(sys);
        const int expected = sys.d() - 1 + sys.surface.genus - 1;
        const bool ok = rep.unstable_count == expected && rep.borderline_count == 0 &&
                        rep.stable_count == 2 * sys.d() - 2 - expected &&
                        rep.lambda_to_mu_norm <= 1e-6;
        if (!ok) r.pass = false;
        r.data[sys.name] = {{"unstable", rep.unstable_count},
                            {"stable", rep.stable_count},
                            {"borderline", rep.borderline_count},
                            {"expected_unstable", expected},
                            {"lambda_to_mu", rep.lambda_to_mu_norm},
                            {"lambda_expansion", rep.lambda_expansion},
                            {"spectrum_match_error", rep.spectrum_match_error},
                            {"fd_step", rep.step_used}};
        r.detail += sys.name + ": unstable=" + std::to_string(rep.unstable_count) + "/" +
                    std::to_string(expected) + "  ";
    }
    return r;
}

/// Criterion 4: slope cocycle error <= 1e-9 over random AIETs.
inline CheckResult slope_cocycle_batch(std::uint64_t seed, double radius, int count, unsigned workers) {
    CheckResult r{"C4", "slope cocycle"};
    r.pass = true;
    for (const auto& sys : {make_golden_system(), make_d4_system()}) {
        Rng rng(seed + (sys.d() == 2 ? 1 : 2));
        std::vector<Aiet> samples;
        samples.reserve(count);
        for (int i = 0; i < count; ++i) samples.push_back(random_aiet(sys, rng, radius));
        std::vector<double> errs(count, 0.0);
        parallel_for(count, workers, [&](std::size_t i) {
            Giet t(samples[i], std::vector<MonotoneMap>(sys.d(), MonotoneMap::identity(2)));
            errs[i] = slope_cocycle_error(t, sys.loop);
        });
        const double worst = *std::max_element(errs.begin(), errs.end());
        if (worst > 1e-9) r.pass = false;
        r.data[sys.name] = {{"count", count}, {"max_error", worst}};
        r.detail += sys.name + ": max_err=" + fmt15(worst) + "  ";
    }
    return r;
}

/// Measured regression baselines of the empirical constants in the profile
/// and C2 bounds (measured in development, frozen with headroom).
inline constexpr double kProfileC1Baseline = 6.0;
inline constexpr double kC2Baseline = 4.0;

/// Criterion 5: the full section-4 battery on shadowed maps of both systems
/// at levels <= 8, plus the D eta amplitude ramp across four decades.
inline CheckResult estimate_battery(std::uint64_t seed) {
    CheckResult r{"C5", "estimate battery"};
    r.pass = true;
    for (const auto& sys : {make_golden_system(), make_d4_system()}) {
        Rng rng(seed + sys.d());
        const auto sm = make_shadowed(sys, rng, 1e-3, std::max(8, sys.d() == 2 ? 10 : 8));
        if (sm.result.achieved_depth < 8) {
            r.pass = false;
            r.detail += sys.name + ": shoot depth " + std::to_string(sm.result.achieved_depth) + "  ";
            continue;
        }
        const auto tr = build_trace(sm.giet, sys.loop, 8);
        json sys_data;
        json rows = json::array();  // (system, level, checker, lhs, rhs, margin, pass)
        auto push_row = [&](int level, const BoundReport& b) {
            rows.push_back(json::array(
                {sys.name, level, b.checker, b.lhs, b.rhs, b.margin, b.pass}));
            if (!b.pass) r.pass = false;
        };

        // Distortion on the floors of the level-6 partition.
        const auto part = dynamical_partition(tr, std::min(6, tr.depth()));
        double min_margin = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < part.floors.size(); ++j) {
            const auto rep = distortion_check(sm.giet, part.floors[j], static_cast<int>(part.heights[j]) - 1);
            min_margin = std::min(min_margin, rep.margin);
            push_row(6, rep);
        }
        sys_data["distortion_min_margin"] = min_margin;

        const auto pc1 = profile_c1_check(tr, kProfileC1Baseline);
        for (int n = 0; n < static_cast<int>(pc1.reports.size()); ++n) push_row(n, pc1.reports[n]);
        sys_data["profile_c1_measured_constant"] = pc1.measured_constant;

        const auto c2 = c2_check(tr, kC2Baseline);
        for (int n = 0; n < static_cast<int>(c2.reports.size()); ++n) push_row(n, c2.reports[n]);
        sys_data["c2_measured_constant"] = c2.measured_constant;

        // D eta ramp across four decades of profile amplitude.
        std::vector<double> ramp{1e-2, 1e-3, 1e-4, 1e-5};
        std::vector<double> sups;
        for (double amp : ramp) {
            Rng ramp_rng(seed + 77 + static_cast<std::uint64_t>(-std::log10(amp)));
            const auto pert = make_shadowed(sys, ramp_rng, amp, 6);
            const auto ptr = build_trace(pert.giet, sys.loop, std::min(6, pert.result.achieved_depth));
            sups.push_back(c3_measure(ptr).overall_sup);
        }
        bool monotone = true;
        for (std::size_t i = 0; i + 1 < sups.size(); ++i)
            if (!(sups[i + 1] < sups[i])) monotone = false;
        if (!monotone) r.pass = false;
        sys_data["deta_ramp"] = sups;
        sys_data["deta_ramp_monotone"] = monotone;
        sys_data["rows"] = rows;
        r.data[sys.name] = sys_data;
        r.detail += sys.name + ": dist_margin=" + fmt15(min_margin) +
                    (monotone ? " ramp ok  " : " ramp NOT monotone  ");
    }
    return r;
}

/// Criterion 6: eta-Lipschitz ratios of R_P over profile pairs with equal
/// affine parts: <= 1.1 at radius 1e-2 and <= 1.02 at radius 1e-3.
inline CheckResult eta_lipschitz_batch(std::uint64_t seed, int pairs) {
    CheckResult r{"C6", "eta-Lipschitz constant"};
    r.pass = true;
    const std::vector<std::pair<double, double>> radii{{1e-2, 1.1}, {1e-3, 1.02}};
    for (const auto& sys : {make_golden_system(), make_d4_system()}) {
        json sys_data;
        for (const auto& [radius, bound] : radii) {
            Rng rng(seed + sys.d() * 10 + static_cast<std::uint64_t>(-std::log10(radius)));
            double worst = 0.0;
            int defined = 0;
            for (int p = 0; p < pairs; ++p) {
                Giet t1(sys.t0.affine, random_profiles(sys.d(), rng, radius, false));
                Giet t2(sys.t0.affine, random_profiles(sys.d(), rng, radius, false));
                const auto est = eta_lipschitz_estimate(t1, t2, sys.loop);
                if (!est.defined) continue;
                ++defined;
                worst = std::max(worst, est.ratio);
            }
            if (defined < pairs / 2 || worst > bound) r.pass = false;
            sys_data["radius_" + fmt15(radius)] = {{"max_ratio", worst}, {"bound", bound}, {"pairs", defined}};
            r.detail += sys.name + "@" + fmt15(radius) + ": " + fmt15(worst) + "<=" + fmt15(bound) + "  ";
        }
        r.data[sys.name] = sys_data;
    }
    return r;
}

/// Criterion 7: d4 shadowing at radius 1e-3 in the X0 slice: depth >= 8,
/// correction ratios <= 0.9 above the noise floor, C1 decay fit with rate
/// < 1 and R^2 >= 0.95.
inline CheckResult shadowing_batch(std::uint64_t seed, int runs, unsigned workers) {
    CheckResult r{"C7", "shadowing (pre-stable space)"};
    r.pass = true;
    const auto sys = make_d4_system();
    std::vector<ShadowedMap> maps(runs);
    std::vector<std::string> errors(runs);
    std::vector<Rng> rngs;
    for (int i = 0; i < runs; ++i) rngs.emplace_back(seed + 1000 + i);
    parallel_for(runs, workers, [&](std::size_t i) {
        try {
            maps[i] = make_shadowed(sys, rngs[i], 1e-3, 10);
        } catch (const Error& e) {
            errors[i] = e.what();
        }
    });
    json runs_data = json::array();
    int ok_runs = 0;
    for (int i = 0; i < runs; ++i) {
        if (!errors[i].empty()) {
            runs_data.push_back(json{{"error", errors[i]}});
            continue;
        }
        const auto& res = maps[i].result;
        bool ok = res.achieved_depth >= 8;
        double worst_ratio = 0.0;
        for (std::size_t n = 2; n + 1 < res.correction_norms.size(); ++n)
            if (res.correction_norms[n] > 1e-9 && res.correction_norms[n + 1] > 1e-9)
                worst_ratio = std::max(worst_ratio, res.correction_norms[n + 1] / res.correction_norms[n]);
        if (worst_ratio > 0.9) ok = false;
        if (!(res.c1_fit.rate < 1.0 && res.c1_fit.r2 >= 0.95)) ok = false;
        if (ok) ++ok_runs;
        std::vector<double> ustar(res.u_star.data(), res.u_star.data() + res.u_star.size());
        runs_data.push_back(json{{"depth", res.achieved_depth},
                                 {"worst_correction_ratio", worst_ratio},
                                 {"c1_rate", res.c1_fit.rate},
                                 {"c1_r2", res.c1_fit.r2},
                                 {"stall_depth", res.stall_depth},
                                 {"u_star", ustar},
                                 {"correction_norms", res.correction_norms},
                                 {"dist_c0", res.dist_c0},
                                 {"dist_c1", res.dist_c1},
                                 {"dist_eta", res.dist_eta},
                                 {"ok", ok}});
    }
    r.pass = ok_runs == runs;
    r.data["runs"] = runs_data;
    r.data["ok_runs"] = ok_runs;
    r.detail = std::to_string(ok_runs) + "/" + std::to_string(runs) + " runs ok";
    return r;
}

/// Criterion 8: partition size decay. Ratios < 1 for n <= 10 on shadowed
/// maps of both systems; the golden IET's fitted ratio equals the inverse
/// Perron value within 5%.
inline CheckResult delta_decay(std::uint64_t seed) {
    CheckResult r{"C8", "partition size decay"};
    r.pass = true;

    const auto golden = make_golden_system();
    const auto tr0 = build_trace(golden.t0, golden.loop, 11);
    std::vector<double> deltas0;
    for (int n = 0; n <= 11; ++n) deltas0.push_back(partition_summary(tr0, n).delta);
    std::vector<double> tail(deltas0.begin() + 3, deltas0.end());
    const auto fit0 = fit_decay(tail);
    const double target = 1.0 / golden.spec.perron_value;
    if (std::fabs(fit0.rate - target) > 0.05 * target) r.pass = false;
    r.data["golden_iet"] = {{"fit_rate", fit0.rate}, {"target", target}};
    r.detail += "golden fit=" + fmt15(fit0.rate) + " target=" + fmt15(target) + "  ";

    int idx = 0;
    for (const auto& sys : {make_golden_system(), make_d4_system()}) {
        Rng rng(seed + 31 + idx++);
        const auto sm = make_shadowed(sys, rng, 1e-3, 10);
        const int depth = std::min(10, sm.result.achieved_depth);
        const auto tr = build_trace(sm.giet, sys.loop, depth);
        std::vector<double> deltas;
        double worst_ratio = 0.0;
        for (int n = 0; n <= depth; ++n) {
            deltas.push_back(partition_summary(tr, n).delta);
            if (n > 0) worst_ratio = std::max(worst_ratio, deltas[n] / deltas[n - 1]);
        }
        if (!(worst_ratio < 1.0) || depth < 8) r.pass = false;
        r.data[sys.name + "_shadowed"] = {{"deltas", deltas}, {"worst_ratio", worst_ratio}, {"depth", depth}};
        r.detail += sys.name + " worst ratio=" + fmt15(worst_ratio) + "  ";
    }
    return r;
}

/// Canonical negative control: a d4 AIET with slopes along the unstable
/// eigendirection of the cocycle. Its log DT Birkhoff sums grow.
inline Giet negative_control_aiet() {
    const auto d4 = make_d4_system();
    Eigen::VectorXd a = Eigen::VectorXd::Zero(3), b = Eigen::VectorXd::Zero(3);
    b(0) = 0.02;
    return Giet(aiet_from_chart(d4, a, b), std::vector<MonotoneMap>(4, MonotoneMap::identity()));
}

/// Criterion 9: cohomology and conjugacy on shadowed golden maps, with the
/// generic-AIET negative control.
inline CheckResult conjugacy_batch(std::uint64_t seed, int runs) {
    CheckResult r{"C9", "cohomological equation and conjugacy"};
    r.pass = true;
    const auto sys = make_golden_system();
    json runs_data = json::array();
    for (int i = 0; i < runs; ++i) {
        Rng rng(seed + 500 + i);
        const auto sm = make_shadowed(sys, rng, 3e-4, 14);
        const Giet& t = sm.giet;

        std::vector<double> xs{1e-7, 0.31, 0.62, 0.9};
        const auto b1 = birkhoff_bound_log_deriv(t, 4000, xs);
        const auto b4 = birkhoff_bound_log_deriv(t, 16000, xs);
        const double growth = b1.sup > 0 ? b4.sup / b1.sup : 1.0;

        CohomOptions opt;
        opt.orbit_length = 150000;
        const auto conj = invariant_density_and_conjugacy(t, sys.t0, opt);

        const bool ok = growth <= 1.05 && conj.transfer.residual_sup <= 1e-5 &&
                        conj.c0_residual <= 1e-5;
        if (!ok) r.pass = false;
        runs_data.push_back(json{{"birkhoff_growth", growth},
                                 {"cohom_residual", conj.transfer.residual_sup},
                                 {"conjugacy_residual", conj.c0_residual},
                                 {"break_mismatch", conj.break_point_mismatch},
                                 {"ok", ok}});
        if (i == 0) {
            r.data["cohom_solution"] = json{{"u", to_json(conj.transfer.u)},
                                            {"residual_sup", conj.transfer.residual_sup},
                                            {"birkhoff_sup", conj.transfer.birkhoff_sup},
                                            {"orbit_length", conj.transfer.orbit_length},
                                            {"max_orbit_gap", conj.transfer.min_orbit_gap}};
            r.data["conjugacy_map"] = json{{"h", to_json(conj.h)},
                                           {"density", to_json(conj.density)},
                                           {"c0_residual", conj.c0_residual},
                                           {"c1_distance_to_identity", conj.c1_distance_to_identity},
                                           {"break_point_mismatch", conj.break_point_mismatch}};
        }
        r.detail += "run" + std::to_string(i) + ": res=" + fmt15(conj.transfer.residual_sup) +
                    " conj=" + fmt15(conj.c0_residual) + "  ";
    }
    r.data["runs"] = runs_data;

    // Negative control.
    bool control_raised = false;
    try {
        const Giet bad = negative_control_aiet();
        CohomOptions opt;
        opt.orbit_length = 20000;
        solve_cohomological(bad, [&](double x) { return -std::log(eval_giet_all(bad, x).jet.d1); }, opt);
    } catch (const BoundednessError&) {
        control_raised = true;
    }
    if (!control_raised) r.pass = false;
    r.data["negative_control_raised"] = control_raised;
    r.detail += control_raised ? "control raised" : "control FAILED to raise";
    return r;
}

/// Criterion 10: fine-grid axioms and the ratio-test decay for shadowed
/// maps, with the identity-conjugacy control.
inline CheckResult ratio_test(std::uint64_t seed) {
    CheckResult r{"C10", "fine-grid ratio test"};
    r.pass = true;
    const auto sys = make_golden_system();
    const auto tr0 = build_trace(sys.t0, sys.loop, 9);

    const auto id_rep = fine_grid_ratio_test([](double x) { return x; }, tr0, 8);
    double id_max = 0.0;
    for (double d : id_rep.ratio_discrepancy) id_max = std::max(id_max, d);
    if (!(id_rep.axioms_hold && id_max <= 1e-9)) r.pass = false;
    r.data["identity_control_max"] = id_max;

    Rng rng(seed + 900);
    const auto sm = make_shadowed(sys, rng, 3e-4, 14);
    CohomOptions opt;
    opt.orbit_length = 150000;
    const auto conj = invariant_density_and_conjugacy(sm.giet, sys.t0, opt);
    const auto rep = fine_grid_ratio_test([&](double x) { return conj.h.eval(x); }, tr0, 8);
    if (!(rep.axioms_hold && rep.discrepancy_fit.rate < 1.0 && rep.discrepancy_fit.r2 >= 0.9))
        r.pass = false;
    r.data["shadowed"] = {{"discrepancies", rep.ratio_discrepancy},
                          {"fit_rate", rep.discrepancy_fit.rate},
                          {"fit_r2", rep.discrepancy_fit.r2},
                          {"refinement_bound", rep.refinement_bound},
                          {"adjacency_constant", rep.adjacency_constant},
                          {"delta_estimate", rep.delta_estimate}};
    r.detail = "fit rate=" + fmt15(rep.discrepancy_fit.rate) + " r2=" + fmt15(rep.discrepancy_fit.r2) +
               " id_max=" + fmt15(id_max);
    return r;
}

/// Criterion 11: the exact orbit backend agrees with the per-level resampled
/// backend within the fitted interpolation bound at levels <= 5.
inline CheckResult backend_agreement(std::uint64_t seed) {
    CheckResult r{"C11", "backend cross-validation"};
    r.pass = true;

    // Fit the one-level interpolation error law err(h) = C h^p on a closed
    // form oracle of the same make as the test profiles.
    TrigEta spec;
    spec.c = 0.0;
    spec.a = {1e-3};
    spec.b = {0.4e-3};
    std::vector<double> log_h, log_e;
    for (int n : {33, 65, 129, 257}) {
        const auto coarse = profile_from_eta(spec, n);
        const auto fine = profile_from_eta(spec, 1025);
        double err = 1e-18;
        for (int k = 0; k <= 1000; ++k) {
            const double x = k / 1000.0;
            err = std::max(err, std::fabs(coarse.eval(x) - fine.eval(x)));
        }
        log_h.push_back(std::log(1.0 / (n - 1)));
        log_e.push_back(std::log(err));
    }
    const LineFit law = fit_line(log_h, log_e);
    const double h = 1.0 / (kDefaultGridSize - 1);
    const double one_level = std::exp(law.intercept + law.slope * std::log(h));
    r.data["fitted_exponent"] = law.slope;
    r.data["one_level_error"] = one_level;

    int idx = 0;
    for (const auto& sys : {make_golden_system(), make_d4_system()}) {
        Rng rng(seed + 60 + idx++);
        const auto sm = make_shadowed(sys, rng, 1e-3, 6);
        const auto tr = build_trace(sm.giet, sys.loop, 5);
        double worst = 0.0;
        for (int n = 1; n <= 5; ++n) {
            const auto& rt = tr.levels[n].giet;
            const auto breaks = rt.affine.top_breaks();
            for (int b = 0; b < sys.d(); ++b) {
                for (int k = 0; k < 100; ++k) {
                    const double x = breaks[b] + (breaks[b + 1] - breaks[b]) * rng.uniform(0.0, 1.0);
                    const double exact = orbit_eval(tr, n, b, x);
                    const double fast = eval_giet(rt, x).first;
                    worst = std::max(worst, std::fabs(exact - fast));
                }
            }
        }
        // Tolerance: accumulated resampled error over <= 5 levels with a
        // fixed safety factor, floored at accumulated rounding.
        const double tolerance = std::max(300.0 * 6 * one_level, 5e-11);
        if (worst > tolerance) r.pass = false;
        r.data[sys.name] = {{"max_difference", worst}, {"tolerance", tolerance}};
        r.detail += sys.name + ": " + fmt15(worst) + "<=" + fmt15(tolerance) + "  ";
    }
    return r;
}

}  // namespace checks

// ---------------------------------------------------------------------------
// Experiments

struct ExperimentOutcome {
    bool pass = false;
    json summary;
    std::filesystem::path directory;
};

inline ExperimentOutcome run_experiment(const std::string& id, const ExperimentConfig& cfg) {
    cfg.validate();
    const std::filesystem::path dir = std::filesystem::path(cfg.out_root) / id / cfg.label;
    std::filesystem::create_directories(dir);
    write_text(dir / "config.json", to_json(cfg).dump(2) + "\n");

    ExperimentOutcome out;
    out.directory = dir;
    json summary;
    summary["experiment"] = id;
    summary["label"] = cfg.label;
    summary["config"] = to_json(cfg);
    std::vector<CheckResult> results;

    const int samples = cfg.sample_count;
    if (id == "E1") {
        const Permutation pi = cfg.permutation.empty() ? Permutation({4, 3, 2, 1}) : Permutation(cfg.permutation);
        const auto loops = enumerate_loops(pi, cfg.search_max_len);
        std::vector<std::vector<double>> rows;
        json found = json::array();
        int accepted = 0;
        for (const auto& loop : loops) {
            const auto rep = is_admissible_fixed_point(loop);
            rows.push_back({static_cast<double>(loop.steps.size()), rep.perron_value,
                            static_cast<double>(rep.genus), static_cast<double>(rep.marked_points),
                            static_cast<double>(rep.positivity_power), rep.hyperbolic ? 1.0 : 0.0,
                            rep.accepted ? 1.0 : 0.0});
            if (rep.accepted) {
                ++accepted;
                found.push_back(json{{"word", loop.word()},
                                     {"perron", rep.perron_value},
                                     {"genus", rep.genus},
                                     {"marked_points", rep.marked_points},
                                     {"matrix", loop.matrix.to_string()}});
            }
        }
        write_csv(dir / "loops.csv",
                  {"length", "perron", "genus", "marked_points", "positivity_power", "hyperbolic", "accepted"},
                  rows);
        summary["admissible"] = found;
        summary["total_loops"] = loops.size();
        out.pass = accepted > 0;
    } else if (id == "E2") {
        results.push_back(checks::fixed_point());
        const auto sys = system_from_config(cfg);
        const auto tr = build_trace(sys.t0, sys.loop, cfg.depth > 0 ? cfg.depth : 3);
        write_text(dir / "trace.jsonl", trace_to_jsonl(tr));
        std::vector<std::vector<double>> rows;
        for (int n = 0; n <= tr.depth(); ++n) {
            const auto ps = partition_summary(tr, n);
            double c1 = 0.0, c2 = 0.0;
            for (const auto& p : tr.levels[n].giet.profiles) {
                c1 = std::max(c1, profile_cr_norm(p, 1));
                c2 = std::max(c2, profile_cr_norm(p, 2));
            }
            rows.push_back({static_cast<double>(n), tr.levels[n].x, ps.delta, c1, c2});
        }
        write_csv(dir / "trace.csv", {"n", "x_n", "delta_n", "profile_c1", "profile_c2"}, rows);
        write_text(dir / "system.json",
                   json{{"name", sys.name},
                        {"permutation", sys.loop.base.to_one_based()},
                        {"loop", sys.loop.word()},
                        {"matrix", sys.loop.matrix.to_string()},
                        {"spectrum", spectrum_to_json(sys.spec)},
                        {"splitting", splitting_to_json(sys.split)},
                        {"genus", sys.surface.genus},
                        {"marked_points", sys.surface.marked_points}}
                           .dump(2) +
                       "\n");
    } else if (id == "E3") {
        results.push_back(checks::slope_cocycle_batch(cfg.seed, cfg.neighbourhood_radius,
                                                      samples > 0 ? samples : 100, cfg.workers));
    } else if (id == "E4") {
        results.push_back(checks::estimate_battery(cfg.seed));
        {
            std::ofstream csv(dir / "bounds.csv");
            csv << "system,level,checker,lhs,rhs,margin,pass\n";
            for (const auto& [name, sys_data] : results.back().data.items()) {
                if (!sys_data.contains("rows")) continue;
                for (const auto& row : sys_data["rows"])
                    csv << row[0].get<std::string>() << "," << row[1].get<int>() << ","
                        << row[2].get<std::string>() << "," << fmt15(row[3].get<double>()) << ","
                        << fmt15(row[4].get<double>()) << "," << fmt15(row[5].get<double>()) << ","
                        << row[6].get<bool>() << "\n";
            }
        }
        results.push_back(checks::eta_lipschitz_batch(cfg.seed, samples > 0 ? samples : 50));
    } else if (id == "E5") {
        results.push_back(checks::delta_decay(cfg.seed));
        if (!results.back().data.is_null() && results.back().data.contains("golden_iet")) {
            std::vector<std::vector<double>> rows;
            const auto sys = make_golden_system();
            const auto tr = build_trace(sys.t0, sys.loop, 11);
            for (int n = 0; n <= 11; ++n) {
                const auto ps = partition_summary(tr, n);
                rows.push_back({static_cast<double>(n), ps.x_n, ps.delta, ps.measure});
            }
            write_csv(dir / "delta.csv", {"n", "x_n", "delta", "measure"}, rows);
        }
    } else if (id == "E6") {
        const auto sys = system_from_config(cfg);
        Rng rng(cfg.seed);
        const int depth = cfg.depth > 0 ? cfg.depth : (sys.d() == 2 ? 12 : 9);
        const auto sm = checks::make_shadowed(sys, rng, cfg.neighbourhood_radius, depth);
        const auto tr = build_trace(sm.giet, sys.loop, std::min(depth, sm.result.achieved_depth));
        const auto diag = convergence_diagnostics(tr, sys);
        std::vector<std::vector<double>> rows;
        for (std::size_t n = 0; n < diag.delta.size(); ++n)
            rows.push_back({static_cast<double>(n), diag.delta[n], diag.d_moebius[n], diag.d_affine[n],
                            diag.d_t0[n]});
        write_csv(dir / "convergence.csv", {"n", "delta", "d_moebius", "d_affine", "d_t0"}, rows);
        CheckResult r{"E6", "convergence diagnostics"};
        r.pass = diag.moebius_fit_rate.rate < 1.0 && diag.affine_fit.rate < 1.0 &&
                 diag.t0_fit.rate < 1.0 &&
                 diag.moebius_fit_rate.rate <= diag.affine_fit.rate + 0.05 &&
                 diag.affine_fit.rate <= diag.t0_fit.rate + 0.05;
        r.data = {{"moebius_rate", diag.moebius_fit_rate.rate},
                  {"affine_rate", diag.affine_fit.rate},
                  {"t0_rate", diag.t0_fit.rate},
                  {"t0_r2", diag.t0_fit.r2}};
        results.push_back(r);
    } else if (id == "E7") {
        results.push_back(checks::shadowing_batch(cfg.seed, samples > 0 ? samples : 10, cfg.workers));
        std::vector<std::vector<double>> rows, dist_rows;
        std::string jsonl;
        int run = 0;
        for (const auto& jr : results.back().data["runs"]) {
            jsonl += jr.dump() + "\n";
            if (jr.contains("depth")) {
                rows.push_back({static_cast<double>(run), jr["depth"].get<double>(),
                                jr["c1_rate"].get<double>(), jr["c1_r2"].get<double>()});
                const auto& c1 = jr["dist_c1"];
                for (std::size_t n = 0; n < c1.size(); ++n)
                    dist_rows.push_back({static_cast<double>(run), static_cast<double>(n),
                                         jr["dist_c0"][n].get<double>(), c1[n].get<double>(),
                                         jr["dist_eta"][n].get<double>(), jr["c1_rate"].get<double>()});
            }
            ++run;
        }
        write_csv(dir / "shoots.csv", {"run", "depth", "c1_rate", "c1_r2"}, rows);
        write_csv(dir / "distances.csv", {"run", "n", "d_c0", "d_c1", "d_eta", "rate_fit"}, dist_rows);
        write_text(dir / "results.jsonl", jsonl);
    } else if (id == "E8") {
        results.push_back(checks::conjugacy_batch(cfg.seed, samples > 0 ? samples : 2));
        if (results.back().data.contains("cohom_solution")) {
            write_text(dir / "cohom.json", results.back().data["cohom_solution"].dump() + "\n");
            write_text(dir / "conjugacy.json", results.back().data["conjugacy_map"].dump() + "\n");
            // Keep the summary lean: the full samples live in the artifacts.
            results.back().data.erase("cohom_solution");
            results.back().data.erase("conjugacy_map");
        }
        results.push_back(checks::ratio_test(cfg.seed));
        const auto& rt = results.back();
        if (rt.data.contains("shadowed")) {
            std::vector<std::vector<double>> rows;
            int level = 1;
            for (const auto& d : rt.data["shadowed"]["discrepancies"])
                rows.push_back({static_cast<double>(level++), d.get<double>()});
            write_csv(dir / "ratio_test.csv", {"level", "discrepancy"}, rows);
        }
    } else {
        throw ConfigError("unknown experiment id: " + id);
    }

    if (!results.empty()) {
        out.pass = true;
        json checks_json = json::array();
        for (const auto& r : results) {
            if (!r.pass) out.pass = false;
            checks_json.push_back(json{{"id", r.id}, {"name", r.name}, {"pass", r.pass},
                                       {"detail", r.detail}, {"data", r.data}});
        }
        summary["checks"] = checks_json;
    }
    summary["pass"] = out.pass;
    out.summary = summary;
    write_text(dir / "summary.json", summary.dump(2) + "\n");
    return out;
}

}  // namespace gietlab
