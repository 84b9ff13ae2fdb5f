// End-to-end acceptance checks. Each check prints one PASS/FAIL line with the
// numbers that justify the verdict; the process exit code is the number of
// failures. All randomness is seeded, so a verdict is reproducible.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "prr3/isotropy.hpp"
#include "prr3/singularity.hpp"
#include "prr3/sweep.hpp"

using namespace prr3;

namespace {

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

int failures = 0;

void verdict(int number, bool pass, const std::string& name, const std::string& detail) {
    std::printf("[%s] %d: %s  (%s)\n", pass ? "PASS" : "FAIL", number, name.c_str(),
                detail.c_str());
    if (!pass) ++failures;
}

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof buf, format, args);
    va_end(args);
    return buf;
}

// (max - min) / max|.| over a small set of comparable quantities.
double relative_spread(const std::vector<double>& vals) {
    const auto [lo, hi] = std::minmax_element(vals.begin(), vals.end());
    const double scale = std::max(std::abs(*lo), std::abs(*hi));
    return scale == 0.0 ? 0.0 : (*hi - *lo) / scale;
}

Pose random_reachable_pose(oracle::Rng& rng, const DesignParams& params, WorkingMode& mode) {
    for (;;) {
        const Pose pose{rng.uniform(-250, 250), rng.uniform(-250, 250),
                        rng.uniform(-kPi, kPi)};
        for (int i = 0; i < 3; ++i) mode.signs[i] = rng.pick(2) ? +1 : -1;
        if (inverse_kinematics(params, pose, mode).ok()) return pose;
    }
}

// Results shared between checks.
struct Shared {
    DesignParams params = default_params();
    double L_star = std::sqrt(2.0) * 100.0;  // refined by check 1
};

// ---------------------------------------------------------------------------
// 1: an isotropic configuration exists; at it the limb geometry is fully
// symmetric (equal limb norms, equal spoke norms, equal pairwise limb dots,
// equal pairwise m products).
void check_isotropy(Shared& shared) {
    const Timer timer;
    const IsotropySearchResult res =
        find_isotropic(shared.params, WorkingMode{{+1, +1, +1}}, std::sqrt(2.0) * shared.params.r);
    const double elapsed = timer.seconds();
    if (res.claimed) shared.L_star = res.char_len.L;

    const IkResult ik = inverse_kinematics(shared.params, res.pose, WorkingMode{{+1, +1, +1}});
    double worst = 1.0;
    if (ik.ok()) {
        const auto& lb = ik.limbs;
        const Vec2 p{res.pose.x, res.pose.y};
        const std::vector<double> limb_norms{lb[0].l_vec.norm(), lb[1].l_vec.norm(),
                                             lb[2].l_vec.norm()};
        const std::vector<double> spoke_norms{(p - lb[0].c).norm(), (p - lb[1].c).norm(),
                                              (p - lb[2].c).norm()};
        const std::vector<double> dots{lb[0].l_vec.dot(lb[1].l_vec), lb[1].l_vec.dot(lb[2].l_vec),
                                       lb[0].l_vec.dot(lb[2].l_vec)};
        const std::vector<double> m_products{lb[0].m * lb[1].m, lb[0].m * lb[2].m,
                                             lb[1].m * lb[2].m};
        worst = std::max({relative_spread(limb_norms), relative_spread(spoke_norms),
                          relative_spread(dots), relative_spread(m_products)});
    }
    const bool pass = res.index >= 0.9999 && ik.ok() && worst < 1e-6 && elapsed < 10.0;
    verdict(1, pass, "isotropic configuration exists with symmetric limb geometry",
            fmt("index=%.8f, worst relative spread=%.2e, L=%.4f mm, %.2f s", res.index, worst,
                res.char_len.L, elapsed));
}

// ---------------------------------------------------------------------------
// 2: at the isotropic configuration every limb pair gives the same
// characteristic length, and it matches sqrt(2)*r*sin(gamma).
void check_char_length(Shared& shared) {
    const IsotropySearchResult res =
        find_isotropic(shared.params, WorkingMode{{+1, +1, +1}}, std::sqrt(2.0) * shared.params.r);
    const IkResult ik = inverse_kinematics(shared.params, res.pose, WorkingMode{{+1, +1, +1}});
    bool pass = ik.ok();
    double worst = 0.0;
    if (ik.ok()) {
        const double gamma =
            (ik.limbs[0].gamma + ik.limbs[1].gamma + ik.limbs[2].gamma) / 3.0;
        const double closed = std::sqrt(2.0) * shared.params.r * std::sin(gamma);
        for (const auto& [i, j] : {std::pair{0, 1}, std::pair{0, 2}, std::pair{1, 2}}) {
            const auto pairwise = characteristic_length_pairwise(ik.limbs, i, j);
            if (!pairwise) {
                pass = false;
                continue;
            }
            worst = std::max(worst, std::abs(*pairwise - closed) / closed);
        }
        pass = pass && worst < 1e-6;
    }
    verdict(2, pass, "pairwise characteristic length matches sqrt(2)*r*sin(gamma)",
            fmt("worst relative difference=%.2e over 3 pairs", worst));
}

// ---------------------------------------------------------------------------
// 3: J*K_bar is the identity, entrywise relative to the natural magnitude of
// each entry's sum, on 1000 random reachable poses across all working modes.
void check_jacobian_identity(const Shared& shared) {
    oracle::Rng rng(101);
    double worst = 0.0;
    int tested = 0;
    while (tested < 1000) {
        WorkingMode mode;
        const Pose pose = random_reachable_pose(rng, shared.params, mode);
        const IkResult ik = inverse_kinematics(shared.params, pose, mode);
        const KinematicMatrices mats = assemble_matrices(ik.limbs, shared.L_star);
        if (!mats.j || !mats.k_bar) continue;
        ++tested;
        const Mat3 prod = *mats.j * *mats.k_bar;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double magnitude = 0.0;
                for (int k = 0; k < 3; ++k)
                    magnitude += std::abs((*mats.j)(i, k)) * std::abs((*mats.k_bar)(k, j));
                const double target = i == j ? 1.0 : 0.0;
                const double rel =
                    std::abs(prod(i, j) - target) / std::max(magnitude, 1.0);
                worst = std::max(worst, rel);
            }
    }
    verdict(3, worst < 1e-9, "J*K_bar equals the identity on 1000 random poses",
            fmt("worst entrywise relative error=%.2e", worst));
}

// ---------------------------------------------------------------------------
// 4: central finite differences of the forward solution along a joint-rate
// direction reproduce the analytic twist.
void check_velocity_relation(const Shared& shared) {
    const Timer timer;
    oracle::Rng rng(102);
    double worst = 0.0;
    int tested = 0, dk_failures = 0;
    while (tested < 100 && dk_failures < 50) {
        WorkingMode mode;
        const Pose pose = random_reachable_pose(rng, shared.params, mode);
        const IkResult ik = inverse_kinematics(shared.params, pose, mode);
        const KinematicMatrices mats = assemble_matrices(ik.limbs, shared.L_star);
        if (!mats.j || !mats.k_bar) continue;
        // finite differences need a numerically meaningful neighborhood
        if (condition_report(mats.a_bar).index < 0.02) continue;

        JointRates rates{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)};
        const double norm =
            std::sqrt(rates[0] * rates[0] + rates[1] * rates[1] + rates[2] * rates[2]);
        if (norm < 0.5) continue;
        const auto twist = twist_from_rates(mats, rates);
        if (!twist) continue;
        const double scale = std::max(
            {std::abs(twist->linear.x), std::abs(twist->linear.y),
             std::abs(twist->angular_scaled)});
        if (scale < 0.5) continue;

        // small enough to tame truncation even near singularities (error grows
        // ~kappa^3), large enough that the machine-accurate forward solutions
        // leave no visible roundoff in the quotient
        const double h = 0.0005;  // mm along the unit rate direction
        Vec3 rho{ik.limbs[0].rho, ik.limbs[1].rho, ik.limbs[2].rho};
        Vec3 hi = rho, lo = rho;
        for (int i = 0; i < 3; ++i) {
            hi[i] += h * rates[i] / norm;
            lo[i] -= h * rates[i] / norm;
        }
        const DkResult fwd = direct_kinematics(shared.params, hi, pose);
        const DkResult bwd = direct_kinematics(shared.params, lo, pose);
        if (!fwd.ok() || !bwd.ok()) {
            ++dk_failures;
            continue;
        }
        ++tested;
        const double denom = 2.0 * h / norm;
        const double fd_x = (fwd.pose.x - bwd.pose.x) / denom;
        const double fd_y = (fwd.pose.y - bwd.pose.y) / denom;
        const double fd_w = (fwd.pose.theta - bwd.pose.theta) / denom * mats.L;
        worst = std::max({worst, std::abs(fd_x - twist->linear.x) / scale,
                          std::abs(fd_y - twist->linear.y) / scale,
                          std::abs(fd_w - twist->angular_scaled) / scale});
    }
    const double elapsed = timer.seconds();
    const bool pass = tested == 100 && worst < 1e-5 && elapsed < 30.0;
    verdict(4, pass, "finite-difference twists match J*rho_dot on 100 poses",
            fmt("worst relative error=%.2e, %d poses, %.2f s", worst, tested, elapsed));
}

// ---------------------------------------------------------------------------
// 5: 20 parallel singularities found by det bisection also satisfy the
// geometric line-concurrency condition; 20 constructed tangencies have
// vanishing relative m.
void check_singularities(const Shared& shared) {
    const DesignParams& params = shared.params;

    // det(A_bar) along theta at a fixed position, branch fixed
    const auto det_at = [&](Vec2 p, double theta, const WorkingMode& mode)
        -> std::optional<double> {
        const IkResult ik = inverse_kinematics(params, {p.x, p.y, theta}, mode,
                                               TangencyPolicy::AcceptAsZero);
        if (!ik.ok()) return std::nullopt;
        return oracle::det3(assemble_matrices(ik.limbs, shared.L_star).a_bar);
    };

    const std::vector<Vec2> positions{{0, 0},    {30, 20},  {-40, 10}, {60, -35},
                                      {-25, -50}, {15, 45},  {80, 0},   {-60, 40},
                                      {45, 60},  {0, -70},  {-80, -20}, {70, 30}};
    const std::array<WorkingMode, 2> modes{WorkingMode{{+1, +1, +1}}, WorkingMode{{-1, +1, +1}}};

    int parallel_found = 0;
    double worst_det = 0.0, worst_gap = 0.0;
    for (const Vec2& p : positions) {
        for (const WorkingMode& mode : modes) {
            if (parallel_found >= 20) break;
            const int n = 180;
            for (int k = 0; k < n && parallel_found < 20; ++k) {
                const double t0 = -kPi + 2.0 * kPi * k / n;
                const double t1 = -kPi + 2.0 * kPi * (k + 1) / n;
                const auto f0 = det_at(p, t0, mode);
                const auto f1 = det_at(p, t1, mode);
                if (!f0 || !f1 || *f0 * *f1 >= 0.0) continue;
                double a = t0, b = t1, fa = *f0;
                for (int it = 0; it < 80; ++it) {
                    const double mid = 0.5 * (a + b);
                    const auto fm = det_at(p, mid, mode);
                    if (!fm) break;
                    if (fa * *fm <= 0.0) {
                        b = mid;
                    } else {
                        a = mid;
                        fa = *fm;
                    }
                }
                const double root = 0.5 * (a + b);
                const ClassifyResult res = classify(params, {p.x, p.y, root}, mode, shared.L_star);
                if (!res.ok()) continue;
                // want a clean parallel singularity, not a serial coincidence
                if (res.report.serial_measure < 1e-3) continue;
                const IkResult ik = inverse_kinematics(params, {p.x, p.y, root}, mode,
                                                       TangencyPolicy::AcceptAsZero);
                const LineConcurrency conc = line_concurrency_residual(ik.limbs);
                if (res.report.parallel_measure >= 1e-8 || conc.parallel_pair ||
                    conc.max_gap >= 1e-3)
                    continue;
                ++parallel_found;
                worst_det = std::max(worst_det, res.report.parallel_measure);
                worst_gap = std::max(worst_gap, conc.max_gap);
            }
        }
    }

    // constructed serial singularities: B_i C_i exactly perpendicular to the rail
    int serial_found = 0;
    double worst_serial = 0.0;
    for (int limb = 0; limb < 3 && serial_found < 20; ++limb) {
        for (const double rho : {-80.0, -30.0, 20.0, 60.0, 120.0}) {
            for (const double side : {+1.0, -1.0}) {
                for (const double theta : {0.0, 0.4}) {
                    if (serial_found >= 20) break;
                    const Vec2 anchor = base_anchor(params, limb);
                    const Vec2 alpha = rail_direction(params, limb);
                    const Vec2 b = anchor + rho * alpha;
                    const Vec2 c = b + side * params.l * rotate90(alpha);
                    // offset from p to C_limb at this orientation
                    const Vec2 attach = platform_attach(params, Pose{0.0, 0.0, theta}, limb);
                    const Pose pose{c.x - attach.x, c.y - attach.y, theta};
                    for (int mode_bits = 0; mode_bits < 8; ++mode_bits) {
                        WorkingMode mode;
                        for (int i = 0; i < 3; ++i)
                            mode.signs[i] = (mode_bits >> i) & 1 ? -1 : +1;
                        const ClassifyResult res =
                            classify(params, pose, mode, shared.L_star);
                        if (!res.ok()) continue;
                        if (res.report.serial_measure < 1e-9) {
                            ++serial_found;
                            worst_serial = std::max(worst_serial, res.report.serial_measure);
                        }
                        break;  // one mode per construction
                    }
                }
            }
        }
    }

    const bool pass = parallel_found == 20 && serial_found == 20;
    verdict(5, pass, "bisected parallel and constructed serial singularities check out",
            fmt("parallel=%d (worst |det|=%.2e, worst gap=%.2e mm), serial=%d (worst "
                "rel m=%.2e)",
                parallel_found, worst_det, worst_gap, serial_found, worst_serial));
}

// ---------------------------------------------------------------------------
// 6: workspace-table properties on the full default grid.
void check_workspace_tables(const Shared& shared) {
    const Timer timer;
    const DesignParams& params = shared.params;
    const std::array<WorkingMode, 2> reps = mode_catalog().representatives;
    const std::array<WorkingMode, 2> negs{reps[0].negated(), reps[1].negated()};
    const std::array<MatrixKind, 3> kinds{MatrixKind::ABar, MatrixKind::B, MatrixKind::KBar};

    const auto make_spec = [&](WorkingMode mode, MatrixKind kind) {
        SweepSpec spec;
        spec.mode = mode;
        spec.matrix_kind = kind;
        spec.L = shared.L_star;
        return spec;
    };

    // twelve sweeps: [mode: rep0, rep1, neg0, neg1] x [A_bar, B, K_bar]
    std::vector<std::vector<SweepGrid>> grids(4);
    const std::array<WorkingMode, 4> sweep_modes{reps[0], reps[1], negs[0], negs[1]};
    for (int mi = 0; mi < 4; ++mi)
        for (const MatrixKind kind : kinds)
            grids[mi].push_back(sweep(params, make_spec(sweep_modes[mi], kind)));

    const auto global = [&](int mi, int ki) { return *global_index(grids[mi][ki]); };

    // (a) the diagonal matrix ignores branch signs: equal B globals
    const double b_gap = std::abs(global(0, 1) - global(1, 1));

    // (b) negated mode = the x-mirrored scene: tables match under column
    // reversal, and the global means match outright
    double mirror_worst = 0.0, global_gap = 0.0;
    int mask_mismatches = 0;
    for (int mi = 0; mi < 2; ++mi) {
        for (int ki = 0; ki < 3; ++ki) {
            const SweepGrid& g = grids[mi][ki];
            const SweepGrid& ng = grids[mi + 2][ki];
            for (int iy = 0; iy < g.spec.ny; ++iy)
                for (int ix = 0; ix < g.spec.nx; ++ix) {
                    const std::size_t i = g.idx(ix, iy);
                    const std::size_t j = ng.idx(g.spec.nx - 1 - ix, iy);
                    if (g.reachable[i] != ng.reachable[j]) {
                        ++mask_mismatches;
                        continue;
                    }
                    if (!g.reachable[i]) continue;
                    mirror_worst =
                        std::max(mirror_worst, std::abs(g.values[i] - ng.values[j]));
                }
            global_gap = std::max(global_gap, std::abs(global(mi, ki) - global(mi + 2, ki)));
        }
    }

    // (c) rotating the scene by 120 degrees permutes limbs: every node value
    // reappears at the rotated position under the rotated mode
    double rotation_worst = 0.0;
    int rotation_mismatches = 0;
    const Mat2 rot = Mat2::rotation(2.0 * kPi / 3.0);
    for (int mi = 0; mi < 2; ++mi) {
        const SweepGrid& g = grids[mi][2];  // K_bar
        const SweepSpec rotated_spec = make_spec(sweep_modes[mi].rotated120(), MatrixKind::KBar);
        for (int iy = 0; iy < g.spec.ny; ++iy)
            for (int ix = 0; ix < g.spec.nx; ++ix) {
                const std::size_t i = g.idx(ix, iy);
                const Vec2 q = rot * Vec2{g.x_at(ix), g.y_at(iy)};
                const auto node = evaluate_node(params, rotated_spec, q.x, q.y);
                if (node.has_value() != static_cast<bool>(g.reachable[i])) {
                    ++rotation_mismatches;
                    continue;
                }
                if (!node) continue;
                rotation_worst = std::max(rotation_worst, std::abs(node->index - g.values[i]));
            }
    }

    // (d) the two mode classes are genuinely different for A_bar and K_bar
    const double a_gap = global(0, 0) - global(1, 0);
    const double k_gap = global(0, 2) - global(1, 2);

    const double elapsed = timer.seconds();
    const bool pass = b_gap < 1e-12 && mask_mismatches == 0 && mirror_worst < 1e-12 &&
                      global_gap < 1e-12 && rotation_mismatches == 0 && rotation_worst < 1e-9 &&
                      std::abs(a_gap) > 0.01 && std::abs(k_gap) > 0.01 && elapsed < 180.0;
    verdict(6, pass, "workspace tables: branch-blind B, mirror and rotation symmetry, class gap",
            fmt("B gap=%.1e, mirror worst=%.1e, global gap=%.1e, rotation worst=%.1e, "
                "A_bar %s by %.3f, K_bar %s by %.3f, %.1f s",
                b_gap, mirror_worst, global_gap, rotation_worst,
                a_gap > 0 ? "first class higher" : "second class higher", std::abs(a_gap),
                k_gap > 0 ? "first class higher" : "second class higher", std::abs(k_gap),
                elapsed));
}

// ---------------------------------------------------------------------------
// 7: the production singular-value routine against the characteristic-
// polynomial bisection oracle, plus scale and orthogonal invariance.
void check_conditioning_oracle() {
    oracle::Rng rng(103);
    double worst_oracle = 0.0;
    for (int n = 0; n < 1000; ++n) {
        Mat3 m = oracle::random_matrix(rng);
        const double magnitude = std::pow(10.0, rng.uniform(-3.0, 3.0));
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) m(i, j) *= magnitude;
        const auto got = singular_values_3(m);
        const auto want = oracle::sigma_bisect(m);
        const double scale = std::max(want[0], 1e-300);
        for (int i = 0; i < 3; ++i)
            worst_oracle = std::max(worst_oracle, std::abs(got[i] - want[i]) / scale);
    }

    double worst_invariance = 0.0;
    int tested = 0;
    while (tested < 200) {
        const Mat3 m = oracle::random_matrix(rng);
        const ConditioningReport base = condition_report(m);
        if (base.singular || base.kappa > 1e5) continue;  // keep kappa fp-representable
        ++tested;
        for (const double c : {0.001, 7.3, 1024.0, 1e6}) {
            Mat3 scaled = m;
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) scaled(i, j) *= c;
            const double kappa = condition_report(scaled).kappa;
            worst_invariance =
                std::max(worst_invariance, std::abs(kappa - base.kappa) / base.kappa);
        }
        const Mat3 rotated = oracle::random_rotation(rng) * m * oracle::random_rotation(rng);
        const double kappa = condition_report(rotated).kappa;
        worst_invariance =
            std::max(worst_invariance, std::abs(kappa - base.kappa) / base.kappa);
    }

    const bool pass = worst_oracle < 1e-9 && worst_invariance < 1e-10;
    verdict(7, pass, "singular values match the bisection oracle; kappa is invariant",
            fmt("worst oracle diff=%.2e over 1000 matrices, worst invariance drift=%.2e",
                worst_oracle, worst_invariance));
}

// ---------------------------------------------------------------------------
// 8: marching squares on an analytic radial field recovers the level circle.
void check_contours() {
    const int n = 201;
    SweepGrid grid;
    grid.spec.x_min = grid.spec.y_min = -300.0;
    grid.spec.x_max = grid.spec.y_max = 300.0;
    grid.spec.nx = grid.spec.ny = n;
    grid.values.resize(static_cast<std::size_t>(n) * n);
    grid.reachable.assign(grid.values.size(), 1);
    grid.best_theta.assign(grid.values.size(), 0.0);
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix)
            grid.values[grid.idx(ix, iy)] =
                std::max(0.0, 1.0 - std::hypot(grid.x_at(ix), grid.y_at(iy)) / 300.0);

    const IsoLoci loci = extract_isoloci(grid, {0.5});
    const double cell_diag = std::hypot(3.0, 3.0);  // 600 mm / 200 cells
    bool pass = loci.polylines.size() == 1 && loci.polylines[0].size() == 1;
    double worst = 0.0;
    std::size_t vertices = 0;
    if (pass) {
        const Polyline& poly = loci.polylines[0][0];
        vertices = poly.size();
        pass = poly.size() > 3 && (poly.front() - poly.back()).norm() < 1e-12;
        for (const Vec2& v : poly) worst = std::max(worst, std::abs(v.norm() - 150.0));
        pass = pass && worst < 1.5 * cell_diag;
    }
    verdict(8, pass, "marching squares recovers the 150 mm circle",
            fmt("polylines=%zu, vertices=%zu, worst radial deviation=%.3f mm (limit %.3f)",
                loci.polylines.empty() ? 0 : loci.polylines[0].size(), vertices, worst,
                1.5 * cell_diag));
}

}  // namespace

int main() {
    Shared shared;
    check_isotropy(shared);
    check_char_length(shared);
    check_jacobian_identity(shared);
    check_velocity_relation(shared);
    check_singularities(shared);
    check_workspace_tables(shared);
    check_conditioning_oracle();
    check_contours();
    std::printf("criteria passed: %d/8\n", 8 - failures);
    return failures;
}
