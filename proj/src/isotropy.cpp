#include "prr3/isotropy.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace prr3 {

IsotropyResidual isotropy_residual(const Mat3& k_bar) {
    const Mat3 g = k_bar * k_bar.transposed();
    const double mean = (g(0, 0) + g(1, 1) + g(2, 2)) / 3.0;

    IsotropyResidual res;
    res.tau_squared = mean;
    if (mean == 0.0) return res;

    const double d_max = std::max({g(0, 0), g(1, 1), g(2, 2)});
    const double d_min = std::min({g(0, 0), g(1, 1), g(2, 2)});
    res.diag_spread = (d_max - d_min) / mean;
    res.off_diag = std::max({std::abs(g(0, 1)), std::abs(g(0, 2)), std::abs(g(1, 2))}) / mean;
    return res;
}

std::optional<IsotropyResidual> isotropy_residual(const KinematicMatrices& mats) {
    if (!mats.k_bar) return std::nullopt;
    return isotropy_residual(*mats.k_bar);
}

std::optional<CharacteristicLength> characteristic_length_closed(double r, double gamma) {
    const double s = std::sin(gamma);
    if (!(s > 0.0) || !(r > 0.0)) return std::nullopt;
    return CharacteristicLength{std::sqrt(2.0) * r * s, gamma, CharLenSource::ClosedForm};
}

std::optional<double> characteristic_length_pairwise(const std::array<LimbState, 3>& limbs,
                                                     int i, int j) {
    if (i < 0 || i >= 3 || j < 0 || j >= 3 || i == j) return std::nullopt;
    const double dot = limbs[i].l_vec.dot(limbs[j].l_vec);
    if (dot == 0.0) return std::nullopt;
    const double radicand = -limbs[i].k * limbs[j].k / dot;
    if (radicand < 0.0) return std::nullopt;
    return std::sqrt(radicand);
}

namespace {

// Difference of two angles reduced to (-pi, pi].
double angle_gap(double a, double b) {
    double d = std::fmod(a - b, 2.0 * kPi);
    if (d <= -kPi) d += 2.0 * kPi;
    if (d > kPi) d -= 2.0 * kPi;
    return d;
}

bool equally_spaced(const std::array<double, 3>& angles) {
    const double step = 2.0 * kPi / 3.0;
    return std::abs(angle_gap(angles[1], angles[0] + step)) < 1e-9 &&
           std::abs(angle_gap(angles[2], angles[1] + step)) < 1e-9;
}

}  // namespace

bool params_structurally_isotropic(const DesignParams& params) {
    return params.R > 0.0 && params.l > 0.0 && params.r > 0.0 &&
           equally_spaced(params.base_angles) && equally_spaced(params.platform_angles) &&
           equally_spaced(params.rail_angles);
}

namespace {

// Search coordinates: (x/l, y/l, theta, L/l). Scaling lengths by the limb
// length keeps the simplex comparably conditioned in all four directions.
using Z = std::array<double, 4>;

struct Objective {
    const DesignParams& params;
    const WorkingMode& mode;
    IsotropyTarget target;

    // -index at feasible points (so minimization maximizes the index); a flat
    // penalty of +1 elsewhere, strictly worse than any feasible value.
    double operator()(const Z& z) const {
        if (!(z[3] > 1e-9)) return 1.0;
        const Pose pose{z[0] * params.l, z[1] * params.l, z[2]};
        const IkResult ik = inverse_kinematics(params, pose, mode);
        if (!ik.ok()) return 1.0;
        const KinematicMatrices mats = assemble_matrices(ik.limbs, z[3] * params.l);
        if (target == IsotropyTarget::KBar) {
            if (!mats.k_bar) return 1.0;
            return -condition_report(*mats.k_bar).index;
        }
        return -condition_report(mats.a_bar).index;
    }
};

struct SimplexRun {
    Z best{};
    double f_best = 1.0;
    int iterations_to_claim = -1;
};

constexpr double kClaimLevel = 1.0 - 1e-4;  // index above this claims isotropy

// Nelder-Mead with the standard coefficients (reflect 1, expand 2, contract
// 0.5, shrink 0.5). Strict "improves" comparisons make plateaus (e.g. the
// infeasible penalty region) shrink the simplex instead of wandering.
SimplexRun nelder_mead(const Objective& objective, const Z& z0, double step) {
    constexpr int kMaxIter = 600;
    constexpr double kDiameterTol = 1e-10;

    std::array<Z, 5> vertex;
    std::array<double, 5> f{};
    vertex[0] = z0;
    for (int i = 1; i < 5; ++i) {
        vertex[i] = z0;
        vertex[i][i - 1] += step;
    }
    for (int i = 0; i < 5; ++i) f[i] = objective(vertex[i]);

    SimplexRun run;
    auto note_claim = [&](int iter) {
        const double best = *std::min_element(f.begin(), f.end());
        if (run.iterations_to_claim < 0 && -best > kClaimLevel) run.iterations_to_claim = iter;
    };
    note_claim(0);

    std::array<int, 5> order{0, 1, 2, 3, 4};
    for (int iter = 1; iter <= kMaxIter; ++iter) {
        std::sort(order.begin(), order.end(), [&](int a, int b) { return f[a] < f[b]; });
        const int lo = order[0], hi = order[4], second_hi = order[3];

        double diameter = 0.0;
        for (int i = 1; i < 5; ++i) {
            double d = 0.0;
            for (int k = 0; k < 4; ++k) {
                const double e = vertex[order[i]][k] - vertex[lo][k];
                d += e * e;
            }
            diameter = std::max(diameter, std::sqrt(d));
        }
        if (diameter < kDiameterTol) break;

        Z centroid{};
        for (int i = 0; i < 4; ++i)
            for (int k = 0; k < 4; ++k) centroid[k] += vertex[order[i]][k] / 4.0;

        auto blend = [&](double t) {  // centroid + t*(centroid - worst)
            Z z;
            for (int k = 0; k < 4; ++k) z[k] = centroid[k] + t * (centroid[k] - vertex[hi][k]);
            return z;
        };

        const Z reflected = blend(1.0);
        const double f_r = objective(reflected);
        if (f_r < f[lo]) {
            const Z expanded = blend(2.0);
            const double f_e = objective(expanded);
            if (f_e < f_r) {
                vertex[hi] = expanded;
                f[hi] = f_e;
            } else {
                vertex[hi] = reflected;
                f[hi] = f_r;
            }
        } else if (f_r < f[second_hi]) {
            vertex[hi] = reflected;
            f[hi] = f_r;
        } else {
            bool shrink = true;
            if (f_r < f[hi]) {
                const Z outside = blend(0.5);
                const double f_c = objective(outside);
                if (f_c <= f_r) {
                    vertex[hi] = outside;
                    f[hi] = f_c;
                    shrink = false;
                }
            } else {
                const Z inside = blend(-0.5);
                const double f_c = objective(inside);
                if (f_c < f[hi]) {
                    vertex[hi] = inside;
                    f[hi] = f_c;
                    shrink = false;
                }
            }
            if (shrink) {
                for (int i = 1; i < 5; ++i) {
                    const int v = order[i];
                    for (int k = 0; k < 4; ++k)
                        vertex[v][k] = vertex[lo][k] + 0.5 * (vertex[v][k] - vertex[lo][k]);
                    f[v] = objective(vertex[v]);
                }
            }
        }
        note_claim(iter);
    }

    const int lo = static_cast<int>(std::min_element(f.begin(), f.end()) - f.begin());
    run.best = vertex[lo];
    run.f_best = f[lo];
    return run;
}

IsotropySearchResult package(const DesignParams& params, const WorkingMode& mode,
                             const SimplexRun& run) {
    IsotropySearchResult result;
    result.structural_ok = params_structurally_isotropic(params);
    result.pose = Pose{run.best[0] * params.l, run.best[1] * params.l, run.best[2]};
    result.index = run.f_best < 0.0 ? -run.f_best : 0.0;
    result.claimed = result.index > kClaimLevel;
    result.iterations_to_claim = run.iterations_to_claim;
    result.char_len.L = run.best[3] * params.l;
    result.char_len.source = CharLenSource::Optimized;

    const IkResult ik = inverse_kinematics(params, result.pose, mode);
    if (ik.ok()) {
        result.limbs = ik.limbs;
        result.char_len.gamma =
            (ik.limbs[0].gamma + ik.limbs[1].gamma + ik.limbs[2].gamma) / 3.0;
    }
    return result;
}

}  // namespace

IsotropySearchResult refine_isotropic(const DesignParams& params, const WorkingMode& mode,
                                      const Pose& seed, double L_init, IsotropyTarget target) {
    const Objective objective{params, mode, target};
    const Z z0{seed.x / params.l, seed.y / params.l, seed.theta, L_init / params.l};
    IsotropySearchResult result = package(params, mode, nelder_mead(objective, z0, 0.15));
    result.seed_index = -1;
    return result;
}

IsotropySearchResult find_isotropic(const DesignParams& params, const WorkingMode& mode,
                                    double L_init, IsotropyTarget target) {
    const Objective objective{params, mode, target};

    // 5x5 positions ordered center-out (stable on ties), 8 orientations each.
    // The ordering matters only for tie-breaking: the winner is the first seed
    // whose index later seeds fail to beat by more than 1e-9.
    std::vector<Vec2> positions;
    const double span = 0.5 * (params.R + params.r);
    for (int iy = 0; iy < 5; ++iy)
        for (int ix = 0; ix < 5; ++ix)
            positions.push_back({span * (ix - 2) / 2.0, span * (iy - 2) / 2.0});
    std::stable_sort(positions.begin(), positions.end(),
                     [](Vec2 a, Vec2 b) { return a.norm_sq() < b.norm_sq(); });
    const std::array<double, 8> thetas{0.0,        kPi / 4.0,       7.0 * kPi / 4.0,
                                       kPi / 2.0,  3.0 * kPi / 2.0, 3.0 * kPi / 4.0,
                                       5.0 * kPi / 4.0, kPi};

    SimplexRun best_run;
    int best_seed = -1;
    int seed_index = 0;
    for (const Vec2& p : positions) {
        for (const double theta : thetas) {
            const Z z0{p.x / params.l, p.y / params.l, theta, L_init / params.l};
            const SimplexRun run = nelder_mead(objective, z0, 0.15);
            if (best_seed < 0 || run.f_best < best_run.f_best - 1e-9) {
                best_run = run;
                best_seed = seed_index;
            }
            ++seed_index;
        }
    }

    IsotropySearchResult result = package(params, mode, best_run);
    result.seed_index = best_seed;
    return result;
}

}  // namespace prr3
