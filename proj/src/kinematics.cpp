#include "prr3/kinematics.hpp"

#include <algorithm>
#include <cmath>

#include "prr3/conditioning.hpp"

namespace prr3 {

namespace {

struct LimbSolve {
    bool reachable = false;
    bool tangent = false;
    LimbState state{};
};

// Root of |d - rho*alpha| = l on the branch sign(m) = sign, where
// m = l_vec^T alpha = a - rho. The discriminant is clamped to zero inside a
// band proportional to its summands: the subtraction cancels catastrophically
// near tangency, and a pose constructed to sit exactly on a tangency would
// otherwise land on either side of zero at random.
LimbSolve solve_limb(const DesignParams& params, const Pose& pose, int limb, int sign) {
    LimbSolve out;
    const Vec2 anchor = base_anchor(params, limb);
    const Vec2 alpha = rail_direction(params, limb);
    const Vec2 c = platform_attach(params, pose, limb);
    const Vec2 d = c - anchor;

    const double a = d.dot(alpha);
    const double d_sq = d.norm_sq();
    const double l_sq = params.l * params.l;
    double disc = a * a - d_sq + l_sq;
    const double tol_disc = 1e-14 * (a * a + d_sq + l_sq);
    if (disc < -tol_disc) return out;  // rail misses the circle about c
    if (disc <= tol_disc) {
        disc = 0.0;
        out.tangent = true;
    }
    out.reachable = true;

    const double m = sign * std::sqrt(disc);
    LimbState& s = out.state;
    s.rho = a - m;
    s.m = m;
    s.b = anchor + s.rho * alpha;
    s.c = c;
    s.l_vec = c - s.b;
    const Vec2 spoke = Vec2{pose.x, pose.y} - c;  // C_i -> P
    s.k = s.l_vec.dot(rotate90(spoke));
    const Vec2 toward_b = s.b - c;
    s.gamma = std::atan2(std::abs(toward_b.cross(spoke)), toward_b.dot(spoke));
    return out;
}

}  // namespace

IkResult inverse_kinematics(const DesignParams& params, const Pose& pose,
                            const WorkingMode& mode, TangencyPolicy policy) {
    IkResult result;
    for (int i = 0; i < 3; ++i) {
        const LimbSolve solved = solve_limb(params, pose, i, mode.signs[i]);
        if (!solved.reachable) {
            result.status = IkStatus::Unreachable;
            result.limb = i;
            return result;
        }
        if (solved.tangent && policy == TangencyPolicy::Reject) {
            result.status = IkStatus::ModeUnavailable;
            result.limb = i;
            return result;
        }
        result.limbs[i] = solved.state;
    }
    return result;
}

namespace {

Vec3 closure_residual(const DesignParams& params, const std::array<Vec2, 3>& rail_points,
                      const Pose& pose) {
    Vec3 f{};
    for (int i = 0; i < 3; ++i)
        f[i] = (platform_attach(params, pose, i) - rail_points[i]).norm() - params.l;
    return f;
}

double max_abs(const Vec3& v) {
    return std::max({std::abs(v[0]), std::abs(v[1]), std::abs(v[2])});
}

}  // namespace

DkResult direct_kinematics(const DesignParams& params, const Vec3& rho, const Pose& seed) {
    constexpr int kMaxIter = 50;
    const double tol = 1e-10 * params.l;

    std::array<Vec2, 3> rail_points;
    for (int i = 0; i < 3; ++i)
        rail_points[i] = base_anchor(params, i) + rho[i] * rail_direction(params, i);

    const double h_lin = 1e-7 * params.l;
    const double h_ang = 1e-7 * params.l / params.r;

    DkResult result;
    result.pose = seed;

    auto newton_step = [&](const Pose& at, const Vec3& f, Pose* next) -> DkStatus {
        Mat3 jac;
        for (int col = 0; col < 3; ++col) {
            Pose hi = at, lo = at;
            double h = 0.0;
            switch (col) {
                case 0: hi.x += h_lin; lo.x -= h_lin; h = h_lin; break;
                case 1: hi.y += h_lin; lo.y -= h_lin; h = h_lin; break;
                default: hi.theta += h_ang; lo.theta -= h_ang; h = h_ang; break;
            }
            const Vec3 f_hi = closure_residual(params, rail_points, hi);
            const Vec3 f_lo = closure_residual(params, rail_points, lo);
            for (int row = 0; row < 3; ++row) jac(row, col) = (f_hi[row] - f_lo[row]) / (2.0 * h);
        }
        if (!jac.finite()) return DkStatus::SingularSystem;
        const ConditioningReport cond = condition_report(jac);
        if (cond.singular || cond.kappa > 1e12) return DkStatus::SingularSystem;
        const auto delta = solve3(jac, Vec3{-f[0], -f[1], -f[2]});
        if (!delta) return DkStatus::SingularSystem;
        next->x = at.x + (*delta)[0];
        next->y = at.y + (*delta)[1];
        next->theta = at.theta + (*delta)[2];
        return DkStatus::Ok;
    };

    Vec3 f = closure_residual(params, rail_points, result.pose);
    result.residual = max_abs(f);
    bool converged = result.residual < tol;

    while (!converged && result.iterations < kMaxIter) {
        Pose next;
        const DkStatus step = newton_step(result.pose, f, &next);
        if (step != DkStatus::Ok) {
            result.status = step;
            return result;
        }
        result.pose = next;
        ++result.iterations;
        f = closure_residual(params, rail_points, result.pose);
        result.residual = max_abs(f);
        converged = result.residual < tol;
    }
    if (!converged) {
        result.status = DkStatus::NoConvergence;
        return result;
    }

    // One polish step past the stopping tolerance buys roughly quadratic
    // residual reduction for free; keep it only if it actually helped.
    Pose polished;
    if (newton_step(result.pose, f, &polished) == DkStatus::Ok) {
        const double res = max_abs(closure_residual(params, rail_points, polished));
        if (res <= result.residual) {
            result.pose = polished;
            result.residual = res;
            ++result.iterations;
        }
    }
    result.status = DkStatus::Ok;
    return result;
}

KinematicMatrices assemble_matrices(const std::array<LimbState, 3>& limbs, double L) {
    KinematicMatrices mats;
    mats.L = L;
    bool any_tangent = false;
    for (int i = 0; i < 3; ++i) {
        mats.a(i, 0) = limbs[i].l_vec.x;
        mats.a(i, 1) = limbs[i].l_vec.y;
        mats.a(i, 2) = -limbs[i].k;
        mats.b(i, i) = limbs[i].m;
        any_tangent = any_tangent || limbs[i].m == 0.0;
    }
    mats.a_bar = mats.a;
    for (int i = 0; i < 3; ++i) mats.a_bar(i, 2) /= L;

    if (!any_tangent) {
        Mat3 k_bar;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) k_bar(i, j) = mats.a_bar(i, j) / limbs[i].m;
        mats.k_bar = k_bar;
    }
    mats.j = solve3(mats.a_bar, mats.b);
    return mats;
}

std::optional<Twist> twist_from_rates(const KinematicMatrices& mats, const JointRates& rho_dot) {
    if (!mats.j) return std::nullopt;
    const Vec3 t = *mats.j * rho_dot;
    Twist twist;
    twist.linear = {t[0], t[1]};
    twist.angular_scaled = t[2];
    twist.L = mats.L;
    return twist;
}

}  // namespace prr3
