#pragma once

#include <array>
#include <optional>

#include "prr3/geometry.hpp"

namespace prr3 {

/// Per-limb solved quantities at a given pose.
struct LimbState {
    double rho = 0.0;  // actuated prismatic displacement, mm
    Vec2 b{};          // passive joint B_i = A_i + rho*alpha_i
    Vec2 c{};          // platform pivot C_i
    Vec2 l_vec{};      // c - b, norm l at closure
    double k = 0.0;    // l_vec^T E (p - c), mm^2
    double m = 0.0;    // l_vec^T alpha_i, mm
    double gamma = 0.0;  // angle B_i C_i P, rad, in [0, pi]
};

enum class IkStatus { Ok, Unreachable, ModeUnavailable };

/// What to do when a limb's quadratic has a double root (m_i = 0, a serial
/// singularity): Reject reports ModeUnavailable; AcceptAsZero returns the
/// tangent limb with m = 0 so singularity analysis can look at the pose.
enum class TangencyPolicy { Reject, AcceptAsZero };

struct IkResult {
    IkStatus status = IkStatus::Ok;
    int limb = -1;  // offending limb (0-based) when status != Ok
    std::array<LimbState, 3> limbs{};

    bool ok() const { return status == IkStatus::Ok; }
};

/// Solves |c_i - A_i - rho_i*alpha_i| = l per limb and picks the root whose
/// sign(m_i) matches the working mode. The two roots always carry opposite
/// signs of m_i, so the branch choice is unambiguous away from tangency.
IkResult inverse_kinematics(const DesignParams& params, const Pose& pose,
                            const WorkingMode& mode,
                            TangencyPolicy policy = TangencyPolicy::Reject);

enum class DkStatus { Ok, NoConvergence, SingularSystem };

struct DkResult {
    DkStatus status = DkStatus::NoConvergence;
    Pose pose{};
    int iterations = 0;
    double residual = 0.0;  // max |closure residual| over limbs, mm

    bool ok() const { return status == DkStatus::Ok; }
};

/// Newton iteration on the three loop-closure residuals with a central
/// finite-difference system matrix. Converges when max residual < 1e-10*l;
/// reports SingularSystem when the Newton matrix condition exceeds 1e12.
DkResult direct_kinematics(const DesignParams& params, const Vec3& rho, const Pose& seed);

/// The matrices of A t = B rho_dot and their normalized forms for a given
/// characteristic length L. k_bar / j stay unset at serial / parallel
/// singularities instead of carrying infinities.
struct KinematicMatrices {
    Mat3 a{};      // rows [l_i^T, -k_i]
    Mat3 b{};      // diag(m_i)
    Mat3 a_bar{};  // a with third column divided by L
    std::optional<Mat3> k_bar;  // B^-1 * A_bar
    std::optional<Mat3> j;      // A_bar^-1 * B, maps rho_dot to the normalized twist
    double L = 0.0;
};

KinematicMatrices assemble_matrices(const std::array<LimbState, 3>& limbs, double L);

using JointRates = Vec3;  // actuated rates, mm/s

/// Platform twist in normalized coordinates (p_dot, L*theta_dot).
struct Twist {
    Vec2 linear{};                // p_dot, mm/s
    double angular_scaled = 0.0;  // L * theta_dot, mm/s
    double L = 0.0;

    double angular() const { return angular_scaled / L; }  // raw theta_dot, rad/s
};

/// t = J * rho_dot; nullopt when the pose is parallel-singular (j unset).
std::optional<Twist> twist_from_rates(const KinematicMatrices& mats, const JointRates& rho_dot);

}  // namespace prr3
