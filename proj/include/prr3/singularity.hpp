#pragma once

#include <array>

#include "prr3/kinematics.hpp"

namespace prr3 {

// Classification thresholds: dimensionless, two orders above accumulated
// roundoff at mm scale.
inline constexpr double kParallelEps = 1e-8;  // on normalized |det A_bar|
inline constexpr double kSerialEps = 1e-9;    // on min_i |m_i| / l

enum class SingularityClass { Regular, SerialSingular, ParallelSingular, Both };

struct SingularityReport {
    double parallel_measure = 0.0;  // |det A_bar| / product of A_bar row norms, in [0,1]
    double serial_measure = 0.0;    // min_i |m_i| / l, in [0,1]
    SingularityClass classification = SingularityClass::Regular;
    std::array<bool, 3> serial_limbs{};  // limbs with |m_i|/l below kSerialEps
};

struct ClassifyResult {
    IkStatus status = IkStatus::Ok;  // Unreachable propagated from IK
    int limb = -1;
    SingularityReport report{};

    bool ok() const { return status == IkStatus::Ok; }
};

/// Solves IK (tangency tolerated, so serial singularities are reported rather
/// than rejected), assembles the matrices at L, and measures both singularity
/// kinds.
ClassifyResult classify(const DesignParams& params, const Pose& pose,
                        const WorkingMode& mode, double L);

/// Measures for already-solved limb states.
SingularityReport singularity_report(const std::array<LimbState, 3>& limbs,
                                     const KinematicMatrices& mats, double limb_length);

struct LineConcurrency {
    double max_gap = 0.0;        // max pairwise distance of the three intersection points, mm
    bool parallel_pair = false;  // some pair of limb lines parallel within 1e-12 rad
};

/// Intersects the three limb lines B_iC_i pairwise; max_gap is 0 iff the
/// lines concur (the geometric parallel-singularity condition).
LineConcurrency line_concurrency_residual(const std::array<LimbState, 3>& limbs);

}  // namespace prr3
