#include "prr3/singularity.hpp"

#include <algorithm>
#include <cmath>

namespace prr3 {

ClassifyResult classify(const DesignParams& params, const Pose& pose, const WorkingMode& mode,
                        double L) {
    ClassifyResult result;
    const IkResult ik = inverse_kinematics(params, pose, mode, TangencyPolicy::AcceptAsZero);
    result.status = ik.status;
    result.limb = ik.limb;
    if (!ik.ok()) return result;
    const KinematicMatrices mats = assemble_matrices(ik.limbs, L);
    result.report = singularity_report(ik.limbs, mats, params.l);
    return result;
}

SingularityReport singularity_report(const std::array<LimbState, 3>& limbs,
                                     const KinematicMatrices& mats, double limb_length) {
    SingularityReport report;

    double row_norm_product = 1.0;
    for (int i = 0; i < 3; ++i) {
        double norm_sq = 0.0;
        for (int j = 0; j < 3; ++j) norm_sq += mats.a_bar(i, j) * mats.a_bar(i, j);
        row_norm_product *= std::sqrt(norm_sq);
    }
    report.parallel_measure =
        row_norm_product > 0.0 ? std::abs(mats.a_bar.det()) / row_norm_product : 0.0;

    report.serial_measure = 1.0;
    for (int i = 0; i < 3; ++i) {
        const double scaled = std::abs(limbs[i].m) / limb_length;
        report.serial_limbs[i] = scaled < kSerialEps;
        report.serial_measure = std::min(report.serial_measure, scaled);
    }

    const bool serial = report.serial_measure < kSerialEps;
    const bool parallel = report.parallel_measure < kParallelEps;
    if (serial && parallel)
        report.classification = SingularityClass::Both;
    else if (serial)
        report.classification = SingularityClass::SerialSingular;
    else if (parallel)
        report.classification = SingularityClass::ParallelSingular;
    else
        report.classification = SingularityClass::Regular;
    return report;
}

LineConcurrency line_concurrency_residual(const std::array<LimbState, 3>& limbs) {
    LineConcurrency out;

    std::array<Vec2, 3> points{};
    int n_points = 0;
    for (int i = 0; i < 3; ++i) {
        for (int j = i + 1; j < 3; ++j) {
            const Vec2 ui = limbs[i].l_vec / limbs[i].l_vec.norm();
            const Vec2 uj = limbs[j].l_vec / limbs[j].l_vec.norm();
            const double denom = ui.cross(uj);
            if (std::abs(denom) < 1e-12) {  // |sin| of the angle between unit dirs
                out.parallel_pair = true;
                continue;
            }
            const double t = (limbs[j].b - limbs[i].b).cross(uj) / denom;
            points[n_points++] = limbs[i].b + t * ui;
        }
    }
    for (int i = 0; i < n_points; ++i)
        for (int j = i + 1; j < n_points; ++j)
            out.max_gap = std::max(out.max_gap, (points[i] - points[j]).norm());
    return out;
}

}  // namespace prr3
