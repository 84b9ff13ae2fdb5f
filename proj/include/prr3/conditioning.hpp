#pragma once

#include <array>

#include "prr3/linalg.hpp"

namespace prr3 {

struct ConditioningReport {
    std::array<double, 3> sigma{};  // singular values, descending
    double kappa = 0.0;             // sigma[0]/sigma[2]; +inf when singular
    double index = 0.0;             // 1/kappa in [0,1]; 0 when singular
    bool singular = false;          // sigma[2] == 0
};

/// Singular values via cyclic Jacobi rotations on the symmetric M*M^T,
/// iterated until the off-diagonal Frobenius norm drops below 1e-14 of
/// ||M*M^T||_F. Roundoff-negative eigenvalues are clamped to zero.
/// Throws std::invalid_argument on non-finite input.
std::array<double, 3> singular_values_3(const Mat3& m);

ConditioningReport condition_report(const Mat3& m);

/// How kappa(B) is reported for the diagonal inverse-kinematics matrix:
/// Ratio is beta_max/beta_min (the plain singular-value ratio); SqrtRatio is
/// sqrt(beta_max/beta_min).
enum class KappaVariant { Ratio, SqrtRatio };

/// Conditioning of a diagonal matrix: singular values are the absolute
/// diagonal entries, no iteration involved.
ConditioningReport diag_condition(const Mat3& b, KappaVariant variant = KappaVariant::Ratio);

}  // namespace prr3
