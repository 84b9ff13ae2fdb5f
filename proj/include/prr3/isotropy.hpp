#pragma once

#include <array>
#include <optional>

#include "prr3/conditioning.hpp"
#include "prr3/kinematics.hpp"

namespace prr3 {

/// Normalized departure of K_bar*K_bar^T from tau^2 * I.
struct IsotropyResidual {
    double diag_spread = 0.0;  // (max - min) of the diagonal, over the diagonal mean
    double off_diag = 0.0;     // max |off-diagonal entry|, over the diagonal mean
    double tau_squared = 0.0;  // diagonal mean; the common tau^2 when isotropic
};

IsotropyResidual isotropy_residual(const Mat3& k_bar);
/// nullopt when the pose is serial-singular (k_bar unset).
std::optional<IsotropyResidual> isotropy_residual(const KinematicMatrices& mats);

enum class CharLenSource { ClosedForm, Optimized };

struct CharacteristicLength {
    double L = 0.0;      // mm
    double gamma = 0.0;  // limb angle B_iC_iP at the defining configuration, rad
    CharLenSource source = CharLenSource::ClosedForm;
};

/// L = sqrt(2) * r * sin(gamma); nullopt when sin(gamma) <= 0.
std::optional<CharacteristicLength> characteristic_length_closed(double r, double gamma);

/// L = sqrt(-k_i*k_j / l_i^T l_j) for a limb pair; nullopt when the radicand
/// is negative or the dot product vanishes. At an isotropic configuration all
/// three pair choices agree.
std::optional<double> characteristic_length_pairwise(const std::array<LimbState, 3>& limbs,
                                                     int i = 0, int j = 1);

/// Which matrix the isotropy search conditions on.
enum class IsotropyTarget { KBar, ABar };

struct IsotropySearchResult {
    Pose pose{};
    CharacteristicLength char_len{};  // source = Optimized
    double index = 0.0;               // achieved inverse condition number
    bool claimed = false;             // index > 1 - 1e-4
    bool structural_ok = false;       // params pass the equilateral structure check
    int seed_index = -1;              // winning restart (find_isotropic only)
    int iterations_to_claim = -1;     // simplex iterations until index first exceeded the claim level
    std::array<LimbState, 3> limbs{};
};

/// Equilateral base, platform, and rail layout (all three angle sets spaced
/// 2*pi/3) with positive R, l, r: the structural preconditions for isotropy.
bool params_structurally_isotropic(const DesignParams& params);

/// Nelder-Mead search over (x, y, theta, L) maximizing the conditioning index
/// of the target matrix, restarted from a 5x5x8 coarse seed grid. Ties within
/// 1e-9 of the best index resolve to the lowest seed index (seeds are ordered
/// center-first), so the returned configuration is stable run to run.
/// A best index below the claim level is a report, not a failure.
IsotropySearchResult find_isotropic(const DesignParams& params, const WorkingMode& mode,
                                    double L_init,
                                    IsotropyTarget target = IsotropyTarget::KBar);

/// Single simplex run from an explicit seed.
IsotropySearchResult refine_isotropic(const DesignParams& params, const WorkingMode& mode,
                                      const Pose& seed, double L_init,
                                      IsotropyTarget target = IsotropyTarget::KBar);

}  // namespace prr3
