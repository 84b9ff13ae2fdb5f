#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "prr3/linalg.hpp"

namespace prr3 {

inline constexpr double kPi = 3.14159265358979323846;

/// Fixed geometry of the planar 3-PRR manipulator. Lengths in mm, angles in
/// radians. The base anchors A_i sit at R*u(base_angles[i]); platform pivots
/// C_i at p + r*u(platform_angles[i] + theta); the actuated prismatic rail of
/// limb i runs through A_i along u(rail_angles[i]).
struct DesignParams {
    double R = 0.0;  // base circumradius |OA_i|
    double l = 0.0;  // limb length |B_iC_i|
    double r = 0.0;  // platform circumradius |PC_i|
    std::array<double, 3> base_angles{};
    std::array<double, 3> platform_angles{};
    std::array<double, 3> rail_angles{};
};

/// R = 200, l = 200, r = 100; equilateral base and platform with the first
/// vertex on +y; rails along the base-triangle sides (base angle + pi/2).
DesignParams default_params();

/// End-effector position (mm) and orientation (rad). theta is stored
/// unreduced; comparisons should reduce modulo 2*pi.
struct Pose {
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;
};

/// One inverse-kinematics branch per limb: the signs of (m_1, m_2, m_3).
struct WorkingMode {
    std::array<int, 3> signs{+1, +1, +1};

    static std::optional<WorkingMode> from_string(std::string_view s);  // e.g. "+-+"
    std::string to_string() const;

    WorkingMode negated() const { return {{-signs[0], -signs[1], -signs[2]}}; }
    /// Image of this mode when the whole scene rotates +120 degrees about O
    /// (limb labels shift cyclically: new limb i+1 takes old limb i's sign).
    WorkingMode rotated120() const { return {{signs[2], signs[0], signs[1]}}; }

    bool operator==(const WorkingMode&) const = default;
};

Vec2 base_anchor(const DesignParams& params, int limb);               // limb in [0,3)
Vec2 rail_direction(const DesignParams& params, int limb);            // unit alpha_i
Vec2 platform_attach(const DesignParams& params, const Pose& pose, int limb);

struct ModeCatalogEntry {
    WorkingMode mode;
    int negation = 0;        // index of the globally sign-flipped mode
    int rotated120 = 0;      // index of the +120-degree image
    int rotated240 = 0;
    int symmetry_class = 0;  // 0: {+++, ---}; 1: the remaining six
};

/// All eight working modes with their images under negation and cyclic limb
/// rotation, partitioned into the two symmetry classes with canonical
/// representatives (+,+,+) and (-,+,+).
struct ModeCatalog {
    std::array<ModeCatalogEntry, 8> entries{};
    std::array<WorkingMode, 2> representatives{};
};

ModeCatalog mode_catalog();

/// JSON document with keys R_mm, l_mm, r_mm, base_angles_rad, platform_angles_rad,
/// rail_angles_rad. Missing angle arrays take the documented defaults (equilateral
/// base/platform; rails at base + pi/2). Throws std::runtime_error on bad input.
std::string to_json(const DesignParams& params, int precision = 17);
DesignParams params_from_json(const std::string& text);
DesignParams load_params_file(const std::string& path);

}  // namespace prr3
