#pragma once

#include <array>
#include <cmath>
#include <optional>

namespace prr3 {

/// Planar vector, mm (or mm/s, context-dependent).
struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator-() const { return {-x, -y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }

    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double cross(Vec2 o) const { return x * o.y - y * o.x; }
    double norm_sq() const { return x * x + y * y; }
    double norm() const { return std::sqrt(norm_sq()); }
};

inline Vec2 operator*(double s, Vec2 v) { return v * s; }

/// Counterclockwise quarter turn, E*v = (-v_y, v_x).
inline Vec2 rotate90(Vec2 v) { return {-v.y, v.x}; }

/// Unit vector at angle phi, counterclockwise from +x.
inline Vec2 unit_dir(double phi) { return {std::cos(phi), std::sin(phi)}; }

using Vec3 = std::array<double, 3>;

struct Mat2 {
    std::array<std::array<double, 2>, 2> m{};

    static Mat2 identity() { return {{{{1, 0}, {0, 1}}}}; }
    static Mat2 rotation(double angle) {
        const double c = std::cos(angle), s = std::sin(angle);
        return {{{{c, -s}, {s, c}}}};
    }

    double& operator()(int r, int c) { return m[r][c]; }
    double operator()(int r, int c) const { return m[r][c]; }

    Vec2 operator*(Vec2 v) const {
        return {m[0][0] * v.x + m[0][1] * v.y, m[1][0] * v.x + m[1][1] * v.y};
    }
    Mat2 operator*(const Mat2& o) const {
        Mat2 out;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                out.m[i][j] = m[i][0] * o.m[0][j] + m[i][1] * o.m[1][j];
        return out;
    }
};

struct Mat3 {
    std::array<std::array<double, 3>, 3> m{};

    static Mat3 identity() {
        Mat3 out;
        out.m[0][0] = out.m[1][1] = out.m[2][2] = 1.0;
        return out;
    }

    double& operator()(int r, int c) { return m[r][c]; }
    double operator()(int r, int c) const { return m[r][c]; }

    Mat3 operator*(const Mat3& o) const {
        Mat3 out;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                out.m[i][j] = m[i][0] * o.m[0][j] + m[i][1] * o.m[1][j] + m[i][2] * o.m[2][j];
        return out;
    }

    Vec3 operator*(const Vec3& v) const {
        Vec3 out{};
        for (int i = 0; i < 3; ++i)
            out[i] = m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2];
        return out;
    }

    Mat3 transposed() const {
        Mat3 out;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                out.m[i][j] = m[j][i];
        return out;
    }

    /// Cofactor expansion along the first row.
    double det() const {
        return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
               m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
               m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    }

    double max_abs() const {
        double out = 0.0;
        for (const auto& row : m)
            for (double v : row) out = std::max(out, std::abs(v));
        return out;
    }

    bool finite() const {
        for (const auto& row : m)
            for (double v : row)
                if (!std::isfinite(v)) return false;
        return true;
    }
};

/// Gaussian elimination with partial pivoting. Returns nullopt when a pivot
/// falls below 1e-14 of the largest entry (numerically singular).
std::optional<Vec3> solve3(const Mat3& a, const Vec3& rhs);
std::optional<Mat3> solve3(const Mat3& a, const Mat3& rhs);

}  // namespace prr3
