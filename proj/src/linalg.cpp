#include "prr3/linalg.hpp"

#include <cmath>
#include <utility>

namespace prr3 {

namespace {

// Row-reduces [a | rhs...] in place; returns false when a pivot is negligible
// relative to the largest entry of a.
template <int NRHS>
bool eliminate(Mat3 a, std::array<Vec3, NRHS>& rhs) {
    const double scale = a.max_abs();
    if (scale == 0.0) return false;
    const double pivot_tol = 1e-14 * scale;

    std::array<int, 3> perm{0, 1, 2};
    for (int col = 0; col < 3; ++col) {
        int best = col;
        for (int row = col + 1; row < 3; ++row)
            if (std::abs(a(perm[row], col)) > std::abs(a(perm[best], col))) best = row;
        std::swap(perm[col], perm[best]);

        const double pivot = a(perm[col], col);
        if (std::abs(pivot) <= pivot_tol) return false;

        for (int row = col + 1; row < 3; ++row) {
            const double f = a(perm[row], col) / pivot;
            if (f == 0.0) continue;
            for (int k = col; k < 3; ++k) a(perm[row], k) -= f * a(perm[col], k);
            for (int n = 0; n < NRHS; ++n) rhs[n][perm[row]] -= f * rhs[n][perm[col]];
        }
    }

    // Back substitution into pivot order, then undo the permutation.
    for (int n = 0; n < NRHS; ++n) {
        Vec3 x{};
        for (int col = 2; col >= 0; --col) {
            double v = rhs[n][perm[col]];
            for (int k = col + 1; k < 3; ++k) v -= a(perm[col], k) * x[k];
            x[col] = v / a(perm[col], col);
        }
        rhs[n] = x;
    }
    return true;
}

}  // namespace

std::optional<Vec3> solve3(const Mat3& a, const Vec3& rhs) {
    std::array<Vec3, 1> r{rhs};
    if (!eliminate<1>(a, r)) return std::nullopt;
    return r[0];
}

std::optional<Mat3> solve3(const Mat3& a, const Mat3& rhs) {
    std::array<Vec3, 3> cols{};
    for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 3; ++i) cols[j][i] = rhs(i, j);
    if (!eliminate<3>(a, cols)) return std::nullopt;
    Mat3 out;
    for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 3; ++i) out(i, j) = cols[j][i];
    return out;
}

}  // namespace prr3
