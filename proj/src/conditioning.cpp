#include "prr3/conditioning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace prr3 {

namespace {

double off_diagonal_frobenius(const Mat3& s) {
    const double a = s(0, 1), b = s(0, 2), c = s(1, 2);
    return std::sqrt(2.0 * (a * a + b * b + c * c));
}

double frobenius(const Mat3& s) {
    double sum = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) sum += s(i, j) * s(i, j);
    return std::sqrt(sum);
}

// One Jacobi rotation zeroing s(p,q), applied symmetrically.
void jacobi_rotate(Mat3& s, int p, int q) {
    const double apq = s(p, q);
    if (apq == 0.0) return;
    const double tau = (s(q, q) - s(p, p)) / (2.0 * apq);
    const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
    const double c = 1.0 / std::sqrt(1.0 + t * t);
    const double sn = t * c;

    s(p, p) -= t * apq;
    s(q, q) += t * apq;
    s(p, q) = s(q, p) = 0.0;
    for (int k = 0; k < 3; ++k) {
        if (k == p || k == q) continue;
        const double akp = s(k, p), akq = s(k, q);
        s(k, p) = s(p, k) = c * akp - sn * akq;
        s(k, q) = s(q, k) = sn * akp + c * akq;
    }
}

}  // namespace

std::array<double, 3> singular_values_3(const Mat3& m) {
    if (!m.finite()) throw std::invalid_argument("singular_values_3: non-finite matrix");

    Mat3 s = m * m.transposed();
    const double scale = frobenius(s);
    if (scale == 0.0) return {0.0, 0.0, 0.0};

    const double stop = 1e-14 * scale;
    for (int sweep = 0; sweep < 64 && off_diagonal_frobenius(s) > stop; ++sweep) {
        jacobi_rotate(s, 0, 1);
        jacobi_rotate(s, 0, 2);
        jacobi_rotate(s, 1, 2);
    }

    std::array<double, 3> sigma{};
    for (int i = 0; i < 3; ++i) sigma[i] = std::sqrt(std::max(s(i, i), 0.0));
    std::sort(sigma.begin(), sigma.end(), std::greater<>());
    return sigma;
}

ConditioningReport condition_report(const Mat3& m) {
    ConditioningReport report;
    report.sigma = singular_values_3(m);
    report.singular = report.sigma[2] == 0.0;
    if (report.singular) {
        report.kappa = std::numeric_limits<double>::infinity();
        report.index = 0.0;
    } else {
        report.kappa = report.sigma[0] / report.sigma[2];
        report.index = report.sigma[2] / report.sigma[0];
    }
    return report;
}

ConditioningReport diag_condition(const Mat3& b, KappaVariant variant) {
    ConditioningReport report;
    for (int i = 0; i < 3; ++i) {
        const double v = b(i, i);
        if (!std::isfinite(v)) throw std::invalid_argument("diag_condition: non-finite diagonal");
        report.sigma[i] = std::abs(v);
    }
    std::sort(report.sigma.begin(), report.sigma.end(), std::greater<>());
    report.singular = report.sigma[2] == 0.0;
    if (report.singular) {
        report.kappa = std::numeric_limits<double>::infinity();
        report.index = 0.0;
        return report;
    }
    const double ratio = report.sigma[0] / report.sigma[2];
    report.kappa = variant == KappaVariant::Ratio ? ratio : std::sqrt(ratio);
    report.index = 1.0 / report.kappa;
    return report;
}

}  // namespace prr3
