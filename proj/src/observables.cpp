#include "hhgq/observables.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace hhgq {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDegenerate = 1e-14;

// Map an axis angle (pi-periodic) into (-pi/2, pi/2].
double canonical_axis(double theta) noexcept {
    double t = std::remainder(theta, kPi);  // [-pi/2, pi/2]
    if (t <= -0.5 * kPi) t += kPi;
    return t;
}

}  // namespace

ModeMoments moments_of(const ModeBlock& block) noexcept {
    return {block[kN], block[kX], block[kY], block[kX2], block[kY2]};
}

NoiseMatrix noise_matrix(const ModeMoments& m) noexcept {
    return {
        0.25 * (1.0 + 2.0 * m.n_mean + 2.0 * m.x2 - 4.0 * m.x * m.x),
        0.25 * (1.0 + 2.0 * m.n_mean - 2.0 * m.x2 - 4.0 * m.y * m.y),
        0.5 * (m.y2 - 2.0 * m.x * m.y),
    };
}

std::pair<double, double> principal_variances(const ModeMoments& m) noexcept {
    const std::complex<double> alpha(m.x, m.y);
    const std::complex<double> anomalous = std::complex<double>(m.x2, m.y2) - alpha * alpha;
    const double base = 1.0 + 2.0 * (m.n_mean - m.x * m.x - m.y * m.y);
    const double spread = 2.0 * std::abs(anomalous);
    return {0.25 * (base + spread), 0.25 * (base - spread)};
}

NoiseEllipse ellipse(const ModeMoments& m) {
    const NoiseMatrix nm = noise_matrix(m);
    const double mean = 0.5 * (nm.var_x + nm.var_y);
    const double half_diff = 0.5 * (nm.var_x - nm.var_y);
    const double radius = std::hypot(half_diff, nm.cov);

    NoiseEllipse e{nm.var_x, nm.var_y, nm.cov, mean + radius, mean - radius, 0.0};

    const auto [lp, lm] = principal_variances(m);
    const double scale = std::max({1.0, std::abs(m.n_mean), std::abs(m.x2), std::abs(m.y2), m.x * m.x, m.y * m.y});
    if (std::abs(lp - e.lambda_plus) > 1e-10 * scale || std::abs(lm - e.lambda_minus) > 1e-10 * scale) {
        throw std::logic_error("ellipse: closed-form and 2x2 eigenvalues disagree");
    }

    // |<X2 + iY2> - <X + iY>^2| = 2 * radius
    if (2.0 * radius >= kDegenerate) {
        const double major = 0.5 * std::atan2(2.0 * nm.cov, nm.var_x - nm.var_y);
        e.theta_min = canonical_axis(major + 0.5 * kPi);
    }
    return e;
}

RotatedVariance rotated_variance(const ModeMoments& m, double theta) noexcept {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const double along_x = 0.25 * (1.0 + 2.0 * m.n_mean + 2.0 * m.x2 - 4.0 * m.x * m.x);
    const double along_y = 0.25 * (1.0 + 2.0 * m.n_mean - 2.0 * m.x2 - 4.0 * m.y * m.y);
    const double mixed = m.y2 - 2.0 * m.y * m.x;
    return {
        along_x * c * c + along_y * s * s + mixed * c * s,
        along_x * s * s + along_y * c * c - mixed * c * s,
    };
}

bool is_squeezed(const NoiseEllipse& e) noexcept { return e.lambda_minus < 0.25 - kSqueezeGuard; }

double phase(const ModeMoments& m) noexcept {
    if (m.x == 0.0 && m.y == 0.0) return 0.0;
    return std::atan2(m.x, m.y);
}

std::optional<PrintedEigvecs> eigvec_paper(const ModeMoments& m) {
    const auto [lp, lm] = principal_variances(m);
    const double shift = 2.0 * m.x2 + 2.0 * m.n_mean + 1.0 + 4.0 * m.y * m.y;
    const double off = 2.0 * m.y2 - 4.0 * m.x * m.y;
    if (lp - lm < 2.0 * kDegenerate) return std::nullopt;  // isotropic: no preferred axis
    auto components = [&](double lambda) -> std::optional<EigvecComponents> {
        const double a = (lambda - shift) * (lambda - shift);
        const double denom = a + off * off;
        if (!(denom > 0.0)) return std::nullopt;
        return EigvecComponents{a / denom, off * off / denom};
    };
    const auto plus = components(lp);
    const auto minus = components(lm);
    if (!plus || !minus) return std::nullopt;
    return PrintedEigvecs{*plus, *minus};
}

std::optional<double> eigvec_discrepancy(const ModeMoments& m) {
    const auto printed = eigvec_paper(m);
    if (!printed) return std::nullopt;
    const NoiseEllipse e = ellipse(m);
    const double cm = std::cos(e.theta_min), sm = std::sin(e.theta_min);
    // major axis is perpendicular to the minor one
    const double worst = std::max({
        std::abs(printed->minus.u1_sq - cm * cm),
        std::abs(printed->minus.u2_sq - sm * sm),
        std::abs(printed->plus.u1_sq - sm * sm),
        std::abs(printed->plus.u2_sq - cm * cm),
    });
    return worst;
}

ModeMoments rotate(const ModeMoments& m, double delta) noexcept {
    const std::complex<double> a = std::complex<double>(m.x, m.y) * std::polar(1.0, -delta);
    const std::complex<double> a2 = std::complex<double>(m.x2, m.y2) * std::polar(1.0, -2.0 * delta);
    return {m.n_mean, a.real(), a.imag(), a2.real(), a2.imag()};
}

}  // namespace hhgq
