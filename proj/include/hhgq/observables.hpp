// observables.hpp: quadrature variances and the noise ellipse of one mode.
//
// Quadratures: X = (a^+ + a)/2, Y = i(a^+ - a)/2, X2 = (a^+2 + a^2)/2,
// Y2 = i(a^+2 - a^2)/2. Vacuum variance of any rotated quadrature is 1/4.

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "hhgq/hierarchy.hpp"

namespace hhgq {

struct ModeMoments {
    double n_mean{0.0};
    double x{0.0};
    double y{0.0};
    double x2{0.0};
    double y2{0.0};
};

ModeMoments moments_of(const ModeBlock& block) noexcept;

struct NoiseMatrix {
    double var_x;
    double var_y;
    double cov;  // (1/2) <{dX, dY}>
};

struct NoiseEllipse {
    double var_x;
    double var_y;
    double cov;
    double lambda_plus;
    double lambda_minus;
    double theta_min;  // phase of the minimal-variance quadrature, in (-pi/2, pi/2]
};

NoiseMatrix noise_matrix(const ModeMoments& m) noexcept;

/// Closed-form principal variances 1/4 [1 + 2(N - X^2 - Y^2) +- 2 |<X2 + iY2> - <X + iY>^2|].
std::pair<double, double> principal_variances(const ModeMoments& m) noexcept;

/// Eigen-decomposition of the 2x2 noise matrix. The closed form above is
/// evaluated alongside and must agree to 1e-10 (relative to the moment scale);
/// a mismatch throws std::logic_error.
NoiseEllipse ellipse(const ModeMoments& m);

struct RotatedVariance {
    double var_x;  // <(dX^theta)^2>
    double var_y;  // <(dY^theta)^2>
};

RotatedVariance rotated_variance(const ModeMoments& m, double theta) noexcept;

/// lambda_minus below the vacuum value 1/4 by more than 1e-12.
bool is_squeezed(const NoiseEllipse& e) noexcept;
inline constexpr double kSqueezeGuard = 1e-12;

/// atan2(<X>, <Y>) in that argument order; 0 at the origin.
double phase(const ModeMoments& m) noexcept;

/// Squared eigenvector components as printed in the closed-form
/// eigenvector formula, one pair per principal variance.
struct EigvecComponents {
    double u1_sq;
    double u2_sq;
};

struct PrintedEigvecs {
    EigvecComponents plus;
    EigvecComponents minus;
};

/// std::nullopt when a denominator vanishes (isotropic ellipse); callers
/// fall back to ellipse().theta_min.
std::optional<PrintedEigvecs> eigvec_paper(const ModeMoments& m);

/// Largest deviation between the printed squared components and
/// (cos^2, sin^2) of the eigen-decomposition directions; nullopt if degenerate.
std::optional<double> eigvec_discrepancy(const ModeMoments& m);

/// Moment-space rotation a -> a e^{-i delta}.
ModeMoments rotate(const ModeMoments& m, double delta) noexcept;

}  // namespace hhgq
