#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "hhgq/observables.hpp"

using namespace hhgq;

namespace {

constexpr double kPi = std::numbers::pi;

ModeMoments coherent(std::complex<double> a) {
    const auto a2 = a * a;
    return {std::norm(a), a.real(), a.imag(), a2.real(), a2.imag()};
}

ModeMoments random_moments(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    return {1.0 + u(rng), u(rng), u(rng), u(rng), u(rng)};
}

// distance between two axis angles modulo pi
double axis_distance(double a, double b) {
    const double d = std::remainder(a - b, kPi);
    return std::abs(d);
}

}  // namespace

TEST_CASE("noise matrix of the vacuum, a coherent state and a simple squeezed set") {
    const auto vac = noise_matrix({});
    CHECK(vac.var_x == 0.25);
    CHECK(vac.var_y == 0.25);
    CHECK(vac.cov == 0.0);

    const auto coh = noise_matrix(coherent({0.3, 0.4}));
    CHECK(coh.var_x == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(coh.var_y == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(std::abs(coh.cov) < 1e-15);

    const auto m = noise_matrix({0.1, 0.0, 0.0, 0.05, 0.0});
    CHECK(m.var_x == doctest::Approx(0.325).epsilon(1e-15));
    CHECK(m.var_y == doctest::Approx(0.275).epsilon(1e-15));
    CHECK(m.cov == 0.0);
}

TEST_CASE("ellipse examples") {
    const auto vac = ellipse({});
    CHECK(vac.lambda_plus == 0.25);
    CHECK(vac.lambda_minus == 0.25);
    CHECK(vac.theta_min == 0.0);

    const auto e = ellipse({0.1, 0.0, 0.0, 0.05, 0.0});
    CHECK(e.lambda_plus == doctest::Approx(0.325).epsilon(1e-15));
    CHECK(e.lambda_minus == doctest::Approx(0.275).epsilon(1e-15));
    CHECK(e.theta_min == doctest::Approx(kPi / 2).epsilon(1e-15));
}

TEST_CASE("closed form and 2x2 eigenvalues agree on random moment sets") {
    std::mt19937_64 rng(2024);
    double worst = 0.0, worst_trace = 0.0, worst_det = 0.0;
    for (int k = 0; k < 10000; ++k) {
        const auto m = random_moments(rng);
        const auto [lp, lm] = principal_variances(m);
        const auto e = ellipse(m);
        worst = std::max({worst, std::abs(lp - e.lambda_plus), std::abs(lm - e.lambda_minus)});
        worst_trace = std::max(worst_trace, std::abs(e.lambda_plus + e.lambda_minus - e.var_x - e.var_y));
        worst_det = std::max(worst_det,
                             std::abs(e.lambda_plus * e.lambda_minus - (e.var_x * e.var_y - e.cov * e.cov)));
        CHECK(e.lambda_plus >= e.lambda_minus);
        CHECK(e.theta_min > -kPi / 2);
        CHECK(e.theta_min <= kPi / 2);
    }
    CHECK(worst < 1e-10);
    CHECK(worst_trace < 1e-12);
    CHECK(worst_det < 1e-12);
}

TEST_CASE("theta_min is an eigendirection of the minimal variance") {
    std::mt19937_64 rng(5);
    for (int k = 0; k < 1000; ++k) {
        const auto m = random_moments(rng);
        const auto e = ellipse(m);
        const double c = std::cos(e.theta_min), s = std::sin(e.theta_min);
        CHECK(std::abs(e.var_x * c + e.cov * s - e.lambda_minus * c) < 1e-12);
        CHECK(std::abs(e.cov * c + e.var_y * s - e.lambda_minus * s) < 1e-12);
    }
}

TEST_CASE("rotated variance") {
    const ModeMoments m{0.4, 0.2, -0.1, 0.15, 0.07};
    const auto nm = noise_matrix(m);
    const auto r0 = rotated_variance(m, 0.0);
    CHECK(r0.var_x == doctest::Approx(nm.var_x).epsilon(1e-14));
    CHECK(r0.var_y == doctest::Approx(nm.var_y).epsilon(1e-14));

    const auto e = ellipse(m);
    const auto at_min = rotated_variance(m, e.theta_min);
    CHECK(std::abs(at_min.var_x - e.lambda_minus) < 1e-10);
    CHECK(std::abs(at_min.var_y - e.lambda_plus) < 1e-10);

    for (double theta : {0.0, 0.3, 1.1, -2.0, 3.0}) {
        const auto v = rotated_variance({}, theta);
        CHECK(v.var_x == doctest::Approx(0.25).epsilon(1e-15));
        CHECK(v.var_y == doctest::Approx(0.25).epsilon(1e-15));
    }
}

TEST_CASE("rotation covariance") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> angle(-kPi, kPi);
    int checked = 0;
    for (int k = 0; k < 10000; ++k) {
        const auto m = random_moments(rng);
        const double delta = angle(rng);
        const auto e = ellipse(m);
        const auto r = ellipse(rotate(m, delta));
        CHECK(std::abs(r.lambda_plus - e.lambda_plus) < 1e-12);
        CHECK(std::abs(r.lambda_minus - e.lambda_minus) < 1e-12);
        CHECK(is_squeezed(r) == is_squeezed(e));
        if (e.lambda_plus - e.lambda_minus > 1e-2) {
            // a -> a e^{-i delta} turns the quadrature axes by -delta
            CHECK(axis_distance(r.theta_min, e.theta_min - delta) < 1e-12);
            ++checked;
        }
    }
    CHECK(checked > 9000);
}

TEST_CASE("squeezing guard band") {
    NoiseEllipse e{0.25, 0.25, 0.0, 0.26, 0.24, 0.0};
    CHECK(is_squeezed(e));
    CHECK_FALSE(is_squeezed(ellipse({})));
    e.lambda_minus = 0.25 + 1e-15;
    CHECK_FALSE(is_squeezed(e));
    e.lambda_minus = 0.25 - 1e-13;
    CHECK_FALSE(is_squeezed(e));
    e.lambda_minus = 0.25 - 1e-11;
    CHECK(is_squeezed(e));
}

TEST_CASE("coherent states are never squeezed") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int k = 0; k < 1000; ++k) {
        const auto e = ellipse(coherent({u(rng), u(rng)}));
        CHECK(std::abs(e.lambda_plus - 0.25) < 1e-12);
        CHECK(std::abs(e.lambda_minus - 0.25) < 1e-12);
        CHECK_FALSE(is_squeezed(e));
    }
}

TEST_CASE("phase convention") {
    CHECK(phase({0.0, 1.0, 0.0, 0.0, 0.0}) == doctest::Approx(kPi / 2));
    CHECK(phase({0.0, 0.0, 1.0, 0.0, 0.0}) == 0.0);
    CHECK(phase({}) == 0.0);
}

TEST_CASE("printed eigenvector formula") {
    CHECK_FALSE(eigvec_paper({}).has_value());
    CHECK_FALSE(eigvec_discrepancy(coherent({0.3, 0.4})).has_value());

    // For m = (0.1, 0, 0, 0.05, 0) the minimal-variance axis is Y. The printed
    // formula, taken literally, puts the u_- vector on X instead.
    const auto p = eigvec_paper({0.1, 0.0, 0.0, 0.05, 0.0});
    REQUIRE(p.has_value());
    CHECK(p->minus.u1_sq == doctest::Approx(1.0));
    CHECK(p->minus.u2_sq == doctest::Approx(0.0));
    CHECK(*eigvec_discrepancy({0.1, 0.0, 0.0, 0.05, 0.0}) == doctest::Approx(1.0));

    // adjudication over random moment sets
    std::mt19937_64 rng(17);
    int non_degenerate = 0, agree = 0;
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const auto m = random_moments(rng);
        const auto d = eigvec_discrepancy(m);
        if (!d) continue;
        ++non_degenerate;
        if (*d < 1e-8) ++agree;
        worst = std::max(worst, *d);
        const auto q = eigvec_paper(m);
        CHECK(q->plus.u1_sq + q->plus.u2_sq == doctest::Approx(1.0));
        CHECK(q->minus.u1_sq + q->minus.u2_sq == doctest::Approx(1.0));
    }
    MESSAGE("printed eigenvectors agree with the 2x2 decomposition on " << agree << " of " << non_degenerate
                                                                        << " draws, worst " << worst);
    CHECK(non_degenerate == 1000);
}
