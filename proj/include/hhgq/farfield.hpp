// farfield.hpp: far-field scattered electric field moments.
//
// All fields are in units of C(r) = mu0 w0 d / (4 pi |r|); the retarded time
// is identified with the source time. The field operator is E = C dV/dt:
//   E / C = -w0 sx + Omega(t) sz + sum_n Omega_n sz (a_n + a_n^+).

#pragma once

#include <span>
#include <vector>

#include "hhgq/hierarchy.hpp"
#include "hhgq/observables.hpp"

namespace hhgq {

enum class SecondMomentMode {
    PaperLiteral,        // printed coefficients 2 and 8 (ordered pairs)
    OperatorConsistent,  // direct square of the field operator: 4 and 4
};

struct FarFieldOptions {
    SecondMomentMode e2_mode{SecondMomentMode::OperatorConsistent};
    bool include_mode_sum{true};  // the sum_n Omega_n <W_n^+> term of <E>
};

struct FieldSample {
    double t_ret;
    double e_mean;
    double e2_mean;
    double variance;
    double semiclassical_variance;
};

double e_mean(const HierarchyState& state, const HierarchyModel& model, const FarFieldOptions& options = {});

/// Cross-mode products <X_n X_m> are factorized into <X_n><X_m>.
double e_second_moment(const HierarchyState& state, const HierarchyModel& model,
                       SecondMomentMode mode = SecondMomentMode::OperatorConsistent);

/// <E^2> from per-mode moments; `xx` optionally supplies exact <X_n X_m>
/// (row-major M x M) instead of the factorized products.
double e_second_moment(double omega0, double drive, std::span<const ModeCoupling> modes,
                       std::span<const ModeMoments> moments, SecondMomentMode mode,
                       std::span<const double> xx = {});

/// Every Omega_n term dropped: <E> = -w0 <U> + Omega <W>, <E^2> = w0^2 + Omega^2.
double semiclassical_variance(const HierarchyState& state, const HierarchyModel& model);

FieldSample field_sample(const HierarchyState& state, const HierarchyModel& model,
                         const FarFieldOptions& options = {});

std::vector<FieldSample> variance_series(std::span<const HierarchyState> trajectory, const HierarchyModel& model,
                                         const FarFieldOptions& options = {});

}  // namespace hhgq
