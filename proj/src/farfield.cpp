#include "hhgq/farfield.hpp"

#include <stdexcept>

namespace hhgq {

double e_mean(const HierarchyState& state, const HierarchyModel& model, const FarFieldOptions& options) {
    const auto atom = state.atom();
    const double drive = drive_value(model.config().drive, state.t());
    double value = -model.config().omega0 * atom.u + drive * atom.w;
    if (options.include_mode_sum) {
        const auto modes = model.modes();
        for (std::size_t n = 0; n < modes.size(); ++n) value += modes[n].rabi * state.at(n, kWp);
    }
    return value;
}

double e_second_moment(double omega0, double drive, std::span<const ModeCoupling> modes,
                       std::span<const ModeMoments> moments, SecondMomentMode mode, std::span<const double> xx) {
    if (moments.size() != modes.size()) throw std::invalid_argument("e_second_moment: moment count mismatch");
    const std::size_t m = modes.size();
    if (!xx.empty() && xx.size() != m * m) throw std::invalid_argument("e_second_moment: xx must be M x M");

    const bool literal = mode == SecondMomentMode::PaperLiteral;
    const double linear_coeff = literal ? 2.0 : 4.0;
    const double pair_coeff = literal ? 8.0 : 4.0;

    double sum_x = 0.0, diagonal = 0.0, pairs = 0.0;
    for (std::size_t n = 0; n < m; ++n) {
        const double g = modes[n].rabi;
        const auto& mm = moments[n];
        sum_x += g * mm.x;
        diagonal += g * g * (1.0 + 2.0 * mm.n_mean + 2.0 * mm.x2);
    }
    if (xx.empty()) {
        // sum over ordered pairs n != m of Omega_n Omega_m <X_n><X_m>
        double self = 0.0;
        for (std::size_t n = 0; n < m; ++n) {
            const double gx = modes[n].rabi * moments[n].x;
            self += gx * gx;
        }
        pairs = sum_x * sum_x - self;
    } else {
        for (std::size_t n = 0; n < m; ++n) {
            for (std::size_t k = 0; k < m; ++k) {
                if (k != n) pairs += modes[n].rabi * modes[k].rabi * xx[n * m + k];
            }
        }
    }
    return omega0 * omega0 + drive * drive + linear_coeff * drive * sum_x + diagonal + pair_coeff * pairs;
}

namespace {

std::vector<ModeMoments> all_moments(const HierarchyState& state) {
    std::vector<ModeMoments> out;
    out.reserve(state.mode_count());
    for (std::size_t n = 0; n < state.mode_count(); ++n) out.push_back(moments_of(state.mode(n)));
    return out;
}

}  // namespace

double e_second_moment(const HierarchyState& state, const HierarchyModel& model, SecondMomentMode mode) {
    const auto moments = all_moments(state);
    return e_second_moment(model.config().omega0, drive_value(model.config().drive, state.t()), model.modes(),
                           moments, mode);
}

double semiclassical_variance(const HierarchyState& state, const HierarchyModel& model) {
    const auto atom = state.atom();
    const double w0 = model.config().omega0;
    const double drive = drive_value(model.config().drive, state.t());
    const double mean = -w0 * atom.u + drive * atom.w;
    return w0 * w0 + drive * drive - mean * mean;
}

FieldSample field_sample(const HierarchyState& state, const HierarchyModel& model, const FarFieldOptions& options) {
    const double mean = e_mean(state, model, options);
    const double second = e_second_moment(state, model, options.e2_mode);
    return {state.t(), mean, second, second - mean * mean, semiclassical_variance(state, model)};
}

std::vector<FieldSample> variance_series(std::span<const HierarchyState> trajectory, const HierarchyModel& model,
                                         const FarFieldOptions& options) {
    std::vector<FieldSample> out;
    out.reserve(trajectory.size());
    for (const auto& s : trajectory) out.push_back(field_sample(s, model, options));
    return out;
}

}  // namespace hhgq
