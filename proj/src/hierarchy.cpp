#include "hhgq/hierarchy.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace hhgq {

HierarchyState::HierarchyState(double t, std::vector<double> values) : t_(t), values_(std::move(values)) {
    if (values_.size() < kAtomVars || (values_.size() - kAtomVars) % kModeVars != 0) {
        throw std::invalid_argument("HierarchyState: length " + std::to_string(values_.size()) +
                                    " is not 3 + 11 * modes");
    }
}

HierarchyState HierarchyState::pack(double t, const AtomBlock& atom, std::span<const ModeBlock> modes) {
    std::vector<double> v;
    v.reserve(state_size(modes.size()));
    v.push_back(atom.u);
    v.push_back(atom.v);
    v.push_back(atom.w);
    for (const auto& block : modes) v.insert(v.end(), block.begin(), block.end());
    return HierarchyState(t, std::move(v));
}

ModeBlock HierarchyState::mode(std::size_t n) const {
    if (n >= mode_count()) throw std::out_of_range("HierarchyState::mode: index out of range");
    ModeBlock block{};
    std::copy_n(values_.begin() + static_cast<std::ptrdiff_t>(mode_offset(n)), kModeVars, block.begin());
    return block;
}

std::vector<ModeBlock> HierarchyState::modes() const {
    std::vector<ModeBlock> out;
    out.reserve(mode_count());
    for (std::size_t n = 0; n < mode_count(); ++n) out.push_back(mode(n));
    return out;
}

HierarchyModel::HierarchyModel(const SystemConfig& config, HierarchyOptions options)
    : config_(config), options_(options), modes_(build_mode_grid(config)) {}

HierarchyModel::HierarchyModel(const SystemConfig& config, std::vector<ModeCoupling> modes, HierarchyOptions options)
    : config_(config), options_(options), modes_(std::move(modes)) {
    validate(config_);
}

void HierarchyModel::rhs(double t, std::span<const double> y, std::span<double> dydt) const {
    const std::size_t m = modes_.size();
    if (y.size() != state_size(m) || dydt.size() != y.size()) {
        throw std::invalid_argument("hierarchy rhs: state length " + std::to_string(y.size()) +
                                    " does not match " + std::to_string(m) + " modes");
    }
    const double w0 = config_.omega0;
    const double drive = drive_value(config_.drive, t);
    const double u = y[0], v = y[1], w = y[2];

    // Shared reductions, summed in index order.
    double sum_x = 0.0, sum_wp = 0.0, sum_vp = 0.0;
    for (std::size_t n = 0; n < m; ++n) {
        const double* b = y.data() + mode_offset(n);
        const double g = modes_[n].rabi;
        sum_x += g * b[kX];
        sum_wp += g * b[kWp];
        sum_vp += g * b[kVp];
    }

    dydt[0] = w0 * v;
    dydt[1] = -w0 * u + drive * w + sum_wp;
    dydt[2] = -drive * v - sum_vp;

    const bool literal = options_.appendix_literal;
    for (std::size_t n = 0; n < m; ++n) {
        const double* b = y.data() + mode_offset(n);
        double* d = dydt.data() + mode_offset(n);
        const double wn = modes_[n].omega;
        const double g = modes_[n].rabi;
        // sum_{j != n} Omega_j <X_j>
        const double cross = sum_x - g * b[kX];
        const double q2 = 1.0 + 2.0 * b[kN] + 2.0 * b[kX2];  // <(a + a^+)^2>

        d[kN] = 0.5 * g * b[kUm];
        d[kUp] = w0 * b[kVp] - wn * b[kUm];
        d[kUm] = w0 * b[kVm] + wn * b[kUp] + g;
        d[kVp] = -w0 * b[kUp] - wn * b[kVm] + drive * b[kWp] + g * w * q2 + 2.0 * cross * b[kWp];
        d[kVm] = -w0 * b[kUm] + wn * b[kVp] + drive * b[kWm] - 2.0 * g * w * b[kY2] +
                 (literal ? -2.0 : 2.0) * cross * b[kWm];
        d[kWp] = -wn * b[kWm] - drive * b[kVp] - g * v * q2 - 2.0 * cross * b[kVp];
        d[kWm] = wn * b[kWp] - drive * b[kVm] + 2.0 * g * v * b[kY2] -
                 2.0 * cross * (literal ? b[kVp] : b[kVm]);
        d[kX] = wn * b[kY];
        d[kY] = -0.5 * g * u - wn * b[kX];
        d[kX2] = -0.5 * g * b[kUm] + 2.0 * wn * b[kY2];
        d[kY2] = -0.5 * g * b[kUp] - 2.0 * wn * b[kX2];
    }
}

std::vector<double> HierarchyModel::rhs(const HierarchyState& state) const {
    std::vector<double> out(state.values().size());
    rhs(state.t(), state.values(), out);
    return out;
}

HierarchyState initial_state(const SystemConfig& config) {
    std::vector<double> v(state_size(config.modes.count), 0.0);
    v[2] = -1.0;
    return HierarchyState(0.0, std::move(v));
}

}  // namespace hhgq
