#include "hhgq/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace hhgq {

std::string to_string(PulseShape shape) {
    switch (shape) {
        case PulseShape::SineSquared: return "sin2";
        case PulseShape::Gaussian: return "gaussian";
        case PulseShape::FlatTop: return "flattop";
    }
    return "sin2";
}

PulseShape pulse_shape_from_string(const std::string& name) {
    if (name == "sin2") return PulseShape::SineSquared;
    if (name == "gaussian") return PulseShape::Gaussian;
    if (name == "flattop") return PulseShape::FlatTop;
    throw ConfigError("unknown drive shape '" + name + "' (expected sin2, gaussian or flattop)");
}

void validate(const ModeGrid& grid) {
    if (grid.count == 0) {
        throw ConfigError("mode_count must be >= 1");
    }
    if (!(grid.omega_min > 0.0)) {
        throw ConfigError("omega_min must be > 0");
    }
    if (grid.count == 1 ? grid.omega_min > grid.omega_max : grid.omega_min >= grid.omega_max) {
        throw ConfigError("omega_min must be < omega_max (omega_min = " + std::to_string(grid.omega_min) +
                          ", omega_max = " + std::to_string(grid.omega_max) + ")");
    }
}

void validate(const SystemConfig& config) {
    if (!(config.omega0 >= 0.0) || !std::isfinite(config.omega0)) {
        throw ConfigError("omega0 must be finite and >= 0");
    }
    if (!(config.t_end > 0.0)) throw ConfigError("t_end must be > 0");
    if (!(config.integration.dt > 0.0)) throw ConfigError("dt must be > 0");
    if (!(config.coupling_scale >= 0.0)) throw ConfigError("coupling_scale must be >= 0");
    if (config.sample_every < 1) throw ConfigError("sample_every must be >= 1");
    if (!(config.drive.duration > 0.0)) throw ConfigError("duration must be > 0");
    if (!(config.drive.carrier >= 0.0)) throw ConfigError("carrier must be >= 0");
    if (config.drive.shape == PulseShape::FlatTop &&
        !(config.drive.ramp >= 0.0 && 2.0 * config.drive.ramp <= config.drive.duration)) {
        throw ConfigError("flat_ramp must satisfy 0 <= 2 * flat_ramp <= duration");
    }
    if (config.integration.adaptive) {
        const auto& c = config.integration;
        if (!(c.rel_tol > 0.0) || !(c.abs_tol > 0.0)) {
            throw ConfigError("rel_tol and abs_tol must be > 0 when adaptive");
        }
        if (!(c.max_step_shrink > 0.0 && c.max_step_shrink <= 1.0)) {
            throw ConfigError("max_step_shrink must be in (0, 1]");
        }
    }
    validate(config.modes);
}

std::vector<ModeCoupling> build_mode_grid(const SystemConfig& config) {
    validate(config.modes);
    const auto& grid = config.modes;
    std::vector<ModeCoupling> out;
    out.reserve(grid.count);
    const double spacing =
        grid.count > 1 ? (grid.omega_max - grid.omega_min) / static_cast<double>(grid.count - 1) : 0.0;
    for (std::size_t n = 0; n < grid.count; ++n) {
        const double omega = grid.count > 1 && n + 1 == grid.count
                                 ? grid.omega_max
                                 : grid.omega_min + static_cast<double>(n) * spacing;
        out.push_back({omega, config.coupling_scale * std::sqrt(omega)});
    }
    return out;
}

namespace {

double envelope(const DrivePulse& pulse, double t) noexcept {
    const double T = pulse.duration;
    switch (pulse.shape) {
        case PulseShape::SineSquared: {
            if (t == 0.0 || t == T) return 0.0;
            const double s = std::sin(std::numbers::pi * t / T);
            return s * s;
        }
        case PulseShape::Gaussian: {
            // sigma = T/8, shifted so the envelope reaches zero at both ends
            const double sigma = T / 8.0;
            const double x = (t - 0.5 * T) / sigma;
            const double floor = std::exp(-8.0);
            return (std::exp(-0.5 * x * x) - floor) / (1.0 - floor);
        }
        case PulseShape::FlatTop: {
            const double r = pulse.ramp;
            if (r <= 0.0) return 1.0;
            const double edge = std::min(t, T - t);
            if (edge >= r) return 1.0;
            const double s = std::sin(0.5 * std::numbers::pi * edge / r);
            return s * s;
        }
    }
    return 0.0;
}

}  // namespace

double drive_value(const DrivePulse& pulse, double t) noexcept {
    if (t < 0.0 || t > pulse.duration) return 0.0;
    return pulse.peak_rabi * envelope(pulse, t) * std::cos(pulse.carrier * t + pulse.carrier_phase);
}

double recommended_dt(const SystemConfig& config) {
    const double fastest = std::max({config.modes.omega_max, config.omega0, config.drive.carrier, 1e-12});
    return 2.0 * std::numbers::pi / fastest / 20.0;
}

}  // namespace hhgq
