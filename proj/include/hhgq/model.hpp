// model.hpp: system configuration with the drive pulse and mode grid of the driven
// two-level atom coupled to quantized field modes.
//
// Units: hbar = 1 and the drive carrier frequency omega_L = 1, so every
// frequency is in units of omega_L and every time in units of 1/omega_L.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace hhgq {

/// Raised for any configuration that violates a model invariant.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class PulseShape { SineSquared, Gaussian, FlatTop };

struct DrivePulse {
    PulseShape shape{PulseShape::SineSquared};
    double peak_rabi{1.0};      // peak classical Rabi frequency
    double carrier{1.0};
    double duration{62.83185307179586};  // 10 carrier cycles
    double carrier_phase{0.0};
    double ramp{6.283185307179586};      // FlatTop only: length of each sin^2 ramp

    bool operator==(const DrivePulse&) const = default;
};

struct ModeGrid {
    double omega_min{1.0};
    double omega_max{1.0};
    std::size_t count{1};

    bool operator==(const ModeGrid&) const = default;
};

struct IntegrationControls {
    double dt{0.01};
    bool adaptive{false};
    double rel_tol{1e-8};
    double abs_tol{1e-10};
    double max_step_shrink{1e-4};  // smallest allowed step as a fraction of dt

    bool operator==(const IntegrationControls&) const = default;
};

struct SystemConfig {
    double omega0{1.0};
    DrivePulse drive{};
    ModeGrid modes{};
    double coupling_scale{0.01};  // Omega_n = coupling_scale * sqrt(omega_n)
    double t_end{62.83185307179586};
    IntegrationControls integration{};
    std::size_t sample_every{10};

    bool operator==(const SystemConfig&) const = default;
};

/// One quantized mode: angular frequency and vacuum Rabi coupling.
struct ModeCoupling {
    double omega;
    double rabi;
};

std::string to_string(PulseShape shape);
PulseShape pulse_shape_from_string(const std::string& name);

/// Throws ConfigError naming the offending field.
void validate(const SystemConfig& config);
void validate(const ModeGrid& grid);

/// Equally spaced grid, Omega_n = g * sqrt(omega_n).
std::vector<ModeCoupling> build_mode_grid(const SystemConfig& config);

/// Omega(t): envelope times cos(carrier * t + phase), zero outside [0, duration].
double drive_value(const DrivePulse& pulse, double t) noexcept;

/// Largest RK4 step that still puts 20 points on one period of the fastest mode.
double recommended_dt(const SystemConfig& config);

}  // namespace hhgq
