// hierarchy.hpp: the factorized expectation-value hierarchy.
//
// State layout (flat, real):
//   [0..2]                     atom  U = <sx>, V = -<sy>, W = <sz>
//   [3 + 11 n .. 3 + 11 n + 10] mode n: N, U+, U-, V+, V-, W+, W-, X, Y, X2, Y2
// with U_n^+ = sx (a + a^+), U_n^- = i sx (a - a^+) and likewise for V (with
// the -sy sign) and W. Cross-mode products and <sigma q_n^2> are factorized.

#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "hhgq/model.hpp"

namespace hhgq {

inline constexpr std::size_t kAtomVars = 3;
inline constexpr std::size_t kModeVars = 11;

/// Field offsets inside one mode block.
enum ModeField : std::size_t {
    kN = 0,
    kUp,
    kUm,
    kVp,
    kVm,
    kWp,
    kWm,
    kX,
    kY,
    kX2,
    kY2,
};

constexpr std::size_t state_size(std::size_t modes) noexcept { return kAtomVars + kModeVars * modes; }
constexpr std::size_t mode_offset(std::size_t n) noexcept { return kAtomVars + kModeVars * n; }

struct AtomBlock {
    double u{0.0}, v{0.0}, w{0.0};
};

using ModeBlock = std::array<double, kModeVars>;

/// Time plus the flat expectation-value vector.
class HierarchyState {
public:
    HierarchyState() = default;
    HierarchyState(double t, std::vector<double> values);

    static HierarchyState pack(double t, const AtomBlock& atom, std::span<const ModeBlock> modes);

    double t() const noexcept { return t_; }
    void set_t(double t) noexcept { t_ = t; }
    std::size_t mode_count() const noexcept { return (values_.size() - kAtomVars) / kModeVars; }

    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }

    AtomBlock atom() const noexcept { return {values_[0], values_[1], values_[2]}; }
    ModeBlock mode(std::size_t n) const;
    std::vector<ModeBlock> modes() const;

    double at(std::size_t n, ModeField f) const { return values_.at(mode_offset(n) + f); }

    bool operator==(const HierarchyState&) const = default;

private:
    double t_{0.0};
    std::vector<double> values_ = std::vector<double>(kAtomVars, 0.0);
};

struct HierarchyOptions {
    /// Reproduce the printed form of the two suspect lines: the <V_n^+>
    /// cross term in dW_n^-/dt and the -2 sign of the cross term in dV_n^-/dt.
    bool appendix_literal{false};
};

/// Precomputed couplings plus everything the right-hand side needs.
class HierarchyModel {
public:
    explicit HierarchyModel(const SystemConfig& config, HierarchyOptions options = {});
    /// Explicit couplings in place of the config's grid; config.modes is ignored.
    HierarchyModel(const SystemConfig& config, std::vector<ModeCoupling> modes, HierarchyOptions options = {});

    std::size_t size() const noexcept { return state_size(modes_.size()); }
    std::span<const ModeCoupling> modes() const noexcept { return modes_; }
    const SystemConfig& config() const noexcept { return config_; }
    const HierarchyOptions& options() const noexcept { return options_; }

    /// dy/dt at time t. Throws std::invalid_argument on a size mismatch.
    void rhs(double t, std::span<const double> y, std::span<double> dydt) const;

    std::vector<double> rhs(const HierarchyState& state) const;

private:
    SystemConfig config_;
    HierarchyOptions options_;
    std::vector<ModeCoupling> modes_;
};

/// Atom in |g> (W = -1), every mode in vacuum.
HierarchyState initial_state(const SystemConfig& config);

}  // namespace hhgq
