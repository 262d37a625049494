// integrator.hpp: classical RK4 with optional step-doubling error control.

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hhgq/hierarchy.hpp"
#include "hhgq/model.hpp"

namespace hhgq {

/// A non-finite value appeared; names the time and the component.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(double t, std::size_t index, double last_good_t);
    DivergenceError(double t, const std::string& what, double last_good_t);

    double t() const noexcept { return t_; }
    std::size_t index() const noexcept { return index_; }
    double last_good_t() const noexcept { return last_good_t_; }

private:
    double t_;
    std::size_t index_;
    double last_good_t_;
};

using RhsFn = std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;

struct OdeState {
    double t{0.0};
    std::vector<double> y;
};

/// RK4 stepper with reusable stage buffers.
class Rk4Stepper {
public:
    explicit Rk4Stepper(std::size_t size = 0);

    /// Advances `state` in place from state.t to state.t + dt.
    void step(OdeState& state, const RhsFn& rhs, double dt);

private:
    std::vector<double> k1_, k2_, k3_, k4_, tmp_;
};

/// Single RK4 step; throws DivergenceError on non-finite output.
OdeState step(const OdeState& state, const RhsFn& rhs, double dt);

/// Sample grid shared by every propagator: step k ends at k * dt (computed
/// as a multiple, never a running sum) and the last step lands on t_end.
class StepSchedule {
public:
    StepSchedule(double t_end, double dt, std::size_t sample_every);

    std::size_t steps() const noexcept { return steps_; }
    double time(std::size_t k) const noexcept;
    bool is_sample(std::size_t k) const noexcept;
    /// Number of observer calls including t = 0.
    std::size_t sample_count() const noexcept;

private:
    double t_end_;
    double dt_;
    std::size_t sample_every_;
    std::size_t steps_;
};

using Observer = std::function<void(double t, std::span<const double> y)>;

/// Integrates from t = 0 to t_end on the StepSchedule grid. The observer sees
/// t = 0, every sample_every-th grid point and finally t_end. With
/// controls.adaptive the gap between grid points is covered by step-doubled
/// RK4 substeps.
OdeState integrate_ode(OdeState initial, const RhsFn& rhs, const IntegrationControls& controls,
                       double t_end, std::size_t sample_every, const Observer& observer);

using HierarchyObserver = std::function<void(const HierarchyState&)>;

HierarchyState integrate(const HierarchyState& initial, const HierarchyModel& model,
                         const HierarchyObserver& observer = {});

}  // namespace hhgq
