#include "hhgq/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace hhgq {

namespace {

std::string divergence_message(double t, const std::string& what, double last_good_t) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "integration diverged at t = %.17g (%s); last good t = %.17g", t,
                  what.c_str(), last_good_t);
    return buf;
}

void check_finite(std::span<const double> y, double t, double last_good_t) {
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!std::isfinite(y[i])) throw DivergenceError(t, i, last_good_t);
    }
}

}  // namespace

DivergenceError::DivergenceError(double t, std::size_t index, double last_good_t)
    : std::runtime_error(divergence_message(t, "non-finite component " + std::to_string(index), last_good_t)),
      t_(t),
      index_(index),
      last_good_t_(last_good_t) {}

DivergenceError::DivergenceError(double t, const std::string& what, double last_good_t)
    : std::runtime_error(divergence_message(t, what, last_good_t)),
      t_(t),
      index_(static_cast<std::size_t>(-1)),
      last_good_t_(last_good_t) {}

Rk4Stepper::Rk4Stepper(std::size_t size) : k1_(size), k2_(size), k3_(size), k4_(size), tmp_(size) {}

void Rk4Stepper::step(OdeState& state, const RhsFn& rhs, double dt) {
    const std::size_t n = state.y.size();
    if (k1_.size() != n) {
        for (auto* v : {&k1_, &k2_, &k3_, &k4_, &tmp_}) v->assign(n, 0.0);
    }
    const double t = state.t;
    auto& y = state.y;

    rhs(t, y, k1_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + 0.5 * dt * k1_[i];
    rhs(t + 0.5 * dt, tmp_, k2_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + 0.5 * dt * k2_[i];
    rhs(t + 0.5 * dt, tmp_, k3_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + dt * k3_[i];
    rhs(t + dt, tmp_, k4_);

    const double h6 = dt / 6.0;
    for (std::size_t i = 0; i < n; ++i) {
        tmp_[i] = y[i] + h6 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
    }
    check_finite(tmp_, t + dt, t);
    y.swap(tmp_);
    state.t = t + dt;
}

OdeState step(const OdeState& state, const RhsFn& rhs, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be > 0");
    OdeState out = state;
    Rk4Stepper stepper(out.y.size());
    stepper.step(out, rhs, dt);
    return out;
}

StepSchedule::StepSchedule(double t_end, double dt, std::size_t sample_every)
    : t_end_(t_end), dt_(dt), sample_every_(sample_every) {
    if (!(dt > 0.0) || !(t_end > 0.0)) throw std::invalid_argument("StepSchedule: t_end and dt must be > 0");
    if (sample_every == 0) throw std::invalid_argument("StepSchedule: sample_every must be >= 1");
    const double ratio = t_end / dt;
    const double nearest = std::round(ratio);
    // t_end within rounding of a whole number of steps lands on that step
    if (nearest >= 1.0 && std::abs(ratio - nearest) <= 1e-9 * nearest) {
        steps_ = static_cast<std::size_t>(nearest);
    } else {
        steps_ = static_cast<std::size_t>(std::ceil(ratio));
    }
}

double StepSchedule::time(std::size_t k) const noexcept {
    if (k >= steps_) return t_end_;
    return static_cast<double>(k) * dt_;
}

bool StepSchedule::is_sample(std::size_t k) const noexcept {
    return k == 0 || k == steps_ || k % sample_every_ == 0;
}

std::size_t StepSchedule::sample_count() const noexcept {
    std::size_t interior = (steps_ - 1) / sample_every_;  // multiples strictly below steps_
    return 1 + interior + 1;
}

namespace {

double error_norm(std::span<const double> coarse, std::span<const double> fine, const IntegrationControls& c) {
    double worst = 0.0;
    for (std::size_t i = 0; i < fine.size(); ++i) {
        const double scale = c.abs_tol + c.rel_tol * std::max(std::abs(fine[i]), std::abs(coarse[i]));
        worst = std::max(worst, std::abs(fine[i] - coarse[i]) / scale);
    }
    return worst;
}

// Covers [state.t, t_target] with step-doubled RK4 substeps.
void adaptive_advance(OdeState& state, const RhsFn& rhs, const IntegrationControls& c, double t_target,
                      double& h, Rk4Stepper& stepper) {
    const double h_min = c.dt * c.max_step_shrink;
    const double h_max = c.dt;
    while (state.t < t_target) {
        const double remaining = t_target - state.t;
        const bool last = h >= remaining;
        const double trial = last ? remaining : h;

        OdeState coarse = state;
        stepper.step(coarse, rhs, trial);
        OdeState fine = state;
        stepper.step(fine, rhs, 0.5 * trial);
        stepper.step(fine, rhs, 0.5 * trial);

        const double err = error_norm(coarse.y, fine.y, c);
        if (err <= 1.0) {
            for (std::size_t i = 0; i < fine.y.size(); ++i) {
                fine.y[i] += (fine.y[i] - coarse.y[i]) / 15.0;
            }
            check_finite(fine.y, state.t + trial, state.t);
            state.y.swap(fine.y);
            state.t = last ? t_target : state.t + trial;
        } else if (trial <= h_min) {
            throw DivergenceError(state.t, "step size fell below max_step_shrink * dt", state.t);
        }
        const double factor = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 2.0;
        h = std::clamp(trial * std::clamp(factor, 0.2, 2.0), h_min, h_max);
    }
}

}  // namespace

OdeState integrate_ode(OdeState initial, const RhsFn& rhs, const IntegrationControls& controls, double t_end,
                       std::size_t sample_every, const Observer& observer) {
    const StepSchedule schedule(t_end, controls.dt, sample_every);
    OdeState state = std::move(initial);
    state.t = schedule.time(0);
    if (observer) observer(state.t, state.y);

    Rk4Stepper stepper(state.y.size());
    double h = controls.dt;
    for (std::size_t k = 1; k <= schedule.steps(); ++k) {
        const double t_next = schedule.time(k);
        if (controls.adaptive) {
            adaptive_advance(state, rhs, controls, t_next, h, stepper);
        } else {
            stepper.step(state, rhs, t_next - state.t);
        }
        state.t = t_next;
        if (observer && schedule.is_sample(k)) observer(state.t, state.y);
    }
    return state;
}

HierarchyState integrate(const HierarchyState& initial, const HierarchyModel& model,
                         const HierarchyObserver& observer) {
    const auto& config = model.config();
    if (initial.values().size() != model.size()) {
        throw std::invalid_argument("integrate: state length does not match the model");
    }
    RhsFn rhs = [&model](double t, std::span<const double> y, std::span<double> dydt) { model.rhs(t, y, dydt); };
    Observer wrapped;
    if (observer) {
        wrapped = [&observer](double t, std::span<const double> y) {
            observer(HierarchyState(t, std::vector<double>(y.begin(), y.end())));
        };
    }
    OdeState start{initial.t(), std::vector<double>(initial.values().begin(), initial.values().end())};
    OdeState end = integrate_ode(std::move(start), rhs, config.integration, config.t_end, config.sample_every,
                                 wrapped);
    return HierarchyState(end.t, std::move(end.y));
}

}  // namespace hhgq
