#pragma once

// Step-by-step driver around a Boost.Odeint controlled stepper. Stops exactly
// on requested abscissae so callers can sample on a fixed grid without dense
// output.

#include <algorithm>
#include <cmath>
#include <cstddef>

#include <boost/numeric/odeint.hpp>

#include "smoothgate/errors.hpp"

namespace smoothgate::numerics {

struct StepControl {
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  double min_step = 1e-14;
  std::size_t max_steps = 5'000'000;
};

/// Advances `x` from `t` to exactly `t_end`. `dt` carries the step-size
/// estimate between calls. `after_step(x, t)` runs after each accepted step.
/// Throws StiffnessError (where = t) when the step falls below min_step.
template <typename Controlled, typename System, typename State, typename AfterStep>
std::size_t advance_to(Controlled& stepper, System&& sys, State& x, double& t, double t_end,
                       double& dt, const StepControl& ctl, AfterStep&& after_step) {
  namespace odeint = boost::numeric::odeint;
  std::size_t accepted = 0, attempts = 0;
  while (t < t_end) {
    const double remaining = t_end - t;
    const bool last = dt >= remaining;
    double h = last ? remaining : dt;
    const double t_before = t;
    if (stepper.try_step(sys, x, t, h) == odeint::success) {
      ++accepted;
      if (last) t = t_end;  // pin against rounding in t + h
      after_step(x, t);
      if (!last || h > dt) dt = h;
    } else {
      dt = h;
      if (dt < ctl.min_step * std::max(1.0, std::abs(t_before)))
        throw StiffnessError("step size underflow", t_before);
    }
    if (++attempts > ctl.max_steps) throw StiffnessError("step budget exhausted", t);
  }
  return accepted;
}

template <typename State>
auto make_rkf78(const StepControl& ctl) {
  namespace odeint = boost::numeric::odeint;
  return odeint::make_controlled(ctl.abs_tol, ctl.rel_tol, odeint::runge_kutta_fehlberg78<State>());
}

}  // namespace smoothgate::numerics
