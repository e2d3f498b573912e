#pragma once

// Globally adaptive Gauss-Kronrod (G10/K21) quadrature for real or complex
// integrands. Subdivides the interval with the largest error estimate until the
// summed estimate drops below the requested tolerance.

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <queue>
#include <vector>

#include "smoothgate/errors.hpp"

namespace smoothgate::numerics {

struct QuadratureOptions {
  double abs_tol = 1e-12;
  double rel_tol = 0.0;
  std::size_t max_intervals = 4000;
};

template <typename T>
struct QuadratureResult {
  T value{};
  double error = 0.0;
  std::size_t evaluations = 0;
  bool converged = false;
};

namespace detail {

// Abscissae and weights of the 21-point Kronrod rule and its embedded 10-point
// Gauss rule (QUADPACK qk21).
inline constexpr std::array<double, 11> kKronrodNodes = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0};
inline constexpr std::array<double, 11> kKronrodWeights = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077808936628868, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
inline constexpr std::array<double, 5> kGaussWeights = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

template <typename T>
struct Segment {
  double a, b;
  T value;
  double error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <typename T, typename F>
Segment<T> kronrod21(F& f, double a, double b) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  const T fc = f(mid);
  T kronrod = fc * kKronrodWeights[10];
  T gauss{};
  for (std::size_t j = 0; j < 10; ++j) {
    const double dx = half * kKronrodNodes[j];
    const T f1 = f(mid - dx);
    const T f2 = f(mid + dx);
    kronrod += (f1 + f2) * kKronrodWeights[j];
    if (j % 2 == 1) gauss += (f1 + f2) * kGaussWeights[j / 2];
  }
  kronrod *= half;
  gauss *= half;
  return {a, b, kronrod, std::abs(kronrod - gauss)};
}

}  // namespace detail

/// Integrate f over [a, b]. Never throws; check `converged`.
template <typename F>
auto try_integrate(F&& f, double a, double b, const QuadratureOptions& opt = {})
    -> QuadratureResult<decltype(f(a))> {
  using T = decltype(f(a));
  QuadratureResult<T> out;
  if (a == b) {
    out.converged = true;
    return out;
  }
  std::priority_queue<detail::Segment<T>> heap;
  auto first = detail::kronrod21<T>(f, a, b);
  out.evaluations = 21;
  T total = first.value;
  double error = first.error;
  heap.push(first);
  const auto target = [&] { return std::max(opt.abs_tol, opt.rel_tol * std::abs(total)); };
  while (error > target() && heap.size() < opt.max_intervals) {
    auto worst = heap.top();
    const double m = 0.5 * (worst.a + worst.b);
    if (!(m > worst.a && m < worst.b)) break;  // interval exhausted at machine precision
    heap.pop();
    auto left = detail::kronrod21<T>(f, worst.a, m);
    auto right = detail::kronrod21<T>(f, m, worst.b);
    out.evaluations += 42;
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }
  // Re-sum to shed the drift of the incremental updates.
  total = T{};
  error = 0.0;
  while (!heap.empty()) {
    total += heap.top().value;
    error += heap.top().error;
    heap.pop();
  }
  out.value = total;
  out.error = error;
  out.converged = error <= std::max(opt.abs_tol, opt.rel_tol * std::abs(total));
  return out;
}

/// Integrate f over [a, b]; throws NumericError if the tolerance is not met.
template <typename F>
auto integrate(F&& f, double a, double b, const QuadratureOptions& opt = {})
    -> QuadratureResult<decltype(f(a))> {
  auto r = try_integrate(f, a, b, opt);
  if (!r.converged) throw NumericError("adaptive quadrature did not converge", r.error);
  return r;
}

}  // namespace smoothgate::numerics
