#include "smoothgate/benchmark.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>

#include <Eigen/Dense>

#include "smoothgate/errors.hpp"
#include "smoothgate/numerics/parallel.hpp"

namespace smoothgate {

namespace {

using cd = std::complex<double>;
constexpr double kPi = std::numbers::pi;

// V†U as an SU(2) element.
EvolutionOperator relative(const EvolutionOperator& u, const EvolutionOperator& target) {
  u.validate(1e-8);
  target.validate(1e-8);
  return target.adjoint() * u;
}

EvolutionOperator segment(double omega, double beta, double t) {
  const double r = std::hypot(omega, beta);
  if (r == 0.0 || t == 0.0) return EvolutionOperator::identity();
  const double c = std::cos(r * t), s = std::sin(r * t);
  return {cd(c, -s * omega / r), cd(0.0, -s * beta / r)};
}

double fold(double angle) {
  double a = std::fmod(angle, kPi);
  if (a < 0.0) a += kPi;
  if (a >= kPi) a -= kPi;
  return a;
}

NoiseRealization realization(const NoiseSpec& noise, double x, double beta0) {
  NoiseRealization r;
  if (noise.kind == NoiseKind::Beta) r.delta_beta = x * beta0;
  else r.delta_epsilon = noise.g_model == GModel::Amplitude ? x : x * beta0;
  return r;
}

}  // namespace

double infidelity(const EvolutionOperator& u, const EvolutionOperator& target) {
  const auto w = relative(u, target);
  const double v = (2.0 / 3.0) * (std::norm(w.u21) + w.u11.imag() * w.u11.imag());
  return std::clamp(v, 0.0, 1.0);
}

std::array<double, 3> error_vector(const EvolutionOperator& u, const EvolutionOperator& target) {
  const auto w = relative(u, target);
  const double sign = w.u11.real() < 0.0 ? -1.0 : 1.0;
  // W = w₀ − i(wx σx + wy σy + wz σz): W11 = w₀ − i wz, W21 = wy − i wx.
  return {-sign * w.u21.imag(), sign * w.u21.real(), -sign * w.u11.imag()};
}

double first_order_sensitivity(const std::function<EvolutionOperator(double)>& evolve, double h) {
  const auto ref = evolve(0.0);
  const auto wp = error_vector(evolve(h), ref), wm = error_vector(evolve(-h), ref);
  return std::hypot(wp[0] - wm[0], wp[1] - wm[1], wp[2] - wm[2]) / (2.0 * h);
}

double infidelity_derivative(const std::function<EvolutionOperator(double)>& evolve, double h) {
  const auto ref = evolve(0.0);
  return (infidelity(evolve(h), ref) - infidelity(evolve(-h), ref)) / (2.0 * h);
}

EvolutionOperator SquareSequence::evolve(const NoiseRealization& noise, GModel g_model) const {
  const double beta = beta0 + noise.delta_beta;
  const double de = noise.delta_epsilon;
  const bool additive = g_model != GModel::Amplitude;
  const double free_omega = additive ? de : 0.0;
  const double drive = additive ? beta0 + de : beta0 * (1.0 + de);
  const auto free = [&](double t) { return segment(free_omega, beta, t); };
  const auto driven = segment(drive, beta, tau);
  return free(t_c) * driven * free(t_b) * driven * free(t_a);
}

SquareSequence square_baseline(const EvolutionOperator& target, double beta0) {
  if (!(beta0 > 0.0) || !std::isfinite(beta0)) throw DomainError("beta0 must be positive");
  target.validate(1e-8);
  // Hd X(b) Hd = Z(b) with Hd = (σx+σz)/√2, so Hd U Hd = Z(c) X(b) Z(a).
  const double r = 1.0 / std::sqrt(2.0);
  Eigen::Matrix2cd hd;
  hd << r, r, r, -r;
  const Eigen::Matrix2cd wm = hd * target.matrix() * hd;
  const cd w11 = wm(0, 0) / std::sqrt(wm.determinant());
  const cd w12 = wm(0, 1) / std::sqrt(wm.determinant());
  const double b = std::atan2(std::abs(w12), std::abs(w11));
  const double s = -std::arg(w11);
  const double d = std::arg(cd(0.0, 1.0) * w12);
  const double a = (s + d) / 2.0, c = (s - d) / 2.0;

  const double tau = kPi / (2.0 * std::sqrt(2.0) * beta0);
  const std::array<std::array<double, 3>, 2> branches{{{a + kPi / 2.0, -b, c + kPi / 2.0}, {a, b, c}}};
  double best = std::numeric_limits<double>::infinity();
  for (const auto& br : branches) {
    SquareSequence seq{fold(br[0]) / beta0, fold(br[1]) / beta0, fold(br[2]) / beta0, tau, beta0};
    const double err = infidelity(seq.evolve(), target);
    if (err < 1e-8) return seq;
    best = std::min(best, err);
  }
  throw NoDecomposition("no five-factor square sequence reproduces the target", best);
}

SquareSequence square_baseline(const TargetRotation& target, double beta0) {
  return square_baseline(rotation(target), beta0);
}

PowerLaw fit_power_law(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw DomainError("power-law fit needs equal-length data");
  if (xs.size() < 3) throw DomainError("power-law fit needs at least 3 points");
  const auto n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) throw DomainError("power-law fit needs positive data");
    const double lx = std::log(xs[i]), ly = std::log(ys[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) throw DomainError("power-law fit needs distinct abscissae");
  const double p = (n * sxy - sx * sy) / den;
  return {std::exp((sy - p * sx) / n), p};
}

std::vector<double> default_sweep_grid(std::size_t points, double lo, double hi) {
  if (points < 2 || !(lo > 0.0) || !(hi > lo)) throw DomainError("sweep grid needs 0 < lo < hi");
  std::vector<double> g(points);
  for (std::size_t i = 0; i < points; ++i)
    g[i] = lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(points - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

void refit(SweepResult& sweep, const FitWindow& window) {
  const auto& x = sweep.noise_values;
  const double slack = 1e-9;
  std::size_t b = 0;
  while (b < x.size() && x[b] < window.lo * (1.0 - slack)) ++b;
  std::size_t e = b;
  while (e < x.size() && x[e] <= window.hi * (1.0 + slack)) ++e;
  sweep.fit_begin = b;
  sweep.fit_end = e;
  std::vector<double> fx, fy;
  for (std::size_t i = b; i < e; ++i)
    if (sweep.infidelities[i] > 0.0 && std::isfinite(sweep.infidelities[i])) {
      fx.push_back(x[i]);
      fy.push_back(sweep.infidelities[i]);
    }
  sweep.fit_valid = fx.size() >= 3;
  sweep.fit = sweep.fit_valid ? fit_power_law(fx, fy)
                              : PowerLaw{std::numeric_limits<double>::quiet_NaN(),
                                         std::numeric_limits<double>::quiet_NaN()};
}

SweepResult noise_sweep(const std::function<EvolutionOperator(double)>& evolve,
                        const std::vector<double>& grid, const FitWindow& window,
                        std::size_t workers) {
  if (grid.empty()) throw DomainError("sweep grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (!(grid[i] > 0.0) || (i > 0 && !(grid[i] > grid[i - 1])))
      throw DomainError("sweep grid must be positive and strictly increasing");
  SweepResult r;
  r.noise_values = grid;
  r.infidelities.assign(grid.size(), std::numeric_limits<double>::quiet_NaN());
  r.errors.assign(grid.size(), {});
  const auto reference = evolve(0.0);
  numerics::parallel_for(grid.size(), workers, [&](std::size_t i) {
    try {
      r.infidelities[i] = infidelity(evolve(grid[i]), reference);
    } catch (const std::exception& e) {
      r.errors[i] = e.what();
    }
  });
  refit(r, window);
  return r;
}

SweepResult noise_sweep(const Pulse& pulse, const NoiseSpec& noise, const std::vector<double>& grid,
                        const FitWindow& window, std::size_t workers) {
  return noise_sweep(
      [&](double x) { return propagate(pulse, realization(noise, x, pulse.beta0), noise); }, grid,
      window, workers);
}

SweepResult noise_sweep(const SquareSequence& seq, const NoiseSpec& noise,
                        const std::vector<double>& grid, const FitWindow& window,
                        std::size_t workers) {
  return noise_sweep(
      [&](double x) { return seq.evolve(realization(noise, x, seq.beta0), noise.g_model); }, grid,
      window, workers);
}

void write_sweep_csv(std::ostream& out, const SweepResult& sweep) {
  out << std::setprecision(17) << "noise,infidelity\n";
  for (std::size_t i = 0; i < sweep.noise_values.size(); ++i)
    out << sweep.noise_values[i] << ',' << sweep.infidelities[i] << '\n';
  out << "# fit_c=" << sweep.fit.coefficient << ", fit_p=" << sweep.fit.exponent << '\n';
}

nlohmann::json to_json(const SweepResult& sweep) {
  nlohmann::json errs = nlohmann::json::array();
  for (std::size_t i = 0; i < sweep.errors.size(); ++i)
    if (!sweep.errors[i].empty()) errs.push_back({{"index", i}, {"message", sweep.errors[i]}});
  return {{"noise", sweep.noise_values},
          {"infidelity", sweep.infidelities},
          {"fit", {{"coefficient", sweep.fit.coefficient}, {"exponent", sweep.fit.exponent}, {"valid", sweep.fit_valid}}},
          {"fit_window", {sweep.fit_begin, sweep.fit_end}},
          {"errors", errs}};
}

}  // namespace smoothgate
