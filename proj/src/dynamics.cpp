#include "smoothgate/dynamics.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>
#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include "smoothgate/errors.hpp"

namespace smoothgate {

namespace {

using cd = std::complex<double>;
using Spline = boost::math::interpolators::cardinal_cubic_b_spline<double>;

Spline uniform_spline(const std::vector<double>& t, const std::vector<double>& y) {
  const double h = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
  for (std::size_t i = 1; i < t.size(); ++i)
    if (std::abs(t[i] - t[i - 1] - h) > 1e-9 * std::max(1.0, h))
      throw ValidationError("pulse samples must lie on a uniform time grid");
  return Spline(y.begin(), y.end(), t.front(), h);
}

}  // namespace

EvolutionOperator EvolutionOperator::from_matrix(const Eigen::Matrix2cd& m, double tol) {
  const Eigen::Matrix2cd g = m.adjoint() * m - Eigen::Matrix2cd::Identity();
  if (g.cwiseAbs().maxCoeff() > tol) throw ValidationError("matrix is not unitary");
  const cd root = std::sqrt(m.determinant());
  return {m(0, 0) / root, m(1, 0) / root};
}

Eigen::Matrix2cd EvolutionOperator::matrix() const {
  Eigen::Matrix2cd m;
  m << u11, -std::conj(u21), u21, std::conj(u11);
  return m;
}

double EvolutionOperator::unitarity_residual() const noexcept {
  return std::abs(std::norm(u11) + std::norm(u21) - 1.0);
}

void EvolutionOperator::validate(double tol) const {
  if (!std::isfinite(u11.real()) || !std::isfinite(u11.imag()) || !std::isfinite(u21.real()) ||
      !std::isfinite(u21.imag()))
    throw ValidationError("evolution operator has non-finite entries");
  if (unitarity_residual() > tol)
    throw ValidationError("evolution operator violates |u11|^2+|u21|^2=1 (residual " +
                          std::to_string(unitarity_residual()) + ")");
}

EvolutionOperator operator*(const EvolutionOperator& a, const EvolutionOperator& b) noexcept {
  // First column of A·B.
  return {a.u11 * b.u11 - std::conj(a.u21) * b.u21, a.u21 * b.u11 + std::conj(a.u11) * b.u21};
}

EvolutionOperator rotation(const TargetRotation& r) noexcept {
  return {cd(std::cos(r.phi / 2.0), 0.0), cd(0.0, -std::sin(r.phi / 2.0)) * std::polar(1.0, r.theta)};
}

EvolutionOperator x_rotation(double a) noexcept { return {cd(std::cos(a), 0.0), cd(0.0, -std::sin(a))}; }

EvolutionOperator z_rotation(double a) noexcept { return {std::polar(1.0, -a), cd(0.0, 0.0)}; }

EvolutionOperator analytic_evolution_at(const PhaseFunction& pf, double chi) {
  const auto p = pf.eval_unchecked(chi);
  const double psi = std::atan2(1.0, p.d1 * std::sin(2.0 * chi));
  constexpr double q = std::numbers::pi / 4.0;
  const double xi_minus = p.value - psi / 2.0 + q;
  const double xi_plus = p.value + psi / 2.0 - q;
  return {std::cos(chi) * std::polar(1.0, xi_minus), cd(0.0, -std::sin(chi)) * std::polar(1.0, xi_plus)};
}

EvolutionOperator analytic_evolution(const PhaseFunction& pf, const ChiTrajectory& trajectory,
                                     std::size_t t_index) {
  if (t_index >= trajectory.size()) throw DomainError("trajectory index out of range");
  return analytic_evolution_at(pf, trajectory.chi[t_index]);
}

PropagationReport propagate_report(const Pulse& pulse, const NoiseRealization& noise,
                                   const NoiseSpec& g_model, const PropagationOptions& opt) {
  if (!std::isfinite(noise.delta_beta) || !std::isfinite(noise.delta_epsilon))
    throw DomainError("noise realization must be finite");
  if (pulse.samples.size() < 4) throw ValidationError("pulse has too few samples");

  const auto wave = opt.half ? pulse.samples : pulse.waveform();
  std::vector<double> ts(wave.size()), om(wave.size());
  for (std::size_t i = 0; i < wave.size(); ++i) {
    ts[i] = wave[i].t;
    om[i] = wave[i].omega;
  }
  const Spline omega = uniform_spline(ts, om);

  std::optional<Spline> chi_of_t;
  if (g_model.g_model == GModel::Custom && noise.delta_epsilon != 0.0) {
    if (!g_model.table) throw ValidationError("custom g model without a table");
    if (pulse.chi.size() != pulse.samples.size())
      throw ValidationError("custom g model needs the pulse's chi trajectory");
    std::vector<double> th(pulse.samples.size());
    for (std::size_t i = 0; i < th.size(); ++i) th[i] = pulse.samples[i].t;
    chi_of_t = uniform_spline(th, pulse.chi);
  }

  const double beta = pulse.beta0 + noise.delta_beta;
  const double de = noise.delta_epsilon;
  auto g_of = [&](double t, double om0) -> double {
    switch (g_model.g_model) {
      case GModel::Amplitude: return om0;
      case GModel::Additive: return 1.0;
      case GModel::Custom: {
        if (!chi_of_t) return 0.0;
        const double v = (*g_model.table)((*chi_of_t)(std::abs(t)));
        return (pulse.antisymmetric && t < 0.0) ? -v : v;
      }
    }
    return 0.0;
  };

  using State = std::array<double, 4>;  // Re a, Im a, Re b, Im b
  auto rhs = [&](const State& x, State& dx, double t) {
    const double om0 = omega(t);
    const double w = om0 + (de != 0.0 ? de * g_of(t, om0) : 0.0);
    // ȧ = −i(w a + β b), ḃ = −i(β a − w b)
    const double ar = x[0], ai = x[1], br = x[2], bi = x[3];
    dx[0] = w * ai + beta * bi;
    dx[1] = -(w * ar + beta * br);
    dx[2] = beta * ai - w * bi;
    dx[3] = -(beta * ar - w * br);
  };

  const double t0 = ts.front();
  double t_stop = ts.back();
  if (opt.t_end) {
    if (*opt.t_end < t0 - 1e-12 || *opt.t_end > t_stop + 1e-12)
      throw DomainError("t_end outside the propagated span");
    t_stop = std::clamp(*opt.t_end, t0, t_stop);
  }

  PropagationReport rep;
  State x{1.0, 0.0, 0.0, 0.0};
  double t = t0, dt = 1e-3;
  auto stepper = numerics::make_rkf78<State>(opt.control);
  std::size_t since_renorm = 0;
  auto after = [&](State& s, double) {
    ++since_renorm;
    const double n2 = s[0] * s[0] + s[1] * s[1] + s[2] * s[2] + s[3] * s[3];
    rep.max_drift = std::max(rep.max_drift, std::abs(n2 - 1.0));
    if (since_renorm >= opt.renormalize_every && std::abs(n2 - 1.0) > opt.renormalize_threshold) {
      const double k = 1.0 / std::sqrt(n2);
      for (double& v : s) v *= k;
      ++rep.renormalizations;
      since_renorm = 0;
    }
  };
  // Steps never straddle a knot: Ω is a single cubic on each interval, so the
  // embedded error estimate stays honest and w(δ) stays smooth in δ.
  for (std::size_t i = 1; i < ts.size() && t < t_stop; ++i) {
    const double edge = std::min(ts[i], t_stop);
    if (edge <= t) continue;
    dt = std::min(dt, edge - t);
    rep.steps += numerics::advance_to(stepper, rhs, x, t, edge, dt, opt.control, after);
  }
  rep.u = {cd(x[0], x[1]), cd(x[2], x[3])};
  return rep;
}

EvolutionOperator propagate(const Pulse& pulse, const NoiseRealization& noise,
                            const NoiseSpec& g_model, const PropagationOptions& opt) {
  return propagate_report(pulse, noise, g_model, opt).u;
}

EvolutionOperator compose_antisymmetric(const EvolutionOperator& half) noexcept {
  // σz U† σz flips the sign of the off-diagonal entries of U†.
  const EvolutionOperator mirrored{std::conj(half.u11), half.u21};
  return half * mirrored;
}

nlohmann::json to_json(const EvolutionOperator& u) {
  const auto m = u.matrix();
  auto pair = [](cd z) { return nlohmann::json::array({z.real(), z.imag()}); };
  return {{"u11", pair(m(0, 0))},
          {"u12", pair(m(0, 1))},
          {"u21", pair(m(1, 0))},
          {"u22", pair(m(1, 1))},
          {"unitarity_residual", u.unitarity_residual()}};
}

EvolutionOperator evolution_from_json(const nlohmann::json& j) {
  try {
    auto z = [&](const char* k) { return cd(j.at(k).at(0).get<double>(), j.at(k).at(1).get<double>()); };
    Eigen::Matrix2cd m;
    m << z("u11"), z("u12"), z("u21"), z("u22");
    return EvolutionOperator::from_matrix(m);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("bad evolution operator JSON: ") + e.what());
  }
}

}  // namespace smoothgate
