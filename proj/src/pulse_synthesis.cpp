#include "smoothgate/pulse_synthesis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "smoothgate/errors.hpp"
#include "smoothgate/numerics/ode.hpp"
#include "smoothgate/numerics/quadrature.hpp"

namespace smoothgate {

double speed_factor(const PhaseFunction& pf, double chi) noexcept {
  const double d = pf.eval_unchecked(chi).d1 * std::sin(2.0 * chi);
  return std::sqrt(1.0 + d * d);
}

double arc_length(const PhaseFunction& pf, double chi) {
  if (!(chi >= 0.0 && chi <= pf.chi_f())) throw DomainError("chi outside [0, chi_f]");
  numerics::QuadratureOptions opt;
  opt.abs_tol = 1e-12;
  return numerics::integrate([&](double x) { return speed_factor(pf, x); }, 0.0, chi, opt).value;
}

ChiTrajectory invert_chi(const PhaseFunction& pf, std::size_t n_samples) {
  if (n_samples < 16) throw DomainError("invert_chi needs at least 16 samples");
  using State = std::array<double, 1>;
  const double t_f = arc_length(pf, pf.chi_f());
  const auto n = n_samples;

  ChiTrajectory tr;
  tr.times.resize(n);
  tr.chi.resize(n);
  tr.chidot.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    tr.times[i] = t_f * static_cast<double>(i) / static_cast<double>(n - 1);
  tr.times.back() = t_f;

  auto rhs = [&](const State& x, State& dxdt, double) { dxdt[0] = 1.0 / speed_factor(pf, x[0]); };
  numerics::StepControl ctl;
  auto stepper = numerics::make_rkf78<State>(ctl);
  State x{0.0};
  double t = 0.0, dt = std::min(1e-3, tr.times[1]);
  tr.chi[0] = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    try {
      numerics::advance_to(stepper, rhs, x, t, tr.times[i], dt, ctl, [](const State&, double) {});
    } catch (const StiffnessError& e) {
      throw StiffnessError("trajectory inversion step underflow at chi=" + std::to_string(x[0]),
                           x[0]);
    }
    tr.chi[i] = x[0];
  }
  tr.end_mismatch = std::abs(tr.chi.back() - pf.chi_f());
  tr.chi.back() = pf.chi_f();
  for (std::size_t i = 0; i < n; ++i) tr.chidot[i] = 1.0 / speed_factor(pf, tr.chi[i]);
  return tr;
}

double omega_unchecked(const PhaseFunction& pf, double chi) noexcept {
  const auto p = pf.eval_unchecked(chi);
  const double s = std::sin(2.0 * chi), c = std::cos(2.0 * chi);
  const double q = 1.0 + p.d1 * p.d1 * s * s;
  const double num = p.d2 * s + 4.0 * p.d1 * c + 2.0 * p.d1 * p.d1 * p.d1 * s * s * c;
  return -num / (2.0 * q * std::sqrt(q));
}

double omega_of_chi(const PhaseFunction& pf, double chi) {
  if (!(chi >= 0.0 && chi <= pf.chi_f())) throw DomainError("chi outside [0, chi_f]");
  return omega_unchecked(pf, chi);
}

Pulse synthesize(const PhaseFunction& pf, std::size_t n_samples, bool antisymmetric) {
  if (!antisymmetric) {
    const double end = omega_unchecked(pf, pf.chi_f());
    if (!std::isfinite(end) || std::abs(end) > kEndpointDivergence)
      throw EndpointDivergence("drive diverges at chi_f; finite-duration condition violated", end);
  }
  const auto tr = invert_chi(pf, n_samples);
  Pulse p;
  p.t_f = tr.t_f();
  p.antisymmetric = antisymmetric;
  p.source = pf;
  p.chi = tr.chi;
  p.samples.resize(tr.size());
  for (std::size_t i = 0; i < tr.size(); ++i)
    p.samples[i] = {tr.times[i], omega_unchecked(pf, tr.chi[i])};
  for (const auto& s : p.samples)
    if (!std::isfinite(s.omega)) throw EndpointDivergence("non-finite drive sample", s.omega);
  return p;
}

std::vector<PulseSample> Pulse::waveform() const {
  if (!antisymmetric) return samples;
  std::vector<PulseSample> out;
  out.reserve(2 * samples.size());
  for (std::size_t i = samples.size(); i-- > 1;) out.push_back({-samples[i].t, -samples[i].omega});
  if (!samples.empty() && samples.front().t != 0.0)
    out.push_back({-samples.front().t, -samples.front().omega});
  out.insert(out.end(), samples.begin(), samples.end());
  return out;
}

double Pulse::max_abs_omega() const noexcept {
  double m = 0.0;
  for (const auto& s : samples) m = std::max(m, std::abs(s.omega));
  return m;
}

std::vector<SpherePoint> sphere_curve(const PhaseFunction& pf, std::size_t n_samples) {
  if (n_samples < 2) throw DomainError("sphere_curve needs at least 2 samples");
  std::vector<SpherePoint> pts(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double chi = i + 1 == n_samples
                           ? pf.chi_f()
                           : pf.chi_f() * static_cast<double>(i) / static_cast<double>(n_samples - 1);
    pts[i] = {chi / 2.0, pf.eval_unchecked(chi).value / 2.0};
  }
  return pts;
}

double sphere_curve_length(const std::vector<SpherePoint>& points) {
  auto embed = [](const SpherePoint& p) {
    const double th = 4.0 * p.polar, ph = 4.0 * p.azimuth;
    return std::array<double, 3>{0.5 * std::sin(th) * std::cos(ph), 0.5 * std::sin(th) * std::sin(ph),
                                 0.5 * std::cos(th)};
  };
  double len = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    const auto a = embed(points[i - 1]), b = embed(points[i]);
    len += std::hypot(a[0] - b[0], a[1] - b[1], a[2] - b[2]);
  }
  return len;
}

void write_pulse_csv(std::ostream& out, const Pulse& pulse, const UnitScale& units) {
  const double b = units.beta0;
  out << std::setprecision(17);
  out << "# beta0=" << pulse.beta0 * b << '\n';
  out << "# t_f=" << pulse.t_f / b << '\n';
  out << "# duration=" << pulse.duration() / b << '\n';
  out << "# antisymmetric=" << (pulse.antisymmetric ? 1 : 0) << '\n';
  out << "t,omega\n";
  for (const auto& s : pulse.waveform()) out << s.t / b << ',' << s.omega * b << '\n';
}

Pulse read_pulse_csv(std::istream& in) {
  Pulse p;
  double beta0 = 1.0;
  std::string line;
  std::vector<PulseSample> rows;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = line.substr(1, eq - 1);
      key.erase(0, key.find_first_not_of(' '));
      const std::string val = line.substr(eq + 1);
      try {
        if (key == "beta0") beta0 = std::stod(val);
        else if (key == "antisymmetric") p.antisymmetric = std::stoi(val) != 0;
      } catch (const std::exception&) {
        throw ValidationError("bad pulse CSV header: " + line);
      }
      continue;
    }
    if (!header_seen && line.rfind("t,", 0) == 0) {
      header_seen = true;
      continue;
    }
    std::istringstream ss(line);
    PulseSample s;
    char comma = 0;
    if (!(ss >> s.t >> comma >> s.omega) || comma != ',')
      throw ValidationError("bad pulse CSV row: " + line);
    rows.push_back(s);
  }
  if (!(beta0 > 0.0)) throw ValidationError("pulse CSV beta0 must be positive");
  if (rows.size() < 4) throw ValidationError("pulse CSV has too few samples");
  for (auto& s : rows) {
    s.t *= beta0;
    s.omega /= beta0;
  }
  for (const auto& s : rows)
    if (!p.antisymmetric || s.t >= 0.0) p.samples.push_back(s);
  p.t_f = p.samples.back().t;
  return p;
}

void write_sphere_csv(std::ostream& out, const std::vector<SpherePoint>& points) {
  out << std::setprecision(17) << "polar,azimuth\n";
  for (const auto& p : points) out << p.polar << ',' << p.azimuth << '\n';
}

}  // namespace smoothgate
