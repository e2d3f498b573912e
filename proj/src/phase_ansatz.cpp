#include "smoothgate/phase_ansatz.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

#include "smoothgate/errors.hpp"
#include "smoothgate/numerics/quadrature.hpp"

namespace smoothgate {

namespace {

constexpr double kPi = std::numbers::pi;

// Accumulates c·sin³(u(χ)) into `out`, given u, u', u''.
void add_sin3(PhaseValue& out, double c, double u, double du, double ddu) {
  if (c == 0.0) return;
  const double s = std::sin(u), co = std::cos(u);
  out.value += c * s * s * s;
  out.d1 += c * 3.0 * s * s * co * du;
  out.d2 += c * ((6.0 * s * co * co - 3.0 * s * s * s) * du * du + 3.0 * s * s * co * ddu);
}

void add_sin2(PhaseValue& out, double a1, double a2, double chi) {
  const double s = std::sin(a2 * chi);
  out.value += a1 * s * s;
  out.d1 += a1 * a2 * std::sin(2.0 * a2 * chi);
  out.d2 += 2.0 * a1 * a2 * a2 * std::cos(2.0 * a2 * chi);
}

double lambda_integral(int n, const ZetaFunction& zeta) {
  auto f = [&](double t) { return std::sin(t) * zeta.value(t - std::sin(t)); };
  numerics::QuadratureOptions opt;
  opt.abs_tol = 1e-14;
  return numerics::integrate(f, 0.0, n * kPi, opt).value;
}

}  // namespace

std::string_view to_string(Family f) {
  switch (f) {
    case Family::PolySin3: return "poly-sin3";
    case Family::Sin2Sin3: return "sin2sin3";
    case Family::Sin2Mixed: return "sin2-mixed";
    case Family::AnalyticBeta: return "analytic-beta";
    case Family::Zero: return "zero";
  }
  return "unknown";
}

Family family_from_string(std::string_view name) {
  for (auto f : {Family::PolySin3, Family::Sin2Sin3, Family::Sin2Mixed, Family::AnalyticBeta,
                 Family::Zero})
    if (to_string(f) == name) return f;
  throw ValidationError("unknown ansatz family '" + std::string(name) + "'");
}

std::size_t coefficient_count(Family f) {
  switch (f) {
    case Family::PolySin3:
    case Family::Sin2Sin3: return 4;
    case Family::Sin2Mixed: return 5;
    case Family::AnalyticBeta:
    case Family::Zero: return 0;
  }
  return 0;
}

// ---------------------------------------------------------------------------

ZetaFunction::ZetaFunction(int n, std::vector<double> sine_coefficients)
    : n_(n), c_(std::move(sine_coefficients)) {
  if (n_ < 1) throw DomainError("zeta period index n must be >= 1");
  for (double c : c_)
    if (!std::isfinite(c)) throw DomainError("zeta coefficients must be finite");
}

double ZetaFunction::period() const noexcept { return n_ * kPi / 2.0; }

bool ZetaFunction::is_constant() const noexcept {
  for (double c : c_)
    if (c != 0.0) return false;
  return true;
}

double ZetaFunction::value(double v) const noexcept {
  double s = 0.0;
  for (std::size_t k = 0; k < c_.size(); ++k) s += c_[k] * std::sin(4.0 * (k + 1) * v / n_);
  return s;
}

double ZetaFunction::d1(double v) const noexcept {
  double s = 0.0;
  for (std::size_t k = 0; k < c_.size(); ++k) {
    const double w = 4.0 * (k + 1) / n_;
    s += c_[k] * w * std::cos(w * v);
  }
  return s;
}

double ZetaFunction::d2(double v) const noexcept {
  double s = 0.0;
  for (std::size_t k = 0; k < c_.size(); ++k) {
    const double w = 4.0 * (k + 1) / n_;
    s -= c_[k] * w * w * std::sin(w * v);
  }
  return s;
}

// ---------------------------------------------------------------------------

PhaseFunction::PhaseFunction(Family family, std::vector<double> coefficients, double chi_f,
                             PhaseAux aux)
    : family_(family), coefficients_(std::move(coefficients)), chi_f_(chi_f), aux_(aux) {
  if (!(chi_f_ > 0.0) || !std::isfinite(chi_f_)) throw DomainError("chi_f must be positive");
  for (double c : coefficients_)
    if (!std::isfinite(c)) throw DomainError("coefficients must be finite");
  const std::size_t want = coefficient_count(family_);
  if (family_ != Family::AnalyticBeta && coefficients_.size() != want)
    throw ValidationError(std::string(to_string(family_)) + " expects " + std::to_string(want) +
                          " coefficients, got " + std::to_string(coefficients_.size()));
  if (family_ == Family::Sin2Mixed && aux_.n3 < 1) throw DomainError("N3 must be >= 1");
  if (family_ == Family::AnalyticBeta) {
    if (aux_.n < 1) throw DomainError("analytic-beta n must be >= 1");
    if (std::abs(chi_f_ - aux_.n * kPi / 4.0) > 1e-12)
      throw DomainError("analytic-beta requires chi_f = n*pi/4");
    if (!std::isfinite(aux_.lambda)) throw DomainError("lambda must be finite");
  }
}

PhaseFunction PhaseFunction::zero(double chi_f) { return {Family::Zero, {}, chi_f}; }

PhaseValue PhaseFunction::eval(double chi) const {
  if (!(chi >= 0.0 && chi <= chi_f_))
    throw DomainError("chi=" + std::to_string(chi) + " outside [0, chi_f]");
  return eval_unchecked(chi);
}

PhaseValue PhaseFunction::eval_unchecked(double chi) const noexcept {
  PhaseValue out;
  const auto& a = coefficients_;
  switch (family_) {
    case Family::Zero: break;
    case Family::PolySin3: {
      out.value = a[0] * chi * chi + a[1] * chi * chi * chi;
      out.d1 = 2.0 * a[0] * chi + 3.0 * a[1] * chi * chi;
      out.d2 = 2.0 * a[0] + 6.0 * a[1] * chi;
      const double k = kPi / chi_f_;
      add_sin3(out, a[2], k * chi, k, 0.0);
      add_sin3(out, a[3], 2.0 * k * chi, 2.0 * k, 0.0);
      break;
    }
    case Family::Sin2Sin3: {
      add_sin2(out, a[0], a[1], chi);
      const double k = kPi / chi_f_;
      add_sin3(out, a[2], k * chi, k, 0.0);
      add_sin3(out, a[3], 2.0 * k * chi, 2.0 * k, 0.0);
      break;
    }
    case Family::Sin2Mixed: {
      add_sin2(out, a[0], a[1], chi);
      const double k = aux_.n3 * kPi / chi_f_;
      add_sin3(out, a[2], k * chi, k, 0.0);
      add_sin3(out, a[3], kPi * (1.0 - chi / chi_f_), -kPi / chi_f_, 0.0);
      add_sin3(out, a[4], kPi * chi * (chi_f_ - chi), kPi * (chi_f_ - 2.0 * chi), -2.0 * kPi);
      break;
    }
    case Family::AnalyticBeta: {
      const double n = aux_.n;
      const double th = 4.0 * chi - std::sin(4.0 * chi);
      const double dth = 4.0 - 4.0 * std::cos(4.0 * chi);
      const double d2th = 16.0 * std::sin(4.0 * chi);
      double z = 0.0, dz = 0.0, d2z = 0.0;
      for (std::size_t k = 0; k < a.size(); ++k) {
        const double w = 4.0 * static_cast<double>(k + 1) / n;
        const double s = std::sin(w * th), c = std::cos(w * th);
        z += a[k] * s;
        dz += a[k] * w * c;
        d2z -= a[k] * w * w * s;
      }
      const double lam = aux_.lambda;
      out.value = (th + lam * z) / n;
      out.d1 = dth * (1.0 + lam * dz) / n;
      out.d2 = (d2th * (1.0 + lam * dz) + dth * dth * lam * d2z) / n;
      break;
    }
  }
  return out;
}

PhaseFunction PhaseFunction::with_coefficients(std::vector<double> coefficients) const {
  return {family_, std::move(coefficients), chi_f_, aux_};
}

ZetaFunction PhaseFunction::zeta() const {
  if (family_ != Family::AnalyticBeta) return {};
  return {aux_.n, coefficients_};
}

PhaseValue eval_phase(const PhaseFunction& pf, double chi) { return pf.eval(chi); }

// ---------------------------------------------------------------------------

TargetRotation::TargetRotation(double theta_, double phi_) : theta(theta_), phi(phi_) {
  if (!(phi > 0.0) || !std::isfinite(phi) || !std::isfinite(theta))
    throw DomainError("target rotation angle must be positive and finite");
}

EndpointSpec endpoint_conditions(const TargetRotation& target, bool antisymmetric) {
  if (!(target.phi > 0.0)) throw DomainError("target rotation angle must be positive");
  const double c = std::cos(target.theta);
  if (std::abs(c) < 1e-14)
    throw UnrepresentableTarget("rotation axis along y is not reachable (tan theta infinite)");
  const double tan_theta = std::tan(target.theta);
  const double s = std::sin(target.phi / 2.0);
  EndpointSpec spec;
  spec.chi_f = target.phi / 4.0;
  if (std::abs(s) < 1e-12) {
    if (std::abs(tan_theta) > 1e-12)
      throw UnrepresentableTarget("sin(phi/2) = 0 with tan(theta) != 0: csc singular");
    spec.dphi_f = 0.0;
  } else {
    spec.dphi_f = -tan_theta / s;
  }
  if (!antisymmetric) spec.d2phi_f = required_second_derivative(spec.chi_f, spec.dphi_f);
  return spec;
}

double required_second_derivative(double chi_f, double dphi_f) {
  if (dphi_f == 0.0) return 0.0;
  const double s = std::sin(2.0 * chi_f), c = std::cos(2.0 * chi_f);
  if (std::abs(s) < 1e-15)
    throw UnrepresentableTarget("finite-duration condition singular at sin(2 chi_f) = 0");
  return -4.0 * dphi_f * c / s - 2.0 * dphi_f * dphi_f * dphi_f * s * c;
}

PhaseFunction analytic_beta_family(int n, const ZetaFunction& zeta) {
  if (n < 1) throw DomainError("analytic-beta n must be >= 1");
  if (zeta.n() != n) throw DomainError("zeta period must be n*pi/2 for the same n");
  PhaseAux aux;
  aux.n = n;
  std::vector<double> coeffs(zeta.coefficients().begin(), zeta.coefficients().end());
  if (!zeta.is_constant()) {
    const double integral = lambda_integral(n, zeta);
    if (std::abs(integral) < 1e-12)
      throw DegenerateZeta("lambda integral vanishes for this zeta (|I| < 1e-12)");
    aux.lambda = 3.0 * kPi * n / (2.0 * integral);
  }
  return {Family::AnalyticBeta, std::move(coeffs), n * kPi / 4.0, aux};
}

PhaseFunction analytic_beta_for_target(const TargetRotation& target) {
  const double ratio = target.phi / kPi;
  const int n = static_cast<int>(std::lround(ratio));
  if (n < 1 || std::abs(ratio - n) > 1e-6)
    throw DomainError("analytic-beta family only reaches rotation angles n*pi");
  const auto spec = endpoint_conditions(TargetRotation(target.theta, n * kPi), true);
  const double s = std::sin(n * kPi / 2.0);
  const double base = 8.0 * s * s / n;  // Φ'(χf) of the ζ ≡ 0 member
  if (std::abs(spec.dphi_f - base) <= 1e-12 * std::max(1.0, std::abs(base)))
    return analytic_beta_family(n, ZetaFunction(n, {}));
  if (base == 0.0)
    throw UnrepresentableTarget("even n fixes Phi'(chi_f) = 0; target axis not reachable");
  // λζ'(nπ) must equal kappa; with ζ = c1 sin(4ϑ/n) + c2 sin(8ϑ/n) this is
  // linear in (c1, c2) once λ = 3πn / (2(c1 I1 + c2 I2)) is substituted.
  const double kappa = spec.dphi_f / base - 1.0;
  const double i1 = lambda_integral(n, ZetaFunction(n, {1.0}));
  const double i2 = lambda_integral(n, ZetaFunction(n, {0.0, 1.0}));
  double c1 = 12.0 * kPi - kappa * i2;
  double c2 = -(6.0 * kPi - kappa * i1);
  const double scale = std::max(std::abs(c1), std::abs(c2));
  if (scale < 1e-12) throw UnrepresentableTarget("no two-term zeta reaches this endpoint slope");
  c1 /= scale;
  c2 /= scale;
  return analytic_beta_family(n, ZetaFunction(n, {c1, c2}));
}

PhaseFunction fit_endpoint_slope(const PhaseFunction& pf, double dphi_f) {
  std::vector<double> a(pf.coefficients().begin(), pf.coefficients().end());
  const double xf = pf.chi_f();
  switch (pf.family()) {
    case Family::PolySin3:
      // sin³ terms have zero slope at χf.
      a[0] = (dphi_f - 3.0 * a[1] * xf * xf) / (2.0 * xf);
      return pf.with_coefficients(std::move(a));
    case Family::Sin2Sin3:
    case Family::Sin2Mixed: {
      const double unit = a[1] * std::sin(2.0 * a[1] * xf);
      if (std::abs(unit) < 1e-9)
        throw DomainError("a2 makes the endpoint slope independent of a1");
      a[0] = dphi_f / unit;
      return pf.with_coefficients(std::move(a));
    }
    case Family::AnalyticBeta:
    case Family::Zero: return pf;
  }
  return pf;
}

}  // namespace smoothgate
