#pragma once

// Phase functions Φ(χ): the single object from which the drive, the
// trajectory, the evolution operator and the noise residuals all derive.

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace smoothgate {

enum class Family {
  PolySin3,      ///< a1 χ² + a2 χ³ + a3 sin³(πχ/χf) + a4 sin³(2πχ/χf)
  Sin2Sin3,      ///< a1 sin²(a2 χ) + a3 sin³(πχ/χf) + a4 sin³(2πχ/χf)
  Sin2Mixed,     ///< a1 sin²(a2 χ) + a3 sin³(N3 πχ/χf) + a4 sin³(π(1-χ/χf)) + a5 sin³(πχ(χf-χ))
  AnalyticBeta,  ///< [θ + λ ζ(θ)]/n with θ = 4χ - sin 4χ, χf = nπ/4
  Zero,
};

std::string_view to_string(Family f);
Family family_from_string(std::string_view name);

/// Number of coefficients a family carries; AnalyticBeta is variable (the ζ
/// sine coefficients) and reports 0.
std::size_t coefficient_count(Family f);

/// Periodic ζ(ϑ) with period nπ/2, stored as a finite sine series
/// ζ(ϑ) = Σ_k c_k sin(4kϑ/n), k = 1, 2, ...
class ZetaFunction {
 public:
  ZetaFunction() = default;
  ZetaFunction(int n, std::vector<double> sine_coefficients);

  int n() const noexcept { return n_; }
  std::span<const double> coefficients() const noexcept { return c_; }
  double period() const noexcept;
  bool is_constant() const noexcept;

  double value(double v) const noexcept;
  double d1(double v) const noexcept;
  double d2(double v) const noexcept;

 private:
  int n_ = 1;
  std::vector<double> c_;
};

/// Family-specific extras. `n3` is used by Sin2Mixed; `n` and `lambda` by
/// AnalyticBeta (whose ζ coefficients live in the coefficient list).
struct PhaseAux {
  int n3 = 1;
  int n = 1;
  double lambda = 0.0;

  bool operator==(const PhaseAux&) const = default;
};

struct PhaseValue {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

class PhaseFunction {
 public:
  /// Validates: chi_f > 0, finite coefficients, the family's coefficient count,
  /// and for AnalyticBeta chi_f = nπ/4.
  PhaseFunction(Family family, std::vector<double> coefficients, double chi_f, PhaseAux aux = {});

  static PhaseFunction zero(double chi_f);

  Family family() const noexcept { return family_; }
  std::span<const double> coefficients() const noexcept { return coefficients_; }
  double chi_f() const noexcept { return chi_f_; }
  const PhaseAux& aux() const noexcept { return aux_; }

  /// Φ, Φ', Φ'' in closed form. Throws DomainError outside [0, chi_f].
  PhaseValue eval(double chi) const;

  /// Same closed form without the range check; the ansatz formulas extend
  /// smoothly past both ends, which integrators rely on for trial stages.
  PhaseValue eval_unchecked(double chi) const noexcept;

  /// Copy with a replaced coefficient list (re-validated).
  PhaseFunction with_coefficients(std::vector<double> coefficients) const;

  ZetaFunction zeta() const;

  bool operator==(const PhaseFunction&) const = default;

 private:
  Family family_;
  std::vector<double> coefficients_;
  double chi_f_;
  PhaseAux aux_;
};

/// Free-function form of PhaseFunction::eval.
PhaseValue eval_phase(const PhaseFunction& pf, double chi);

/// Rotation by angle `phi` about the xy-plane axis at angle `theta` from x:
/// R(θ, φ) = exp[-i (sinθ σy + cosθ σx) φ/2].
struct TargetRotation {
  double theta = 0.0;
  double phi = 0.0;

  TargetRotation() = default;
  TargetRotation(double theta, double phi);
};

struct EndpointSpec {
  double chi_f = 0.0;
  double dphi_f = 0.0;
  /// Required Φ''(χf) for general (non-antisymmetric) pulses.
  std::optional<double> d2phi_f;
};

/// Endpoint data tying Φ to a target. χf = φ/4 and Φ'(χf) = -tanθ csc(φ/2);
/// the sign is the one for which the propagated antisymmetric pulse realises
/// R(θ, φ). Throws UnrepresentableTarget when sin(φ/2) = 0 with tanθ ≠ 0, or
/// when θ sits on the y axis.
EndpointSpec endpoint_conditions(const TargetRotation& target, bool antisymmetric);

/// Φ''(χf) that makes the numerator of Ω(χ) vanish at χf (finite-duration
/// condition for general pulses).
double required_second_derivative(double chi_f, double dphi_f);

/// Φ = [θ + λζ(θ)]/n, θ = 4χ - sin 4χ, χf = nπ/4, with λ from
/// λ⁻¹ = (2/(3πn)) ∫₀^{nπ} sinθ ζ(θ - sinθ) dθ (λ = 0 when ζ ≡ 0).
/// Throws DegenerateZeta when that integral is below 1e-12 for non-constant ζ.
PhaseFunction analytic_beta_family(int n, const ZetaFunction& zeta);

/// AnalyticBeta member realising an antisymmetric target with φ = nπ. When the
/// ζ ≡ 0 pulse already has the right axis it is returned; otherwise a two-term
/// ζ is chosen so that λζ'(nπ) meets the endpoint slope.
PhaseFunction analytic_beta_for_target(const TargetRotation& target);

/// Sets the endpoint-determined coefficient (a1 for the polynomial and sin²
/// families) so that Φ'(χf) equals `dphi_f`. Other families are returned as is.
/// Throws DomainError when the remaining coefficients make a1 indeterminate.
PhaseFunction fit_endpoint_slope(const PhaseFunction& pf, double dphi_f);

}  // namespace smoothgate
