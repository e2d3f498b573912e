#pragma once

#include <complex>
#include <cstddef>
#include <optional>

#include <Eigen/Core>

#include "json.hpp"
#include "smoothgate/noise_constraints.hpp"
#include "smoothgate/numerics/ode.hpp"
#include "smoothgate/phase_ansatz.hpp"
#include "smoothgate/pulse_synthesis.hpp"

namespace smoothgate {

/// SU(2) element [[u11, −u21*], [u21, u11*]].
struct EvolutionOperator {
  std::complex<double> u11{1.0, 0.0};
  std::complex<double> u21{0.0, 0.0};

  static EvolutionOperator identity() { return {}; }
  /// Projects a 2×2 unitary onto SU(2) by dividing out √det. Throws
  /// ValidationError if the input is not unitary within `tol`.
  static EvolutionOperator from_matrix(const Eigen::Matrix2cd& m, double tol = 1e-8);

  Eigen::Matrix2cd matrix() const;
  /// | |u11|² + |u21|² − 1 |
  double unitarity_residual() const noexcept;
  /// Throws ValidationError when the norm invariant fails by more than `tol`.
  void validate(double tol = 1e-10) const;
  EvolutionOperator adjoint() const noexcept { return {std::conj(u11), -u21}; }
};

EvolutionOperator operator*(const EvolutionOperator& a, const EvolutionOperator& b) noexcept;

/// R(θ, φ) = cos(φ/2) I − i sin(φ/2)(sinθ σy + cosθ σx).
EvolutionOperator rotation(const TargetRotation& r) noexcept;

/// exp(−i a σx) and exp(−i a σz).
EvolutionOperator x_rotation(double a) noexcept;
EvolutionOperator z_rotation(double a) noexcept;

/// Quasi-static noise: β = β₀ + δβ, Ω = Ω₀ + g δε.
struct NoiseRealization {
  double delta_beta = 0.0;
  double delta_epsilon = 0.0;
};

/// Noiseless U(tᵢ) from the χ formalism: u11 = cosχ e^{iξ₋}, u21 = −i sinχ e^{iξ₊},
/// ξ± = Φ ± ψ/2 ∓ π/4, ψ = atan2(1, Φ' sin 2χ).
EvolutionOperator analytic_evolution(const PhaseFunction& pf, const ChiTrajectory& trajectory,
                                     std::size_t t_index);

/// Same, directly at a value of χ.
EvolutionOperator analytic_evolution_at(const PhaseFunction& pf, double chi);

struct PropagationOptions {
  numerics::StepControl control{};
  /// Propagate only the stored half [0, t_f] even for antisymmetric pulses.
  bool half = false;
  /// Stop early at this time (inside the propagated span).
  std::optional<double> t_end;
  std::size_t renormalize_every = 1000;
  double renormalize_threshold = 1e-12;
};

struct PropagationReport {
  EvolutionOperator u;
  std::size_t steps = 0;
  std::size_t renormalizations = 0;
  double max_drift = 0.0;
};

/// Integrates iU̇ = {[Ω₀(t) + δε g(t)]σz + (β₀ + δβ)σx}U over the pulse with
/// the Fehlberg 7(8) pair. Ω₀(t) is a cubic B-spline through the samples.
PropagationReport propagate_report(const Pulse& pulse, const NoiseRealization& noise,
                                   const NoiseSpec& g_model = NoiseSpec::epsilon(),
                                   const PropagationOptions& opt = {});

EvolutionOperator propagate(const Pulse& pulse, const NoiseRealization& noise = {},
                            const NoiseSpec& g_model = NoiseSpec::epsilon(),
                            const PropagationOptions& opt = {});

/// U σz U† σz.
EvolutionOperator compose_antisymmetric(const EvolutionOperator& half) noexcept;

/// β = (ω − E)/2.
constexpr double rotating_frame_beta(double e, double omega) noexcept { return (omega - e) / 2.0; }

nlohmann::json to_json(const EvolutionOperator& u);
EvolutionOperator evolution_from_json(const nlohmann::json& j);

}  // namespace smoothgate
