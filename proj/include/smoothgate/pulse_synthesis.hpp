#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

#include "smoothgate/phase_ansatz.hpp"

namespace smoothgate {

/// χ₀(t) on a uniform grid over [0, t_f], β₀ = 1.
struct ChiTrajectory {
  std::vector<double> times;
  std::vector<double> chi;
  std::vector<double> chidot;
  /// |χ(t_f) − χ_f| of the integrated solution before the last sample is
  /// pinned to χ_f.
  double end_mismatch = 0.0;

  std::size_t size() const noexcept { return times.size(); }
  double t_f() const noexcept { return times.empty() ? 0.0 : times.back(); }
};

struct PulseSample {
  double t = 0.0;
  double omega = 0.0;
};

struct Pulse {
  double beta0 = 1.0;
  /// Samples over [0, t_f]; antisymmetric pulses store only this half.
  std::vector<PulseSample> samples;
  /// χ₀(tᵢ) for each sample, when known (empty for imported waveforms).
  std::vector<double> chi;
  double t_f = 0.0;
  bool antisymmetric = false;
  std::optional<PhaseFunction> source;

  /// The physical waveform: [−t_f, t_f] with Ω(−t) = −Ω(t) for
  /// antisymmetric pulses, otherwise [0, t_f].
  std::vector<PulseSample> waveform() const;
  double duration() const noexcept { return antisymmetric ? 2.0 * t_f : t_f; }
  double max_abs_omega() const noexcept;
};

/// βt(χ) = ∫₀^χ √(1+Φ'² sin² 2χ) dχ, absolute tolerance 1e-12.
double arc_length(const PhaseFunction& pf, double chi);

/// √(1+Φ'(χ)² sin² 2χ) = β/χ̇.
double speed_factor(const PhaseFunction& pf, double chi) noexcept;

/// Integrates dχ/dt = 1/√(1+Φ'² sin² 2χ) onto a uniform grid of n_samples
/// points over [0, t_f], t_f = arc_length(χ_f).
ChiTrajectory invert_chi(const PhaseFunction& pf, std::size_t n_samples);

/// Ω(χ)/β₀ = −[Φ'' s + 4Φ' c + 2Φ'³ s² c] / (2(1+Φ'² s²)^{3/2}), s = sin 2χ,
/// c = cos 2χ.
double omega_of_chi(const PhaseFunction& pf, double chi);

/// Same formula without the range check.
double omega_unchecked(const PhaseFunction& pf, double chi) noexcept;

/// Threshold on |Ω(χ_f)|/β₀ above which a general pulse is rejected.
inline constexpr double kEndpointDivergence = 1e6;

Pulse synthesize(const PhaseFunction& pf, std::size_t n_samples, bool antisymmetric);

struct SpherePoint {
  double polar = 0.0;
  double azimuth = 0.0;
};

/// Points (χ/2, Φ(χ)/2), uniform in χ over [0, χ_f].
std::vector<SpherePoint> sphere_curve(const PhaseFunction& pf, std::size_t n_samples);

/// Polyline length of a sphere_curve under ds² = dχ² + sin²(2χ) dΦ², measured
/// as chords on the radius-1/2 sphere with polar angle 2χ and azimuth 2Φ.
double sphere_curve_length(const std::vector<SpherePoint>& points);

/// Physical-unit scaling for export: t → t/β₀[MHz] in µs, Ω → Ω·β₀[MHz].
struct UnitScale {
  double beta0 = 1.0;
};

/// Writes the header comments and `t,omega` rows of pulse.waveform().
void write_pulse_csv(std::ostream& out, const Pulse& pulse, const UnitScale& units = {});

/// Reads a waveform written by write_pulse_csv back into dimensionless form
/// (β₀ = 1). For antisymmetric files only the t ≥ 0 half is kept.
Pulse read_pulse_csv(std::istream& in);

void write_sphere_csv(std::ostream& out, const std::vector<SpherePoint>& points);

}  // namespace smoothgate
