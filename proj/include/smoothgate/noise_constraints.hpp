#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "smoothgate/phase_ansatz.hpp"
#include "smoothgate/pulse_synthesis.hpp"

namespace smoothgate {

enum class NoiseKind { Beta, Epsilon };

/// How δε enters the drive: g̃(χ) = Ω(χ), g̃ = 1, or a tabulated g̃(χ).
enum class GModel { Amplitude, Additive, Custom };

std::string_view to_string(NoiseKind k);
std::string_view to_string(GModel g);
NoiseKind noise_kind_from_string(std::string_view s);
GModel g_model_from_string(std::string_view s);

/// Tabulated g̃(χ) with monotone cubic (PCHIP) interpolation. Needs ≥ 4
/// strictly increasing abscissae.
class GTable {
 public:
  GTable(std::vector<double> chi, std::vector<double> g);
  double operator()(double chi) const;
  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }

 private:
  std::shared_ptr<const std::function<double(double)>> f_;
  double lo_ = 0.0, hi_ = 0.0;
};

struct NoiseSpec {
  NoiseKind kind = NoiseKind::Epsilon;
  GModel g_model = GModel::Amplitude;
  std::optional<GTable> table;

  static NoiseSpec beta() { return {NoiseKind::Beta, GModel::Amplitude, std::nullopt}; }
  static NoiseSpec epsilon(GModel g = GModel::Amplitude) { return {NoiseKind::Epsilon, g, std::nullopt}; }
  static NoiseSpec custom(GTable t) { return {NoiseKind::Epsilon, GModel::Custom, std::move(t)}; }
};

/// g̃(χ) for the given noise model. Throws ValidationError for Custom without
/// a table or a table not covering [0, χ_f].
double g_tilde(const PhaseFunction& pf, const NoiseSpec& noise, double chi);

struct ConstraintResidual {
  std::complex<double> primary{};
  double secondary = 0.0;
  bool has_secondary = false;
  double primary_error = 0.0;
  double secondary_error = 0.0;

  double magnitude() const noexcept { return std::abs(primary); }
};

inline constexpr double kResidualTolerance = 1e-10;

/// primary = sin 4χ_f + 8 e^{−2iΦ(χ_f)} ∫₀^{χ_f} sin²2χ e^{2iΦ} dχ;
/// secondary = ∫₀^{χ_f} Φ' sin²2χ dχ (general pulses only).
ConstraintResidual residual_beta(const PhaseFunction& pf, bool antisymmetric,
                                 double tol = kResidualTolerance);

/// primary = ∫₀^{χ_f} sin2χ √(1+Φ'²sin²2χ) g̃ e^{2iΦ} dχ;
/// secondary = ∫₀^{χ_f} cos2χ g̃ √(1+Φ'²sin²2χ) dχ (general pulses only).
ConstraintResidual residual_epsilon(const PhaseFunction& pf, const NoiseSpec& noise,
                                    bool antisymmetric, double tol = kResidualTolerance);

/// Dispatches on noise.kind.
ConstraintResidual residual(const PhaseFunction& pf, const NoiseSpec& noise, bool antisymmetric,
                            double tol = kResidualTolerance);

/// ∂χ/∂β along the trajectory:
/// 2{sin 4χ₀/8 + Re[e^{−2iΦ(χ₀)} ∫₀^{χ₀} sin²2χ e^{2iΦ} dχ]}.
std::vector<double> delta_chi_beta(const PhaseFunction& pf, const ChiTrajectory& trajectory);

/// ∂χ/∂ε along the trajectory:
/// −Im[e^{−2iΦ(χ₀)} ∫₀^{χ₀} sin2χ g̃ √(1+Φ'²sin²2χ) e^{2iΦ} dχ].
std::vector<double> delta_chi_epsilon(const PhaseFunction& pf, const ChiTrajectory& trajectory,
                                      const NoiseSpec& noise);

struct PotentialAxis {
  std::size_t index = 0;  ///< coefficient index being scanned
  double lo = 0.0;
  double hi = 0.0;
  std::size_t points = 2;

  double value(std::size_t k) const noexcept;
};

struct PotentialGrid {
  PotentialAxis axis1, axis2;
  /// |primary| in row-major order: values[i * axis2.points + j] at
  /// (axis1.value(i), axis2.value(j)). Failed cells hold NaN.
  std::vector<double> values;
  /// Per-cell error message, empty when the cell succeeded.
  std::vector<std::string> errors;

  double at(std::size_t i, std::size_t j) const { return values[i * axis2.points + j]; }
  std::size_t failed_cells() const noexcept;

  struct Minimum {
    std::size_t i, j;
    double p1, p2, value;
  };
  /// Interior cells strictly below all 8 neighbours, ascending by value.
  std::vector<Minimum> local_minima() const;
};

PotentialGrid error_potential(const PhaseFunction& pf_template, const NoiseSpec& noise,
                              bool antisymmetric, const PotentialAxis& axis1,
                              const PotentialAxis& axis2, std::size_t workers = 1);

void write_potential_csv(std::ostream& out, const PotentialGrid& grid);

}  // namespace smoothgate
