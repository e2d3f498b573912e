#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "smoothgate/dynamics.hpp"
#include "smoothgate/noise_constraints.hpp"
#include "smoothgate/pulse_synthesis.hpp"

namespace smoothgate {

/// Gate infidelity 1/2 − (1/12) Σⱼ Tr{V σⱼ V† U σⱼ U†}, evaluated as
/// (2/3)|w|² with V†U = ±(w₀ − i w·σ). Both inputs must satisfy the norm
/// invariant to 1e-8. Result lies in [0, 1].
double infidelity(const EvolutionOperator& u, const EvolutionOperator& target);

/// w of V†U = ±(w₀ − i w·σ), sign fixed by w₀ ≥ 0.
std::array<double, 3> error_vector(const EvolutionOperator& u, const EvolutionOperator& target);

/// |dw/dδ| at δ = 0 by central difference with step h, where
/// w(δ) = error_vector(evolve(δ), evolve(0)).
double first_order_sensitivity(const std::function<EvolutionOperator(double)>& evolve,
                               double h = 1e-4);

/// Central difference of infidelity(evolve(δ), evolve(0)) at δ = 0.
double infidelity_derivative(const std::function<EvolutionOperator(double)>& evolve,
                             double h = 1e-4);

/// U = R(0; t_c) R(β₀; τ) R(0; t_b) R(β₀; τ) R(0; t_a),
/// R(Ω; t) = exp[−i t (Ω σz + β σx)], τ = π/(2√2 β₀).
struct SquareSequence {
  double t_a = 0.0;
  double t_b = 0.0;
  double t_c = 0.0;
  double tau = 0.0;
  double beta0 = 1.0;

  /// Noisy product: β → β₀ + δβ in every segment; δε scales the driven
  /// segments (Amplitude) or adds to Ω everywhere (Additive).
  EvolutionOperator evolve(const NoiseRealization& noise = {},
                           GModel g_model = GModel::Amplitude) const;
  double duration() const noexcept { return t_a + t_b + t_c + 2.0 * tau; }
};

/// Closed-form decomposition of the target into the five-factor sequence.
/// Branch rule: β₀t_b ∈ [π/2, π); every duration folded into [0, π/β₀).
/// Throws NoDecomposition when no branch reconstructs the target to 1e-8.
SquareSequence square_baseline(const EvolutionOperator& target, double beta0 = 1.0);
SquareSequence square_baseline(const TargetRotation& target, double beta0 = 1.0);

struct PowerLaw {
  double coefficient = 0.0;
  double exponent = 0.0;
};

/// Least squares of log y = log c + p log x. Throws DomainError for
/// nonpositive data, mismatched lengths or fewer than 3 points.
PowerLaw fit_power_law(const std::vector<double>& xs, const std::vector<double>& ys);

/// 20 log-spaced points over [1e-3, 1e-1].
std::vector<double> default_sweep_grid(std::size_t points = 20, double lo = 1e-3, double hi = 1e-1);

struct FitWindow {
  double lo = 1e-3;
  double hi = 3e-2;
};

struct SweepResult {
  std::vector<double> noise_values;
  std::vector<double> infidelities;
  PowerLaw fit{};
  bool fit_valid = false;
  /// Half-open index range [fit_begin, fit_end) used for the fit.
  std::size_t fit_begin = 0;
  std::size_t fit_end = 0;
  /// Per-point failure messages (empty when the point succeeded).
  std::vector<std::string> errors;
};

/// Evaluates infidelity(evolve(x), evolve(0)) for each x and fits the window.
/// Points run in parallel; failures are recorded per point.
SweepResult noise_sweep(const std::function<EvolutionOperator(double)>& evolve,
                        const std::vector<double>& grid, const FitWindow& window = {},
                        std::size_t workers = 1);

/// Sweep of a synthesized pulse; x is δβ/β₀ or δε (Amplitude) / δε/β₀.
SweepResult noise_sweep(const Pulse& pulse, const NoiseSpec& noise, const std::vector<double>& grid,
                        const FitWindow& window = {}, std::size_t workers = 1);

SweepResult noise_sweep(const SquareSequence& seq, const NoiseSpec& noise,
                        const std::vector<double>& grid, const FitWindow& window = {},
                        std::size_t workers = 1);

/// Refits an existing sweep over a different window.
void refit(SweepResult& sweep, const FitWindow& window);

void write_sweep_csv(std::ostream& out, const SweepResult& sweep);
nlohmann::json to_json(const SweepResult& sweep);

}  // namespace smoothgate
