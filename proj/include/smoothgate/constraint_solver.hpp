#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "smoothgate/dynamics.hpp"
#include "smoothgate/noise_constraints.hpp"
#include "smoothgate/phase_ansatz.hpp"

namespace smoothgate {

struct SolveRequest {
  TargetRotation target;
  Family family = Family::Sin2Sin3;
  /// Template coefficients; entries outside free_indices stay fixed except
  /// the endpoint-determined a1, which is refit to the target every time.
  std::vector<double> base_coefficients;
  PhaseAux aux{};
  std::vector<std::size_t> free_indices;
  std::vector<NoiseKind> noise_kinds{NoiseKind::Epsilon};
  GModel g_model = GModel::Amplitude;
  bool antisymmetric = true;
  /// Refit a1 to the target's endpoint slope; off keeps the template's a1
  /// and the target only fixes χ_f.
  bool fit_endpoint = true;
  std::size_t starts = 16;
  std::uint64_t seed = 1;
  double tol = 1e-8;
  double box_lo = -10.0;
  double box_hi = 10.0;
  std::size_t max_evaluations = 3000;
  std::size_t workers = 1;
};

struct Solution {
  PhaseFunction phase;
  std::optional<ConstraintResidual> residual_beta;
  std::optional<ConstraintResidual> residual_epsilon;
  double objective = 0.0;
  /// Full pulse duration in units of 1/β₀ (2t_f for antisymmetric pulses).
  double duration = 0.0;
  std::size_t evaluations = 0;
};

/// Phase function for the given free-parameter values: χ_f = φ/4, free
/// coefficients substituted, a1 refit to the endpoint slope. For
/// AnalyticBeta the free values are ζ coefficients and λ is recomputed.
PhaseFunction build_phase(const SolveRequest& req, const std::vector<double>& free_values);

/// Residual vector whose squared norm is the objective: Re/Im of each primary
/// residual, plus secondaries and the Φ''(χ_f) mismatch for general pulses.
std::vector<double> residual_vector(const SolveRequest& req, const PhaseFunction& pf);

/// Fully evaluated solution record for a phase function.
Solution evaluate(const SolveRequest& req, const PhaseFunction& pf);

/// Multi-start Nelder–Mead plus Levenberg–Marquardt polish. Returns all
/// distinct solutions with objective < tol², ascending by duration.
/// Throws SolverExhausted when none converges.
std::vector<Solution> solve(const SolveRequest& req);

/// Single local search from `start` (free-parameter values). Never throws on
/// non-convergence; inspect objective.
Solution refine(const SolveRequest& req, const std::vector<double>& start);

enum class GateTable { EpsilonTable, BetaTable };

struct GateTableEntry {
  std::string label;
  TargetRotation target;
  Family family = Family::Sin2Sin3;
  std::vector<double> coefficients;
  PhaseAux aux{};
  NoiseKind noise = NoiseKind::Epsilon;

  PhaseFunction phase() const;
};

/// Rows of the bundled tables, verbatim.
std::vector<GateTableEntry> load_gate_table(GateTable table);

/// Same, from a document with the bundled layout
/// {"epsilon": {family, rows[]}, "beta": {family, rows[]}}.
std::vector<GateTableEntry> load_gate_table(GateTable table, const nlohmann::json& doc);

struct VerificationReport {
  std::string label;
  double residual = 0.0;
  EvolutionOperator realized;
  EvolutionOperator target;
  double infidelity = 1.0;
  bool passed = false;
  std::string error;
};

inline constexpr double kVerifyResidual = 1e-3;
inline constexpr double kVerifyInfidelity = 1e-5;

/// Residual of the entry's noise kind and infidelity of the propagated full
/// pulse against R(θ, φ); passes iff residual < 1e-3 and infidelity < 1e-5.
VerificationReport verify_entry(const GateTableEntry& entry, std::size_t n_samples = 10000);

nlohmann::json to_json(const PhaseFunction& pf);
PhaseFunction phase_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ConstraintResidual& r);
nlohmann::json to_json(const Solution& s);
nlohmann::json to_json(const VerificationReport& r);

}  // namespace smoothgate
