#include "smoothgate/constraint_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "smoothgate/benchmark.hpp"
#include "smoothgate/errors.hpp"
#include "smoothgate/numerics/nelder_mead.hpp"
#include "smoothgate/numerics/parallel.hpp"
#include "smoothgate/pulse_synthesis.hpp"

namespace smoothgate {

extern const char* const kGateTablesJson;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kFailedObjective = 1e10;

bool has_endpoint_coefficient(Family f) {
  return f == Family::PolySin3 || f == Family::Sin2Sin3 || f == Family::Sin2Mixed;
}

std::vector<double> base_for(const SolveRequest& req) {
  if (req.family == Family::AnalyticBeta && req.base_coefficients.empty()) {
    const auto seed = analytic_beta_for_target(req.target);
    return {seed.coefficients().begin(), seed.coefficients().end()};
  }
  return req.base_coefficients;
}

void validate(const SolveRequest& req, const std::vector<double>& base) {
  if (req.noise_kinds.empty()) throw ValidationError("solve request needs at least one noise kind");
  if (!(req.tol > 0.0)) throw ValidationError("solve tolerance must be positive");
  if (!(req.box_hi > req.box_lo)) throw ValidationError("start box must have box_lo < box_hi");
  if (req.family != Family::AnalyticBeta && base.size() != coefficient_count(req.family))
    throw ValidationError("base coefficients do not match the family");
  for (std::size_t k = 0; k < req.free_indices.size(); ++k) {
    const auto i = req.free_indices[k];
    if (i >= base.size()) throw ValidationError("free index beyond the coefficient list");
    if (i == 0 && req.fit_endpoint && has_endpoint_coefficient(req.family))
      throw ValidationError("a1 is fixed by the endpoint condition and cannot be free");
    for (std::size_t m = 0; m < k; ++m)
      if (req.free_indices[m] == i) throw ValidationError("duplicate free index");
  }
}

double radical_inverse(std::uint64_t k, unsigned base) {
  double inv = 1.0 / base, f = inv, r = 0.0;
  while (k > 0) {
    r += f * static_cast<double>(k % base);
    k /= base;
    f *= inv;
  }
  return r;
}

// Halton points with a seeded Cranley–Patterson shift.
std::vector<std::vector<double>> start_points(const SolveRequest& req) {
  static constexpr unsigned primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
  const std::size_t d = req.free_indices.size();
  if (d > std::size(primes)) throw ValidationError("too many free parameters for the start sequence");
  std::mt19937_64 rng(req.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> shift(d);
  for (auto& s : shift) s = unit(rng);
  std::vector<std::vector<double>> pts(req.starts, std::vector<double>(d));
  for (std::size_t k = 0; k < req.starts; ++k)
    for (std::size_t j = 0; j < d; ++j) {
      double u = radical_inverse(k + 1, primes[j]) + shift[j];
      u -= std::floor(u);
      pts[k][j] = req.box_lo + (req.box_hi - req.box_lo) * u;
    }
  return pts;
}

double objective_of(const std::vector<double>& r) {
  double s = 0.0;
  for (double v : r) s += v * v;
  return std::isfinite(s) ? s : kFailedObjective;
}

struct Evaluator {
  const SolveRequest& req;
  std::vector<double> base;
  std::size_t count = 0;

  std::vector<double> residuals(const std::vector<double>& x) {
    ++count;
    try {
      return residual_vector(req, build_phase(req, x));
    } catch (const Error&) {
      return {};
    }
  }
  double operator()(const std::vector<double>& x) {
    const auto r = residuals(x);
    return r.empty() ? kFailedObjective : objective_of(r);
  }
};

// Levenberg–Marquardt on the residual vector with a central-difference Jacobian.
std::vector<double> polish(Evaluator& ev, std::vector<double> x, double target_obj) {
  auto r = ev.residuals(x);
  if (r.empty()) return x;
  double obj = objective_of(r);
  double mu = 1e-3;
  const std::size_t n = x.size(), m = r.size();
  for (int it = 0; it < 60 && obj > target_obj && mu < 1e12; ++it) {
    Eigen::MatrixXd J(m, n);
    bool ok = true;
    for (std::size_t j = 0; j < n && ok; ++j) {
      const double h = 1e-7 * std::max(1.0, std::abs(x[j]));
      auto xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      const auto rp = ev.residuals(xp), rm = ev.residuals(xm);
      if (rp.size() != m || rm.size() != m) ok = false;
      else
        for (std::size_t i = 0; i < m; ++i) J(i, j) = (rp[i] - rm[i]) / (2.0 * h);
    }
    if (!ok) break;
    const Eigen::Map<const Eigen::VectorXd> rv(r.data(), static_cast<Eigen::Index>(m));
    const Eigen::MatrixXd A = J.transpose() * J;
    const Eigen::VectorXd g = J.transpose() * rv;
    bool accepted = false;
    while (!accepted && mu < 1e12) {
      Eigen::MatrixXd M = A;
      for (std::size_t j = 0; j < n; ++j) M(j, j) += mu * std::max(A(j, j), 1e-12);
      const Eigen::VectorXd step = M.ldlt().solve(-g);
      auto xt = x;
      for (std::size_t j = 0; j < n; ++j) xt[j] += step[static_cast<Eigen::Index>(j)];
      const auto rt = ev.residuals(xt);
      const double ot = rt.size() == m ? objective_of(rt) : kFailedObjective;
      if (ot < obj) {
        x = std::move(xt);
        r = rt;
        obj = ot;
        mu = std::max(mu / 3.0, 1e-12);
        accepted = true;
      } else {
        mu *= 4.0;
      }
    }
  }
  return x;
}

double coefficient_distance(const PhaseFunction& a, const PhaseFunction& b) {
  const auto ca = a.coefficients(), cb = b.coefficients();
  if (ca.size() != cb.size()) return std::numeric_limits<double>::infinity();
  double s = 0.0;
  for (std::size_t i = 0; i < ca.size(); ++i) s += (ca[i] - cb[i]) * (ca[i] - cb[i]);
  return std::sqrt(s);
}

double parse_pi_multiple(const std::string& s) {
  const auto slash = s.find('/');
  if (slash == std::string::npos) return std::stod(s) * kPi;
  return std::stod(s.substr(0, slash)) / std::stod(s.substr(slash + 1)) * kPi;
}

}  // namespace

PhaseFunction build_phase(const SolveRequest& req, const std::vector<double>& free_values) {
  if (free_values.size() != req.free_indices.size())
    throw ValidationError("free value count does not match free indices");
  auto c = base_for(req);
  for (std::size_t k = 0; k < free_values.size(); ++k) {
    if (req.free_indices[k] >= c.size()) throw ValidationError("free index beyond the coefficient list");
    c[req.free_indices[k]] = free_values[k];
  }
  const double chi_f = req.target.phi / 4.0;
  switch (req.family) {
    case Family::AnalyticBeta: {
      const int n = static_cast<int>(std::lround(req.target.phi / kPi));
      if (n < 1 || std::abs(req.target.phi / kPi - n) > 1e-6)
        throw DomainError("analytic-beta family only reaches rotation angles n*pi");
      return analytic_beta_family(n, ZetaFunction(n, std::move(c)));
    }
    case Family::Zero: return PhaseFunction::zero(chi_f);
    default: break;
  }
  PhaseFunction pf(req.family, std::move(c), chi_f, req.aux);
  if (!req.fit_endpoint) return pf;
  const auto spec = endpoint_conditions(req.target, req.antisymmetric);
  return fit_endpoint_slope(pf, spec.dphi_f);
}

std::vector<double> residual_vector(const SolveRequest& req, const PhaseFunction& pf) {
  std::vector<double> r;
  for (auto kind : req.noise_kinds) {
    const auto res = residual(pf, NoiseSpec{kind, req.g_model, std::nullopt}, req.antisymmetric);
    r.push_back(res.primary.real());
    r.push_back(res.primary.imag());
    if (res.has_secondary) r.push_back(res.secondary);
  }
  const auto spec = endpoint_conditions(TargetRotation(req.target.theta, 4.0 * pf.chi_f()), req.antisymmetric);
  const auto end = pf.eval_unchecked(pf.chi_f());
  if (req.fit_endpoint && !has_endpoint_coefficient(pf.family())) r.push_back(end.d1 - spec.dphi_f);
  if (spec.d2phi_f) r.push_back(end.d2 - *spec.d2phi_f);
  return r;
}

Solution evaluate(const SolveRequest& req, const PhaseFunction& pf) {
  Solution s{pf, std::nullopt, std::nullopt, 0.0, 0.0, 0};
  for (auto kind : req.noise_kinds) {
    if (kind == NoiseKind::Beta) s.residual_beta = residual_beta(pf, req.antisymmetric);
    else s.residual_epsilon = residual_epsilon(pf, NoiseSpec::epsilon(req.g_model), req.antisymmetric);
  }
  s.objective = objective_of(residual_vector(req, pf));
  s.duration = (req.antisymmetric ? 2.0 : 1.0) * arc_length(pf, pf.chi_f());
  return s;
}

Solution refine(const SolveRequest& req, const std::vector<double>& start) {
  const auto base = base_for(req);
  validate(req, base);
  Evaluator ev{req, base};
  numerics::NelderMeadOptions nm;
  nm.initial_step = std::min(0.25, 0.05 * (req.box_hi - req.box_lo));
  nm.max_evaluations = req.max_evaluations;
  nm.f_tol = 1e-4 * req.tol * req.tol;
  nm.x_tol = 1e-13;
  auto best = start;
  if (ev(start) > nm.f_tol) {
    best = numerics::nelder_mead(std::ref(ev), start, nm).x;
    best = polish(ev, best, 1e-4 * req.tol * req.tol);
  }
  Solution s{PhaseFunction::zero(1.0), std::nullopt, std::nullopt, kFailedObjective, 0.0, 0};
  try {
    s = evaluate(req, build_phase(req, best));
  } catch (const Error&) {
  }
  s.evaluations = ev.count;
  return s;
}

std::vector<Solution> solve(const SolveRequest& req) {
  const auto base = base_for(req);
  validate(req, base);

  std::vector<double> seed(req.free_indices.size());
  for (std::size_t k = 0; k < seed.size(); ++k) seed[k] = base[req.free_indices[k]];
  {
    Solution s = evaluate(req, build_phase(req, seed));
    s.evaluations = 1;
    if (s.objective < req.tol * req.tol) return {s};
    if (req.free_indices.empty())
      throw SolverExhausted("no free parameters and the template misses the constraints", s.objective);
  }

  const auto starts = start_points(req);
  std::vector<Solution> runs(starts.size(), Solution{PhaseFunction::zero(1.0), {}, {}, kFailedObjective, 0.0, 0});
  numerics::parallel_for(starts.size(), req.workers, [&](std::size_t k) { runs[k] = refine(req, starts[k]); });

  double best_obj = std::numeric_limits<double>::infinity();
  std::vector<Solution> found;
  for (auto& s : runs) {
    best_obj = std::min(best_obj, s.objective);
    if (!(s.objective < req.tol * req.tol)) continue;
    auto dup = std::find_if(found.begin(), found.end(), [&](const Solution& f) {
      return coefficient_distance(f.phase, s.phase) < 1e-4;
    });
    if (dup == found.end()) found.push_back(std::move(s));
    else if (s.objective < dup->objective) *dup = std::move(s);
  }
  if (found.empty())
    throw SolverExhausted("no start converged below tolerance after " + std::to_string(req.starts) +
                              " restarts",
                          best_obj);
  std::sort(found.begin(), found.end(), [](const Solution& a, const Solution& b) {
    if (a.duration != b.duration) return a.duration < b.duration;
    const auto ca = a.phase.coefficients(), cb = b.phase.coefficients();
    return std::lexicographical_compare(ca.begin(), ca.end(), cb.begin(), cb.end());
  });
  return found;
}

PhaseFunction GateTableEntry::phase() const {
  return PhaseFunction(family, coefficients, target.phi / 4.0, aux);
}

std::vector<GateTableEntry> load_gate_table(GateTable table) {
  return load_gate_table(table, nlohmann::json::parse(kGateTablesJson));
}

std::vector<GateTableEntry> load_gate_table(GateTable table, const nlohmann::json& doc) {
  const bool eps = table == GateTable::EpsilonTable;
  const auto& block = doc.at(eps ? "epsilon" : "beta");
  const Family family = family_from_string(block.at("family").get<std::string>());
  std::vector<GateTableEntry> out;
  for (const auto& row : block.at("rows")) {
    GateTableEntry e;
    e.label = row.at("label").get<std::string>();
    e.target = TargetRotation(parse_pi_multiple(row.at("theta_pi").get<std::string>()),
                              parse_pi_multiple(row.at("phi_pi").get<std::string>()));
    e.family = family;
    e.coefficients = row.at("a").get<std::vector<double>>();
    if (row.contains("n3")) e.aux.n3 = row.at("n3").get<int>();
    e.noise = eps ? NoiseKind::Epsilon : NoiseKind::Beta;
    out.push_back(std::move(e));
  }
  return out;
}

VerificationReport verify_entry(const GateTableEntry& entry, std::size_t n_samples) {
  VerificationReport rep;
  rep.label = entry.label;
  rep.target = rotation(entry.target);
  try {
    const auto pf = entry.phase();
    rep.residual = entry.noise == NoiseKind::Beta
                       ? residual_beta(pf, true).magnitude()
                       : residual_epsilon(pf, NoiseSpec::epsilon(), true).magnitude();
    const auto pulse = synthesize(pf, n_samples, true);
    rep.realized = propagate(pulse);
    rep.infidelity = infidelity(rep.realized, rep.target);
    rep.passed = rep.residual < kVerifyResidual && rep.infidelity < kVerifyInfidelity;
  } catch (const std::exception& e) {
    rep.error = e.what();
    rep.passed = false;
  }
  return rep;
}

nlohmann::json to_json(const PhaseFunction& pf) {
  const auto c = pf.coefficients();
  return {{"family", std::string(to_string(pf.family()))},
          {"coefficients", std::vector<double>(c.begin(), c.end())},
          {"chi_f", pf.chi_f()},
          {"aux", {{"n3", pf.aux().n3}, {"n", pf.aux().n}, {"lambda", pf.aux().lambda}}}};
}

PhaseFunction phase_from_json(const nlohmann::json& j) {
  try {
    const Family family = family_from_string(j.at("family").get<std::string>());
    auto coeffs = j.value("coefficients", std::vector<double>{});
    PhaseAux aux;
    const auto a = j.value("aux", nlohmann::json::object());
    aux.n3 = a.value("n3", 1);
    aux.n = a.value("n", 1);
    if (family == Family::AnalyticBeta) {
      if (!a.contains("lambda")) return analytic_beta_family(aux.n, ZetaFunction(aux.n, std::move(coeffs)));
      aux.lambda = a.at("lambda").get<double>();
      return PhaseFunction(family, std::move(coeffs), j.value("chi_f", aux.n * kPi / 4.0), aux);
    }
    return PhaseFunction(family, std::move(coeffs), j.at("chi_f").get<double>(), aux);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("bad phase function JSON: ") + e.what());
  }
}

nlohmann::json to_json(const ConstraintResidual& r) {
  nlohmann::json j = {{"primary", {r.primary.real(), r.primary.imag()}},
                      {"abs", r.magnitude()},
                      {"primary_error", r.primary_error}};
  if (r.has_secondary) {
    j["secondary"] = r.secondary;
    j["secondary_error"] = r.secondary_error;
  } else {
    j["secondary"] = nullptr;
  }
  return j;
}

nlohmann::json to_json(const Solution& s) {
  return {{"phase_function", to_json(s.phase)},
          {"residual_beta", s.residual_beta ? to_json(*s.residual_beta) : nlohmann::json(nullptr)},
          {"residual_epsilon", s.residual_epsilon ? to_json(*s.residual_epsilon) : nlohmann::json(nullptr)},
          {"duration", s.duration}};
}

nlohmann::json to_json(const VerificationReport& r) {
  nlohmann::json j = {{"label", r.label},
                      {"residual", r.residual},
                      {"infidelity", r.infidelity},
                      {"passed", r.passed},
                      {"realized", to_json(r.realized)}};
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

}  // namespace smoothgate
