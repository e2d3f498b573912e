#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "smoothgate/benchmark.hpp"
#include "smoothgate/constraint_solver.hpp"
#include "smoothgate/errors.hpp"

using namespace smoothgate;
using oracle::cd;
using oracle::kPi;

namespace {

SolveRequest pi6_request() {
  SolveRequest req;
  req.target = {kPi / 6, 2.8 * kPi};
  req.family = Family::Sin2Sin3;
  req.base_coefficients = {1.78210, -0.568079, 0.0, 0.0};
  req.free_indices = {2, 3};
  req.starts = 8;
  req.seed = 3;
  return req;
}

// Amplitude-model ε residual on a fixed Simpson grid.
double oracle_abs_epsilon(const PhaseFunction& pf) {
  const auto f = [&](double x) {
    const auto v = pf.eval_unchecked(x);
    const double s = std::sin(2 * x), c = std::cos(2 * x);
    const double q = std::sqrt(1 + v.d1 * v.d1 * s * s);
    const double g = -(v.d2 * s + 4 * v.d1 * c + 2 * std::pow(v.d1, 3) * s * s * c) / (2 * q * q * q);
    return s * q * g * std::exp(cd(0, 2 * v.value));
  };
  return std::abs(oracle::simpson_c(f, 0.0, pf.chi_f(), 400000));
}

}  // namespace

TEST_CASE("solver finds amplitude-robust pulses for R(pi/6, 2.8pi)") {
  const auto req = pi6_request();
  const auto sols = solve(req);
  REQUIRE(!sols.empty());
  for (std::size_t i = 0; i < sols.size(); ++i) {
    const auto& s = sols[i];
    REQUIRE(s.residual_epsilon.has_value());
    CHECK(s.residual_epsilon->magnitude() < 1e-6);
    CHECK(oracle_abs_epsilon(s.phase) < 10 * req.tol);
    CHECK(s.phase.chi_f() == doctest::Approx(0.7 * kPi));
    CHECK(s.phase.eval(s.phase.chi_f()).d1 == doctest::Approx(endpoint_conditions(req.target, true).dphi_f));
    if (i > 0) CHECK(s.duration >= sols[i - 1].duration);
  }
}

TEST_CASE("solver is deterministic and independent of worker count") {
  auto req = pi6_request();
  req.starts = 4;
  const auto dump = [](const std::vector<Solution>& v) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& s : v) j.push_back(to_json(s));
    return j.dump();
  };
  const auto a = dump(solve(req));
  req.workers = 3;
  CHECK(dump(solve(req)) == a);
  req.workers = 1;
  CHECK(dump(solve(req)) == a);
}

TEST_CASE("analytic beta seed converges without iterating") {
  SolveRequest req;
  req.target = {std::atan2(-8.0, 1.0), kPi};
  req.family = Family::AnalyticBeta;
  req.noise_kinds = {NoiseKind::Beta};
  const auto sols = solve(req);
  REQUIRE(sols.size() == 1);
  CHECK(sols[0].evaluations == 1);
  CHECK(sols[0].residual_beta->magnitude() < req.tol);
}

TEST_CASE("both noise kinds are canceled together") {
  // Staged route: the analytic beta family is beta-robust for any ζ, and
  // four ζ coefficients absorb the two ε equations and the endpoint slope.
  SolveRequest req;
  req.target = {std::atan2(-8.0, 1.0), kPi};
  req.family = Family::AnalyticBeta;
  req.aux.n = 1;
  req.base_coefficients = {0.0, 0.0, 0.0, 0.0};
  req.free_indices = {0, 1, 2, 3};
  req.noise_kinds = {NoiseKind::Beta, NoiseKind::Epsilon};
  req.box_lo = -1.0;
  req.box_hi = 1.0;
  req.starts = 4;
  req.seed = 9;
  try {
    const auto sols = solve(req);
    REQUIRE(!sols.empty());
    CHECK(sols[0].residual_beta->magnitude() < 1e-6);
    CHECK(sols[0].residual_epsilon->magnitude() < 1e-6);
    const auto v = sols[0].phase.eval(sols[0].phase.chi_f());
    CHECK(v.d1 == doctest::Approx(endpoint_conditions(req.target, true).dphi_f).epsilon(1e-6));
  } catch (const SolverExhausted& e) {
    FAIL("exhausted with best objective " << e.best_objective());
  }
}

TEST_CASE("exhaustion reports the best objective") {
  auto req = pi6_request();
  req.free_indices = {2};
  req.antisymmetric = false;
  req.noise_kinds = {NoiseKind::Beta, NoiseKind::Epsilon};
  req.starts = 2;
  try {
    solve(req);
    FAIL("expected exhaustion");
  } catch (const SolverExhausted& e) {
    CHECK(e.best_objective() > req.tol * req.tol);
    CHECK(std::isfinite(e.best_objective()));
  }
}

TEST_CASE("invalid requests are rejected") {
  auto req = pi6_request();
  req.free_indices = {0};
  CHECK_THROWS_AS(solve(req), ValidationError);
  req.free_indices = {9};
  CHECK_THROWS_AS(solve(req), ValidationError);
  req = pi6_request();
  req.base_coefficients = {1.0};
  CHECK_THROWS_AS(solve(req), ValidationError);
}

TEST_CASE("gate tables load verbatim") {
  const auto eps = load_gate_table(GateTable::EpsilonTable);
  const auto beta = load_gate_table(GateTable::BetaTable);
  REQUIRE(eps.size() == 11);
  REQUIRE(beta.size() == 10);
  CHECK(eps[0].label == "R(5pi/12,pi)");
  CHECK(eps[0].coefficients == std::vector<double>{1.24402, 3.00000, 2.01146, 1.26906});
  CHECK(eps[0].target.theta == doctest::Approx(5 * kPi / 12));
  CHECK(eps[0].target.phi == doctest::Approx(kPi));
  bool found = false;
  for (const auto& e : beta)
    if (e.label == "R(pi/6,2.4pi)") {
      found = true;
      CHECK(e.coefficients == std::vector<double>{5.45961, 0.770847, 2.74485, 8.04491, 4.95240});
      CHECK(e.aux.n3 == 1);
      CHECK(e.family == Family::Sin2Mixed);
    }
  CHECK(found);
  for (const auto& e : eps) CHECK_NOTHROW(e.phase());
  for (const auto& e : beta) CHECK_NOTHROW(e.phase());
}

TEST_CASE("identity row realizes -I") {
  for (const auto& e : load_gate_table(GateTable::EpsilonTable))
    if (e.label == "I") {
      const auto rep = verify_entry(e);
      CHECK(rep.passed);
      CHECK(infidelity(rep.realized, EvolutionOperator::identity()) < 1e-5);
      CHECK(rep.realized.u11.real() == doctest::Approx(-1.0).epsilon(1e-5));
    }
}

TEST_CASE("beta table R(5pi/12, pi) verifies") {
  const auto rep = verify_entry(load_gate_table(GateTable::BetaTable).front());
  CHECK(rep.label == "R(5pi/12,pi)");
  CHECK(rep.residual < 1e-3);
  CHECK(rep.passed);
}

TEST_CASE("corrupted coefficients fail verification") {
  for (auto kind : {GateTable::EpsilonTable, GateTable::BetaTable}) {
    auto e = load_gate_table(kind)[2];
    e.coefficients[2] += 0.1;
    const auto rep = verify_entry(e);
    CHECK_FALSE(rep.passed);
    CHECK(rep.residual >= 1e-3);
  }
}

TEST_CASE("table documents with a different layout are rejected") {
  CHECK_THROWS(load_gate_table(GateTable::EpsilonTable, nlohmann::json{{"beta", {}}}));
}

TEST_CASE("free sin^3 terms leave the target unchanged") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (const auto& e : {load_gate_table(GateTable::EpsilonTable)[4], load_gate_table(GateTable::EpsilonTable)[9]}) {
    auto zero = e.coefficients;
    zero[2] = zero[3] = 0.0;
    const auto ref = propagate(synthesize(PhaseFunction(e.family, zero, e.target.phi / 4), 4000, true));
    for (int k = 0; k < 10; ++k) {
      auto c = e.coefficients;
      c[2] = u(rng);
      c[3] = u(rng);
      const auto v = propagate(synthesize(PhaseFunction(e.family, c, e.target.phi / 4), 4000, true));
      CHECK(infidelity(v, ref) < 1e-8);
    }
  }
}

TEST_CASE("solver zeros coincide with the potential grid minima") {
  const auto grid = error_potential(oracle::scan_template(0, 0), NoiseSpec::epsilon(), true,
                                    {2, -0.6, 0.2, 41}, {3, 0.0, 0.4, 41}, 2);
  const double s1 = 0.8 / 40, s2 = 0.4 / 40;
  SolveRequest req;
  req.target = {kPi / 6, 2.8 * kPi};
  req.family = Family::PolySin3;
  req.base_coefficients = {0.74, -0.18, 0.0, 0.0};
  req.free_indices = {2, 3};
  req.fit_endpoint = false;
  const auto minima = grid.local_minima();
  REQUIRE(minima.size() >= 2);
  for (std::size_t k = 0; k < 2; ++k) {
    const auto s = refine(req, {minima[k].p1, minima[k].p2});
    CHECK(s.objective < req.tol * req.tol);
    CHECK(std::abs(s.phase.coefficients()[2] - minima[k].p1) <= s1);
    CHECK(std::abs(s.phase.coefficients()[3] - minima[k].p2) <= s2);
  }
}

TEST_CASE("build_phase refits a1 from the target") {
  const auto req = pi6_request();
  const auto pf = build_phase(req, {0.4, -0.3});
  CHECK(pf.coefficients()[2] == 0.4);
  CHECK(pf.coefficients()[3] == -0.3);
  CHECK(pf.coefficients()[1] == -0.568079);
  CHECK(pf.eval(pf.chi_f()).d1 == doctest::Approx(endpoint_conditions(req.target, true).dphi_f).epsilon(1e-12));
}

TEST_CASE("solution JSON carries the phase function and residuals") {
  const auto req = pi6_request();
  const auto s = evaluate(req, build_phase(req, {0.1, 0.2}));
  const auto j = to_json(s);
  CHECK(j.contains("phase_function"));
  CHECK(j["residual_beta"].is_null());
  CHECK(j["residual_epsilon"]["abs"].get<double>() == doctest::Approx(s.residual_epsilon->magnitude()));
  CHECK(phase_from_json(j["phase_function"]) == s.phase);
  CHECK(j["duration"].get<double>() == doctest::Approx(s.duration));
}
