#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "smoothgate/constraint_solver.hpp"
#include "smoothgate/errors.hpp"
#include "smoothgate/phase_ansatz.hpp"

using namespace smoothgate;
using oracle::kPi;

namespace {

std::vector<PhaseFunction> sample_phases() {
  return {
      PhaseFunction(Family::PolySin3, {0.74, -0.18, 0.3, -0.2}, 0.7 * kPi),
      PhaseFunction(Family::Sin2Sin3, {1.78210, -0.568079, 0.5, 1.1}, 0.7 * kPi),
      PhaseFunction(Family::Sin2Mixed, {5.45961, 0.770847, 2.74485, 8.04491, 4.95240}, 0.6 * kPi, {2, 1, 0.0}),
      analytic_beta_family(1, ZetaFunction(1, {1.0, 0.3})),
      analytic_beta_family(2, ZetaFunction(2, {0.3})),
      PhaseFunction::zero(0.9),
  };
}

// Least-squares slope of log e against log h.
double loglog_slope(const std::vector<double>& h, const std::vector<double>& e) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double x = std::log(h[i]), y = std::log(e[i]);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

TEST_CASE("zero family evaluates to zero") {
  const auto v = PhaseFunction::zero(1.0).eval(0.3);
  CHECK(v.value == 0.0);
  CHECK(v.d1 == 0.0);
  CHECK(v.d2 == 0.0);
}

TEST_CASE("analytic beta generator at pi/8 matches hand evaluation") {
  const auto pf = oracle::generator_phase();
  CHECK(pf.chi_f() == doctest::Approx(kPi / 4).epsilon(1e-15));
  const auto v = pf.eval(kPi / 8);
  CHECK(v.value == doctest::Approx(kPi / 2 - 1.0).epsilon(1e-14));
  CHECK(v.d1 == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(v.d2 == doctest::Approx(16.0).epsilon(1e-14));
}

TEST_CASE("polynomial ansatz second derivative at chi_f is 2a1 + 6a2 chi") {
  const PhaseFunction pf(Family::PolySin3, {0.74, -0.18, 0.0, 0.0}, 0.7 * kPi);
  const double x = pf.chi_f();
  CHECK(pf.eval(x).d2 == doctest::Approx(2 * 0.74 + 6 * -0.18 * x).epsilon(1e-13));
}

TEST_CASE("eval outside [0, chi_f] is a domain error") {
  const PhaseFunction pf(Family::Sin2Sin3, {1, 1, 0, 0}, 1.0);
  CHECK_THROWS_AS(pf.eval(-1e-9), DomainError);
  CHECK_THROWS_AS(pf.eval(1.0 + 1e-9), DomainError);
  CHECK_NOTHROW(pf.eval_unchecked(1.1));
}

TEST_CASE("construction rejects invalid parameters") {
  CHECK_THROWS_AS(PhaseFunction(Family::PolySin3, {1, 2, 3}, 1.0), ValidationError);
  CHECK_THROWS_AS(PhaseFunction(Family::PolySin3, {1, 2, 3, 4}, 0.0), DomainError);
  CHECK_THROWS_AS(PhaseFunction(Family::PolySin3, {1, 2, NAN, 4}, 1.0), DomainError);
  CHECK_THROWS_AS(PhaseFunction(Family::AnalyticBeta, {}, 1.0, {1, 1, 0.0}), DomainError);
  CHECK_THROWS_AS(family_from_string("cubic"), ValidationError);
}

TEST_CASE("endpoint conditions for R(pi/6, 2.8pi)") {
  const auto ep = endpoint_conditions({kPi / 6, 2.8 * kPi}, true);
  CHECK(ep.chi_f == doctest::Approx(0.7 * kPi).epsilon(1e-15));
  // The propagated pulse fixes the sign: Φ'(χ_f) = −tanθ csc(φ/2).
  CHECK(ep.dphi_f == doctest::Approx(-std::tan(kPi / 6) / std::sin(1.4 * kPi)).epsilon(1e-14));
  CHECK(std::abs(ep.dphi_f) == doctest::Approx(0.6072).epsilon(1e-4));
  CHECK_FALSE(ep.d2phi_f.has_value());
}

TEST_CASE("endpoint conditions edge cases") {
  CHECK(endpoint_conditions({0.0, 1.3}, true).dphi_f == 0.0);
  const auto general = endpoint_conditions({0.0, 1.3}, false);
  REQUIRE(general.d2phi_f.has_value());
  CHECK(*general.d2phi_f == doctest::Approx(0.0).epsilon(1e-15));
  CHECK_THROWS_AS(endpoint_conditions({kPi / 6, 2 * kPi}, true), UnrepresentableTarget);
  CHECK_THROWS_AS(TargetRotation(0.1, 0.0), DomainError);
}

TEST_CASE("required second derivative cancels the drive numerator at chi_f") {
  for (double chi_f : {0.3, 0.7, 1.1})
    for (double d1 : {-0.8, 0.0, 0.4}) {
      const double d2 = required_second_derivative(chi_f, d1);
      const double s = std::sin(2 * chi_f), c = std::cos(2 * chi_f);
      CHECK(std::abs(d2 * s + 4 * d1 * c + 2 * d1 * d1 * d1 * s * s * c) < 1e-12);
    }
}

TEST_CASE("lambda of the analytic beta family matches a Simpson oracle") {
  const auto pf = analytic_beta_family(1, ZetaFunction(1, {1.0}));
  const double integral = oracle::simpson(
      [](double t) { return std::sin(t) * std::sin(4 * (t - std::sin(t))); }, 0.0, kPi, 200000);
  const double lambda = 1.0 / ((2.0 / (3.0 * kPi)) * integral);
  CHECK(std::isfinite(pf.aux().lambda));
  CHECK(pf.aux().lambda == doctest::Approx(lambda).epsilon(1e-9));
}

TEST_CASE("analytic beta family with n = 2 ends at pi/2") {
  const auto pf = analytic_beta_family(2, ZetaFunction(2, {}));
  CHECK(pf.chi_f() == doctest::Approx(kPi / 2).epsilon(1e-15));
  CHECK(pf.aux().lambda == 0.0);
}

TEST_CASE("degenerate zeta is rejected") {
  // Two-term ζ whose contributions to the λ integral cancel.
  const auto probe = [](std::vector<double> c) {
    return oracle::simpson(
        [&](double t) {
          double z = 0.0;
          for (std::size_t k = 0; k < c.size(); ++k) z += c[k] * std::sin(4.0 * (k + 1) * (t - std::sin(t)));
          return std::sin(t) * z;
        },
        0.0, kPi, 200000);
  };
  const double i1 = probe({1.0, 0.0}), i2 = probe({0.0, 1.0});
  CHECK_THROWS_AS(analytic_beta_family(1, ZetaFunction(1, {i2, -i1})), DegenerateZeta);
}

TEST_CASE("zeta is periodic with period n pi / 2") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int n : {1, 2, 3}) {
    const ZetaFunction z(n, {0.7, -0.2, 0.05});
    CHECK(z.period() == doctest::Approx(n * kPi / 2));
    for (int k = 0; k < 20; ++k) {
      const double v = u(rng);
      CHECK(z.value(v + z.period()) == doctest::Approx(z.value(v)).epsilon(1e-12));
    }
  }
  CHECK(ZetaFunction(1, {}).is_constant());
}

TEST_CASE("every family starts flat at chi = 0") {
  for (const auto& pf : sample_phases()) {
    // sin³(π) terms are zero only to rounding.
    const auto v = pf.eval(0.0);
    CHECK(std::abs(v.value) < 1e-14);
    CHECK(std::abs(v.d1) < 1e-14);
  }
}

TEST_CASE("closed-form derivatives agree with central differences at second order") {
  // Below h ≈ 1e-4 the difference quotient is round-off limited in double precision.
  const std::vector<double> hs{1e-3, 5.6e-4, 3.2e-4, 1.8e-4, 1e-4};
  for (const auto& pf : sample_phases()) {
    if (pf.family() == Family::Zero) continue;
    const double x = 0.43 * pf.chi_f();
    std::vector<double> e1, e2;
    for (double h : hs) {
      const auto p = pf.eval(x + h), m = pf.eval(x - h), c = pf.eval(x);
      e1.push_back(std::abs((p.value - m.value) / (2 * h) - c.d1));
      e2.push_back(std::abs((p.d1 - m.d1) / (2 * h) - c.d2));
    }
    CHECK(loglog_slope(hs, e1) >= 1.9);
    CHECK(loglog_slope(hs, e2) >= 1.9);
  }
}

TEST_CASE("analytic beta family cancels the secondary beta integral") {
  for (const auto& pf : {analytic_beta_family(1, ZetaFunction(1, {1.0, 0.3})),
                         analytic_beta_family(2, ZetaFunction(2, {0.3}))}) {
    const double s = oracle::simpson(
        [&](double x) { return pf.eval_unchecked(x).d1 * std::pow(std::sin(2 * x), 2); }, 0.0,
        pf.chi_f(), 400000);
    CHECK(std::abs(s) < 1e-10);
  }
}

TEST_CASE("sin^3 perturbation terms vanish with their slopes at both ends") {
  for (Family f : {Family::PolySin3, Family::Sin2Sin3})
    for (std::size_t k : {2u, 3u}) {
      std::vector<double> c(4, 0.0);
      c[k] = 1.0;
      if (f == Family::Sin2Sin3) c[1] = 1.0;
      const PhaseFunction pf(f, c, 1.3);
      for (double x : {0.0, pf.chi_f()}) {
        const auto v = pf.eval(x);
        CHECK(std::abs(v.value) < 1e-14);
        CHECK(std::abs(v.d1) < 1e-14);
      }
    }
}

TEST_CASE("endpoint slope refit hits the requested slope") {
  const PhaseFunction base(Family::Sin2Sin3, {0.0, -0.568079, 0.2, 0.1}, 0.7 * kPi);
  const double slope = endpoint_conditions({kPi / 6, 2.8 * kPi}, true).dphi_f;
  const auto fit = fit_endpoint_slope(base, slope);
  CHECK(fit.eval(fit.chi_f()).d1 == doctest::Approx(slope).epsilon(1e-12));
  CHECK(fit.coefficients()[0] == doctest::Approx(1.78210).epsilon(1e-4));
}

TEST_CASE("phase functions round-trip through JSON") {
  for (const auto& pf : sample_phases()) {
    const auto back = phase_from_json(to_json(pf));
    CHECK(back == pf);
  }
  CHECK_THROWS_AS(phase_from_json(nlohmann::json{{"family", "sin2sin3"}}), ValidationError);
}
