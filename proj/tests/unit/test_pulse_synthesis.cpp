#include <cmath>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "smoothgate/constraint_solver.hpp"
#include "smoothgate/errors.hpp"
#include "smoothgate/pulse_synthesis.hpp"

using namespace smoothgate;
using oracle::kPi;

namespace {

double oracle_arc_length(const PhaseFunction& pf, double chi) {
  return oracle::simpson(
      [&](double x) {
        const double d = pf.eval_unchecked(x).d1 * std::sin(2 * x);
        return std::sqrt(1 + d * d);
      },
      0.0, chi, 1000000);
}

// Ω from the closed form, written out independently of the library.
double oracle_omega(double d1, double d2, double chi) {
  const double s = std::sin(2 * chi), c = std::cos(2 * chi);
  return -(d2 * s + 4 * d1 * c + 2 * d1 * d1 * d1 * s * s * c) / (2 * std::pow(1 + d1 * d1 * s * s, 1.5));
}

}  // namespace

TEST_CASE("arc length of the zero family is chi") {
  CHECK(arc_length(PhaseFunction::zero(2.0), 1.2) == doctest::Approx(1.2).epsilon(1e-14));
}

TEST_CASE("arc length matches a 1e6-point Simpson oracle") {
  const auto pf = oracle::generator_phase();
  CHECK(arc_length(pf, kPi / 4) == doctest::Approx(oracle_arc_length(pf, kPi / 4)).epsilon(1e-11));
  const auto zero2 = oracle::scan_zero_phase();
  CHECK(arc_length(zero2, 1.7) == doctest::Approx(oracle_arc_length(zero2, 1.7)).epsilon(1e-11));
}

TEST_CASE("zero family trajectory is chi = t") {
  const auto tr = invert_chi(PhaseFunction::zero(1.0), 33);
  for (std::size_t i = 0; i < tr.size(); ++i) CHECK(tr.chi[i] == doctest::Approx(tr.times[i]).epsilon(1e-12));
  CHECK(tr.t_f() == doctest::Approx(1.0));
  CHECK_THROWS_AS(invert_chi(PhaseFunction::zero(1.0), 15), DomainError);
}

TEST_CASE("generator trajectory ends at pi/4 at the arc-length time") {
  const auto pf = oracle::generator_phase();
  const auto tr = invert_chi(pf, 2001);
  CHECK(tr.chi.back() == doctest::Approx(kPi / 4).epsilon(1e-14));
  CHECK(tr.end_mismatch < 1e-9);
  CHECK(tr.t_f() == doctest::Approx(oracle_arc_length(pf, kPi / 4)).epsilon(1e-11));
}

TEST_CASE("table trajectories are monotone, bounded by beta0 and invert the arc length") {
  for (const auto& e : load_gate_table(GateTable::EpsilonTable)) {
    const auto pf = e.phase();
    const auto tr = invert_chi(pf, 1001);
    CAPTURE(e.label);
    bool increasing = true, bounded = true;
    double worst_rate = 0.0, worst_round_trip = 0.0;
    for (std::size_t i = 0; i < tr.size(); ++i) {
      if (i > 0 && !(tr.chi[i] > tr.chi[i - 1])) increasing = false;
      if (!(tr.chidot[i] > 0.0 && tr.chidot[i] <= 1.0)) bounded = false;
      const double d = pf.eval(tr.chi[i]).d1 * std::sin(2 * tr.chi[i]);
      worst_rate = std::max(worst_rate, std::abs(tr.chidot[i] - 1 / std::sqrt(1 + d * d)));
      if (i % 50 == 0) worst_round_trip = std::max(worst_round_trip, std::abs(arc_length(pf, tr.chi[i]) - tr.times[i]));
    }
    CHECK(increasing);
    CHECK(bounded);
    CHECK(worst_rate < 1e-14);
    CHECK(worst_round_trip < 1e-9);
    CHECK(tr.end_mismatch < 1e-9);
  }
}

TEST_CASE("drive of the zero family vanishes") {
  const auto pf = PhaseFunction::zero(1.0);
  for (double x : {0.0, 0.3, 1.0}) CHECK(omega_of_chi(pf, x) == 0.0);
}

TEST_CASE("drive at pi/8 for the generator equals -8 sqrt2 / 9") {
  // Φ' = 4, Φ'' = 16, sin = cos = 1/√2: numerator 96/√2 over 2·9^{3/2}.
  const double w = omega_of_chi(oracle::generator_phase(), kPi / 8);
  CHECK(w == doctest::Approx(-8.0 * std::sqrt(2.0) / 9.0).epsilon(1e-14));
}

TEST_CASE("drive matches the closed form across families") {
  for (const auto& pf : {oracle::scan_zero_phase(), load_gate_table(GateTable::BetaTable)[3].phase()})
    for (int k = 0; k <= 20; ++k) {
      const double x = pf.chi_f() * k / 20.0;
      const auto v = pf.eval(x);
      CHECK(omega_of_chi(pf, x) == doctest::Approx(oracle_omega(v.d1, v.d2, x)).epsilon(1e-13));
    }
}

TEST_CASE("generator pulse peak amplitude") {
  // Peak |Ω|/β₀ of Φ = 4χ − sin4χ is 3.55; quoted as about 4.
  const auto p = synthesize(oracle::generator_phase(), 10000, true);
  CHECK(p.max_abs_omega() == doctest::Approx(4.0).epsilon(0.15));
  CHECK(p.duration() / 5.0 == doctest::Approx(1.2).epsilon(0.05));
}

TEST_CASE("zero family synthesizes an all-zero waveform over chi_f") {
  const auto p = synthesize(PhaseFunction::zero(0.8), 64, false);
  CHECK(p.t_f == doctest::Approx(0.8).epsilon(1e-12));
  for (const auto& s : p.waveform()) CHECK(s.omega == 0.0);
}

TEST_CASE("beta table waveform is finite") {
  const auto row = load_gate_table(GateTable::BetaTable).front();
  const auto p = synthesize(row.phase(), 4000, true);
  for (const auto& s : p.waveform()) CHECK(std::isfinite(s.omega));
}

TEST_CASE("second scan zero pulse stays within the amplitude budget") {
  const auto p = synthesize(oracle::scan_zero_phase(), 10000, true);
  CHECK(p.max_abs_omega() <= 3.0);
  CHECK(p.duration() == doctest::Approx(5.0).epsilon(0.1));
}

TEST_CASE("antisymmetric waveform is exactly odd") {
  const auto p = synthesize(oracle::scan_zero_phase(), 501, true);
  const auto w = p.waveform();
  REQUIRE(w.size() == 2 * p.samples.size() - 1);
  const std::size_t n = w.size();
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(w[i].t == -w[n - 1 - i].t);
    CHECK(w[i].omega + w[n - 1 - i].omega == 0.0);
  }
}

TEST_CASE("duration identity holds for every family") {
  std::vector<PhaseFunction> pfs{oracle::scan_zero_phase(), oracle::generator_phase(),
                                 analytic_beta_family(2, ZetaFunction(2, {0.3})), PhaseFunction::zero(1.1)};
  for (const auto& e : load_gate_table(GateTable::BetaTable)) pfs.push_back(e.phase());
  for (const auto& pf : pfs) {
    const auto p = synthesize(pf, 1000, true);
    const auto tr = invert_chi(pf, 1000);
    CHECK(p.duration() == doctest::Approx(2.0 * oracle_arc_length(pf, pf.chi_f())).epsilon(1e-9));
    CHECK(tr.end_mismatch < 1e-9);
  }
}

TEST_CASE("refining the time grid leaves shared samples unchanged") {
  const auto pf = oracle::scan_zero_phase();
  const auto a = synthesize(pf, 501, true), b = synthesize(pf, 1001, true);
  const double dt = a.samples[1].t - a.samples[0].t;
  double worst = 0.0;
  for (std::size_t i = 0; i < a.samples.size(); ++i)
    worst = std::max(worst, std::abs(a.samples[i].omega - b.samples[2 * i].omega));
  CHECK(worst < dt * dt);
}

TEST_CASE("diverging general pulse is rejected") {
  // Φ' vanishes at χ_f = π/4 but Φ'' = −2a1a2² does not.
  const PhaseFunction pf(Family::Sin2Sin3, {2.0, 1000.0, 0.0, 0.0}, kPi / 4);
  CHECK_THROWS_AS(synthesize(pf, 16, false), EndpointDivergence);
}

TEST_CASE("sphere curve starts at the pole and ends at chi_f / 2") {
  for (double a3 : {-0.5, 0.0, 0.9}) {
    const auto pts = sphere_curve(oracle::scan_template(a3, 0.2), 50);
    CHECK(pts.front().polar == 0.0);
    CHECK(pts.front().azimuth == 0.0);
    CHECK(pts.back().polar == doctest::Approx(2.8 * kPi / 8));
  }
  CHECK_THROWS_AS(sphere_curve(PhaseFunction::zero(1.0), 1), DomainError);
}

TEST_CASE("sphere curve length gives the pulse duration") {
  for (const auto& pf : {oracle::scan_zero_phase(), oracle::generator_phase()}) {
    const double len = sphere_curve_length(sphere_curve(pf, 10000));
    const auto p = synthesize(pf, 100, true);
    CHECK(2.0 * len == doctest::Approx(p.duration()).epsilon(1e-3));
  }
}

TEST_CASE("pulse CSV round-trips in both unit systems") {
  const auto p = synthesize(oracle::generator_phase(), 200, true);
  for (double b : {1.0, 5.0}) {
    std::stringstream ss;
    write_pulse_csv(ss, p, {b});
    const auto back = read_pulse_csv(ss);
    CHECK(back.antisymmetric);
    CHECK(back.t_f == doctest::Approx(p.t_f).epsilon(1e-14));
    REQUIRE(back.samples.size() == p.samples.size());
    for (std::size_t i = 0; i < p.samples.size(); ++i)
      CHECK(back.samples[i].omega == doctest::Approx(p.samples[i].omega).epsilon(1e-14));
  }
  std::stringstream bad("# beta0=1\nt,omega\n0,1\nx,y\n");
  CHECK_THROWS_AS(read_pulse_csv(bad), ValidationError);
}

TEST_CASE("physical units scale time and drive") {
  const auto p = synthesize(oracle::generator_phase(), 100, true);
  std::stringstream ss;
  write_pulse_csv(ss, p, {5.0});
  std::string line;
  std::getline(ss, line);
  CHECK(line == "# beta0=5");
  std::getline(ss, line);
  std::getline(ss, line);
  CHECK(line.rfind("# duration=", 0) == 0);
  CHECK(std::stod(line.substr(11)) == doctest::Approx(p.duration() / 5.0));
}
