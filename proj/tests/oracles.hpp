#pragma once

// Independent reference computations. Nothing here calls the library's
// numerics; only its value types are used.

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "smoothgate/dynamics.hpp"
#include "smoothgate/phase_ansatz.hpp"

namespace oracle {

using cd = std::complex<double>;
inline constexpr double kPi = std::numbers::pi;

/// Composite Simpson rule on n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, std::size_t n) {
  if (n % 2) ++n;
  const double h = (b - a) / static_cast<double>(n);
  double s = f(a) + f(b);
  for (std::size_t i = 1; i < n; ++i) s += f(a + h * static_cast<double>(i)) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

inline cd simpson_c(const std::function<cd(double)>& f, double a, double b, std::size_t n) {
  const double re = simpson([&](double x) { return f(x).real(); }, a, b, n);
  const double im = simpson([&](double x) { return f(x).imag(); }, a, b, n);
  return {re, im};
}

inline Eigen::Matrix2cd sx() {
  Eigen::Matrix2cd m;
  m << 0, 1, 1, 0;
  return m;
}
inline Eigen::Matrix2cd sy() {
  Eigen::Matrix2cd m;
  m << 0, cd(0, -1), cd(0, 1), 0;
  return m;
}
inline Eigen::Matrix2cd sz() {
  Eigen::Matrix2cd m;
  m << 1, 0, 0, -1;
  return m;
}

/// 1/2 − (1/12) Σⱼ Tr{V σⱼ V† U σⱼ U†}, term by term.
inline double bowdrey(const Eigen::Matrix2cd& u, const Eigen::Matrix2cd& v) {
  double sum = 0.0;
  for (const auto& s : {sx(), sy(), sz()})
    sum += (v * s * v.adjoint() * u * s * u.adjoint()).trace().real();
  return 0.5 - sum / 12.0;
}

/// exp(−i t (Ω σz + β σx)) from the eigen-decomposition of the Hermitian generator.
inline Eigen::Matrix2cd expm_step(double omega, double beta, double t) {
  Eigen::Matrix2cd h = omega * sz() + beta * sx();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(h);
  Eigen::Matrix2cd d = Eigen::Matrix2cd::Zero();
  for (int k = 0; k < 2; ++k) d(k, k) = std::exp(cd(0.0, -t * es.eigenvalues()(k)));
  return es.eigenvectors() * d * es.eigenvectors().adjoint();
}

/// R(θ, φ) = exp[−i (sinθ σy + cosθ σx) φ/2] by the Pauli closed form.
inline Eigen::Matrix2cd rotation(double theta, double phi) {
  const Eigen::Matrix2cd n = std::sin(theta) * sy() + std::cos(theta) * sx();
  return std::cos(phi / 2.0) * Eigen::Matrix2cd::Identity() - cd(0.0, std::sin(phi / 2.0)) * n;
}

inline Eigen::Matrix2cd random_unitary(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Eigen::Matrix2cd a;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) a(i, j) = cd(n(rng), n(rng));
  Eigen::HouseholderQR<Eigen::Matrix2cd> qr(a);
  return qr.householderQ();
}

/// Largest element-wise deviation of two SU(2) operators (no phase freedom).
inline double max_abs_diff(const smoothgate::EvolutionOperator& a, const smoothgate::EvolutionOperator& b) {
  return (a.matrix() - b.matrix()).cwiseAbs().maxCoeff();
}

/// Polynomial scan template at φ = 2.8π with a1, a2 fixed.
inline smoothgate::PhaseFunction scan_template(double a3, double a4) {
  return {smoothgate::Family::PolySin3, {0.74, -0.18, a3, a4}, 0.7 * kPi};
}

/// Central zero of the (a3, a4) scan with 2t_f ≈ 4.96 and max|Ω| ≈ 2.54.
inline smoothgate::PhaseFunction scan_zero_phase() { return scan_template(-0.04216584, 0.17234596); }

/// Φ = 4χ − sin 4χ.
inline smoothgate::PhaseFunction generator_phase() {
  return smoothgate::analytic_beta_family(1, smoothgate::ZetaFunction(1, {}));
}

}  // namespace oracle
