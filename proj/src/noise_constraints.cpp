#include "smoothgate/noise_constraints.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include <math.h>  // boost pchip calls unqualified isnan

#include <boost/math/interpolators/pchip.hpp>

#include "smoothgate/errors.hpp"
#include "smoothgate/numerics/parallel.hpp"
#include "smoothgate/numerics/quadrature.hpp"

namespace smoothgate {

namespace {

using cd = std::complex<double>;

numerics::QuadratureOptions quad(double tol) {
  numerics::QuadratureOptions o;
  o.abs_tol = tol;
  o.max_intervals = 20000;
  return o;
}

cd phase2(double phi) { return std::polar(1.0, 2.0 * phi); }

// Cumulative ∫₀^{χᵢ} f dχ over the trajectory samples, segment by segment.
template <typename F>
std::vector<cd> cumulative(const ChiTrajectory& tr, F&& f) {
  std::vector<cd> out(tr.size());
  cd acc{};
  numerics::QuadratureOptions o = quad(1e-14);
  for (std::size_t i = 1; i < tr.size(); ++i) {
    acc += numerics::try_integrate(f, tr.chi[i - 1], tr.chi[i], o).value;
    out[i] = acc;
  }
  return out;
}

}  // namespace

std::string_view to_string(NoiseKind k) { return k == NoiseKind::Beta ? "beta" : "epsilon"; }

std::string_view to_string(GModel g) {
  switch (g) {
    case GModel::Amplitude: return "amplitude";
    case GModel::Additive: return "additive";
    case GModel::Custom: return "custom";
  }
  return "unknown";
}

NoiseKind noise_kind_from_string(std::string_view s) {
  if (s == "beta") return NoiseKind::Beta;
  if (s == "epsilon") return NoiseKind::Epsilon;
  throw ValidationError("unknown noise kind '" + std::string(s) + "'");
}

GModel g_model_from_string(std::string_view s) {
  for (auto g : {GModel::Amplitude, GModel::Additive, GModel::Custom})
    if (to_string(g) == s) return g;
  throw ValidationError("unknown g model '" + std::string(s) + "'");
}

GTable::GTable(std::vector<double> chi, std::vector<double> g) {
  if (chi.size() != g.size()) throw ValidationError("g table columns differ in length");
  if (chi.size() < 4) throw ValidationError("g table needs at least 4 points");
  for (std::size_t i = 1; i < chi.size(); ++i)
    if (!(chi[i] > chi[i - 1])) throw ValidationError("g table abscissae must increase strictly");
  for (double v : g)
    if (!std::isfinite(v)) throw ValidationError("g table values must be finite");
  lo_ = chi.front();
  hi_ = chi.back();
  auto spline =
      std::make_shared<boost::math::interpolators::pchip<std::vector<double>>>(std::move(chi), std::move(g));
  f_ = std::make_shared<const std::function<double(double)>>(
      [spline](double x) { return (*spline)(x); });
}

double GTable::operator()(double chi) const { return (*f_)(std::clamp(chi, lo_, hi_)); }

double g_tilde(const PhaseFunction& pf, const NoiseSpec& noise, double chi) {
  switch (noise.g_model) {
    case GModel::Amplitude: return omega_unchecked(pf, chi);
    case GModel::Additive: return 1.0;
    case GModel::Custom:
      if (!noise.table) throw ValidationError("custom g model without a table");
      return (*noise.table)(chi);
  }
  return 0.0;
}

ConstraintResidual residual_beta(const PhaseFunction& pf, bool antisymmetric, double tol) {
  const double xf = pf.chi_f();
  auto f = [&](double x) {
    const double s = std::sin(2.0 * x);
    return s * s * phase2(pf.eval_unchecked(x).value);
  };
  const auto I = numerics::integrate(f, 0.0, xf, quad(tol / 8.0));
  ConstraintResidual r;
  r.primary = std::sin(4.0 * xf) + 8.0 * std::conj(phase2(pf.eval_unchecked(xf).value)) * I.value;
  r.primary_error = 8.0 * I.error;
  if (!antisymmetric) {
    auto g = [&](double x) {
      const double s = std::sin(2.0 * x);
      return pf.eval_unchecked(x).d1 * s * s;
    };
    const auto J = numerics::integrate(g, 0.0, xf, quad(tol));
    r.secondary = J.value;
    r.secondary_error = J.error;
    r.has_secondary = true;
  }
  return r;
}

ConstraintResidual residual_epsilon(const PhaseFunction& pf, const NoiseSpec& noise,
                                    bool antisymmetric, double tol) {
  if (noise.kind != NoiseKind::Epsilon) throw ValidationError("residual_epsilon needs epsilon noise");
  if (noise.g_model == GModel::Custom) {
    if (!noise.table) throw ValidationError("custom g model without a table");
    if (noise.table->lo() > 1e-12 || noise.table->hi() < pf.chi_f() - 1e-12)
      throw ValidationError("custom g table does not cover [0, chi_f]");
  }
  const double xf = pf.chi_f();
  auto f = [&](double x) {
    const double s = std::sin(2.0 * x);
    return s * speed_factor(pf, x) * g_tilde(pf, noise, x) * phase2(pf.eval_unchecked(x).value);
  };
  const auto I = numerics::integrate(f, 0.0, xf, quad(tol));
  ConstraintResidual r;
  r.primary = I.value;
  r.primary_error = I.error;
  if (!antisymmetric) {
    auto g = [&](double x) { return std::cos(2.0 * x) * g_tilde(pf, noise, x) * speed_factor(pf, x); };
    const auto J = numerics::integrate(g, 0.0, xf, quad(tol));
    r.secondary = J.value;
    r.secondary_error = J.error;
    r.has_secondary = true;
  }
  return r;
}

ConstraintResidual residual(const PhaseFunction& pf, const NoiseSpec& noise, bool antisymmetric,
                            double tol) {
  return noise.kind == NoiseKind::Beta ? residual_beta(pf, antisymmetric, tol)
                                       : residual_epsilon(pf, noise, antisymmetric, tol);
}

std::vector<double> delta_chi_beta(const PhaseFunction& pf, const ChiTrajectory& tr) {
  const auto acc = cumulative(tr, [&](double x) {
    const double s = std::sin(2.0 * x);
    return s * s * phase2(pf.eval_unchecked(x).value);
  });
  std::vector<double> out(tr.size());
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const double x = tr.chi[i];
    const cd w = std::conj(phase2(pf.eval_unchecked(x).value)) * acc[i];
    out[i] = 2.0 * (std::sin(4.0 * x) / 8.0 + w.real());
  }
  return out;
}

std::vector<double> delta_chi_epsilon(const PhaseFunction& pf, const ChiTrajectory& tr,
                                      const NoiseSpec& noise) {
  const auto acc = cumulative(tr, [&](double x) {
    return std::sin(2.0 * x) * g_tilde(pf, noise, x) * speed_factor(pf, x) *
           phase2(pf.eval_unchecked(x).value);
  });
  std::vector<double> out(tr.size());
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const cd w = std::conj(phase2(pf.eval_unchecked(tr.chi[i]).value)) * acc[i];
    out[i] = -w.imag();
  }
  return out;
}

double PotentialAxis::value(std::size_t k) const noexcept {
  if (points < 2) return lo;
  return lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(points - 1);
}

std::size_t PotentialGrid::failed_cells() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(errors.begin(), errors.end(), [](const std::string& e) { return !e.empty(); }));
}

std::vector<PotentialGrid::Minimum> PotentialGrid::local_minima() const {
  std::vector<Minimum> out;
  const std::size_t n1 = axis1.points, n2 = axis2.points;
  for (std::size_t i = 1; i + 1 < n1; ++i) {
    for (std::size_t j = 1; j + 1 < n2; ++j) {
      const double v = at(i, j);
      if (!std::isfinite(v)) continue;
      bool lowest = true;
      for (int di = -1; di <= 1 && lowest; ++di)
        for (int dj = -1; dj <= 1 && lowest; ++dj) {
          if (di == 0 && dj == 0) continue;
          const double w = at(i + di, j + dj);
          if (!(v < w)) lowest = false;
        }
      if (lowest) out.push_back({i, j, axis1.value(i), axis2.value(j), v});
    }
  }
  std::sort(out.begin(), out.end(), [](const Minimum& a, const Minimum& b) { return a.value < b.value; });
  return out;
}

PotentialGrid error_potential(const PhaseFunction& pf_template, const NoiseSpec& noise,
                              bool antisymmetric, const PotentialAxis& axis1,
                              const PotentialAxis& axis2, std::size_t workers) {
  const auto ncoef = pf_template.coefficients().size();
  if (axis1.index >= ncoef || axis2.index >= ncoef)
    throw DomainError("potential axis index beyond the coefficient list");
  if (axis1.index == axis2.index) throw DomainError("potential axes must differ");
  for (const auto* ax : {&axis1, &axis2})
    if (!std::isfinite(ax->lo) || !std::isfinite(ax->hi) || ax->points < 2)
      throw DomainError("potential axis bounds must be finite with at least 2 points");

  PotentialGrid grid{axis1, axis2, {}, {}};
  const std::size_t cells = axis1.points * axis2.points;
  grid.values.assign(cells, std::numeric_limits<double>::quiet_NaN());
  grid.errors.assign(cells, {});
  const std::vector<double> base(pf_template.coefficients().begin(), pf_template.coefficients().end());

  numerics::parallel_for(cells, workers, [&](std::size_t k) {
    const std::size_t i = k / axis2.points, j = k % axis2.points;
    try {
      auto c = base;
      c[axis1.index] = axis1.value(i);
      c[axis2.index] = axis2.value(j);
      const auto pf = pf_template.with_coefficients(std::move(c));
      grid.values[k] = residual(pf, noise, antisymmetric).magnitude();
    } catch (const std::exception& e) {
      grid.errors[k] = e.what();
    }
  });
  return grid;
}

void write_potential_csv(std::ostream& out, const PotentialGrid& grid) {
  out << std::setprecision(17);
  out << "# param1=a" << grid.axis1.index + 1 << '\n';
  out << "# param2=a" << grid.axis2.index + 1 << '\n';
  out << "# failed_cells=" << grid.failed_cells() << '\n';
  out << "param1,param2,abs_residual\n";
  for (std::size_t i = 0; i < grid.axis1.points; ++i)
    for (std::size_t j = 0; j < grid.axis2.points; ++j)
      out << grid.axis1.value(i) << ',' << grid.axis2.value(j) << ',' << grid.at(i, j) << '\n';
}

}  // namespace smoothgate
