#include "smoothgate/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "smoothgate/benchmark.hpp"
#include "smoothgate/constraint_solver.hpp"
#include "smoothgate/errors.hpp"
#include "smoothgate/numerics/parallel.hpp"

namespace smoothgate::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// JSON config files: top-level keys are global options, nested objects are
// subcommand sections.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}"; }

  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw CLI::ConversionError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config must be a JSON object");
    std::vector<CLI::ConfigItem> items;
    walk(j, {}, items);
    return items;
  }

 private:
  static std::string scalar(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    return v.dump();
  }

  static void walk(const json& j, const std::vector<std::string>& parents,
                   std::vector<CLI::ConfigItem>& items) {
    for (const auto& [key, value] : j.items()) {
      if (value.is_object()) {
        auto p = parents;
        p.push_back(key);
        walk(value, p, items);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_array())
        for (const auto& v : value) item.inputs.push_back(scalar(v));
      else
        item.inputs.push_back(scalar(value));
      items.push_back(std::move(item));
    }
  }
};

struct Globals {
  std::size_t workers = 0;
  std::string out = "run";
  std::string units = "dimensionless";
  double beta0_mhz = 1.0;

  json to_json() const {
    return {{"workers", workers}, {"out", out}, {"units", units}, {"beta0_mhz", beta0_mhz}};
  }
};

struct PhaseSource {
  std::string phase;
  std::string table;
  std::string row;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--phase", phase, "Phase function JSON (file path or inline object)");
    cmd->add_option("--table", table, "Take the phase function from a bundled table")
        ->check(CLI::IsMember({"epsilon", "beta"}));
    cmd->add_option("--row", row, "Row label within --table, e.g. R(pi/6,2.8pi)");
  }
  json to_json() const { return {{"phase", phase}, {"table", table}, {"row", row}}; }
};

// Input errors are usage errors.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<GateTableEntry> table_rows(const std::string& name) {
  return load_gate_table(name == "beta" ? GateTable::BetaTable : GateTable::EpsilonTable);
}

std::pair<PhaseFunction, std::optional<GateTableEntry>> load_phase(const PhaseSource& src) {
  if (!src.phase.empty() && !src.table.empty()) throw UsageError("give either --phase or --table, not both");
  if (!src.table.empty()) {
    for (auto& e : table_rows(src.table))
      if (e.label == src.row) return {e.phase(), e};
    throw UsageError("no row '" + src.row + "' in table " + src.table);
  }
  if (src.phase.empty()) throw UsageError("a phase function is required (--phase or --table/--row)");
  json j;
  try {
    if (src.phase.front() == '{') {
      j = json::parse(src.phase);
    } else {
      std::ifstream f(src.phase);
      if (!f) throw UsageError("cannot open phase file " + src.phase);
      j = json::parse(f);
    }
    return {phase_from_json(j), std::nullopt};
  } catch (const json::exception& e) {
    throw UsageError(std::string("bad phase JSON: ") + e.what());
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream f(p);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << text;
}

fs::path prepare_run_dir(const Globals& g, const std::string& command, const json& options) {
  const fs::path dir(g.out);
  fs::create_directories(dir);
  json cfg = g.to_json();
  cfg[command] = options;
  write_file(dir / "resolved_config.json", cfg.dump(2) + "\n");
  return dir;
}

TargetRotation parse_target(const std::vector<double>& v) {
  if (v.size() != 2) throw UsageError("--target expects theta,phi");
  try {
    return TargetRotation(v[0], v[1]);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

// ---------------------------------------------------------------------------

struct SolveOptions {
  std::vector<double> target;
  std::string noise = "epsilon";
  std::string family = "sin2sin3";
  std::vector<double> base;
  std::vector<std::size_t> free;
  int n3 = 1;
  std::string g_model = "amplitude";
  bool general = false;
  bool keep_a1 = false;
  std::size_t starts = 16;
  std::uint64_t seed = 1;
  double tol = 1e-8;
  std::vector<double> box{-10.0, 10.0};
  std::size_t max_evals = 3000;

  json to_json() const {
    return {{"target", target}, {"noise", noise},     {"family", family},     {"base", base},
            {"free", free},     {"n3", n3},           {"g-model", g_model},   {"general", general},
            {"keep-a1", keep_a1}, {"starts", starts}, {"seed", seed},         {"tol", tol},
            {"box", box},       {"max-evals", max_evals}};
  }
};

int cmd_solve(const Globals& g, SolveOptions o, std::ostream& out, std::ostream& err) {
  SolveRequest req;
  req.target = parse_target(o.target);
  req.family = family_from_string(o.family);
  req.aux.n3 = o.n3;
  req.g_model = g_model_from_string(o.g_model);
  req.antisymmetric = !o.general;
  req.fit_endpoint = !o.keep_a1;
  req.starts = o.starts;
  req.seed = o.seed;
  req.tol = o.tol;
  if (o.box.size() != 2) throw UsageError("--box expects lo,hi");
  req.box_lo = o.box[0];
  req.box_hi = o.box[1];
  req.max_evaluations = o.max_evals;
  req.workers = g.workers;
  if (o.noise == "both") req.noise_kinds = {NoiseKind::Beta, NoiseKind::Epsilon};
  else req.noise_kinds = {noise_kind_from_string(o.noise)};

  if (o.base.empty() && req.family != Family::AnalyticBeta && req.family != Family::Zero) {
    // Default template: a matching bundled row if any, else a2 = 1.
    o.base.assign(coefficient_count(req.family), 0.0);
    if (req.family != Family::PolySin3) o.base[1] = 1.0;
    const char* table = req.family == Family::Sin2Sin3 ? "epsilon"
                        : req.family == Family::Sin2Mixed ? "beta"
                                                          : nullptr;
    if (table)
      for (const auto& e : table_rows(table))
        if (std::abs(e.target.theta - req.target.theta) < 1e-6 &&
            std::abs(e.target.phi - req.target.phi) < 1e-6) {
          o.base[1] = e.coefficients[1];
          if (o.n3 == 1) req.aux.n3 = e.aux.n3;
        }
  }
  req.base_coefficients = o.base;
  if (o.free.empty()) {
    switch (req.family) {
      case Family::PolySin3:
      case Family::Sin2Sin3: o.free = {3, 4}; break;
      case Family::Sin2Mixed: o.free = {3, 4, 5}; break;
      default: break;
    }
  }
  for (auto i : o.free) {
    if (i < 1) throw UsageError("--free indices are 1-based");
    req.free_indices.push_back(i - 1);
  }

  const auto dir = prepare_run_dir(g, "solve", o.to_json());
  try {
    const auto sols = solve(req);
    json arr = json::array();
    for (const auto& s : sols) arr.push_back(to_json(s));
    write_file(dir / "solutions.json", arr.dump(2) + "\n");
    out << sols.size() << " solution(s); shortest duration " << sols.front().duration << '\n';
    return kSuccess;
  } catch (const SolverExhausted& e) {
    write_file(dir / "solutions.json",
               json{{"error", e.what()}, {"best_objective", e.best_objective()}}.dump(2) + "\n");
    err << "solver exhausted: " << e.what() << " (best objective " << e.best_objective() << ")\n";
    return kSolverExhausted;
  }
}

// ---------------------------------------------------------------------------

struct SynthOptions {
  PhaseSource source;
  std::size_t samples = 10000;
  std::size_t sphere_samples = 1000;
  bool general = false;

  json to_json() const {
    auto j = source.to_json();
    j["samples"] = samples;
    j["sphere-samples"] = sphere_samples;
    j["general"] = general;
    return j;
  }
};

int cmd_synth(const Globals& g, const SynthOptions& o, std::ostream& out, std::ostream& err) {
  const auto [pf, entry] = load_phase(o.source);
  if (o.samples < 16) throw UsageError("--samples must be at least 16");
  const auto dir = prepare_run_dir(g, "synth", o.to_json());
  const UnitScale units{g.units == "mhz" ? g.beta0_mhz : 1.0};
  try {
    const auto pulse = synthesize(pf, o.samples, !o.general);
    {
      std::ofstream f(dir / "pulse.csv");
      write_pulse_csv(f, pulse, units);
    }
    {
      std::ofstream f(dir / "sphere.csv");
      write_sphere_csv(f, sphere_curve(pf, std::max<std::size_t>(2, o.sphere_samples)));
    }
    const auto u = propagate(pulse);
    json summary = {{"phase_function", to_json(pf)},
                    {"t_f", pulse.t_f},
                    {"duration", pulse.duration()},
                    {"max_abs_omega", pulse.max_abs_omega()},
                    {"evolution", to_json(u)}};
    if (g.units == "mhz")
      summary["physical"] = {{"beta0_mhz", g.beta0_mhz},
                             {"duration_us", pulse.duration() / g.beta0_mhz},
                             {"max_abs_omega_mhz", pulse.max_abs_omega() * g.beta0_mhz}};
    if (entry) summary["infidelity_vs_target"] = infidelity(u, rotation(entry->target));
    write_file(dir / "summary.json", summary.dump(2) + "\n");
    out << "duration " << pulse.duration() / units.beta0 << (g.units == "mhz" ? " us" : " /beta0")
        << ", max |omega| " << pulse.max_abs_omega() * units.beta0 << '\n';
    return kSuccess;
  } catch (const EndpointDivergence& e) {
    err << "synthesis failed: " << e.what() << " (|omega(chi_f)| = " << e.omega_end() << ")\n";
    return kSynthesisFailure;
  } catch (const NumericError& e) {
    err << "synthesis failed: " << e.what() << '\n';
    return kSynthesisFailure;
  }
}

// ---------------------------------------------------------------------------

struct VerifyOptions {
  std::string table = "all";
  std::string tables_file;
  std::size_t samples = 10000;

  json to_json() const { return {{"table", table}, {"tables", tables_file}, {"samples", samples}}; }
};

int cmd_verify(const Globals& g, const VerifyOptions& o, std::ostream& out, std::ostream&) {
  std::optional<json> doc;
  if (!o.tables_file.empty()) {
    std::ifstream f(o.tables_file);
    if (!f) throw UsageError("cannot open table file " + o.tables_file);
    try {
      doc = json::parse(f);
    } catch (const json::exception& e) {
      throw UsageError(std::string("bad table JSON: ") + e.what());
    }
  }
  std::vector<std::pair<std::string, std::vector<GateTableEntry>>> tables;
  for (const std::string name : {"epsilon", "beta"}) {
    if (o.table != "all" && o.table != name) continue;
    const auto kind = name == "beta" ? GateTable::BetaTable : GateTable::EpsilonTable;
    try {
      tables.emplace_back(name, doc ? load_gate_table(kind, *doc) : load_gate_table(kind));
    } catch (const json::exception& e) {
      throw UsageError(std::string("bad table JSON: ") + e.what());
    }
  }

  const auto dir = prepare_run_dir(g, "verify-tables", o.to_json());
  json report = json::object();
  bool all = true;
  for (const auto& [name, rows] : tables) {
    std::vector<VerificationReport> reps(rows.size());
    numerics::parallel_for(rows.size(), g.workers,
                           [&](std::size_t i) { reps[i] = verify_entry(rows[i], o.samples); });
    json arr = json::array();
    for (const auto& r : reps) {
      all = all && r.passed;
      out << (r.passed ? "PASS " : "FAIL ") << name << ' ' << r.label << " residual=" << r.residual
          << " infidelity=" << r.infidelity << (r.error.empty() ? "" : " error=" + r.error) << '\n';
      arr.push_back(to_json(r));
    }
    report[name] = arr;
  }
  report["all_passed"] = all;
  write_file(dir / "verification.json", report.dump(2) + "\n");
  return all ? kSuccess : kVerificationFailure;
}

// ---------------------------------------------------------------------------

struct SweepOptions {
  PhaseSource source;
  std::string noise = "epsilon";
  std::string g_model = "amplitude";
  std::size_t points = 20;
  double lo = 1e-3;
  double hi = 1e-1;
  double fit_lo = 1e-3;
  double fit_hi = 3e-2;
  std::size_t samples = 10000;
  std::vector<double> target;
  bool general = false;

  json to_json() const {
    auto j = source.to_json();
    j.update({{"noise", noise},   {"g-model", g_model}, {"points", points}, {"lo", lo},
              {"hi", hi},         {"fit-lo", fit_lo},   {"fit-hi", fit_hi}, {"samples", samples},
              {"target", target}, {"general", general}});
    return j;
  }
};

int cmd_sweep(const Globals& g, const SweepOptions& o, std::ostream& out, std::ostream& err) {
  const auto [pf, entry] = load_phase(o.source);
  NoiseSpec noise{noise_kind_from_string(o.noise), g_model_from_string(o.g_model), std::nullopt};
  if (noise.g_model == GModel::Custom) throw UsageError("sweep supports amplitude or additive g models");
  std::vector<double> grid;
  try {
    grid = default_sweep_grid(o.points, o.lo, o.hi);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  const FitWindow window{o.fit_lo, o.fit_hi};
  const auto dir = prepare_run_dir(g, "sweep", o.to_json());
  Pulse pulse;
  try {
    pulse = synthesize(pf, o.samples, !o.general);
  } catch (const Error& e) {
    err << "synthesis failed: " << e.what() << '\n';
    return kSynthesisFailure;
  }
  EvolutionOperator target = propagate(pulse);
  if (!o.target.empty()) target = rotation(parse_target(o.target));
  else if (entry) target = rotation(entry->target);

  const auto designed = noise_sweep(pulse, noise, grid, window, g.workers);
  const auto baseline = noise_sweep(square_baseline(target), noise, grid, window, g.workers);
  {
    std::ofstream f(dir / "sweep_pulse.csv");
    write_sweep_csv(f, designed);
  }
  {
    std::ofstream f(dir / "sweep_baseline.csv");
    write_sweep_csv(f, baseline);
  }
  {
    std::ofstream f(dir / "sweep.csv");
    f << std::setprecision(17) << "noise,pulse,baseline\n";
    for (std::size_t i = 0; i < grid.size(); ++i)
      f << grid[i] << ',' << designed.infidelities[i] << ',' << baseline.infidelities[i] << '\n';
    f << "# pulse fit_c=" << designed.fit.coefficient << ", fit_p=" << designed.fit.exponent << '\n';
    f << "# baseline fit_c=" << baseline.fit.coefficient << ", fit_p=" << baseline.fit.exponent << '\n';
  }
  write_file(dir / "sweep.json", json{{"pulse", to_json(designed)}, {"baseline", to_json(baseline)}}.dump(2) + "\n");
  out << "pulse    c=" << designed.fit.coefficient << " p=" << designed.fit.exponent << '\n';
  out << "baseline c=" << baseline.fit.coefficient << " p=" << baseline.fit.exponent << '\n';
  return kSuccess;
}

// ---------------------------------------------------------------------------

struct PotentialOptions {
  PhaseSource source;
  std::vector<std::size_t> axes{3, 4};
  std::vector<double> range1{-3.0, 3.0};
  std::vector<double> range2{-3.0, 3.0};
  std::size_t points = 101;
  std::string noise = "epsilon";
  std::string g_model = "amplitude";
  bool general = false;

  json to_json() const {
    auto j = source.to_json();
    j.update({{"axes", axes},     {"range1", range1},   {"range2", range2}, {"points", points},
              {"noise", noise},   {"g-model", g_model}, {"general", general}});
    return j;
  }
};

int cmd_potential(const Globals& g, const PotentialOptions& o, std::ostream& out, std::ostream&) {
  const auto [pf, entry] = load_phase(o.source);
  if (o.axes.size() != 2 || o.axes[0] < 1 || o.axes[1] < 1) throw UsageError("--axes expects two 1-based indices");
  if (o.range1.size() != 2 || o.range2.size() != 2) throw UsageError("--range1/--range2 expect lo,hi");
  const PotentialAxis a1{o.axes[0] - 1, o.range1[0], o.range1[1], o.points};
  const PotentialAxis a2{o.axes[1] - 1, o.range2[0], o.range2[1], o.points};
  const NoiseSpec noise{noise_kind_from_string(o.noise), g_model_from_string(o.g_model), std::nullopt};
  const auto dir = prepare_run_dir(g, "potential", o.to_json());
  PotentialGrid grid;
  try {
    grid = error_potential(pf, noise, !o.general, a1, a2, g.workers);
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  {
    std::ofstream f(dir / "potential.csv");
    write_potential_csv(f, grid);
  }
  json minima = json::array();
  for (const auto& m : grid.local_minima())
    minima.push_back({{"param1", m.p1}, {"param2", m.p2}, {"abs_residual", m.value}});
  write_file(dir / "minima.json", minima.dump(2) + "\n");
  out << grid.values.size() << " cells, " << grid.failed_cells() << " failed, " << minima.size()
      << " local minima\n";
  return kSuccess;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Smooth, noise-robust control pulses for a driven two-level system", "smoothgate"};
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON config file; command-line flags override its values");
  app.require_subcommand(1, 1);

  Globals g;
  app.add_option("--workers", g.workers, "Worker threads (default: PULSE_WORKERS or logical cores)");
  app.add_option("--out", g.out, "Run directory for outputs");
  app.add_option("--units", g.units, "Export units")->check(CLI::IsMember({"dimensionless", "mhz"}));
  app.add_option("--beta0-mhz", g.beta0_mhz, "beta0 in MHz for --units mhz")->check(CLI::PositiveNumber);

  SolveOptions so;
  auto* solve_cmd = app.add_subcommand("solve", "Find ansatz parameters that cancel first-order noise");
  solve_cmd->add_option("--target", so.target, "theta,phi in radians")->required()->delimiter(',')->expected(2);
  solve_cmd->add_option("--noise", so.noise)->check(CLI::IsMember({"beta", "epsilon", "both"}));
  solve_cmd->add_option("--family", so.family)
      ->check(CLI::IsMember({"poly-sin3", "sin2sin3", "sin2-mixed", "analytic-beta", "zero"}));
  solve_cmd->add_option("--base", so.base, "Template coefficients a1,a2,...")->delimiter(',');
  solve_cmd->add_option("--free", so.free, "1-based free coefficient indices")->delimiter(',');
  solve_cmd->add_option("--n3", so.n3)->check(CLI::PositiveNumber);
  solve_cmd->add_option("--g-model", so.g_model)->check(CLI::IsMember({"amplitude", "additive"}));
  solve_cmd->add_flag("--general", so.general, "Non-antisymmetric pulse (adds secondary constraints)");
  solve_cmd->add_flag("--keep-a1", so.keep_a1, "Keep the template a1 instead of fitting the endpoint slope");
  solve_cmd->add_option("--starts", so.starts)->check(CLI::PositiveNumber);
  solve_cmd->add_option("--seed", so.seed);
  solve_cmd->add_option("--tol", so.tol)->check(CLI::PositiveNumber);
  solve_cmd->add_option("--box", so.box, "lo,hi of the start box")->delimiter(',')->expected(2);
  solve_cmd->add_option("--max-evals", so.max_evals)->check(CLI::PositiveNumber);

  SynthOptions sy;
  auto* synth_cmd = app.add_subcommand("synth", "Synthesize the waveform of a phase function");
  sy.source.add_to(synth_cmd);
  synth_cmd->add_option("--samples", sy.samples)->check(CLI::PositiveNumber);
  synth_cmd->add_option("--sphere-samples", sy.sphere_samples)->check(CLI::PositiveNumber);
  synth_cmd->add_flag("--general", sy.general, "Non-antisymmetric pulse");

  VerifyOptions vo;
  auto* verify_cmd = app.add_subcommand("verify-tables", "Verify the bundled gate tables");
  verify_cmd->add_option("--table", vo.table)->check(CLI::IsMember({"all", "epsilon", "beta"}));
  verify_cmd->add_option("--tables", vo.tables_file, "Table JSON file (default: the bundled tables)");
  verify_cmd->add_option("--samples", vo.samples)->check(CLI::PositiveNumber);

  SweepOptions sw;
  auto* sweep_cmd = app.add_subcommand("sweep", "Infidelity vs noise for a pulse and its square baseline");
  sw.source.add_to(sweep_cmd);
  sweep_cmd->add_option("--noise", sw.noise)->check(CLI::IsMember({"beta", "epsilon"}));
  sweep_cmd->add_option("--g-model", sw.g_model)->check(CLI::IsMember({"amplitude", "additive"}));
  sweep_cmd->add_option("--points", sw.points)->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--lo", sw.lo)->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--hi", sw.hi)->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--fit-lo", sw.fit_lo)->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--fit-hi", sw.fit_hi)->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--samples", sw.samples)->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--target", sw.target, "Baseline target theta,phi")->delimiter(',')->expected(2);
  sweep_cmd->add_flag("--general", sw.general);

  PotentialOptions po;
  auto* potential_cmd = app.add_subcommand("potential", "Error-potential grid over two coefficients");
  po.source.add_to(potential_cmd);
  potential_cmd->add_option("--axes", po.axes)->delimiter(',')->expected(2);
  potential_cmd->add_option("--range1", po.range1)->delimiter(',')->expected(2);
  potential_cmd->add_option("--range2", po.range2)->delimiter(',')->expected(2);
  potential_cmd->add_option("--points", po.points)->check(CLI::Range(2, 100000));
  potential_cmd->add_option("--noise", po.noise)->check(CLI::IsMember({"beta", "epsilon"}));
  potential_cmd->add_option("--g-model", po.g_model)->check(CLI::IsMember({"amplitude", "additive"}));
  potential_cmd->add_flag("--general", po.general);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsage;
  }
  if (g.workers == 0) g.workers = numerics::default_workers();

  try {
    if (*solve_cmd) return cmd_solve(g, so, out, err);
    if (*synth_cmd) return cmd_synth(g, sy, out, err);
    if (*verify_cmd) return cmd_verify(g, vo, out, err);
    if (*sweep_cmd) return cmd_sweep(g, sw, out, err);
    if (*potential_cmd) return cmd_potential(g, po, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const ValidationError& e) {
    err << "invalid input: " << e.what() << '\n';
    return kUsage;
  } catch (const DomainError& e) {
    err << "invalid input: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kSynthesisFailure;
  }
  return kUsage;
}

}  // namespace smoothgate::cli
