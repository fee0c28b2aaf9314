#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>
#include <utility>

#include <CLI11.hpp>

#include "susyscat/errors.hpp"
#include "susyscat/radial.hpp"
#include "susyscat/scattering.hpp"
#include "susyscat/susy.hpp"

namespace susyscat::cli {
namespace {

using nlohmann::json;

constexpr double kOracleTolerance = 1e-6;
constexpr double kWronskianTolerance = 1e-8;
constexpr double kDeterminantTolerance = 1e-8;
constexpr double kUnitarityTolerance = 1e-10;
constexpr double kRiccatiTolerance = 1e-7;
constexpr double kSelfWronskianTolerance = 1e-12;
constexpr double kPotentialTolerance = 1e-9;
constexpr double kCouplingFloor = 1e-3;
constexpr double kDecoupledCeiling = 1e-12;
constexpr double kOracleWindow = 0.01;

bool is_precondition(Errc code) {
  switch (code) {
    case Errc::invalid_argument:
    case Errc::invalid_width:
    case Errc::constraint_violation:
    case Errc::unsupported_input:
    case Errc::ambiguous_branch:
    case Errc::threshold:
    case Errc::dimension_mismatch:
    case Errc::pole_of_jost:
      return true;
    default:
      return false;
  }
}

double round12(double x) {
  if (!std::isfinite(x)) return x;
  return std::strtod(format_number(x).c_str(), nullptr);
}

json number(double x) {
  if (!std::isfinite(x)) return nullptr;
  return round12(x);
}

json complex_pair(cplx z) { return json::array({number(z.real()), number(z.imag())}); }

json config_echo(const RunConfig& c) {
  json j;
  auto put = [&j](const char* key, const std::optional<double>& v) {
    if (v) j[key] = *v;
  };
  put("delta", c.delta);
  put("er", c.e_r);
  put("gamma", c.gamma);
  put("kappa1", c.kappa1);
  put("kappa2", c.kappa2);
  put("beta", c.beta);
  j["emin"] = c.e_min;
  j["emax"] = c.e_max;
  j["points"] = c.points;
  j["rmax"] = c.r_max;
  j["step"] = c.step;
  j["format"] = c.format == OutputFormat::csv ? "csv" : "json";
  put("seed-re", c.seed_re);
  put("seed-im", c.seed_im);
  put("energy", c.energy);
  return j;
}

json model_echo(const feshbach::FeshbachParams& p) {
  return json{{"delta", number(p.delta())},   {"e_r", number(p.resonance_energy())}, {"gamma", number(p.width())},
              {"kappa1", number(p.kappa1())}, {"kappa2", number(p.kappa2())},        {"beta", number(p.beta())},
              {"alpha1", number(p.alpha1())}, {"alpha2", number(p.alpha2())}};
}

std::string model_line(const feshbach::FeshbachParams& p) {
  std::ostringstream os;
  os << "# model: delta=" << format_number(p.delta()) << " e_r=" << format_number(p.resonance_energy())
     << " gamma=" << format_number(p.width()) << " kappa1=" << format_number(p.kappa1())
     << " kappa2=" << format_number(p.kappa2()) << " beta=" << format_number(p.beta()) << '\n';
  return os.str();
}

std::string csv_header(const std::string& command, const RunConfig& config, const feshbach::FeshbachParams& p,
                       const std::vector<std::string>& notes) {
  std::string out = "# susyscat " + command + '\n';
  out += model_line(p);
  out += "# config: " + config_echo(config).dump() + '\n';
  for (const auto& note : notes) out += "# note: " + note + '\n';
  return out;
}

/// A table that renders as CSV (empty field for a missing value) or as JSON (null).
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::optional<double>>> rows;

  std::string csv() const {
    std::string out;
    for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + columns[i];
    out += '\n';
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out += ',';
        if (row[i]) out += format_number(*row[i]);
      }
      out += '\n';
    }
    return out;
  }

  json to_json() const {
    json data = json::array();
    for (const auto& row : rows) {
      json r = json::array();
      for (const auto& v : row) r.push_back(v ? number(*v) : json(nullptr));
      data.push_back(std::move(r));
    }
    return json{{"columns", columns}, {"rows", std::move(data)}};
  }
};

std::string render(const std::string& command, const RunConfig& config, const feshbach::FeshbachParams& p,
                   const Table& table, const std::vector<std::string>& notes) {
  if (config.format == OutputFormat::csv) return csv_header(command, config, p, notes) + table.csv();
  json j = table.to_json();
  j["command"] = command;
  j["config"] = config_echo(config);
  j["model"] = model_echo(p);
  j["notes"] = notes;
  return j.dump(2) + '\n';
}

/// Runs body(i) for i in [0, n) on up to `threads` workers; rethrows the first failure.
template <class Body>
void parallel_for(std::size_t n, unsigned threads, Body&& body) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), std::max<std::size_t>(n, 1)));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n && !failed; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          failed = true;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

struct Check {
  std::string name;
  bool pass = true;
  json detail;
};

radial::Potential closed_form_potential(const feshbach::FeshbachParams& p) {
  return [p](double r) { return feshbach::potential_matrix(p, r); };
}

std::vector<double> oracle_energies(double delta) {
  std::vector<double> energies;
  for (int j = 1; j <= 25; ++j) {
    const double e = 0.8 * j;
    if (std::abs(e - delta) >= kOracleWindow) energies.push_back(e);
  }
  return energies;
}

Check oracle_check(const RunConfig& config, const feshbach::FeshbachParams& p, const radial::RadialGrid& grid,
                   const std::vector<double>& energies) {
  const auto potential = closed_form_potential(p);
  const auto channels = p.channels();
  radial::IntegrationOptions options;
  options.throw_if_unreliable = false;
  std::vector<radial::CompareReport> reports(energies.size());
  std::vector<radial::NumericJost> numeric(energies.size());
  parallel_for(energies.size(), config.threads, [&](std::size_t i) {
    const auto momenta = ChannelMomenta::physical(channels, energies[i]);
    numeric[i] = radial::integrate_jost_inward(potential, momenta, grid, options);
    reports[i] = radial::oracle_compare(feshbach::jost_matrix(p, momenta), numeric[i].matrix);
  });
  Check check{"jost_oracle", true, {}};
  double worst = 0.0, worst_energy = 0.0, worst_estimate = 0.0;
  bool reliable = true;
  for (std::size_t i = 0; i < energies.size(); ++i) {
    if (reports[i].max_abs >= worst) {
      worst = reports[i].max_abs;
      worst_energy = energies[i];
    }
    worst_estimate = std::max(worst_estimate, numeric[i].estimated_error);
    reliable = reliable && numeric[i].reliable;
  }
  check.pass = worst < kOracleTolerance;
  check.detail = {{"energies", energies.size()},     {"max_abs", number(worst)},
                  {"worst_energy", number(worst_energy)}, {"tolerance", kOracleTolerance},
                  {"step", number(grid.step())},          {"r_max", number(grid.r_max())},
                  {"estimated_error", number(worst_estimate)}, {"reliable", reliable}};
  return check;
}

Check wronskian_check(const RunConfig& config, const feshbach::FeshbachParams& p, const radial::RadialGrid& grid) {
  const auto potential = closed_form_potential(p);
  const auto channels = p.channels();
  std::vector<double> energies;
  for (double e : {p.delta() + 2.0, p.delta() + 6.0, p.delta() + 10.0}) energies.push_back(e);
  std::vector<double> radii;
  for (int i = 1; i <= 10; ++i) radii.push_back(grid.r_max() * i / 11.0);
  radial::IntegrationOptions options;
  options.estimate_error = false;
  std::vector<double> worst(energies.size(), 0.0);
  parallel_for(energies.size(), config.threads, [&](std::size_t i) {
    const auto momenta = ChannelMomenta::physical(channels, energies[i]);
    const auto plus = radial::jost_solution_at(potential, momenta, grid, radii, options);
    const auto minus = radial::jost_solution_at(potential, momenta.negated(), grid, radii, options);
    const ComplexMatrix expected = (cplx(0.0, 2.0) * momenta.k).asDiagonal();
    for (std::size_t r = 0; r < radii.size(); ++r) {
      const ComplexMatrix w = radial::wronskian(minus[r], plus[r]);
      worst[i] = std::max(worst[i], (w - expected).norm() / expected.norm());
    }
  });
  const double max_rel = *std::max_element(worst.begin(), worst.end());
  return {"integration_wronskian",
          max_rel < kWronskianTolerance,
          {{"radii", radii.size()}, {"energies", energies}, {"max_rel", number(max_rel)}, {"tolerance", kWronskianTolerance}}};
}

Check determinant_check(const RunConfig& config, const feshbach::FeshbachParams& p, const radial::RadialGrid& grid,
                        const std::vector<double>& energies) {
  const auto potential = closed_form_potential(p);
  const auto channels = p.channels();
  std::vector<double> above;
  for (double e : energies)
    if (e > p.delta()) above.push_back(e);
  radial::IntegrationOptions options;
  options.estimate_error = false;
  std::vector<double> deviation(above.size(), 0.0);
  parallel_for(above.size(), config.threads, [&](std::size_t i) {
    const auto momenta = ChannelMomenta::physical(channels, above[i]);
    const auto plus = radial::integrate_jost_inward(potential, momenta, grid, options).matrix;
    const auto minus = radial::integrate_jost_inward(potential, momenta.negated(), grid, options).matrix;
    const cplx det_numeric = scattering::s_matrix(plus, minus, momenta, channels).matrix.determinant();
    const auto ph = scattering::phases(scattering::feshbach_s_matrix(p, above[i]));
    const cplx det_analytic = std::exp(cplx(0.0, 2.0 * (ph.delta1 + ph.delta2.value_or(0.0))));
    deviation[i] = std::abs(det_numeric - det_analytic);
  });
  const double worst = deviation.empty() ? 0.0 : *std::max_element(deviation.begin(), deviation.end());
  return {"determinant_consistency",
          worst < kDeterminantTolerance,
          {{"energies", above.size()}, {"max_abs", number(worst)}, {"tolerance", kDeterminantTolerance}}};
}

std::pair<Check, Check> s_matrix_checks(const RunConfig& config, const feshbach::FeshbachParams& p) {
  const auto channels = p.channels();
  const auto energies = scan_energies(config, channels);
  std::vector<double> unitarity(energies.size()), symmetry(energies.size()), offdiag(energies.size());
  std::vector<std::size_t> open(energies.size());
  parallel_for(energies.size(), config.threads, [&](std::size_t i) {
    const auto s = scattering::feshbach_s_matrix(p, energies[i]);
    open[i] = s.open_channels.size();
    if (open[i] == 1) {
      unitarity[i] = std::abs(std::abs(s.matrix(0, 0)) - 1.0);
    } else {
      unitarity[i] = scattering::unitarity_defect(s.matrix);
      symmetry[i] = scattering::symmetry_defect(s.matrix);
      offdiag[i] = std::abs(s.matrix(0, 1));
    }
  });
  double below_max = 0.0, above_max = 0.0, sym_max = 0.0, off_max = 0.0;
  std::size_t n_above = 0;
  for (std::size_t i = 0; i < energies.size(); ++i) {
    if (open[i] == 1) {
      below_max = std::max(below_max, unitarity[i]);
    } else {
      ++n_above;
      above_max = std::max(above_max, unitarity[i]);
      sym_max = std::max(sym_max, symmetry[i]);
      off_max = std::max(off_max, offdiag[i]);
    }
  }
  Check unit{"unitarity_symmetry",
             below_max < kUnitarityTolerance && above_max < kUnitarityTolerance && sym_max < kUnitarityTolerance,
             {{"energies", energies.size()},
              {"above_threshold", n_above},
              {"unitarity_above", number(above_max)},
              {"symmetry_above", number(sym_max)},
              {"abs_s11_defect_below", number(below_max)},
              {"tolerance", kUnitarityTolerance}}};
  Check diag{"diagonality", true, {{"decoupled", p.decoupled()}, {"max_abs_s12", number(off_max)}}};
  if (n_above == 0) {
    diag.detail["skipped"] = "no scan energy above threshold";
  } else if (p.decoupled()) {
    diag.pass = off_max < kDecoupledCeiling;
    diag.detail["expected"] = "S12 = 0";
  } else {
    diag.pass = off_max > kCouplingFloor;
    diag.detail["expected"] = "max |S12| > 1e-3";
  }
  return {unit, diag};
}

Check riccati_check(const feshbach::FeshbachParams& p) {
  const auto spec = p.transform_spec();
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double r = 10.0 * i / 99.0;
    worst = std::max(worst, susy::riccati_residual(spec, r).cwiseAbs().maxCoeff());
  }
  return {"riccati_residual", worst < kRiccatiTolerance,
          {{"radii", 100}, {"max_abs", number(worst)}, {"tolerance", kRiccatiTolerance}}};
}

Check self_wronskian_check(const feshbach::FeshbachParams& p) {
  const auto spec = p.transform_spec();
  double worst = 0.0;
  for (int i = 0; i <= 8; ++i) worst = std::max(worst, susy::self_wronskian(spec, 0.25 * i).cwiseAbs().maxCoeff());
  return {"self_wronskian", worst < kSelfWronskianTolerance,
          {{"radii", 9}, {"r_max", 2.0}, {"max_abs", number(worst)}, {"tolerance", kSelfWronskianTolerance}}};
}

Check potential_check(const feshbach::FeshbachParams& p) {
  const auto spec = p.transform_spec();
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double r = 10.0 * i / 199.0;
    worst = std::max(worst, (feshbach::potential_matrix(p, r) - susy::transformed_potential(spec, r)).cwiseAbs().maxCoeff());
  }
  return {"closed_form_potential", worst < kPotentialTolerance,
          {{"radii", 200}, {"max_abs", number(worst)}, {"tolerance", kPotentialTolerance}}};
}

std::string json_text(const json& j) { return j.dump(2) + '\n'; }

CommandOutput failure_report(const std::string& command, const RunConfig& config, const Error& e) {
  json j{{"command", command},
         {"config", config_echo(config)},
         {"converged", false},
         {"error", std::string(to_string(e.code()))},
         {"message", e.what()}};
  return {exit_validation_failure, json_text(j)};
}

double require(const std::optional<double>& v, const char* name) {
  if (!v) throw ConfigError(std::string("missing required value --") + name);
  return *v;
}

}  // namespace

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

void RunConfig::validate() const {
  if (physical() && raw())
    throw ConfigError("give either --delta/--er/--gamma or --kappa1/--kappa2/--beta, not both");
  if (!physical() && !raw()) throw ConfigError("a model is required: --delta --er --gamma or --kappa1 --kappa2 --beta");
  if (physical() && !(delta && e_r && gamma)) throw ConfigError("--delta, --er and --gamma must be given together");
  if (raw() && !(kappa1 && kappa2 && beta)) throw ConfigError("--kappa1, --kappa2 and --beta must be given together");
  if (!(e_min > 0.0)) throw ConfigError("--emin must be positive");
  if (!(e_min < e_max)) throw ConfigError("--emin must be below --emax");
  if (points < 2) throw ConfigError("--points must be at least 2");
  if (!(r_max > 0.0)) throw ConfigError("--rmax must be positive");
  if (!(step > 0.0) || !(step < r_max)) throw ConfigError("--step must be positive and below --rmax");
  if (threads < 1) throw ConfigError("--threads must be at least 1");
}

feshbach::FeshbachParams RunConfig::model() const {
  validate();
  try {
    if (physical()) return feshbach::FeshbachParams::from_physical(*delta, *e_r, *gamma);
    return feshbach::FeshbachParams::from_raw(*kappa1, *kappa2, *beta);
  } catch (const Error& e) {
    throw ConfigError(std::string("invalid model: ") + e.what());
  }
}

void apply_json(RunConfig& config, const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  auto real = [](const json& v, const std::string& key) {
    if (!v.is_number()) throw ConfigError("config key '" + key + "' must be a number");
    return v.get<double>();
  };
  auto integer = [](const json& v, const std::string& key) {
    if (!v.is_number_integer()) throw ConfigError("config key '" + key + "' must be an integer");
    return v.get<long>();
  };
  for (const auto& [key, value] : j.items()) {
    if (key == "delta") config.delta = real(value, key);
    else if (key == "er") config.e_r = real(value, key);
    else if (key == "gamma") config.gamma = real(value, key);
    else if (key == "kappa1") config.kappa1 = real(value, key);
    else if (key == "kappa2") config.kappa2 = real(value, key);
    else if (key == "beta") config.beta = real(value, key);
    else if (key == "emin") config.e_min = real(value, key);
    else if (key == "emax") config.e_max = real(value, key);
    else if (key == "points") config.points = integer(value, key);
    else if (key == "rmax") config.r_max = real(value, key);
    else if (key == "step") config.step = real(value, key);
    else if (key == "seed-re") config.seed_re = real(value, key);
    else if (key == "seed-im") config.seed_im = real(value, key);
    else if (key == "energy") config.energy = real(value, key);
    else if (key == "threads") {
      const long t = integer(value, key);
      if (t < 1) throw ConfigError("config key 'threads' must be at least 1");
      config.threads = static_cast<unsigned>(t);
    } else if (key == "out") {
      if (!value.is_string()) throw ConfigError("config key 'out' must be a string");
      config.out = value.get<std::string>();
    } else if (key == "format") {
      const std::string f = value.is_string() ? value.get<std::string>() : "";
      if (f == "csv") config.format = OutputFormat::csv;
      else if (f == "json") config.format = OutputFormat::json;
      else throw ConfigError("config key 'format' must be \"csv\" or \"json\"");
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
  }
  RunConfig config;
  apply_json(config, j);
  return config;
}

std::vector<double> scan_energies(const RunConfig& config, const ChannelSet& channels, std::vector<std::string>* notes) {
  const double width = scattering::ThresholdOptions{}.exclusion;
  std::vector<double> energies(static_cast<std::size_t>(config.points));
  for (long j = 0; j < config.points; ++j) {
    double e = config.e_min + (config.e_max - config.e_min) * static_cast<double>(j) / static_cast<double>(config.points - 1);
    for (double t : channels.thresholds()) {
      if (t > 0.0 && std::abs(e - t) < width) {
        const double outward = e >= t ? HUGE_VAL : -HUGE_VAL;
        double moved = e >= t ? e + width : e - width;
        while (std::abs(moved - t) < width) moved = std::nextafter(moved, outward);
        if (notes)
          notes->push_back("E=" + format_number(e) + " moved to " + format_number(moved) + " (threshold " +
                           format_number(t) + " exclusion window " + format_number(width) + ")");
        e = moved;
      }
    }
    energies[static_cast<std::size_t>(j)] = e;
  }
  return energies;
}

CommandOutput cmd_potential(const RunConfig& config) {
  const auto p = config.model();
  Table table{{"r", "V11", "V12", "V22"}, {}};
  table.rows.reserve(static_cast<std::size_t>(config.points));
  for (long i = 0; i < config.points; ++i) {
    const double r = config.r_max * static_cast<double>(i) / static_cast<double>(config.points - 1);
    const RealMatrix v = feshbach::potential_matrix(p, r);
    table.rows.push_back({r, v(0, 0), v(0, 1), v(1, 1)});
  }
  return {exit_success, render("potential", config, p, table, {})};
}

CommandOutput cmd_scan(const RunConfig& config) {
  const auto p = config.model();
  std::vector<std::string> notes;
  const auto energies = scan_energies(config, p.channels(), &notes);
  std::vector<scattering::EigenphaseSet> scan(energies.size());
  parallel_for(energies.size(), config.threads, [&](std::size_t i) {
    scan[i] = scattering::phases(scattering::feshbach_s_matrix(p, energies[i]));
  });
  scan = scattering::unwrap_scan(std::move(scan));
  Table table{{"E", "delta1", "delta2", "epsilon", "open_channel_count"}, {}};
  table.rows.reserve(scan.size());
  for (const auto& s : scan)
    table.rows.push_back({s.energy, s.delta1, s.delta2, s.epsilon, static_cast<double>(s.open_channels())});
  return {exit_success, render("scan", config, p, table, notes)};
}

CommandOutput cmd_resonance(const RunConfig& config) {
  const auto p = config.model();
  const cplx seed(require(config.seed_re, "seed-re"), require(config.seed_im, "seed-im"));
  if (!(seed.imag() < 0.0)) throw ConfigError("the seed must lie in the lower half k1-plane (--seed-im < 0)");
  scattering::RootResult root;
  try {
    root = scattering::find_detF_zero([&p](cplx k1) { return feshbach::jost_determinant(p, k1); }, seed, p.delta());
  } catch (const Error& e) {
    if (e.code() == Errc::no_convergence || e.code() == Errc::wrong_sheet) return failure_report("resonance", config, e);
    throw;
  }
  json j{{"command", "resonance"},
         {"config", config_echo(config)},
         {"model", model_echo(p)},
         {"converged", true},
         {"k1_re", number(root.pole.k1.real())},
         {"k1_im", number(root.pole.k1.imag())},
         {"k2_re", number(root.pole.k2.real())},
         {"k2_im", number(root.pole.k2.imag())},
         {"E_R", number(root.pole.resonance_energy())},
         {"Gamma", number(root.pole.width())},
         {"iterations", root.iterations},
         {"residual", number(root.residual)},
         {"above_threshold", root.pole.resonance_energy() > p.delta()}};
  return {exit_success, json_text(j)};
}

CommandOutput cmd_validate(const RunConfig& config) {
  const auto p = config.model();
  const auto potential = closed_form_potential(p);
  radial::RadialGrid grid = [&] {
    try {
      return radial::RadialGrid::for_potential(potential, config.r_max, config.step);
    } catch (const Error& e) {
      throw ConfigError(std::string("radial grid: ") + e.what());
    }
  }();
  const auto energies = oracle_energies(p.delta());
  std::vector<Check> checks;
  checks.push_back(oracle_check(config, p, grid, energies));
  checks.push_back(wronskian_check(config, p, grid));
  checks.push_back(determinant_check(config, p, grid, energies));
  auto [unitarity, diagonality] = s_matrix_checks(config, p);
  checks.push_back(std::move(unitarity));
  checks.push_back(riccati_check(p));
  checks.push_back(self_wronskian_check(p));
  checks.push_back(potential_check(p));
  checks.push_back(std::move(diagonality));

  bool all = true;
  json list = json::array();
  for (const auto& c : checks) {
    all = all && c.pass;
    json entry = c.detail;
    entry["name"] = c.name;
    entry["pass"] = c.pass;
    list.push_back(std::move(entry));
  }
  json j{{"command", "validate"}, {"config", config_echo(config)}, {"model", model_echo(p)},
         {"checks", std::move(list)}, {"pass", all}};
  return {all ? exit_success : exit_validation_failure, json_text(j)};
}

CommandOutput cmd_jost(const RunConfig& config) {
  const auto p = config.model();
  const double energy = require(config.energy, "energy");
  const auto momenta = ChannelMomenta::physical(p.channels(), energy);
  const ComplexMatrix f = feshbach::jost_matrix(p, momenta);
  json rows = json::array();
  for (Eigen::Index i = 0; i < f.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < f.cols(); ++k) row.push_back(complex_pair(f(i, k)));
    rows.push_back(std::move(row));
  }
  json j{{"command", "jost"},       {"config", config_echo(config)},
         {"model", model_echo(p)},  {"energy", number(energy)},
         {"k1", complex_pair(momenta.k(0))}, {"k2", complex_pair(momenta.k(1))},
         {"F", std::move(rows)},    {"det", complex_pair(f.determinant())}};
  return {exit_success, json_text(j)};
}

namespace {

struct Flags {
  std::optional<double> delta, e_r, gamma, kappa1, kappa2, beta;
  std::optional<double> e_min, e_max, r_max, step, seed_re, seed_im, energy;
  std::optional<long> points;
  std::optional<unsigned> threads;
  std::optional<std::string> out, format, config;
};

RunConfig merge(const Flags& f) {
  RunConfig c = f.config ? load_config(*f.config) : RunConfig{};
  const bool physical_flags = f.delta || f.e_r || f.gamma;
  const bool raw_flags = f.kappa1 || f.kappa2 || f.beta;
  if (physical_flags && !raw_flags) c.kappa1 = c.kappa2 = c.beta = std::nullopt;
  if (raw_flags && !physical_flags) c.delta = c.e_r = c.gamma = std::nullopt;
  auto over = [](auto& target, const auto& source) {
    if (source) target = *source;
  };
  over(c.delta, f.delta);
  over(c.e_r, f.e_r);
  over(c.gamma, f.gamma);
  over(c.kappa1, f.kappa1);
  over(c.kappa2, f.kappa2);
  over(c.beta, f.beta);
  over(c.e_min, f.e_min);
  over(c.e_max, f.e_max);
  over(c.points, f.points);
  over(c.r_max, f.r_max);
  over(c.step, f.step);
  over(c.seed_re, f.seed_re);
  over(c.seed_im, f.seed_im);
  over(c.energy, f.energy);
  over(c.threads, f.threads);
  over(c.out, f.out);
  if (f.format) c.format = *f.format == "json" ? OutputFormat::json : OutputFormat::csv;
  return c;
}

void write_output(const RunConfig& config, const std::string& text) {
  if (config.out.empty()) {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream out(config.out, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text) || !out.flush()) throw ConfigError("cannot write output file " + config.out);
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Coupled-channel supersymmetric scattering: Feshbach-resonance model tools", "susyscat"};
  app.require_subcommand(1);
  Flags f;
  app.add_option("--delta", f.delta, "Threshold gap of channel 2");
  app.add_option("--er", f.e_r, "Resonance energy");
  app.add_option("--gamma", f.gamma, "Resonance width");
  app.add_option("--kappa1", f.kappa1, "Raw parameter kappa1");
  app.add_option("--kappa2", f.kappa2, "Raw parameter kappa2");
  app.add_option("--beta", f.beta, "Raw coupling beta");
  app.add_option("--emin", f.e_min, "Lowest scan energy (default 0.05)");
  app.add_option("--emax", f.e_max, "Highest scan energy (default 20)");
  app.add_option("--points", f.points, "Number of samples (default 800)");
  app.add_option("--rmax", f.r_max, "Outer radius (default 12)");
  app.add_option("--step", f.step, "Radial step (default 1e-3)");
  app.add_option("--out", f.out, "Output file (default stdout)");
  app.add_option("--format", f.format, "Output format for tables")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--config", f.config, "JSON config file; flags override its values");
  app.add_option("--threads", f.threads, "Worker threads (default 1)")->check(CLI::PositiveNumber);
  app.add_option("--seed-re", f.seed_re, "Newton seed, real part of k1");
  app.add_option("--seed-im", f.seed_im, "Newton seed, imaginary part of k1");
  app.add_option("--energy", f.energy, "Energy for the jost command");

  auto* potential = app.add_subcommand("potential", "Transformed potential V11, V12, V22 on [0, rmax]");
  auto* scan = app.add_subcommand("scan", "Eigenphases and mixing parameter over [emin, emax]");
  auto* resonance = app.add_subcommand("resonance", "Newton search for the zero of det F (JSON)");
  auto* validate = app.add_subcommand("validate", "Numerical checks of the closed forms (JSON)");
  auto* jost = app.add_subcommand("jost", "Closed-form Jost matrix at --energy (JSON)");
  for (auto* sub : {potential, scan, resonance, validate, jost}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_config_error;
  }

  try {
    const RunConfig config = merge(f);
    CommandOutput result;
    if (*potential) result = cmd_potential(config);
    else if (*scan) result = cmd_scan(config);
    else if (*resonance) result = cmd_resonance(config);
    else if (*validate) result = cmd_validate(config);
    else result = cmd_jost(config);
    write_output(config, result.text);
    return result.exit_code;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_config_error;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return is_precondition(e.code()) ? exit_config_error : exit_validation_failure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_validation_failure;
  }
}

}  // namespace susyscat::cli
