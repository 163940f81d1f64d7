#include "cli_app.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ginprod/dynamics.hpp"
#include "ginprod/fredholm.hpp"
#include "ginprod/kernel.hpp"
#include "ginprod/montecarlo.hpp"
#include "ginprod/sigma.hpp"
#include "ginprod/types.hpp"
#include "ginprod/verify.hpp"

namespace ginprod::cli {

namespace {

using nlohmann::ordered_json;

// Shortest round-trip decimal form; keeps outputs byte-stable across runs.
std::string fmt(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string fmt_list(const std::vector<double>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += fmt(v[i]);
  }
  return s;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t comma = text.find(',', pos);
    std::string item = text.substr(
        pos, comma == std::string::npos ? std::string::npos : comma - pos);
    size_t used = 0;
    double v;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw ConfigError("cannot parse number in list: '" + item + "'");
    }
    while (used < item.size() && std::isspace(item[used])) ++used;
    if (used != item.size())
      throw ConfigError("cannot parse number in list: '" + item + "'");
    out.push_back(v);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

// Effective run parameters after merging defaults, --config JSON and flags.
struct RunConfig {
  std::string command;
  int M = 1;
  int n = 1;
  std::vector<double> nu_tail = {0.0};
  double lambda = 1.0;
  std::vector<double> s_grid;
  std::vector<double> J;
  std::string method = "fredholm";
  double tol = 1e-10;
  int order = 0;
  std::int64_t samples = 100000;
  std::uint64_t seed = 1;
  std::string suite = "all";
  std::string out_path;
};

// Raw flag values; only explicitly given flags override the config file.
struct Flags {
  std::optional<int> M, n, order;
  std::optional<double> lambda, s, tol;
  std::optional<std::string> nu, s_grid, J, method, suite, out, config;
  std::optional<std::int64_t> samples;
  std::optional<std::uint64_t> seed;
};

std::vector<double> json_list(const ordered_json& v, const std::string& key) {
  if (v.is_string()) return parse_list(v.get<std::string>());
  if (v.is_number()) return {v.get<double>()};
  if (v.is_array()) {
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number())
        throw ConfigError("config key '" + key + "' must hold numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }
  throw ConfigError("config key '" + key + "' must be a number, list or string");
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config file is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
  for (const auto& [key, val] : j.items()) {
    if (key == "M")
      cfg.M = val.get<int>();
    else if (key == "n")
      cfg.n = val.get<int>();
    else if (key == "nu")
      cfg.nu_tail = json_list(val, key);
    else if (key == "lambda")
      cfg.lambda = val.get<double>();
    else if (key == "s" || key == "s_grid")
      cfg.s_grid = json_list(val, key);
    else if (key == "J")
      cfg.J = json_list(val, key);
    else if (key == "method")
      cfg.method = val.get<std::string>();
    else if (key == "tol")
      cfg.tol = val.get<double>();
    else if (key == "order")
      cfg.order = val.get<int>();
    else if (key == "samples")
      cfg.samples = val.get<std::int64_t>();
    else if (key == "seed")
      cfg.seed = val.get<std::uint64_t>();
    else if (key == "suite")
      cfg.suite = val.get<std::string>();
    else if (key == "out")
      cfg.out_path = val.get<std::string>();
    else
      throw ConfigError("unknown config key: " + key);
  }
}

RunConfig merge(const std::string& command, const Flags& f) {
  RunConfig cfg;
  cfg.command = command;
  if (f.config) apply_config_file(cfg, *f.config);
  if (f.M) cfg.M = *f.M;
  if (f.n) cfg.n = *f.n;
  if (f.nu) cfg.nu_tail = parse_list(*f.nu);
  if (f.lambda) cfg.lambda = *f.lambda;
  if (f.s && f.s_grid) throw ConfigError("give either --s or --s-grid");
  if (f.s) cfg.s_grid = {*f.s};
  if (f.s_grid) cfg.s_grid = parse_list(*f.s_grid);
  if (f.J) cfg.J = parse_list(*f.J);
  if (f.method) cfg.method = *f.method;
  if (f.tol) cfg.tol = *f.tol;
  if (f.order) cfg.order = *f.order;
  if (f.samples) cfg.samples = *f.samples;
  if (f.seed) cfg.seed = *f.seed;
  if (f.suite) cfg.suite = *f.suite;
  if (f.out) cfg.out_path = *f.out;
  return cfg;
}

void validate_grid(const std::vector<double>& g, bool positive) {
  for (size_t i = 0; i < g.size(); ++i) {
    if (g[i] < 0 || (positive && g[i] == 0))
      throw ConfigError(positive ? "grid values must be > 0"
                                 : "grid values must be >= 0");
    if (i && g[i] <= g[i - 1])
      throw ConfigError("grid values must be strictly increasing");
  }
}

EnsembleSpec spec_of(const RunConfig& cfg) {
  return EnsembleSpec::make(cfg.M, cfg.n, cfg.nu_tail, cfg.lambda);
}

bool uses_method(const RunConfig& cfg) {
  return cfg.command == "gap" || cfg.command == "mc";
}

// Effective values, echoed ahead of every CSV body in fixed order.
void echo_metadata(std::ostream& os, const RunConfig& cfg) {
  os << "# command = " << cfg.command << "\n";
  os << "# M = " << cfg.M << "\n";
  os << "# n = " << cfg.n << "\n";
  os << "# nu = " << fmt_list(cfg.nu_tail) << "\n";
  os << "# lambda = " << fmt(cfg.lambda) << "\n";
  if (uses_method(cfg)) os << "# method = " << cfg.method << "\n";
  os << "# tol = " << fmt(cfg.tol) << "\n";
  os << "# order = " << cfg.order << "\n";
  os << "# samples = " << cfg.samples << "\n";
  os << "# seed = " << cfg.seed << "\n";
  if (cfg.command == "verify") os << "# suite = " << cfg.suite << "\n";
  if (!cfg.J.empty())
    os << "# J = " << fmt_list(cfg.J) << "\n";
  else if (cfg.command != "verify" && cfg.command != "series")
    os << "# s_grid = " << fmt_list(cfg.s_grid) << "\n";
  if (cfg.method == "mc" || cfg.command == "mc")
    os << "# prng = " << sampler_prng_name() << "\n";
  os << "# out = " << (cfg.out_path.empty() ? "-" : cfg.out_path) << "\n";
}

ordered_json metadata_json(const RunConfig& cfg) {
  ordered_json j;
  j["command"] = cfg.command;
  j["M"] = cfg.M;
  j["n"] = cfg.n;
  j["nu"] = cfg.nu_tail;
  j["lambda"] = cfg.lambda;
  j["tol"] = cfg.tol;
  j["order"] = cfg.order;
  j["samples"] = cfg.samples;
  j["seed"] = cfg.seed;
  j["suite"] = cfg.suite;
  j["out"] = cfg.out_path.empty() ? "-" : cfg.out_path;
  return j;
}

struct GapRow {
  double s, E, est;
};

GapRow gap_row_fredholm(const EnsembleSpec& spec, const IntervalUnion& J,
                        double s_label, int order) {
  double est = 0, E;
  if (order > 0) {
    double coarse = fredholm_det(build_operator(spec, J, order));
    E = fredholm_det(build_operator(spec, J, 2 * order));
    est = std::abs(E - coarse);
  } else {
    E = gap_probability(spec, J, &est);
  }
  return {s_label, E, est};
}

void cmd_gap(const RunConfig& cfg, std::ostream& os) {
  auto spec = spec_of(cfg);
  if (!cfg.J.empty() && !cfg.s_grid.empty())
    throw ConfigError("give either --J or --s/--s-grid, not both");
  validate_grid(cfg.s_grid, false);
  const std::string& m = cfg.method;
  if (m != "fredholm" && m != "dynamics" && m != "chi-series" && m != "mc")
    throw ConfigError("unknown method: " + m);
  if (!cfg.J.empty() && m != "fredholm")
    throw ConfigError("general interval unions require --method fredholm");

  echo_metadata(os, cfg);
  os << "s,E,method,est_error\n";
  auto emit = [&](const GapRow& r) {
    os << fmt(r.s) << "," << fmt(r.E) << "," << m << "," << fmt(r.est) << "\n";
  };

  if (!cfg.J.empty()) {
    IntervalUnion J{cfg.J};
    J.validate();
    if (spec.lambda == 0) {
      emit({J.endpoints.back(), 1.0, 0.0});
      return;
    }
    emit(gap_row_fredholm(spec, J, J.endpoints.back(), cfg.order));
    return;
  }

  if (m == "mc") {
    if (cfg.s_grid.empty()) return;
    if (spec.lambda == 0) {
      for (double s : cfg.s_grid) emit({s, 1.0, 0.0});
      return;
    }
    if (spec.lambda != 1.0)
      throw ConfigError("the mc route samples at lambda = 1 only");
    SamplerConfig sc{spec, cfg.samples, cfg.seed};
    EmpiricalGap g = empirical_gap(sc, cfg.s_grid);
    for (size_t i = 0; i < cfg.s_grid.size(); ++i)
      emit({cfg.s_grid[i], g.estimates[i], g.standard_errors[i]});
    return;
  }

  SeriesExpansion series;
  if (m == "chi-series") series = gap_series(spec);

  for (double s : cfg.s_grid) {
    if (spec.lambda == 0 || s == 0) {
      emit({s, 1.0, 0.0});
    } else if (m == "fredholm") {
      emit(gap_row_fredholm(spec, IntervalUnion::single(0, s), s, cfg.order));
    } else if (m == "dynamics") {
      double drift = 0;
      double E = gap_via_dynamics(spec, s, cfg.tol, &drift);
      emit({s, E, drift});
    } else {  // chi-series
      double E = series.evaluate(s);
      // Next-omitted-term proxy: the expansion's correction ladder continues
      // one power of s beyond each kept branch term.
      double est = 0;
      for (const auto& t : series.terms)
        if (t.exponent > 0)
          est = std::max(est,
                         std::abs(t.coefficient) * std::pow(s, t.exponent));
      emit({s, E, est * s});
    }
  }
}

void cmd_kernel(const RunConfig& cfg, std::ostream& os) {
  auto spec = spec_of(cfg);
  validate_grid(cfg.s_grid, true);
  echo_metadata(os, cfg);
  os << "x,y,K_sum,K_integrable,diff\n";
  if (cfg.s_grid.empty()) return;
  KernelEvaluator ev(spec);
  for (double x : cfg.s_grid)
    for (double y : cfg.s_grid) {
      double a = ev.eval(KernelForm::SumForm, x, y);
      double b = ev.eval(KernelForm::IntegrableForm, x, y);
      os << fmt(x) << "," << fmt(y) << "," << fmt(a) << "," << fmt(b) << ","
         << fmt(a - b) << "\n";
    }
}

void cmd_series(const RunConfig& cfg, std::ostream& os) {
  auto spec = spec_of(cfg);
  SeriesExpansion se = gap_series(spec);
  echo_metadata(os, cfg);
  os << "exponent,coefficient\n";
  for (const auto& t : se.terms) {
    if (cfg.order > 0 && t.exponent > cfg.order) continue;
    os << fmt(t.exponent) << "," << fmt(t.coefficient) << "\n";
  }
}

int cmd_verify(const RunConfig& cfg, std::ostream& os) {
  VerifyOptions opts;
  opts.mc_samples = cfg.samples;
  opts.seed = cfg.seed;
  opts.ode_tol = cfg.tol;
  opts.validate();

  std::vector<SuiteResult> results;
  if (cfg.suite == "all") {
    results = run_all_verification_suites(opts);
  } else {
    results.push_back(run_verification_suite(cfg.suite, opts));
  }

  ordered_json report;
  report["schema"] = 1;
  report["config"] = metadata_json(cfg);
  report["suites"] = ordered_json::array();
  bool all_pass = true;
  for (const auto& r : results) {
    ordered_json s;
    s["name"] = r.name;
    s["pass"] = r.pass;
    s["max_residual"] = r.max_residual;
    s["details"] = r.details;
    report["suites"].push_back(s);
    all_pass = all_pass && r.pass;
  }
  os << report.dump(2) << "\n";
  return all_pass ? 0 : 1;
}

void cmd_mc(const RunConfig& cfg, std::ostream& os) {
  auto spec = spec_of(cfg);
  validate_grid(cfg.s_grid, false);
  echo_metadata(os, cfg);
  os << "s,E,method,est_error\n";
  if (cfg.s_grid.empty()) return;
  if (spec.lambda == 0) {
    for (double s : cfg.s_grid)
      os << fmt(s) << ",1,mc,0\n";
    return;
  }
  if (spec.lambda != 1.0)
    throw ConfigError("the mc route samples at lambda = 1 only");
  SamplerConfig sc{spec, cfg.samples, cfg.seed};
  EmpiricalGap g = empirical_gap(sc, cfg.s_grid);
  for (size_t i = 0; i < cfg.s_grid.size(); ++i)
    os << fmt(cfg.s_grid[i]) << "," << fmt(g.estimates[i]) << ",mc,"
       << fmt(g.standard_errors[i]) << "\n";
}

int dispatch(const RunConfig& cfg, std::ostream& os) {
  if (cfg.command == "gap") {
    cmd_gap(cfg, os);
    return 0;
  }
  if (cfg.command == "kernel") {
    cmd_kernel(cfg, os);
    return 0;
  }
  if (cfg.command == "series") {
    cmd_series(cfg, os);
    return 0;
  }
  if (cfg.command == "verify") return cmd_verify(cfg, os);
  cmd_mc(cfg, os);
  return 0;
}

void emit_error(std::ostream& err, const std::string& type,
                const std::string& message) {
  ordered_json j;
  j["error"]["type"] = type;
  j["error"]["message"] = message;
  err << j.dump() << "\n";
}

const char kUsage[] =
    "usage: ginprod <gap|kernel|series|verify|mc> [options]\n"
    "\n"
    "commands\n"
    "  gap      gap probabilities E(lambda; J) by any route (CSV)\n"
    "  kernel   kernel values on a grid, both forms plus difference (CSV)\n"
    "  series   small-s expansion of the gap probability (CSV)\n"
    "  verify   cross-route verification suites (JSON report)\n"
    "  mc       Monte Carlo gap estimates with standard errors (CSV)\n"
    "\n"
    "options\n"
    "  --M INT            number of factors (default 1)\n"
    "  --n INT            matrix size parameter (default 1)\n"
    "  --nu LIST          comma list nu_1..nu_M (default 0)\n"
    "  --lambda X         thinning parameter in [0,1] (default 1)\n"
    "  --s X              single evaluation point\n"
    "  --s-grid LIST      comma list of evaluation points, increasing\n"
    "  --J LIST           interval-union endpoints a1,a2,... (gap only)\n"
    "  --method NAME      fredholm | dynamics | chi-series | mc\n"
    "  --tol X            ODE tolerance (default 1e-10)\n"
    "  --order INT        fixed quadrature order / series exponent cap\n"
    "  --samples INT      Monte Carlo sample count (default 100000)\n"
    "  --seed INT         Monte Carlo seed (default 1)\n"
    "  --suite NAME       verification suite name or 'all'\n"
    "  --out PATH         write results to PATH instead of stdout\n"
    "  --config PATH      JSON config; explicit flags override it\n";

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  if (args.empty() || args[0] == "--help" || args[0] == "-h") {
    out << kUsage;
    return args.empty() ? 2 : 0;
  }
  std::string command = args[0];
  if (command != "gap" && command != "kernel" && command != "series" &&
      command != "verify" && command != "mc") {
    emit_error(err, "config", "unknown command: " + command);
    return 2;
  }

  Flags f;
  CLI::App app{"gap probabilities for products of complex Ginibre matrices"};
  app.add_option("--M", f.M);
  app.add_option("--n", f.n);
  app.add_option("--nu", f.nu);
  app.add_option("--lambda", f.lambda);
  app.add_option("--s", f.s);
  app.add_option("--s-grid", f.s_grid);
  app.add_option("--J", f.J);
  app.add_option("--method", f.method);
  app.add_option("--tol", f.tol);
  app.add_option("--order", f.order);
  app.add_option("--samples", f.samples);
  app.add_option("--seed", f.seed);
  app.add_option("--suite", f.suite);
  app.add_option("--out", f.out);
  app.add_option("--config", f.config);

  std::vector<std::string> rest(args.rbegin(), args.rend() - 1);
  try {
    app.parse(rest);
  } catch (const CLI::CallForHelp&) {
    out << kUsage;
    return 0;
  } catch (const CLI::ParseError& e) {
    emit_error(err, "config", e.what());
    return 2;
  }

  try {
    RunConfig cfg = merge(command, f);
    if (cfg.tol <= 0 || cfg.tol > 1e-2)
      throw ConfigError("tol must lie in (0, 1e-2]");
    if (cfg.order < 0) throw ConfigError("order must be >= 0");
    if (cfg.samples < 1) throw ConfigError("samples must be >= 1");
    if (!uses_method(cfg) && f.method)
      throw ConfigError("--method does not apply to " + command);
    if (cfg.command == "mc") {
      if (f.method && *f.method != "mc")
        throw ConfigError("the mc command always uses --method mc");
      cfg.method = "mc";
    }

    if (!cfg.out_path.empty()) {
      std::ofstream file(cfg.out_path);
      if (!file)
        throw ConfigError("cannot open output file: " + cfg.out_path);
      return dispatch(cfg, file);
    }
    return dispatch(cfg, out);
  } catch (const ConfigError& e) {
    emit_error(err, "config", e.what());
    return 2;
  } catch (const NumericalError& e) {
    emit_error(err, "numerical", e.what());
    return 3;
  }
}

}  // namespace ginprod::cli
