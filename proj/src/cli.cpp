#include "cpr/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "cpr/config_io.hpp"
#include "cpr/manifest.hpp"
#include "cpr/montecarlo.hpp"
#include "cpr/parallel.hpp"
#include "cpr/regions.hpp"
#include "cpr/stability.hpp"

namespace cpr {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIndeterminate = 3;

using nlohmann::json;

std::string resolve_out_path(const std::string& out) {
  const char* dir = std::getenv("CPR_OUTDIR");
  if (!dir || out.empty()) return out;
  std::filesystem::path p(out);
  if (p.is_absolute()) return out;
  return (std::filesystem::path(dir) / p).string();
}

void write_text(const std::string& out, const std::string& text) {
  if (out.empty()) {
    std::cout << text;
    return;
  }
  const std::string path = resolve_out_path(out);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError(path + ": cannot open for writing");
  f << text;
}

std::string join_doubles(const std::vector<double>& v) {
  std::ostringstream ss;
  for (std::size_t i = 0; i < v.size(); ++i) ss << (i ? "," : "") << v[i];
  return ss.str();
}

StabilityCriterion parse_criterion(const std::string& text, int num_classes) {
  if (text == "stable") return StabilityCriterion::stable();
  if (text == "weak") return StabilityCriterion::weakly_stable();
  if (text.rfind("eps=", 0) == 0) {
    std::vector<double> eps;
    std::stringstream ss(text.substr(4));
    std::string item;
    while (std::getline(ss, item, ',')) eps.push_back(std::stod(item));
    if (eps.size() == 1 && num_classes > 1) eps.assign(num_classes, eps[0]);
    if (static_cast<int>(eps.size()) != num_classes)
      throw ConfigError("criterion: eps needs one value per user class");
    return StabilityCriterion::epsilon(std::move(eps));
  }
  throw ConfigError("unknown criterion '" + text + "' (stable | weak | eps=v[,v...])");
}

struct CommonArgs {
  std::string config_path;
  std::string out;
  std::string out_json;
  std::vector<double> g;
  std::vector<double> direction;
  double de_tol = 1e-12;
  int max_iter = 10000;
  bool strict = false;
  bool round_success = false;
  int workers = 0;  // 0: env or hardware default
  std::uint64_t seed = 1;

  int effective_workers() const {
    if (workers > 0) return workers;
    if (const char* env = std::getenv("CPR_WORKERS")) {
      const int w = std::atoi(env);
      if (w > 0) return w;
    }
    return default_workers();
  }
  StabilityTols tols() const {
    StabilityTols t;
    t.de_tol = de_tol;
    t.max_iter = max_iter;
    return t;
  }
};

RunManifest make_manifest(const CommonArgs& a, const SystemConfig& config,
                          const std::string& subcommand,
                          std::map<std::string, std::string> params) {
  RunManifest m;
  m.config_path = a.config_path;
  m.config_digest = config_digest(config);
  m.subcommand = subcommand;
  params["de_tol"] = std::to_string(a.de_tol);
  params["max_iter"] = std::to_string(a.max_iter);
  m.parameters = std::move(params);
  m.timestamp = RunManifest::now_iso8601();
  return m;
}

void add_common(CLI::App* cmd, CommonArgs& a, bool with_g) {
  cmd->add_option("--config", a.config_path, "system config JSON")->required();
  cmd->add_option("--out", a.out, "output file (default stdout)");
  if (with_g) {
    cmd->add_option("--g", a.g, "offered load: full K-vector, or scalar with --direction")
        ->delimiter(',')
        ->required();
    cmd->add_option("--direction", a.direction, "direction for scalar --g")->delimiter(',');
  }
  cmd->add_option("--tol", a.de_tol, "fixed-point sup-norm tolerance");
  cmd->add_option("--max-iter", a.max_iter, "fixed-point iteration cap");
  cmd->add_flag("--strict", a.strict, "exit 3 when a verdict is indeterminate");
  cmd->add_flag("--round-success", a.round_success,
                "round success probabilities above 0.99999 up to 1");
  cmd->add_option("--workers", a.workers, "worker threads (default: CPR_WORKERS or cores)");
}

json verdict_json(const StabilityVerdict& v) {
  return json{{"verdict", to_string(v.verdict)},
              {"q_from_ones", v.q_from_ones},
              {"q_from_zeros", v.q_from_zeros},
              {"success_probs", v.success_probs}};
}

int cmd_classify(const CommonArgs& a) {
  const auto config = parse_config_file(a.config_path);
  const auto load = resolve_load(a.g, a.direction, config.num_user_classes);
  const auto v = classify_load(config, load, a.tols());
  auto manifest = make_manifest(a, config, "classify", {{"g", join_doubles(load)}});
  json out = verdict_json(v);
  out["g"] = load;
  out["manifest"] = json::parse(manifest.to_json());
  write_text(a.out, out.dump(2) + "\n");
  if (a.strict && v.verdict == StabilityClass::Indeterminate) return kExitIndeterminate;
  return kExitOk;
}

int cmd_threshold(const CommonArgs& a, const std::string& criterion_text, double lo, double hi,
                  double thr_tol) {
  const auto config = parse_config_file(a.config_path);
  if (a.direction.empty()) throw ConfigError("threshold: --direction is required");
  std::vector<double> dir = a.direction;
  if (static_cast<int>(dir.size()) == 1 && config.num_user_classes > 1)
    throw ConfigError("threshold: --direction needs one entry per user class");
  const auto criterion = parse_criterion(criterion_text, config.num_user_classes);
  const double thr =
      percolation_threshold_1d(config, dir, lo, hi, criterion, thr_tol, a.tols());
  auto manifest = make_manifest(a, config, "threshold",
                                {{"direction", join_doubles(dir)},
                                 {"criterion", criterion_text},
                                 {"lo", std::to_string(lo)},
                                 {"hi", std::to_string(hi)},
                                 {"threshold_tol", std::to_string(thr_tol)}});
  json out{{"direction", dir},
           {"criterion", to_string(criterion)},
           {"threshold", thr},
           {"tol", thr_tol},
           {"manifest", json::parse(manifest.to_json())}};
  write_text(a.out, out.dump(2) + "\n");
  return kExitOk;
}

GridSpec make_grid(const SystemConfig& config, std::vector<double> lo, std::vector<double> hi,
                   std::vector<double> step) {
  const int K = config.num_user_classes;
  const auto broadcast = [&](std::vector<double>& v, const char* name) {
    if (static_cast<int>(v.size()) == 1 && K > 1) v.assign(K, v[0]);
    if (static_cast<int>(v.size()) != K)
      throw ConfigError(std::string("region: --") + name + " needs one value per user class");
  };
  broadcast(lo, "lo");
  broadcast(hi, "hi");
  broadcast(step, "step");
  GridSpec grid;
  for (int k = 0; k < K; ++k) grid.axes.push_back({lo[k], hi[k], step[k]});
  return grid;
}

int cmd_region(const CommonArgs& a, const std::string& criterion_text, std::vector<double> lo,
               std::vector<double> hi, std::vector<double> step, const std::string& json_out,
               const std::string& boundary_out, std::size_t max_cells, bool throughput_mode) {
  const auto config = parse_config_file(a.config_path);
  const auto criterion = parse_criterion(criterion_text, config.num_user_classes);
  const auto grid = make_grid(config, std::move(lo), std::move(hi), std::move(step));
  MapOptions opts;
  opts.workers = a.effective_workers();
  opts.max_cells = max_cells;
  opts.tols = a.tols();
  opts.round_success = a.round_success;
  RegionMap map = throughput_mode ? throughput_surface(config, grid, opts)
                                  : map_region(config, grid, criterion, opts);
  map.meta.config_digest = config_digest(config);
  auto manifest = make_manifest(
      a, config, throughput_mode ? "throughput" : "region",
      {{"criterion", criterion_text},
       {"grid", join_doubles({grid.axes[0].lo, grid.axes[0].hi, grid.axes[0].step})}});

  std::ostringstream csv;
  csv << manifest.to_csv_comment() << "\n";
  write_region_csv(map, csv);
  write_text(a.out, csv.str());
  if (!json_out.empty()) {
    std::ostringstream js;
    write_region_json(map, js);
    json wrapped = json::parse(js.str());
    wrapped["manifest"] = json::parse(manifest.to_json());
    write_text(json_out, wrapped.dump() + "\n");
  }
  if (!boundary_out.empty()) {
    const auto polylines = extract_boundary(map);
    std::ostringstream bs;
    bs << manifest.to_csv_comment() << "\n";
    write_boundary_csv(polylines, bs);
    write_text(boundary_out, bs.str());
  }
  return kExitOk;
}

int cmd_throughput_point(const CommonArgs& a) {
  const auto config = parse_config_file(a.config_path);
  const auto load = resolve_load(a.g, a.direction, config.num_user_classes);
  DeOptions opts;
  opts.tol = a.de_tol;
  opts.max_iter = a.max_iter;
  opts.round_success = a.round_success;
  const auto t = throughput(config, load, opts);
  auto manifest = make_manifest(a, config, "throughput", {{"g", join_doubles(load)}});
  json out{{"g", load},
           {"per_class", t.per_class},
           {"total", t.total},
           {"manifest", json::parse(manifest.to_json())}};
  write_text(a.out, out.dump(2) + "\n");
  return kExitOk;
}

int cmd_simulate(const CommonArgs& a, int T, int trials, bool poisson_counts,
                 const std::vector<double>& sweep) {
  const auto config = parse_config_file(a.config_path);
  auto manifest = make_manifest(a, config, "simulate",
                                {{"T", std::to_string(T)},
                                 {"trials", std::to_string(trials)},
                                 {"seed", std::to_string(a.seed)}});
  if (!sweep.empty()) {
    if (sweep.size() != 3) throw ConfigError("simulate: --sweep needs lo,hi,step");
    if (a.direction.empty() && config.num_user_classes > 1)
      throw ConfigError("simulate: --sweep with K > 1 needs --direction");
    std::vector<double> dir =
        a.direction.empty() ? std::vector<double>{1.0} : a.direction;
    std::ostringstream csv;
    csv << manifest.to_csv_comment() << "\n";
    csv << "G";
    for (int k = 0; k < config.num_user_classes; ++k)
      csv << ",mean" << k + 1 << ",stderr" << k + 1 << ",analytic" << k + 1;
    csv << "\n";
    for (double g = sweep[0]; g <= sweep[1] + 1e-12; g += sweep[2]) {
      std::vector<double> load(config.num_user_classes);
      for (int k = 0; k < config.num_user_classes; ++k) load[k] = g * dir[k];
      const auto sim =
          run_trials(config, load, T, trials, a.max_iter, a.seed, a.effective_workers(),
                     poisson_counts);
      const auto fp = de_fixed_point(config, load, Start::AllOnes, {a.de_tol, a.max_iter});
      const auto analytic = success_probabilities(config, load, fp.q_final, a.round_success);
      csv << g;
      for (int k = 0; k < config.num_user_classes; ++k)
        csv << "," << sim.success_fraction[k] << "," << sim.fraction_stderr[k] << ","
            << analytic[k];
      csv << "\n";
    }
    write_text(a.out, csv.str());
    return kExitOk;
  }
  const auto load = resolve_load(a.g, a.direction, config.num_user_classes);
  const auto sim = run_trials(config, load, T, trials, a.max_iter, a.seed,
                              a.effective_workers(), poisson_counts);
  const auto fp = de_fixed_point(config, load, Start::AllOnes, {a.de_tol, a.max_iter});
  const auto analytic = success_probabilities(config, load, fp.q_final, a.round_success);
  json out{{"g", load},
           {"success_fraction", sim.success_fraction},
           {"stderr", sim.fraction_stderr},
           {"throughput", sim.throughput},
           {"analytic_success", analytic},
           {"iterations", sim.iterations},
           {"T", sim.T},
           {"trials", sim.trials},
           {"seed", sim.seed},
           {"manifest", json::parse(manifest.to_json())}};
  write_text(a.out, out.dump(2) + "\n");
  return kExitOk;
}

int cmd_de_trace(const CommonArgs& a, const std::string& start_text) {
  const auto config = parse_config_file(a.config_path);
  const auto load = resolve_load(a.g, a.direction, config.num_user_classes);
  const Start start = start_text == "zeros" ? Start::AllZeros : Start::AllOnes;
  DeOptions opts;
  opts.tol = a.de_tol;
  opts.max_iter = a.max_iter;
  opts.keep_trace = true;
  const auto fp = de_fixed_point(config, load, start, opts);
  auto manifest = make_manifest(a, config, "de-trace",
                                {{"g", join_doubles(load)}, {"start", start_text}});
  std::ostringstream csv;
  csv << manifest.to_csv_comment() << "\n";
  csv << "iteration";
  for (int k = 0; k < config.num_user_classes; ++k) csv << ",q" << k + 1;
  for (int k = 0; k < config.num_user_classes; ++k) csv << ",Psuc" << k + 1;
  csv << "\n";
  for (std::size_t i = 0; i < fp.trace.size(); ++i) {
    const auto ps = success_probabilities(config, load, fp.trace[i], a.round_success);
    csv << i;
    for (int k = 0; k < config.num_user_classes; ++k) csv << "," << fp.trace[i][k];
    for (int k = 0; k < config.num_user_classes; ++k) csv << "," << ps[k];
    csv << "\n";
  }
  write_text(a.out, csv.str());
  if (a.strict && !fp.converged) return kExitIndeterminate;
  return kExitOk;
}

}  // namespace

std::vector<double> resolve_load(const std::vector<double>& g,
                                 const std::vector<double>& direction, int num_classes) {
  if (static_cast<int>(g.size()) == num_classes && direction.empty()) return g;
  if (g.size() == 1 && !direction.empty()) {
    if (static_cast<int>(direction.size()) != num_classes)
      throw ConfigError("--direction needs one entry per user class");
    std::vector<double> load(num_classes);
    for (int k = 0; k < num_classes; ++k) load[k] = g[0] * direction[k];
    return load;
  }
  if (static_cast<int>(g.size()) == num_classes && !direction.empty())
    throw ConfigError("--g is a full vector; --direction would be ambiguous, drop one");
  throw ConfigError("--g needs either " + std::to_string(num_classes) +
                    " values or a scalar with --direction");
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"coded Poisson receiver analysis"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string criterion_text = "stable";
  std::string start_text = "ones";
  std::vector<double> grid_lo{0.0}, grid_hi{1.0}, grid_step{0.01};
  std::string json_out, boundary_out;
  std::size_t max_cells = 2'000'000;
  double thr_lo = 0.0, thr_hi = 2.0, thr_tol = 1e-3;
  int sim_T = 10000, sim_trials = 1;
  bool poisson_counts = false;
  std::vector<double> sweep;

  auto* classify = app.add_subcommand("classify", "classify one offered load");
  add_common(classify, args, true);

  auto* threshold = app.add_subcommand("threshold", "bisect a percolation threshold");
  add_common(threshold, args, false);
  threshold->add_option("--direction", args.direction, "load direction")
      ->delimiter(',')
      ->required();
  threshold->add_option("--criterion", criterion_text, "stable | weak | eps=v[,v...]");
  threshold->add_option("--lo", thr_lo, "bracket low (criterion met)");
  threshold->add_option("--hi", thr_hi, "bracket high (criterion not met)");
  threshold->add_option("--threshold-tol", thr_tol, "bisection tolerance");

  auto* region = app.add_subcommand("region", "classify a load grid");
  add_common(region, args, false);
  region->add_option("--lo", grid_lo, "per-axis lower bounds")->delimiter(',');
  region->add_option("--hi", grid_hi, "per-axis upper bounds")->delimiter(',');
  region->add_option("--step", grid_step, "per-axis steps")->delimiter(',');
  region->add_option("--criterion", criterion_text, "stable | weak | eps=v[,v...]");
  region->add_option("--json", json_out, "also write the map as JSON");
  region->add_option("--boundary", boundary_out, "also write the boundary polylines CSV");
  region->add_option("--max-cells", max_cells, "resource guard on cell count");

  auto* thrpt = app.add_subcommand("throughput", "throughput at a point or over a grid");
  add_common(thrpt, args, false);
  thrpt->add_option("--g", args.g, "offered load (point mode)")->delimiter(',');
  thrpt->add_option("--direction", args.direction, "direction for scalar --g")->delimiter(',');
  thrpt->add_option("--lo", grid_lo, "per-axis lower bounds (surface mode)")->delimiter(',');
  thrpt->add_option("--hi", grid_hi, "per-axis upper bounds")->delimiter(',');
  thrpt->add_option("--step", grid_step, "per-axis steps")->delimiter(',');
  thrpt->add_option("--json", json_out, "also write the surface as JSON");
  thrpt->add_option("--max-cells", max_cells, "resource guard on cell count");

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo SIC peeling");
  add_common(simulate, args, false);
  simulate->add_option("--g", args.g, "offered load")->delimiter(',');
  simulate->add_option("--direction", args.direction, "direction for scalar --g or --sweep")
      ->delimiter(',');
  simulate->add_option("-T,--slots", sim_T, "number of receiver slots");
  simulate->add_option("--trials", sim_trials, "independent trials");
  simulate->add_option("--seed", args.seed, "RNG seed");
  simulate->add_flag("--poisson-counts", poisson_counts,
                     "draw user counts from Poisson(G_k T) instead of rounding");
  simulate->add_option("--sweep", sweep, "lo,hi,step scalar sweep along --direction")
      ->delimiter(',');

  auto* trace = app.add_subcommand("de-trace", "emit the fixed-point iterate trace as CSV");
  add_common(trace, args, true);
  trace->add_option("--start", start_text, "ones | zeros");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (classify->parsed()) return cmd_classify(args);
    if (threshold->parsed()) return cmd_threshold(args, criterion_text, thr_lo, thr_hi, thr_tol);
    if (region->parsed())
      return cmd_region(args, criterion_text, grid_lo, grid_hi, grid_step, json_out,
                        boundary_out, max_cells, /*throughput_mode=*/false);
    if (thrpt->parsed()) {
      if (!args.g.empty()) return cmd_throughput_point(args);
      return cmd_region(args, "stable", grid_lo, grid_hi, grid_step, json_out, "", max_cells,
                        /*throughput_mode=*/true);
    }
    if (simulate->parsed()) return cmd_simulate(args, sim_T, sim_trials, poisson_counts, sweep);
    if (trace->parsed()) return cmd_de_trace(args, start_text);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace cpr
