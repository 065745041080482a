#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sirnet/harness.hpp"

namespace {

using sirnet::json;

constexpr int kOk = 0;
constexpr int kError = 1;
constexpr int kCheckFailed = 2;

struct Flags {
  std::string config;
  std::string family;
  std::string params;
  std::string graph;
  std::optional<double> beta, c, lambda;
  std::string initial, engine, law;
  std::optional<std::size_t> trials;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  bool fixed_graph = false;
  std::string output;
  std::string csv;
  std::string sweep_param;
  std::vector<double> grid;
  std::vector<std::string> sets;
  bool check = false;
};

json parse_scalar(const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) {
      if (std::floor(v) == v && std::abs(v) < 9.0e15) return static_cast<std::int64_t>(v);
      return v;
    }
  } catch (const std::exception&) {
  }
  if (text == "true") return true;
  if (text == "false") return false;
  return text;
}

void apply_params(json& params, const std::string& text) {
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw sirnet::SpecError("params", "expected key=value, got '" + item + "'");
    params[item.substr(0, eq)] = parse_scalar(item.substr(eq + 1));
  }
}

sirnet::ExperimentSpec build_spec(const Flags& f) {
  json j = json::object();
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw std::runtime_error("cannot open config " + f.config);
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw std::runtime_error("config " + f.config + ": " + e.what());
    }
  }
  if (!f.family.empty()) j["family"] = f.family;
  if (!f.graph.empty()) {
    j["family"] = "file";
    j["params"] = {{"path", f.graph}};
  }
  if (!j.contains("params")) j["params"] = json::object();
  if (!f.params.empty()) apply_params(j["params"], f.params);
  if (f.beta) {
    j["beta"] = *f.beta;
    j.erase("c");
  }
  if (f.c) j["c"] = *f.c;
  if (f.lambda) j["lambda"] = *f.lambda;
  if (!f.initial.empty()) j["initial"] = f.initial;
  if (!f.engine.empty()) j["engine"] = f.engine;
  if (!f.law.empty()) {
    j["law"] = f.law;
    if (f.engine.empty()) j["engine"] = "ct";
  }
  if (f.trials) j["trials"] = *f.trials;
  if (f.seed) j["master_seed"] = *f.seed;
  if (f.fixed_graph) j["fixed_graph"] = true;
  if (!f.output.empty()) j["output"] = f.output;
  if (!f.sweep_param.empty() || !f.grid.empty()) {
    json sw = j.value("sweep", json::object());
    if (!f.sweep_param.empty()) sw["param"] = f.sweep_param;
    if (!f.grid.empty()) sw["grid"] = f.grid;
    j["sweep"] = sw;
  }
  for (const auto& s : f.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw sirnet::SpecError("set", "expected key=value, got '" + s + "'");
    // Dotted keys address nested objects, e.g. params.n=100.
    json* node = &j;
    std::string key = s.substr(0, eq);
    for (std::size_t dot; (dot = key.find('.')) != std::string::npos;) {
      node = &(*node)[key.substr(0, dot)];
      key = key.substr(dot + 1);
    }
    std::string raw = s.substr(eq + 1);
    json value;
    try {
      value = json::parse(raw);
    } catch (const json::parse_error&) {
      value = raw;
    }
    (*node)[key] = value;
  }
  auto spec = sirnet::spec_from_json(j);
  sirnet::validate(spec);
  return spec;
}

std::size_t workers(const Flags& f) { return f.threads ? *f.threads : sirnet::default_parallelism(); }

std::ostream& open_output(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw std::runtime_error("cannot write " + path);
  return file;
}

void add_spec_flags(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "JSON experiment spec");
  app->add_option("--family", f.family, "star | ring | complete | er | chung_lu | pareto_kernel | constant_kernel | file");
  app->add_option("--params", f.params, "Generator parameters as key=value,...");
  app->add_option("--graph", f.graph, "Edge-list file (sets family=file)");
  app->add_option("--beta", f.beta, "Transmission probability");
  app->add_option("--c", f.c, "Reproduction parameter; beta = c / family scale");
  app->add_option("--initial", f.initial, "Node list | hub | random:k | nonhub:k");
  app->add_option("--engine", f.engine, "reed-frost | percolation | ct");
  app->add_option("--law", f.law, "Infectious period: det:tau | exp:mu");
  app->add_option("--lambda", f.lambda, "Contact rate for the ct engine");
  app->add_option("--trials", f.trials, "Trials per grid point");
  app->add_option("--seed", f.seed, "Master seed");
  app->add_option("--threads", f.threads, "Worker threads (default: SIRNET_THREADS or hardware)");
  app->add_flag("--fixed-graph", f.fixed_graph, "Condition random families on one realization");
  app->add_option("--set", f.sets, "Override any spec field: key=json (dotted keys allowed)");
}

void add_sweep_flags(CLI::App* app, Flags& f) {
  app->add_option("--sweep-param", f.sweep_param, "beta | c | lambda | a family parameter");
  app->add_option("--grid", f.grid, "Sweep grid values")->delimiter(',');
  app->add_option("--csv", f.csv, "Write plot data CSV");
}

int cmd_generate(const Flags& f) {
  auto spec = build_spec(f);
  const std::uint64_t seed = f.seed.value_or(spec.master_seed);
  auto gen = sirnet::make_graph(spec.family, spec.params, seed);
  std::ofstream file;
  auto& out = open_output(f.output, file);
  sirnet::write_edge_list(out, gen.graph);
  json meta{{"family", spec.family},
            {"params", spec.params},
            {"seed", seed},
            {"dropped_self_loops", gen.dropped_self_loops},
            {"clamp_count", gen.clamp_count},
            {"nodes", gen.graph.node_count()},
            {"edges", gen.graph.edge_count()},
            {"version", sirnet::kVersion}};
  if (f.output.empty() || f.output == "-") {
    std::cerr << meta.dump() << '\n';
  } else {
    std::ofstream sidecar(f.output + ".meta.json");
    if (!sidecar) throw std::runtime_error("cannot write " + f.output + ".meta.json");
    sidecar << meta.dump(2) << '\n';
  }
  return kOk;
}

int cmd_simulate(const Flags& f) {
  auto spec = build_spec(f);
  if (spec.sweep) throw sirnet::SpecError("sweep", "use the sweep subcommand");
  auto result = sirnet::run_experiment(spec, workers(f));
  std::ofstream file;
  auto& out = open_output(f.output, file);
  const auto& p = result.points.front();
  for (const auto& t : p.trials)
    out << json{{"final_removed", t.final_removed}, {"extinction_time", t.extinction_time},
                {"trial_seed", t.trial_seed}}.dump()
        << '\n';
  out << json{{"summary",
               {{"mean", p.summary.mean},
                {"variance", p.summary.variance},
                {"se", p.summary.se},
                {"frac_large", p.summary.frac_large},
                {"trials", p.trials.size()},
                {"beta", p.point.beta},
                {"spec_hash", sirnet::spec_hash(spec)},
                {"master_seed", spec.master_seed}}}}
             .dump()
      << '\n';
  return kOk;
}

int cmd_spectral(const Flags& f) {
  auto spec = build_spec(f);
  auto gen = sirnet::make_graph(spec.family, spec.params, spec.master_seed);
  auto rep = sirnet::spectral_radius(gen.graph);
  auto deg = sirnet::degree_extremes(gen.graph);
  json j{{"lambda1", rep.lambda1},
         {"residual", rep.residual},
         {"iterations", rep.iterations},
         {"converged", rep.converged},
         {"method", std::string(sirnet::to_string(rep.method))},
         {"min_degree", deg.min},
         {"mean_degree", deg.mean()},
         {"max_degree", deg.max},
         {"nodes", gen.graph.node_count()},
         {"edges", gen.graph.edge_count()}};
  std::ofstream file;
  open_output(f.output, file) << j.dump(2) << '\n';
  return rep.converged ? kOk : kError;
}

int cmd_bounds(const Flags& f) {
  auto spec = build_spec(f);
  json j;
  std::vector<std::optional<double>> values;
  if (spec.sweep) for (double v : spec.sweep->grid) values.emplace_back(v);
  else values.emplace_back(std::nullopt);
  j["points"] = json::array();
  for (const auto& v : values) {
    auto point = sirnet::resolve_point(spec, v);
    json pj = sirnet::to_json(sirnet::theory_for(point));
    pj["sweep_value"] = v ? json(*v) : json(nullptr);
    pj["beta"] = point.beta;
    j["points"].push_back(pj);
  }
  int code = kOk;
  if (f.check) {
    auto table = sirnet::compare_theory(sirnet::run_experiment(spec, workers(f)));
    j["check"] = sirnet::to_json(table);
    if (!table.pass()) code = kCheckFailed;
  }
  std::ofstream file;
  open_output(f.output, file) << j.dump(2) << '\n';
  return code;
}

int cmd_sweep(const Flags& f) {
  auto spec = build_spec(f);
  auto result = sirnet::run_experiment(spec, workers(f));
  std::ofstream file;
  open_output(spec.output, file) << sirnet::to_json(result).dump(2) << '\n';
  if (!f.csv.empty()) sirnet::emit_plot_data(result, f.csv);
  return kOk;
}

int cmd_compare(const Flags& f) {
  auto spec = build_spec(f);
  auto result = sirnet::run_experiment(spec, workers(f));
  auto table = sirnet::compare_theory(result);
  if (!table.any_applicable()) throw std::runtime_error("compare: no theory bound applies at any grid point");
  json j = sirnet::to_json(table);
  j["provenance"] = sirnet::to_json(result, false)["provenance"];
  std::ofstream file;
  open_output(spec.output, file) << j.dump(2) << '\n';
  if (!f.csv.empty()) sirnet::emit_plot_data(result, f.csv);
  return table.pass() ? kOk : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SIR epidemics on networks: simulation, spectra and threshold bounds"};
  app.require_subcommand(1);
  app.set_version_flag("--version", sirnet::kVersion);
  Flags f;

  auto* generate = app.add_subcommand("generate", "Sample a graph and write an edge list plus .meta.json");
  add_spec_flags(generate, f);
  generate->add_option("-o,--output", f.output, "Edge-list path (default stdout)");

  auto* simulate = app.add_subcommand("simulate", "Run epidemic trials; one JSON line per trial plus a summary");
  add_spec_flags(simulate, f);
  simulate->add_option("-o,--output", f.output, "Output path (default stdout)");

  auto* spectral = app.add_subcommand("spectral", "Spectral radius and degree statistics as JSON");
  add_spec_flags(spectral, f);
  spectral->add_option("-o,--output", f.output, "Output path (default stdout)");

  auto* bounds = app.add_subcommand("bounds", "Theory report as JSON");
  add_spec_flags(bounds, f);
  add_sweep_flags(bounds, f);
  bounds->add_flag("--check", f.check, "Also run the Monte Carlo experiment and check the bounds");
  bounds->add_option("-o,--output", f.output, "Output path (default stdout)");

  auto* sweep = app.add_subcommand("sweep", "Run a sweep and write the result JSON");
  add_spec_flags(sweep, f);
  add_sweep_flags(sweep, f);
  sweep->add_option("-o,--output", f.output, "Result JSON path (default stdout)");

  auto* compare = app.add_subcommand("compare", "Theory-vs-simulation table; exit 2 if a check fails");
  add_spec_flags(compare, f);
  add_sweep_flags(compare, f);
  compare->add_option("-o,--output", f.output, "Table JSON path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kError;
  }

  try {
    if (*generate) return cmd_generate(f);
    if (*simulate) return cmd_simulate(f);
    if (*spectral) return cmd_spectral(f);
    if (*bounds) return cmd_bounds(f);
    if (*sweep) return cmd_sweep(f);
    if (*compare) return cmd_compare(f);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kError;
  }
  return kError;
}
