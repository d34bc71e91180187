#include "commands.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "concentra/cube_core.hpp"
#include "concentra/cycle_stats.hpp"
#include "concentra/errors.hpp"
#include "concentra/experiments.hpp"
#include "concentra/parallel.hpp"
#include "concentra/random_graph.hpp"
#include "concentra/sweeps.hpp"
#include "concentra/talagrand.hpp"
#include "concentra/version.hpp"

namespace concentra::cli {

namespace {

using nlohmann::json;
using experiments::Format;
using experiments::format_number;

struct Common {
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string out;
  std::string format = "json";
  std::string config;
};

void add_common(CLI::App& app, Common& c, const char* default_format) {
  c.format = default_format;
  c.threads = default_threads();
  app.add_option("--seed", c.seed, "Master seed");
  app.add_option("--threads", c.threads, "Worker threads")
      ->envname("CONCENTRA_THREADS")
      ->check(CLI::PositiveNumber);
  app.add_option("--out", c.out, "Output file");
  app.add_option("--format", c.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--config", c.config, "JSON config file; flags override it")
      ->check(CLI::ExistingFile);
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return json::parse(in);
}

bool given(const CLI::App& app, const char* name) { return app.get_option(name)->count() > 0; }

void flatten(const json& j, const std::string& prefix, std::ostream& out) {
  if (j.is_object()) {
    for (const auto& [key, value] : j.items()) {
      flatten(value, prefix.empty() ? key : prefix + "." + key, out);
    }
    return;
  }
  out << prefix << ',';
  if (j.is_number_float()) {
    out << format_number(j.get<double>());
  } else if (j.is_string()) {
    out << j.get<std::string>();
  } else if (!j.is_null()) {
    out << j.dump();
  }
  out << '\n';
}

// JSON documents as-is; CSV as a header comment plus field,value rows.
std::string render(const json& doc, Format format) {
  if (format == Format::kJson) return doc.dump(2) + "\n";
  std::ostringstream out;
  out << "# " << kVersion << "\n";
  if (doc.contains("config")) out << "# config: " << doc.at("config").dump() << "\n";
  out << "field,value\n";
  json body = doc;
  body.erase("config");
  body.erase("version");
  flatten(body, "", out);
  return out.str();
}

std::string interval_text(const stats::ProportionEstimate& e) {
  std::ostringstream os;
  os << format_number(e.frequency) << " (" << e.successes << "/" << e.trials << ", 95% CI ["
     << format_number(e.wilson.low) << ", " << format_number(e.wilson.high) << "])";
  return os.str();
}

json proportion_json(const stats::ProportionEstimate& e) {
  return {{"successes", e.successes},
          {"trials", e.trials},
          {"frequency", e.frequency},
          {"wilson", {{"low", e.wilson.low}, {"high", e.wilson.high}}}};
}

// ---------------------------------------------------------------------------
// verify-cube

struct VerifyArgs {
  Common common;
  std::vector<std::size_t> dims{2, 3, 4, 5, 6, 7, 8};
  std::vector<double> ps{0.1, 0.3, 0.5, 0.7, 0.9};
  std::size_t instances = 20;
  std::size_t lambdas = 20;
  std::string table;
  bool allow_nonmonotone = false;
};

void report_line(std::ostream& out, const talagrand::VerificationReport& r, const char* label) {
  out << label << ": instances=" << r.instances << " max_lhs_over_bound="
      << format_number(r.max_lhs_over_bound) << " violations=" << r.violations.size() << '\n';
}

int verify_cube(const CLI::App& app, VerifyArgs& args, std::ostream& out) {
  if (!args.common.config.empty()) {
    const json c = read_json_file(args.common.config);
    if (c.contains("dims") && !given(app, "--dims")) args.dims = c["dims"].get<std::vector<std::size_t>>();
    if (c.contains("ps") && !given(app, "--ps")) args.ps = c["ps"].get<std::vector<double>>();
    if (c.contains("instances") && !given(app, "--instances")) args.instances = c["instances"];
    if (c.contains("lambdas") && !given(app, "--lambdas")) args.lambdas = c["lambdas"];
    if (c.contains("seed") && !given(app, "--seed")) args.common.seed = c["seed"];
  }
  for (std::size_t m : args.dims) {
    if (m < 1 || m > talagrand::kMaxVerifierDimension) {
      throw GuardError("dimension " + std::to_string(m) + " outside 1.." +
                       std::to_string(talagrand::kMaxVerifierDimension));
    }
  }
  for (double p : args.ps) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("every p must lie in (0, 1)");
  }

  std::vector<std::pair<std::string, talagrand::VerificationReport>> reports;
  json config;
  if (!args.table.empty()) {
    const json t = read_json_file(args.table);
    const cube::FunctionTable table = t.contains("terms")
                                          ? cube::FunctionTable::from(cube::multilinear_from_json(t))
                                          : cube::table_from_json(t);
    if (table.dim() > talagrand::kMaxVerifierDimension) {
      throw GuardError("table dimension exceeds " + std::to_string(talagrand::kMaxVerifierDimension));
    }
    const auto monotone = cube::check_monotone(table);
    if (!monotone.ok() && !args.allow_nonmonotone) {
      throw PreconditionError("table is not monotone: " + monotone.violation->describe() +
                              " (pass --allow-nonmonotone to verify anyway)");
    }
    config = {{"table", args.table}, {"ps", args.ps}, {"allow_nonmonotone", args.allow_nonmonotone}};
    talagrand::VerificationReport t1{"theorem1", {}, 0.0, {}, 0};
    talagrand::VerificationReport bob{"bobkov", {}, 0.0, {}, 0};
    talagrand::Theorem1Options options;
    options.require_monotone = !args.allow_nonmonotone;
    for (double p : args.ps) {
      const cube::ProductMeasure mu(p, table.dim());
      t1.merge(talagrand::verify_theorem1(table, mu, options));
      bob.merge(talagrand::verify_bobkov(table, mu));
    }
    reports = {{"theorem1", t1}, {"bobkov", bob}};
  } else {
    talagrand::SweepConfig sweep;
    sweep.dims = args.dims;
    sweep.ps = args.ps;
    sweep.instances = args.instances;
    sweep.lambdas = args.lambdas;
    sweep.seed = args.common.seed;
    sweep.threads = args.common.threads;
    config = {{"dims", sweep.dims},
              {"ps", sweep.ps},
              {"instances", sweep.instances},
              {"lambdas", sweep.lambdas},
              {"seed", sweep.seed}};
    auto distance = talagrand::sweep_convex_distance(sweep);
    reports = {{"theorem1", talagrand::sweep_theorem1(sweep)},
               {"T1", std::move(distance.t1)},
               {"T2_random", std::move(distance.t2_random)},
               {"T2_derivatives", std::move(distance.t2_derivatives)},
               {"bobkov", talagrand::sweep_bobkov(sweep)},
               {"proof_chain", talagrand::sweep_proof_chain(sweep)}};
  }

  std::size_t violations = 0;
  json doc{{"version", kVersion}, {"config", config}, {"reports", json::object()}};
  for (const auto& [name, report] : reports) {
    report_line(out, report, name.c_str());
    violations += report.violations.size();
    doc["reports"][name] = report;
  }
  doc["passed"] = violations == 0;
  out << (violations == 0 ? "all checks passed" : "violations found") << '\n';
  if (!args.common.out.empty()) {
    experiments::write_file_atomic(args.common.out,
                                   render(doc, experiments::parse_format(args.common.format)));
  }
  return violations == 0 ? kSuccess : kRuntimeError;
}

// ---------------------------------------------------------------------------
// graph

struct GraphArgs {
  Common common;
  std::size_t n = 0;
  double p = 0.0;
  double np = 0.0;
  std::size_t k = 3;
  std::string edge_list;
  std::string cycles_out;
  std::size_t trials = 0;
  double C = 1.0;
};

int graph_command(const CLI::App& app, GraphArgs& args, std::ostream& out) {
  if (!args.common.config.empty()) {
    const json c = read_json_file(args.common.config);
    if (c.contains("n") && !given(app, "--n")) args.n = c["n"];
    if (c.contains("p") && !given(app, "--p")) args.p = c["p"];
    if (c.contains("np") && !given(app, "--np")) args.np = c["np"];
    if (c.contains("k") && !given(app, "--k")) args.k = c["k"];
    if (c.contains("trials") && !given(app, "--trials")) args.trials = c["trials"];
    if (c.contains("C") && !given(app, "--C")) args.C = c["C"];
    if (c.contains("seed") && !given(app, "--seed")) args.common.seed = c["seed"];
  }
  const bool has_p = given(app, "--p") || args.p > 0.0;
  const bool has_np = given(app, "--np") || args.np > 0.0;

  std::optional<graph::Graph> g;
  if (!args.edge_list.empty()) {
    std::ifstream in(args.edge_list);
    if (!in) throw std::runtime_error("cannot open " + args.edge_list);
    g = graph::read_edge_list(in);
    args.n = g->vertex_count();
  } else if (args.n < 2) {
    throw std::invalid_argument("give --n (at least 2) or --edge-list");
  }
  double p = args.p;
  if (!has_p && has_np) p = args.np / static_cast<double>(args.n);
  if (!has_p && !has_np) {
    if (!g) throw std::invalid_argument("give --p or --np");
    p = g->edge_slots() == 0 ? 0.0
                             : static_cast<double>(g->edge_count()) / static_cast<double>(g->edge_slots());
  }
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p must lie in [0, 1]");
  if (!g) g = graph::sample_graph(args.n, p, args.common.seed);
  const double np = static_cast<double>(args.n) * p;

  const auto cycles = cycles::enumerate_cycles(*g, args.k, args.common.threads);
  const auto stats = cycles::local_variance_cycles(*g, cycles);
  out << "Z=" << stats.Z << " V=" << stats.V << " W=" << stats.W << '\n';
  out << "n=" << args.n << " p=" << format_number(p) << " np=" << format_number(np)
      << " edges=" << g->edge_count() << " max_degree=" << g->max_degree() << '\n';
  const double ratio = np > 0.0 ? cycles::theorem2_ratio(stats.V, stats.Z, np, args.k) : 0.0;
  out << "theorem2_ratio=" << format_number(ratio) << '\n';

  json config{{"n", args.n}, {"p", p}, {"k", args.k}, {"seed", args.common.seed},
              {"trials", args.trials}, {"C", args.C}};
  if (!args.edge_list.empty()) config["edge_list"] = args.edge_list;
  json doc{{"version", kVersion}, {"config", config}, {"stats", stats},
           {"edges", g->edge_count()}, {"max_degree", g->max_degree()},
           {"single_shared_edge_pairs", stats.single_shared_edge_pairs},
           {"theorem2_ratio", ratio}};

  const graph::LogConventions conventions;
  if (np > conventions.guard()) {
    const auto e = graph::event_E(*g, p, conventions);
    out << "event_E=" << (e.holds ? "holds" : "fails") << " degree_clause=" << e.degree_clause
        << " bucket_clause=" << e.bucket_clause << " j_max=" << e.j_max << '\n';
    json buckets = json::array();
    for (const auto& b : e.buckets) {
      buckets.push_back({{"j", b.j}, {"cardinality", b.cardinality}, {"threshold", b.threshold}});
    }
    doc["event_E"] = {{"holds", e.holds},
                      {"degree_clause", e.degree_clause},
                      {"bucket_clause", e.bucket_clause},
                      {"j_max", e.j_max},
                      {"buckets", buckets}};
  } else {
    out << "event_E=undefined (np <= " << format_number(conventions.guard()) << ")\n";
  }

  if (args.trials > 0) {
    const auto sweep = graph::sweep_graph_events(args.n, p, args.trials, args.common.seed,
                                                 args.common.threads, conventions);
    const auto l1 = graph::estimate_lemma1(args.n, p, args.trials, args.common.seed,
                                           args.common.threads);
    out << "lemma1 frequency=" << interval_text(sweep.lemma1)
        << " bound=" << format_number(l1.bound) << '\n';
    json estimates{{"lemma1", proportion_json(sweep.lemma1)}, {"lemma1_bound", l1.bound}};
    if (sweep.event_e.trials > 0) {
      const auto l2 = graph::estimate_lemma2(args.n, p, args.trials, args.common.seed, args.C,
                                             args.common.threads, conventions);
      out << "event_E frequency=" << interval_text(sweep.event_e) << '\n';
      out << "lemma2 frequency=" << interval_text(sweep.lemma2)
          << " bound=" << format_number(l2.bound) << '\n';
      estimates["event_E"] = proportion_json(sweep.event_e);
      estimates["lemma2"] = proportion_json(sweep.lemma2);
      estimates["lemma2_bound"] = l2.bound;
    }
    doc["estimates"] = estimates;
  }

  if (!args.cycles_out.empty()) {
    std::ostringstream text;
    cycles::write_cycles(text, cycles);
    experiments::write_file_atomic(args.cycles_out, text.str());
  }
  if (!args.common.out.empty()) {
    experiments::write_file_atomic(args.common.out,
                                   render(doc, experiments::parse_format(args.common.format)));
  }
  return kSuccess;
}

// ---------------------------------------------------------------------------
// mc

struct McArgs {
  Common common;
  experiments::ExperimentConfig config;
  double np = 0.0;
  std::string ratio_form = "stated";
  std::string summary;
  bool timing = false;
};

int mc_command(const CLI::App& app, McArgs& args, std::ostream& out) {
  experiments::ExperimentConfig config;
  if (!args.common.config.empty()) {
    config = experiments::config_from_json(read_json_file(args.common.config));
  }
  if (given(app, "--n")) config.n = args.config.n;
  if (given(app, "--k")) config.k = args.config.k;
  if (given(app, "--trials")) config.trials = args.config.trials;
  if (given(app, "--seed")) config.seed = args.common.seed;
  if (given(app, "--C")) config.C = args.config.C;
  if (given(app, "--epsilon")) config.epsilon = args.config.epsilon;
  if (given(app, "--ratio-form")) {
    config.ratio_form =
        args.ratio_form == "scaled" ? cycles::RatioForm::kScaled : cycles::RatioForm::kStated;
  }
  if (given(app, "--p")) {
    config.p = args.config.p;
  } else if (given(app, "--np")) {
    config.p = args.np / static_cast<double>(config.n);
  }
  config.validate();

  const auto records =
      experiments::run_trials(config, {args.common.threads, args.timing});
  const auto report = experiments::summarize(records, config);
  const Format format = experiments::parse_format(args.common.format);

  out << "trials=" << report.trials << " included=" << report.included
      << " excluded=" << report.excluded << '\n';
  out << "mean_Z=" << format_number(report.z_mean.mean) << " 95% CI ["
      << format_number(report.z_mean.normal.low) << ", " << format_number(report.z_mean.normal.high)
      << "] closed_form_EZ=" << format_number(report.expected_z) << '\n';
  out << "median_Z=" << format_number(report.z_median)
      << " median/EZ=" << format_number(report.z_median / report.expected_z) << '\n';
  out << "P(Z >= " << format_number(report.tail_threshold) << ")=" << interval_text(report.tail)
      << '\n';
  if (report.event_E) out << "event_E frequency=" << interval_text(*report.event_E) << '\n';
  out << "theorem2_ratio q50=" << format_number(report.t2_ratio.q50)
      << " q90=" << format_number(report.t2_ratio.q90)
      << " q99=" << format_number(report.t2_ratio.q99)
      << " max=" << format_number(report.t2_ratio.max) << '\n';
  out << "theorem3 shift a=" << format_number(report.shift_a)
      << " event_mismatches=" << report.shift_mismatches;
  if (report.dev_bound) out << " dev_bound=" << format_number(*report.dev_bound);
  out << '\n';

  if (!args.common.out.empty()) experiments::export_trials(args.common.out, records, config, format);
  if (!args.summary.empty()) experiments::export_report(args.summary, report, config, format);
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Concentration of cycle counts in random graphs: exhaustive cube checks and "
               "Monte Carlo experiments",
               "concentra"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  VerifyArgs verify;
  auto* verify_cmd = app.add_subcommand("verify-cube", "Exhaustive checks over small cubes");
  add_common(*verify_cmd, verify.common, "json");
  verify_cmd->add_option("--json", verify.common.out, "Alias of --out with JSON output");
  verify_cmd->add_option("--dims", verify.dims, "Cube dimensions to sweep");
  verify_cmd->add_option("--ps", verify.ps, "Coordinate probabilities");
  verify_cmd->add_option("--instances", verify.instances, "Random instances per (m, p)");
  verify_cmd->add_option("--lambdas", verify.lambdas, "Random weight vectors per instance");
  verify_cmd->add_option("--table", verify.table, "Verify one function given as a JSON table")
      ->check(CLI::ExistingFile);
  verify_cmd->add_flag("--allow-nonmonotone", verify.allow_nonmonotone,
                       "Verify a table even if it is not monotone");

  GraphArgs graph_args;
  auto* graph_cmd = app.add_subcommand("graph", "Cycle statistics and degree events of one graph");
  add_common(*graph_cmd, graph_args.common, "json");
  graph_cmd->add_option("--n", graph_args.n, "Number of vertices");
  auto* gp = graph_cmd->add_option("--p", graph_args.p, "Edge probability");
  graph_cmd->add_option("--np", graph_args.np, "Expected degree; p = np / n")->excludes(gp);
  graph_cmd->add_option("--k", graph_args.k, "Cycle length");
  graph_cmd->add_option("--edge-list", graph_args.edge_list, "Read the graph from an edge list")
      ->check(CLI::ExistingFile);
  graph_cmd->add_option("--cycles", graph_args.cycles_out, "Write the cycle list here");
  graph_cmd->add_option("--trials", graph_args.trials,
                        "Also estimate degree-event frequencies over this many samples");
  graph_cmd->add_option("--C", graph_args.C, "Constant in the Lemma 2 bound");

  McArgs mc;
  auto* mc_cmd = app.add_subcommand("mc", "Monte Carlo over G(n, p)");
  add_common(*mc_cmd, mc.common, "csv");
  mc_cmd->add_option("--n", mc.config.n, "Number of vertices");
  auto* mp = mc_cmd->add_option("--p", mc.config.p, "Edge probability");
  mc_cmd->add_option("--np", mc.np, "Expected degree; p = np / n")->excludes(mp);
  mc_cmd->add_option("--k", mc.config.k, "Cycle length");
  mc_cmd->add_option("--trials", mc.config.trials, "Number of trials");
  mc_cmd->add_option("--C", mc.config.C, "Constant C(k)");
  mc_cmd->add_option("--epsilon", mc.config.epsilon, "Epsilon in the median shift");
  mc_cmd->add_option("--ratio-form", mc.ratio_form, "Theorem 2 ratio denominator")
      ->check(CLI::IsMember({"stated", "scaled"}));
  mc_cmd->add_option("--summary", mc.summary, "Write the summary report here");
  mc_cmd->add_flag("--timing", mc.timing, "Record per-trial runtimes");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kRefused;
  }

  try {
    if (verify_cmd->parsed()) return verify_cube(*verify_cmd, verify, out);
    if (graph_cmd->parsed()) return graph_command(*graph_cmd, graph_args, out);
    return mc_command(*mc_cmd, mc, out);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kRefused;
  } catch (const std::length_error& e) {
    err << "error: " << e.what() << '\n';
    return kRefused;
  } catch (const std::out_of_range& e) {
    err << "error: " << e.what() << '\n';
    return kRefused;
  } catch (const nlohmann::json::exception& e) {
    err << "error: bad JSON input: " << e.what() << '\n';
    return kRefused;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
}

}  // namespace concentra::cli
