#include "concentra/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "concentra/errors.hpp"
#include "concentra/parallel.hpp"
#include "concentra/rng.hpp"
#include "concentra/version.hpp"

namespace concentra::experiments {

using nlohmann::json;

void ExperimentConfig::validate() const {
  if (trials < 1) throw std::invalid_argument("trials must be at least 1");
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("p must lie in (0, 1]");
  if (k < 3) throw std::invalid_argument("k must be at least 3");
  if (k > n) throw std::invalid_argument("k must not exceed n");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (!(C >= 0.0)) throw std::invalid_argument("C must be nonnegative");
}

void to_json(json& j, const ExperimentConfig& c) {
  j = json{{"n", c.n},
           {"p", c.p},
           {"k", c.k},
           {"trials", c.trials},
           {"seed", c.seed},
           {"C", c.C},
           {"epsilon", c.epsilon},
           {"ratio_form", c.ratio_form == cycles::RatioForm::kStated ? "stated" : "scaled"}};
}

ExperimentConfig config_from_json(const json& j, ExperimentConfig c) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  static const char* known[] = {"n", "p", "np", "k", "trials", "seed", "C", "epsilon", "ratio_form"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
      throw std::invalid_argument("unknown config field \"" + key + "\"");
    }
  }
  if (j.contains("n")) c.n = j.at("n").get<std::size_t>();
  if (j.contains("p")) {
    c.p = j.at("p").get<double>();
  } else if (j.contains("np")) {
    c.p = j.at("np").get<double>() / static_cast<double>(c.n);
  }
  if (j.contains("k")) c.k = j.at("k").get<std::size_t>();
  if (j.contains("trials")) c.trials = j.at("trials").get<std::size_t>();
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("C")) c.C = j.at("C").get<double>();
  if (j.contains("epsilon")) c.epsilon = j.at("epsilon").get<double>();
  if (j.contains("ratio_form")) {
    const auto form = j.at("ratio_form").get<std::string>();
    if (form == "stated") {
      c.ratio_form = cycles::RatioForm::kStated;
    } else if (form == "scaled") {
      c.ratio_form = cycles::RatioForm::kScaled;
    } else {
      throw std::invalid_argument("ratio_form must be \"stated\" or \"scaled\"");
    }
  }
  return c;
}

double expected_cycles_closed_form(std::size_t n, double p, std::size_t k) {
  if (k < 3 || k > n) throw std::invalid_argument("expected_cycles_closed_form: need 3 <= k <= n");
  double falling = 1.0;
  for (std::size_t i = 0; i < k; ++i) falling *= static_cast<double>(n - i);
  return falling / (2.0 * static_cast<double>(k)) * std::pow(p, static_cast<double>(k));
}

TrialRecord run_trial(const ExperimentConfig& config, std::size_t index, bool timing) {
  const auto start = std::chrono::steady_clock::now();
  TrialRecord record;
  record.index = index;
  record.seed = derive_seed(config.seed, index);
  const double np = config.np();
  try {
    const graph::Graph g = graph::sample_graph(config.n, config.p, record.seed);
    const cycles::CycleStatistics s = cycles::local_variance_cycles(g, config.k, 1, config.limits);
    record.Z = s.Z;
    record.V = s.V;
    record.W = s.W;
    record.t2_ratio = cycles::theorem2_ratio(s.V, s.Z, np, config.k, config.ratio_form);
    if (np > config.conventions.guard()) {
      record.event_E = graph::event_E(g, config.p, config.conventions).holds;
    }
  } catch (const GuardError& e) {
    record.error = e.what();
  }
  if (timing) {
    record.runtime_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  }
  return record;
}

std::vector<TrialRecord> run_trials(const ExperimentConfig& config, const RunOptions& options) {
  config.validate();
  std::vector<TrialRecord> records(config.trials);
  parallel_for(config.trials, options.threads, [&](std::size_t i) {
    records[i] = run_trial(config, i, options.timing);
  });
  return records;
}

namespace {

double shift_radius(double z, double np, std::size_t k, double epsilon, double C) {
  const double kd = static_cast<double>(k);
  return std::sqrt(C * epsilon * (std::pow(np, kd) * z + std::pow(np, 2.0 * kd)));
}

}  // namespace

double theorem3_shift(double median, double np, std::size_t k, double epsilon, double C) {
  if (median < 0.0 || np < 0.0 || epsilon < 0.0 || C < 0.0) {
    throw std::invalid_argument("theorem3_shift: inputs must be nonnegative");
  }
  return median - shift_radius(median, np, k, epsilon, C);
}

ShiftCheck theorem3_event_check(double z, double median, double np, std::size_t k,
                                double epsilon, double C) {
  const double a = theorem3_shift(median, np, k, epsilon, C);
  const double rhs = a + shift_radius(z, np, k, epsilon, C);
  const double slack = 1e-12 * std::max({1.0, std::abs(z), std::abs(rhs)});
  return {z >= rhs - slack, z >= median};
}

SummaryReport summarize(std::span<const TrialRecord> records, const ExperimentConfig& config) {
  if (records.empty()) throw std::invalid_argument("summarize: no trial records");
  std::vector<const TrialRecord*> usable;
  for (const auto& r : records) {
    if (!r.error) usable.push_back(&r);
  }
  if (usable.empty()) throw std::invalid_argument("summarize: every trial hit a size guard");

  SummaryReport report;
  report.trials = records.size();
  report.included = usable.size();
  report.excluded = records.size() - usable.size();

  std::vector<double> z, ratios;
  for (const auto* r : usable) {
    z.push_back(static_cast<double>(r->Z));
    ratios.push_back(r->t2_ratio);
  }
  report.z_mean = stats::mean_estimate(z);
  std::sort(z.begin(), z.end());
  report.z_median = stats::lower_quantile(z, 0.5);
  report.expected_z = expected_cycles_closed_form(config.n, config.p, config.k);
  report.tail_threshold = 2.0 * report.z_mean.mean;
  const auto tail_hits = static_cast<std::uint64_t>(
      z.end() - std::lower_bound(z.begin(), z.end(), report.tail_threshold));
  report.tail = stats::proportion(tail_hits, z.size());

  std::uint64_t e_trials = 0, e_hits = 0;
  for (const auto* r : usable) {
    if (!r->event_E) continue;
    ++e_trials;
    e_hits += *r->event_E;
  }
  if (e_trials > 0) report.event_E = stats::proportion(e_hits, e_trials);

  std::sort(ratios.begin(), ratios.end());
  report.t2_ratio = {stats::lower_quantile(ratios, 0.5), stats::lower_quantile(ratios, 0.9),
                     stats::lower_quantile(ratios, 0.99), ratios.back()};

  const double np = config.np();
  report.shift_a = theorem3_shift(report.z_median, np, config.k, config.epsilon, config.C);
  for (const auto* r : usable) {
    const auto check = theorem3_event_check(static_cast<double>(r->Z), report.z_median, np,
                                            config.k, config.epsilon, config.C);
    report.shift_mismatches += !check.agrees();
  }
  if (np > config.conventions.guard() && config.C > 0.0) {
    report.dev_bound = std::exp(-np * np / (config.C * config.conventions.loglog(np)));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

json interval_json(const stats::Interval& i) { return {{"low", i.low}, {"high", i.high}}; }

json proportion_json(const stats::ProportionEstimate& p) {
  return {{"successes", p.successes},
          {"trials", p.trials},
          {"frequency", p.frequency},
          {"wilson", interval_json(p.wilson)}};
}

stats::Interval interval_from(const json& j) {
  return {j.at("low").get<double>(), j.at("high").get<double>()};
}

stats::ProportionEstimate proportion_from(const json& j) {
  return {j.at("successes").get<std::uint64_t>(), j.at("trials").get<std::uint64_t>(),
          j.at("frequency").get<double>(), interval_from(j.at("wilson"))};
}

void flatten(const json& j, const std::string& prefix, std::ostringstream& out) {
  if (j.is_object()) {
    for (const auto& [key, value] : j.items()) {
      flatten(value, prefix.empty() ? key : prefix + "." + key, out);
    }
    return;
  }
  out << prefix << ',';
  if (j.is_number_float()) {
    out << format_number(j.get<double>());
  } else if (!j.is_null()) {
    out << j.dump();
  }
  out << '\n';
}

json parse_scalar(const std::string& text) {
  if (text.empty()) return nullptr;
  std::uint64_t u = 0;
  const auto* end = text.data() + text.size();
  if (auto [ptr, ec] = std::from_chars(text.data(), end, u); ec == std::errc{} && ptr == end) {
    return u;
  }
  double d = 0.0;
  if (auto [ptr, ec] = std::from_chars(text.data(), end, d); ec == std::errc{} && ptr == end) {
    return d;
  }
  throw std::runtime_error("summary csv: bad value \"" + text + "\"");
}

}  // namespace

std::string format_number(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  if (ec != std::errc{}) throw std::runtime_error("format_number failed");
  return {buffer, ptr};
}

void to_json(json& j, const SummaryReport& r) {
  j = json{{"trials", r.trials},
           {"included", r.included},
           {"excluded", r.excluded},
           {"z_mean",
            {{"mean", r.z_mean.mean},
             {"standard_error", r.z_mean.standard_error},
             {"normal", interval_json(r.z_mean.normal)}}},
           {"z_median", r.z_median},
           {"expected_z", r.expected_z},
           {"tail_threshold", r.tail_threshold},
           {"tail", proportion_json(r.tail)},
           {"event_E", r.event_E ? proportion_json(*r.event_E) : json(nullptr)},
           {"t2_ratio",
            {{"q50", r.t2_ratio.q50},
             {"q90", r.t2_ratio.q90},
             {"q99", r.t2_ratio.q99},
             {"max", r.t2_ratio.max}}},
           {"shift_a", r.shift_a},
           {"shift_mismatches", r.shift_mismatches},
           {"dev_bound", r.dev_bound ? json(*r.dev_bound) : json(nullptr)}};
}

SummaryReport summary_from_json(const json& j) {
  SummaryReport r;
  r.trials = j.at("trials").get<std::size_t>();
  r.included = j.at("included").get<std::size_t>();
  r.excluded = j.at("excluded").get<std::size_t>();
  const auto& m = j.at("z_mean");
  r.z_mean = {m.at("mean").get<double>(), m.at("standard_error").get<double>(),
              interval_from(m.at("normal"))};
  r.z_median = j.at("z_median").get<double>();
  r.expected_z = j.at("expected_z").get<double>();
  r.tail_threshold = j.at("tail_threshold").get<double>();
  r.tail = proportion_from(j.at("tail"));
  if (j.contains("event_E") && !j.at("event_E").is_null()) r.event_E = proportion_from(j.at("event_E"));
  const auto& q = j.at("t2_ratio");
  r.t2_ratio = {q.at("q50").get<double>(), q.at("q90").get<double>(), q.at("q99").get<double>(),
                q.at("max").get<double>()};
  r.shift_a = j.at("shift_a").get<double>();
  r.shift_mismatches = j.at("shift_mismatches").get<std::size_t>();
  if (j.contains("dev_bound") && !j.at("dev_bound").is_null()) {
    r.dev_bound = j.at("dev_bound").get<double>();
  }
  return r;
}

void to_json(json& j, const TrialRecord& r) {
  j = json{{"trial", r.index},
           {"seed", r.seed},
           {"Z", r.Z},
           {"V", r.V},
           {"W", r.W},
           {"event_E", r.event_E ? json(*r.event_E) : json(nullptr)},
           {"t2_ratio", r.t2_ratio},
           {"runtime_ms", r.runtime_ms ? json(*r.runtime_ms) : json(nullptr)}};
  if (r.error) j["error"] = *r.error;
}

Format parse_format(const std::string& name) {
  if (name == "json") return Format::kJson;
  if (name == "csv") return Format::kCsv;
  throw std::invalid_argument("format must be json or csv");
}

std::string header_block(const ExperimentConfig& config) {
  return std::string("# ") + kVersion + "\n# config: " + json(config).dump() + "\n";
}

std::string trials_csv(std::span<const TrialRecord> records, const ExperimentConfig& config) {
  std::ostringstream out;
  out << header_block(config) << "trial,seed,Z,V,W,event_E,t2_ratio,runtime_ms\n";
  for (const auto& r : records) {
    out << r.index << ',' << r.seed << ',';
    if (r.error) {
      out << ",,,,,";
    } else {
      out << r.Z << ',' << r.V << ',' << r.W << ',';
      if (r.event_E) out << (*r.event_E ? 1 : 0);
      out << ',' << format_number(r.t2_ratio) << ',';
    }
    if (r.runtime_ms) out << format_number(*r.runtime_ms);
    out << '\n';
  }
  return out.str();
}

std::string trials_json(std::span<const TrialRecord> records, const ExperimentConfig& config) {
  json out{{"version", kVersion}, {"config", config}, {"trials", json::array()}};
  for (const auto& r : records) out["trials"].push_back(r);
  return out.dump(2) + "\n";
}

std::string summary_text(const SummaryReport& report, const ExperimentConfig& config,
                         Format format) {
  const json summary = report;
  if (format == Format::kJson) {
    return json{{"version", kVersion}, {"config", config}, {"summary", summary}}.dump(2) + "\n";
  }
  std::ostringstream out;
  out << header_block(config) << "field,value\n";
  flatten(summary, "", out);
  return out.str();
}

SummaryReport summary_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  json summary = json::object();
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      if (line != "field,value") throw std::runtime_error("summary csv: missing column header");
      header_seen = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::runtime_error("summary csv: malformed row");
    json::json_pointer pointer("/" + [&] {
      std::string path = line.substr(0, comma);
      std::replace(path.begin(), path.end(), '.', '/');
      return path;
    }());
    summary[pointer] = parse_scalar(line.substr(comma + 1));
  }
  return summary_from_json(summary);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << contents;
    out.flush();
    if (!out) {
      std::filesystem::remove(tmp);
      throw std::runtime_error("write to " + tmp.string() + " failed");
    }
  }
  std::filesystem::rename(tmp, path);
}

void export_trials(const std::filesystem::path& path, std::span<const TrialRecord> records,
                   const ExperimentConfig& config, Format format) {
  if (records.empty()) throw std::invalid_argument("export_trials: no trial records");
  write_file_atomic(path, format == Format::kCsv ? trials_csv(records, config)
                                                 : trials_json(records, config));
}

void export_report(const std::filesystem::path& path, const SummaryReport& report,
                   const ExperimentConfig& config, Format format) {
  if (report.trials == 0) throw std::invalid_argument("export_report: empty report");
  write_file_atomic(path, summary_text(report, config, format));
}

}  // namespace concentra::experiments
