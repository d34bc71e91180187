#pragma once

// Seeded Monte Carlo over G(n, p): per-trial cycle statistics, the summary of
// the cycle count's distribution, and the bookkeeping around the median shift.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "concentra/cycle_stats.hpp"
#include "concentra/random_graph.hpp"
#include "concentra/stats.hpp"

namespace concentra::experiments {

struct ExperimentConfig {
  std::size_t n = 200;
  double p = 0.15;
  std::size_t k = 3;
  std::size_t trials = 1000;
  std::uint64_t seed = 1;
  double C = 1.0;
  double epsilon = 0.1;
  cycles::RatioForm ratio_form = cycles::RatioForm::kStated;
  graph::LogConventions conventions;
  cycles::CycleLimits limits;

  double np() const noexcept { return static_cast<double>(n) * p; }
  // Throws std::invalid_argument on trials = 0, p outside (0, 1], k < 3,
  // k > n, or nonpositive epsilon / negative C.
  void validate() const;
};

// Field names: n, p (or np, giving p = np / n), k, trials, seed, C, epsilon,
// ratio_form ("stated" | "scaled"). Missing fields keep their defaults.
void to_json(nlohmann::json& j, const ExperimentConfig& c);
ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base = {});

// Number of k-cycles in K_n times p^k.
double expected_cycles_closed_form(std::size_t n, double p, std::size_t k);

struct TrialRecord {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  std::uint64_t Z = 0;
  std::uint64_t V = 0;
  std::uint64_t W = 0;
  std::optional<bool> event_E;  // empty when np is below the bucket guard
  double t2_ratio = 0.0;
  std::optional<double> runtime_ms;
  std::optional<std::string> error;  // set when the trial hit a size guard

  friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

struct RunOptions {
  unsigned threads = 1;
  bool timing = false;  // fill runtime_ms (makes output run-dependent)
};

// Trial i samples G(n, p) with seed derive_seed(config.seed, i). Records come
// back in trial order and do not depend on the thread count.
std::vector<TrialRecord> run_trials(const ExperimentConfig& config, const RunOptions& options = {});
TrialRecord run_trial(const ExperimentConfig& config, std::size_t index, bool timing = false);

// a = M - sqrt(C eps ((np)^k M + (np)^{2k})).
double theorem3_shift(double median, double np, std::size_t k, double epsilon, double C);

// Pointwise comparison of {Z >= a + sqrt(C eps ((np)^k Z + (np)^{2k}))} with
// {Z >= M}.
struct ShiftCheck {
  bool shifted_event = false;
  bool median_event = false;
  bool agrees() const noexcept { return shifted_event == median_event; }
};
ShiftCheck theorem3_event_check(double z, double median, double np, std::size_t k,
                                double epsilon, double C);

struct RatioQuantiles {
  double q50 = 0.0;
  double q90 = 0.0;
  double q99 = 0.0;
  double max = 0.0;
  friend bool operator==(const RatioQuantiles&, const RatioQuantiles&) = default;
};

struct SummaryReport {
  std::size_t trials = 0;
  std::size_t included = 0;
  std::size_t excluded = 0;  // trials that hit a size guard
  stats::MeanEstimate z_mean;
  double z_median = 0.0;  // lower median
  double expected_z = 0.0;  // closed form
  double tail_threshold = 0.0;  // 2 * mean
  stats::ProportionEstimate tail;  // P(Z >= tail_threshold)
  std::optional<stats::ProportionEstimate> event_E;
  RatioQuantiles t2_ratio;
  double shift_a = 0.0;
  std::size_t shift_mismatches = 0;
  std::optional<double> dev_bound;  // exp(-(np)^2 / (C loglog np)), when defined
};

// Throws std::invalid_argument if no record is usable.
SummaryReport summarize(std::span<const TrialRecord> records, const ExperimentConfig& config);

void to_json(nlohmann::json& j, const SummaryReport& r);
SummaryReport summary_from_json(const nlohmann::json& j);
void to_json(nlohmann::json& j, const TrialRecord& r);

enum class Format { kJson, kCsv };
Format parse_format(const std::string& name);

// Header block: "# concentra <version>" and "# config: <json>".
std::string header_block(const ExperimentConfig& config);

// Columns trial,seed,Z,V,W,event_E,t2_ratio,runtime_ms after the header block.
std::string trials_csv(std::span<const TrialRecord> records, const ExperimentConfig& config);
std::string trials_json(std::span<const TrialRecord> records, const ExperimentConfig& config);

// JSON: {"version", "config", "summary"}. CSV: header block, then field,value
// rows with dotted names for nested fields.
std::string summary_text(const SummaryReport& report, const ExperimentConfig& config,
                         Format format);
SummaryReport summary_from_csv(const std::string& text);

// Writes to a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

// Throws std::invalid_argument on an empty record list before touching disk.
void export_trials(const std::filesystem::path& path, std::span<const TrialRecord> records,
                   const ExperimentConfig& config, Format format);
void export_report(const std::filesystem::path& path, const SummaryReport& report,
                   const ExperimentConfig& config, Format format);

// Shortest decimal text that reads back to the same double.
std::string format_number(double value);

}  // namespace concentra::experiments
