#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ricsec/bus.hpp"
#include "ricsec/llm_id.hpp"
#include "ricsec/scenario.hpp"
#include "ricsec/ss_xapp.hpp"

namespace ricsec {

// ---------------------------------------------------------------------------
// Dataset generation

struct LabeledSample {
  std::int64_t num_ues = 1;
  std::int64_t tx_pkts = 0;
  Label label = Label::Legitimate;
  friend bool operator==(const LabeledSample&, const LabeledSample&) = default;
};

/// `n` samples uniform over the ranges, labelled by the rule oracle.
/// Throws ConfigError on n == 0 or a degenerate range.
std::vector<LabeledSample> generate_dataset(std::size_t n, std::uint64_t seed,
                                            const DatasetSpec& ranges,
                                            std::int64_t base = kDefaultBaseLimitPerUe);

/// {"instruction": prompt, "output": label} per line.
std::string dataset_jsonl(const std::vector<LabeledSample>& samples,
                          const PromptTemplate& tmpl = {});

std::string samples_csv(const std::vector<LabeledSample>& samples);
std::vector<LabeledSample> read_samples_csv(std::istream& in);

// ---------------------------------------------------------------------------
// Detector accuracy

struct AccuracyResult {
  std::string detector;
  std::size_t n_requested = 0;
  std::size_t n_samples = 0;  // evaluated; < n_requested only when aborted
  std::size_t n_correct = 0;
  std::size_t n_incorrect = 0;
  std::size_t n_undecided = 0;
  std::size_t n_detector_errors = 0;
  std::size_t true_malicious = 0;
  std::size_t false_malicious = 0;
  std::size_t true_legitimate = 0;
  std::size_t false_legitimate = 0;
  bool aborted = false;

  double accuracy() const {
    return n_samples == 0 ? 0.0 : static_cast<double>(n_correct) / static_cast<double>(n_samples);
  }
};

struct EvalOptions {
  /// Abort when detector errors / evaluated samples exceeds this (checked after min_samples).
  double max_error_rate = 0.5;
  std::size_t min_samples_before_abort = 10;
  /// Concurrent requests for the ExternalLlm backend.
  std::size_t max_in_flight = 1;
};

AccuracyResult evaluate_detector(const std::vector<LabeledSample>& dataset,
                                 const DetectorConfig& cfg, const EvalOptions& options = {});

std::string accuracy_json(const AccuracyResult& result);

// ---------------------------------------------------------------------------
// End-to-end timeline

struct RatePoint {
  VirtualMs time = 0;
  UeId ue;
  SliceId slice;
  std::int64_t prbs = 0;
  double mbps = 0.0;
};

struct TimelineEvent {
  VirtualMs time = 0;
  UeId ue;
  std::string name;
};

struct TimelineResult {
  std::vector<RatePoint> rates;
  std::vector<TimelineEvent> events;
  std::optional<UeId> attacker;
  std::optional<VirtualMs> attack_onset;
  /// Timestamp of the KPM report behind the first post-onset Malicious alert.
  std::optional<VirtualMs> detection_time;
  std::optional<VirtualMs> alert_time;
  /// When the E2 node applied the quarantine rebind.
  std::optional<VirtualMs> mitigation_time;
  std::optional<VirtualMs> ack_time;
  /// First tick at which every legitimate UE is back to its pre-onset rate.
  std::optional<VirtualMs> recovery_time;

  /// Achieved rate of `ue` at the tick at `time`.
  std::optional<double> rate_at(UeId ue, VirtualMs time) const;
};

struct RunResult {
  Scenario scenario;
  TimelineResult timeline;
  std::vector<MitigationRecord> mitigations;
  std::vector<Verdict> verdicts;
  std::vector<UndecidedReport> undecided;
  LlmIdMetrics llm;
  std::vector<KpmReport> reports;
  std::uint64_t reports_dropped = 0;
  std::uint64_t duplicate_alerts = 0;
  std::uint64_t unmatched_acks = 0;
  std::vector<BusMessage> trace;
  std::uint64_t bus_enqueued = 0;
  std::uint64_t bus_delivered = 0;

  std::size_t successful_mitigations(UeId ue) const;
};

/// Wires the E2 node, KPIMON, LLM-ID and SSxApp on one bus and runs the scenario to
/// completion on the virtual clock, then drains the bus.
RunResult run_timeline_experiment(const Scenario& scenario);

std::string timeline_csv(const RunResult& run);
std::string run_summary_json(const RunResult& run);
std::string trace_jsonl(const std::vector<BusMessage>& trace);

/// Writes timeline.csv, run_summary.json, bus_trace.jsonl, effective_scenario.yaml and,
/// when the scenario asks for it, kpm_reports.csv.
void write_run_outputs(const RunResult& run, const std::filesystem::path& dir);

}  // namespace ricsec
