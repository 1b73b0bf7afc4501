#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ricsec/bus.hpp"
#include "ricsec/kpimon.hpp"
#include "ricsec/kpm.hpp"

namespace ricsec {

inline constexpr std::int64_t kDefaultBaseLimitPerUe = 312;

/// Few-shot instruction prompt with {NumUE}/{TXPackets} slots and two worked limits.
struct PromptTemplate {
  std::int64_t base_limit_per_ue = kDefaultBaseLimitPerUe;
  std::string text =
      "PLEASE ONLY OUTPUT IN A WORD with TX Pack limits of {Limit1} for 1 UE and {Limit2} for "
      "2 UEs, check if the following {NumUE} and {TXPackets} meet these bounds. If within "
      "bounds output Legitimate (input ≤ bounds) or Malicious (input ≥ bounds if "
      "exceeded).";
};

/// Template with the limit slots filled and the per-report slots left verbatim.
std::string render_instruction(const PromptTemplate& tmpl = {});

std::string build_prompt(std::int64_t num_ues, std::int64_t tx_pkts,
                         const PromptTemplate& tmpl = {});

/// Ground truth: Legitimate iff tx_pkts <= base * num_ues.
Label rule_oracle_classify(std::int64_t num_ues, std::int64_t tx_pkts,
                           std::int64_t base = kDefaultBaseLimitPerUe);

struct StaticThresholdParams {
  int confirmations = 5;
  /// Fixed packet threshold; unset means base_limit_per_ue * num_ues of each report.
  std::optional<std::int64_t> threshold_pkts;
  friend bool operator==(const StaticThresholdParams&, const StaticThresholdParams&) = default;
};

/// Label for the newest entry of an exceedance history: Malicious once the last
/// `confirmations` entries are all exceedances.
Label static_threshold_classify(const std::vector<bool>& exceedances, int confirmations);

struct ExternalLlmParams {
  std::string endpoint;  // full URL of a chat-completions endpoint
  std::string model;
  int timeout_ms = 10000;
  int max_retries = 2;
  std::string api_key;  // taken from the environment, never from scenario files
  bool debug = false;
  friend bool operator==(const ExternalLlmParams&, const ExternalLlmParams&) = default;
};

struct MockLlmParams {
  double accuracy = 0.99;
  /// Unset in a scenario means "use the scenario seed".
  std::optional<std::uint64_t> seed;
  friend bool operator==(const MockLlmParams&, const MockLlmParams&) = default;
};

enum class UndecidedPolicy { TreatLegitimate, TreatMalicious };

enum class InputPath { Store, Bus };

struct DetectorConfig {
  DetectorKind backend = DetectorKind::RuleOracle;
  std::int64_t base_limit_per_ue = kDefaultBaseLimitPerUe;
  StaticThresholdParams static_threshold;
  ExternalLlmParams external;
  MockLlmParams mock;
  UndecidedPolicy undecided = UndecidedPolicy::TreatLegitimate;

  /// Throws ConfigError listing invalid fields.
  void validate() const;
  friend bool operator==(const DetectorConfig&, const DetectorConfig&) = default;
};

enum class Outcome { Decided, ParseFailure, TransportError };

struct Classification {
  Outcome outcome = Outcome::Decided;
  std::optional<Label> label;
  std::optional<std::string> raw_text;
  std::string error;
};

/// Case-insensitive keyword search. Both or neither keyword yields nullopt.
std::optional<Label> parse_llm_response(std::string_view text);

class Detector {
 public:
  virtual ~Detector() = default;
  virtual DetectorKind kind() const = 0;
  virtual Classification classify(const KpmReport& report) = 0;
};

class RuleOracleDetector final : public Detector {
 public:
  explicit RuleOracleDetector(std::int64_t base = kDefaultBaseLimitPerUe) : base_(base) {}
  DetectorKind kind() const override { return DetectorKind::RuleOracle; }
  Classification classify(const KpmReport& report) override;

 private:
  std::int64_t base_;
};

/// Baseline: K consecutive exceedances per UE before flagging.
class StaticThresholdDetector final : public Detector {
 public:
  StaticThresholdDetector(StaticThresholdParams params, std::int64_t base);
  DetectorKind kind() const override { return DetectorKind::StaticThreshold; }
  Classification classify(const KpmReport& report) override;

 private:
  StaticThresholdParams params_;
  std::int64_t base_;
  std::map<UeId, int> streak_;
};

/// Stand-in for a model: returns the oracle label with probability `accuracy`.
class MockLlmDetector final : public Detector {
 public:
  MockLlmDetector(MockLlmParams params, std::int64_t base);
  DetectorKind kind() const override { return DetectorKind::MockLlm; }
  Classification classify(const KpmReport& report) override;

 private:
  std::int64_t base_;
  std::bernoulli_distribution correct_;
  std::mt19937_64 rng_;
};

struct LlmExchange {
  std::string prompt;
  std::string raw_response;
  std::optional<Label> parsed;
  double round_trip_ms = 0.0;
  int attempts = 0;
  std::string error;  // non-empty on transport failure after retries
};

/// Single-turn chat-completions client.
class ExternalLlmDetector final : public Detector {
 public:
  ExternalLlmDetector(ExternalLlmParams params, PromptTemplate tmpl);
  DetectorKind kind() const override { return DetectorKind::ExternalLlm; }
  Classification classify(const KpmReport& report) override;

  LlmExchange exchange(std::int64_t num_ues, std::int64_t tx_pkts);

 private:
  ExternalLlmParams params_;
  PromptTemplate template_;
  std::string base_url_;
  std::string path_;
};

std::string chat_request_body(std::string_view model, std::string_view prompt);

/// Extracts choices[0].message.content (or choices[0].text). Throws ParseError.
std::string chat_response_text(std::string_view body);

std::unique_ptr<Detector> make_detector(const DetectorConfig& cfg);

struct LlmIdOptions {
  InputPath input = InputPath::Store;
  UndecidedPolicy undecided = UndecidedPolicy::TreatLegitimate;
  /// Time detector calls and push the Alert out by the measured latency.
  bool wall_clock = false;
  bool debug_prompts = false;
  std::int64_t base_limit_per_ue = kDefaultBaseLimitPerUe;
};

struct LlmIdMetrics {
  std::uint64_t classified = 0;
  std::uint64_t malicious = 0;
  std::uint64_t alerts = 0;
  std::uint64_t suppressed = 0;
  std::uint64_t parse_failures = 0;
  std::uint64_t detector_errors = 0;
  std::uint64_t skipped_quarantined = 0;
};

struct UndecidedReport {
  UeId ue;
  VirtualMs report_timestamp = 0;
  Outcome outcome = Outcome::ParseFailure;
  std::string error;
};

/// Classifies each new report and raises at most one Alert per UE until the
/// matching SliceControlAck arrives.
class LlmIdXapp {
 public:
  static constexpr std::string_view kName = "llm_id";
  static constexpr std::string_view kStoreConsumer = "llm_id";

  LlmIdXapp(RicBus& bus, ReportStore* store, std::unique_ptr<Detector> detector,
            LlmIdOptions options = {});

  void poll(VirtualMs now);

  /// Classifies one report received at `received_at`; returns the Alert if one was published.
  std::optional<Alert> process_report(const KpmReport& report, VirtualMs received_at);

  const std::vector<Verdict>& verdicts() const { return verdicts_; }
  const std::vector<UndecidedReport>& undecided() const { return undecided_; }
  const LlmIdMetrics& metrics() const { return metrics_; }
  bool alert_pending(UeId ue) const { return pending_.contains(ue); }

 private:
  RicBus& bus_;
  ReportStore* store_;
  std::unique_ptr<Detector> detector_;
  LlmIdOptions options_;
  std::size_t position_ = 0;
  std::set<UeId> pending_;
  std::vector<Verdict> verdicts_;
  std::vector<UndecidedReport> undecided_;
  LlmIdMetrics metrics_;
};

}  // namespace ricsec
