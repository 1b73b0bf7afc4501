#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ricsec {

/// Milliseconds on the virtual clock, counted from scenario start.
using VirtualMs = std::int64_t;

struct UeId {
  std::uint32_t value = 0;
  friend constexpr auto operator<=>(UeId, UeId) = default;
};

struct SliceId {
  std::uint32_t value = 0;
  friend constexpr auto operator<=>(SliceId, SliceId) = default;
};

/// Slice 0 carries no PRBs; flagged UEs are rebound here.
inline constexpr SliceId kQuarantineSlice{0};

/// Thrown for malformed input text (CSV rows, trace lines).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown for invalid scenario or detector configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One periodic per-UE KPI snapshot. All counters are per report interval.
struct KpmReport {
  VirtualMs timestamp = 0;
  UeId ue;
  SliceId slice;
  std::int64_t dl_bytes = 0;
  std::int64_t ul_bytes = 0;
  std::int64_t dl_prbs = 0;
  std::int64_t ul_prbs = 0;
  std::int64_t tx_pkts = 0;
  std::int64_t rx_pkts = 0;
  std::int64_t tx_errors = 0;
  std::int64_t ul_errors = 0;
  std::int64_t num_ues = 1;

  friend bool operator==(const KpmReport&, const KpmReport&) = default;
};

enum class Label { Legitimate, Malicious };

enum class DetectorKind { RuleOracle, StaticThreshold, ExternalLlm, MockLlm };

std::string_view to_string(Label label);
std::string_view to_string(DetectorKind kind);
Label label_from_string(std::string_view text);
DetectorKind detector_kind_from_string(std::string_view text);

struct Verdict {
  UeId ue;
  VirtualMs report_timestamp = 0;
  Label label = Label::Legitimate;
  DetectorKind detector = DetectorKind::RuleOracle;
  std::optional<std::string> raw_text;
  /// Report receipt to verdict.
  VirtualMs decision_latency = 0;

  friend bool operator==(const Verdict&, const Verdict&) = default;
};

struct SliceConfig {
  SliceId id;
  std::int64_t prb_budget = 0;
  std::string name;

  friend bool operator==(const SliceConfig&, const SliceConfig&) = default;
};

/// Returns every violated report invariant; empty means valid.
std::vector<std::string> validate_report(const KpmReport& report, std::int64_t cell_prbs);

inline constexpr std::string_view kKpmCsvHeader =
    "timestamp,ue,slice,dl_bytes,ul_bytes,dl_prbs,ul_prbs,tx_pkts,rx_pkts,tx_errors,ul_errors,num_ues";

std::string serialize_report(const KpmReport& report);

/// Parses one data row (no header). Throws ParseError naming the offending column.
KpmReport parse_report(std::string_view row);

void write_reports_csv(std::ostream& out, const std::vector<KpmReport>& reports);

/// Reads a CSV stream whose first line must be the KPM header.
std::vector<KpmReport> read_reports_csv(std::istream& in);

}  // namespace ricsec
