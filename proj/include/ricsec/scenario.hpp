#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ricsec/llm_id.hpp"
#include "ricsec/ran_sim.hpp"

namespace ricsec {

enum class ClockMode { Virtual, Wall };

struct DatasetSpec {
  std::size_t n = 1000;
  std::int64_t ue_min = 1;
  std::int64_t ue_max = 3;
  std::int64_t pkt_min = 0;
  std::int64_t pkt_max = 1248;
  friend bool operator==(const DatasetSpec&, const DatasetSpec&) = default;
};

struct UeEntry {
  UeProfile profile;
  SliceId slice;
  friend bool operator==(const UeEntry&, const UeEntry&) = default;
};

/// Declarative experiment description. With a fixed seed and virtual clock a run is
/// fully deterministic.
struct Scenario {
  std::string name = "unnamed";
  std::uint64_t seed = 1;
  VirtualMs duration_ms = 400'000;
  VirtualMs report_interval_ms = 1000;
  VirtualMs tick_ms = 100;
  VirtualMs hop_latency_ms = 1;
  ClockMode clock = ClockMode::Virtual;
  InputPath llm_input = InputPath::Store;
  bool flush_store = true;
  bool debug_prompts = false;
  std::string output_dir = "out";
  CellConfig cell;
  std::vector<SliceConfig> slices;
  std::vector<UeEntry> ues;
  DetectorConfig detector;
  DatasetSpec dataset;

  /// Throws ConfigError with one "field: problem" entry per violation.
  void validate() const;

  /// Detector config with derived defaults filled in (mock seed from scenario seed).
  DetectorConfig effective_detector() const;

  SliceTable slice_table() const;
  std::vector<UeProfile> profiles() const;
  const UeEntry* first_attacker() const;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Built-in: one 20 MHz / 100 PRB cell, three 10 Mbps eMBB UEs, UE1 turns greedy at 170 s.
std::string_view paper_default_yaml();

Scenario parse_scenario(std::string_view yaml_text);
std::string dump_scenario(const Scenario& scenario);

/// Loads a scenario file, or the built-in scenario when `path_or_name` is "paper_default"
/// and no such file exists.
Scenario load_scenario(const std::string& path_or_name);

DetectorKind detector_from_flag(std::string_view flag);

/// Command-line overrides; each set field replaces the matching scenario field.
struct Overrides {
  std::optional<std::string> detector;
  std::optional<int> confirmations;
  std::optional<std::int64_t> threshold_pkts;
  std::optional<double> accuracy;
  std::optional<std::uint64_t> seed;
  std::optional<VirtualMs> duration_ms;
  std::optional<std::string> output_dir;
  std::optional<std::string> endpoint;
  std::optional<std::string> model;
  std::optional<bool> debug_prompts;
  std::optional<bool> wall_clock;
};

void apply_overrides(Scenario& scenario, const Overrides& overrides);

}  // namespace ricsec
