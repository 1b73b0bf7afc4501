#include "ricsec/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace ricsec {

namespace {

std::string join(const std::vector<std::string>& parts) {
  std::ostringstream out;
  for (std::size_t i = 0; i < parts.size(); ++i) out << (i ? "; " : "") << parts[i];
  return out.str();
}

std::string_view flag_name(DetectorKind kind) {
  switch (kind) {
    case DetectorKind::RuleOracle: return "oracle";
    case DetectorKind::StaticThreshold: return "static";
    case DetectorKind::ExternalLlm: return "llm";
    case DetectorKind::MockLlm: return "mock";
  }
  return "oracle";
}

/// Collects field-level problems while reading a YAML tree.
class Reader {
 public:
  std::vector<std::string> errors;

  void check_keys(const YAML::Node& map, const std::string& path,
                  std::initializer_list<std::string_view> allowed) {
    if (!map.IsMap()) {
      errors.push_back(path + ": expected a mapping");
      return;
    }
    for (const auto& kv : map) {
      const auto key = kv.first.as<std::string>();
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        errors.push_back(qualify(path, key) + ": unknown field");
      }
    }
  }

  template <class T>
  void get(const YAML::Node& map, const char* key, const std::string& path, T& out) {
    const auto node = map[key];
    if (!node) return;
    try {
      out = node.as<T>();
    } catch (const YAML::Exception&) {
      errors.push_back(qualify(path, key) + ": invalid value '" + scalar(node) + "'");
    }
  }

  template <class T>
  void get_optional(const YAML::Node& map, const char* key, const std::string& path,
                    std::optional<T>& out) {
    if (!map[key]) return;
    T value{};
    get(map, key, path, value);
    out = value;
  }

  static std::string qualify(const std::string& path, std::string_view key) {
    return path.empty() ? std::string(key) : path + "." + std::string(key);
  }

 private:
  static std::string scalar(const YAML::Node& node) {
    return node.IsScalar() ? node.Scalar() : std::string("<non-scalar>");
  }
};

}  // namespace

DetectorKind detector_from_flag(std::string_view flag) {
  if (flag == "oracle" || flag == "rule" || flag == "RuleOracle") return DetectorKind::RuleOracle;
  if (flag == "static" || flag == "StaticThreshold") return DetectorKind::StaticThreshold;
  if (flag == "llm" || flag == "external" || flag == "ExternalLlm") return DetectorKind::ExternalLlm;
  if (flag == "mock" || flag == "MockLlm") return DetectorKind::MockLlm;
  throw ConfigError("unknown detector '" + std::string(flag) +
                    "' (expected oracle|static|llm|mock)");
}

Scenario parse_scenario(std::string_view yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  if (!root.IsMap()) throw ConfigError("scenario: top level must be a mapping");

  Scenario s;
  Reader r;
  r.check_keys(root, "",
               {"name", "seed", "duration_ms", "report_interval_ms", "tick_ms", "hop_latency_ms",
                "clock", "llm_input", "flush_store", "debug_prompts", "output_dir", "cell",
                "slices", "ues", "detector", "dataset"});
  r.get(root, "name", "", s.name);
  r.get(root, "seed", "", s.seed);
  r.get(root, "duration_ms", "", s.duration_ms);
  r.get(root, "report_interval_ms", "", s.report_interval_ms);
  r.get(root, "tick_ms", "", s.tick_ms);
  r.get(root, "hop_latency_ms", "", s.hop_latency_ms);
  r.get(root, "flush_store", "", s.flush_store);
  r.get(root, "debug_prompts", "", s.debug_prompts);
  r.get(root, "output_dir", "", s.output_dir);

  std::string clock = "virtual";
  r.get(root, "clock", "", clock);
  if (clock == "virtual") {
    s.clock = ClockMode::Virtual;
  } else if (clock == "wall") {
    s.clock = ClockMode::Wall;
  } else {
    r.errors.push_back("clock: expected virtual|wall, got '" + clock + "'");
  }

  std::string input = "store";
  r.get(root, "llm_input", "", input);
  if (input == "store") {
    s.llm_input = InputPath::Store;
  } else if (input == "bus") {
    s.llm_input = InputPath::Bus;
  } else {
    r.errors.push_back("llm_input: expected store|bus, got '" + input + "'");
  }

  if (const auto cell = root["cell"]) {
    r.check_keys(cell, "cell", {"bandwidth_mhz", "total_prbs", "rate_per_prb", "rate_noise"});
    r.get(cell, "bandwidth_mhz", "cell", s.cell.bandwidth_mhz);
    r.get(cell, "total_prbs", "cell", s.cell.total_prbs);
    r.get(cell, "rate_per_prb", "cell", s.cell.rate_per_prb);
    r.get(cell, "rate_noise", "cell", s.cell.rate_noise);
  }

  if (const auto slices = root["slices"]) {
    if (!slices.IsSequence()) {
      r.errors.emplace_back("slices: expected a list");
    } else {
      for (std::size_t i = 0; i < slices.size(); ++i) {
        const auto path = "slices[" + std::to_string(i) + "]";
        const auto node = slices[i];
        r.check_keys(node, path, {"id", "name", "prb_budget"});
        SliceConfig slice;
        if (!node["id"]) r.errors.push_back(path + ".id: required");
        r.get(node, "id", path, slice.id.value);
        r.get(node, "name", path, slice.name);
        r.get(node, "prb_budget", path, slice.prb_budget);
        s.slices.push_back(slice);
      }
    }
  }

  if (const auto ues = root["ues"]) {
    if (!ues.IsSequence()) {
      r.errors.emplace_back("ues: expected a list");
    } else {
      for (std::size_t i = 0; i < ues.size(); ++i) {
        const auto path = "ues[" + std::to_string(i) + "]";
        const auto node = ues[i];
        r.check_keys(node, path,
                     {"id", "slice", "demand_mbps", "attacker", "attack_onset_ms",
                      "attack_multiplier"});
        UeEntry ue;
        if (!node["id"]) r.errors.push_back(path + ".id: required");
        if (!node["slice"]) r.errors.push_back(path + ".slice: required");
        r.get(node, "id", path, ue.profile.id.value);
        r.get(node, "slice", path, ue.slice.value);
        r.get(node, "demand_mbps", path, ue.profile.demand_mbps);
        r.get(node, "attacker", path, ue.profile.attacker);
        r.get(node, "attack_onset_ms", path, ue.profile.attack_onset);
        r.get(node, "attack_multiplier", path, ue.profile.attack_multiplier);
        s.ues.push_back(ue);
      }
    }
  }

  if (const auto det = root["detector"]) {
    r.check_keys(det, "detector",
                 {"backend", "base_limit_per_ue", "confirmations", "threshold_pkts", "accuracy",
                  "mock_seed", "endpoint", "model", "timeout_ms", "max_retries", "undecided"});
    std::string backend = "oracle";
    r.get(det, "backend", "detector", backend);
    try {
      s.detector.backend = detector_from_flag(backend);
    } catch (const ConfigError& e) {
      r.errors.push_back(std::string("detector.backend: ") + e.what());
    }
    r.get(det, "base_limit_per_ue", "detector", s.detector.base_limit_per_ue);
    r.get(det, "confirmations", "detector", s.detector.static_threshold.confirmations);
    r.get_optional(det, "threshold_pkts", "detector", s.detector.static_threshold.threshold_pkts);
    r.get(det, "accuracy", "detector", s.detector.mock.accuracy);
    r.get_optional(det, "mock_seed", "detector", s.detector.mock.seed);
    r.get(det, "endpoint", "detector", s.detector.external.endpoint);
    r.get(det, "model", "detector", s.detector.external.model);
    r.get(det, "timeout_ms", "detector", s.detector.external.timeout_ms);
    r.get(det, "max_retries", "detector", s.detector.external.max_retries);
    std::string undecided = "legitimate";
    r.get(det, "undecided", "detector", undecided);
    if (undecided == "legitimate") {
      s.detector.undecided = UndecidedPolicy::TreatLegitimate;
    } else if (undecided == "malicious") {
      s.detector.undecided = UndecidedPolicy::TreatMalicious;
    } else {
      r.errors.push_back("detector.undecided: expected legitimate|malicious");
    }
  }

  if (const auto ds = root["dataset"]) {
    r.check_keys(ds, "dataset", {"n", "ue_min", "ue_max", "pkt_min", "pkt_max"});
    r.get(ds, "n", "dataset", s.dataset.n);
    r.get(ds, "ue_min", "dataset", s.dataset.ue_min);
    r.get(ds, "ue_max", "dataset", s.dataset.ue_max);
    r.get(ds, "pkt_min", "dataset", s.dataset.pkt_min);
    r.get(ds, "pkt_max", "dataset", s.dataset.pkt_max);
  }

  if (!r.errors.empty()) throw ConfigError(join(r.errors));
  s.validate();
  return s;
}

void Scenario::validate() const {
  std::vector<std::string> errors;
  if (duration_ms <= 0) errors.emplace_back("duration_ms: must be > 0");
  if (report_interval_ms < 1 || report_interval_ms > 1000) {
    errors.emplace_back("report_interval_ms: must be within [1, 1000]");
  }
  if (tick_ms < 1) {
    errors.emplace_back("tick_ms: must be >= 1");
  } else if (report_interval_ms % tick_ms != 0) {
    errors.emplace_back("report_interval_ms: must be a multiple of tick_ms");
  }
  if (hop_latency_ms < 0) errors.emplace_back("hop_latency_ms: must be >= 0");
  if (cell.total_prbs <= 0) errors.emplace_back("cell.total_prbs: must be > 0");
  if (!(cell.rate_per_prb > 0)) errors.emplace_back("cell.rate_per_prb: must be > 0");
  if (cell.rate_noise < 0) errors.emplace_back("cell.rate_noise: must be >= 0");

  std::set<std::uint32_t> slice_ids;
  std::int64_t budget = 0;
  for (std::size_t i = 0; i < slices.size(); ++i) {
    const auto& sl = slices[i];
    const auto path = "slices[" + std::to_string(i) + "]";
    if (!slice_ids.insert(sl.id.value).second) errors.push_back(path + ".id: duplicate");
    if (sl.prb_budget < 0 || sl.prb_budget > cell.total_prbs) {
      errors.push_back(path + ".prb_budget: must be within [0, cell.total_prbs]");
    }
    if (sl.id == kQuarantineSlice && sl.prb_budget != 0) {
      errors.push_back(path + ".prb_budget: quarantine slice 0 must have 0 PRBs");
    }
    budget += sl.prb_budget;
  }
  if (budget > cell.total_prbs) errors.emplace_back("slices: total prb_budget exceeds cell.total_prbs");
  slice_ids.insert(kQuarantineSlice.value);

  std::set<std::uint32_t> ue_ids;
  for (std::size_t i = 0; i < ues.size(); ++i) {
    const auto& ue = ues[i];
    const auto path = "ues[" + std::to_string(i) + "]";
    if (!ue_ids.insert(ue.profile.id.value).second) errors.push_back(path + ".id: duplicate");
    if (!slice_ids.contains(ue.slice.value)) errors.push_back(path + ".slice: unknown slice");
    if (!(ue.profile.demand_mbps > 0)) errors.push_back(path + ".demand_mbps: must be > 0");
    if (ue.profile.attacker) {
      if (ue.profile.attack_onset < 0) errors.push_back(path + ".attack_onset_ms: must be >= 0");
      if (ue.profile.attack_onset > duration_ms) {
        errors.push_back(path + ".attack_onset_ms: must be <= duration_ms");
      }
      if (!(ue.profile.attack_multiplier > 0)) {
        errors.push_back(path + ".attack_multiplier: must be > 0");
      }
    }
  }
  if (ues.empty()) errors.emplace_back("ues: at least one UE required");

  if (detector.base_limit_per_ue <= 0) errors.emplace_back("detector.base_limit_per_ue: must be > 0");
  if (detector.static_threshold.confirmations < 1) {
    errors.emplace_back("detector.confirmations: must be >= 1");
  }
  if (!(detector.mock.accuracy >= 0 && detector.mock.accuracy <= 1)) {
    errors.emplace_back("detector.accuracy: must be within [0, 1]");
  }
  if (detector.external.timeout_ms <= 0) errors.emplace_back("detector.timeout_ms: must be > 0");
  if (detector.external.max_retries < 0) errors.emplace_back("detector.max_retries: must be >= 0");
  if (detector.backend == DetectorKind::ExternalLlm) {
    if (detector.external.endpoint.empty()) errors.emplace_back("detector.endpoint: required for llm");
    if (detector.external.model.empty()) errors.emplace_back("detector.model: required for llm");
  }

  if (dataset.n == 0) errors.emplace_back("dataset.n: must be > 0");
  if (dataset.ue_min < 1 || dataset.ue_max < dataset.ue_min) {
    errors.emplace_back("dataset.ue_min/ue_max: need 1 <= ue_min <= ue_max");
  }
  if (dataset.pkt_min < 0 || dataset.pkt_max < dataset.pkt_min) {
    errors.emplace_back("dataset.pkt_min/pkt_max: need 0 <= pkt_min <= pkt_max");
  }

  if (!errors.empty()) throw ConfigError(join(errors));
}

DetectorConfig Scenario::effective_detector() const {
  auto cfg = detector;
  if (!cfg.mock.seed) cfg.mock.seed = seed;
  return cfg;
}

SliceTable Scenario::slice_table() const {
  SliceTable table(slices);
  for (const auto& ue : ues) table.bind(ue.profile.id, ue.slice);
  return table;
}

std::vector<UeProfile> Scenario::profiles() const {
  std::vector<UeProfile> out;
  out.reserve(ues.size());
  for (const auto& ue : ues) out.push_back(ue.profile);
  return out;
}

const UeEntry* Scenario::first_attacker() const {
  auto it = std::find_if(ues.begin(), ues.end(), [](const auto& u) { return u.profile.attacker; });
  return it == ues.end() ? nullptr : &*it;
}

std::string dump_scenario(const Scenario& s) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << s.name;
  out << YAML::Key << "seed" << YAML::Value << s.seed;
  out << YAML::Key << "duration_ms" << YAML::Value << s.duration_ms;
  out << YAML::Key << "report_interval_ms" << YAML::Value << s.report_interval_ms;
  out << YAML::Key << "tick_ms" << YAML::Value << s.tick_ms;
  out << YAML::Key << "hop_latency_ms" << YAML::Value << s.hop_latency_ms;
  out << YAML::Key << "clock" << YAML::Value << (s.clock == ClockMode::Wall ? "wall" : "virtual");
  out << YAML::Key << "llm_input" << YAML::Value
      << (s.llm_input == InputPath::Bus ? "bus" : "store");
  out << YAML::Key << "flush_store" << YAML::Value << s.flush_store;
  out << YAML::Key << "debug_prompts" << YAML::Value << s.debug_prompts;
  out << YAML::Key << "output_dir" << YAML::Value << s.output_dir;

  out << YAML::Key << "cell" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "bandwidth_mhz" << YAML::Value << s.cell.bandwidth_mhz;
  out << YAML::Key << "total_prbs" << YAML::Value << s.cell.total_prbs;
  out << YAML::Key << "rate_per_prb" << YAML::Value << s.cell.rate_per_prb;
  out << YAML::Key << "rate_noise" << YAML::Value << s.cell.rate_noise;
  out << YAML::EndMap;

  out << YAML::Key << "slices" << YAML::Value << YAML::BeginSeq;
  for (const auto& sl : s.slices) {
    out << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "id" << YAML::Value << sl.id.value;
    out << YAML::Key << "name" << YAML::Value << sl.name;
    out << YAML::Key << "prb_budget" << YAML::Value << sl.prb_budget;
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;

  out << YAML::Key << "ues" << YAML::Value << YAML::BeginSeq;
  for (const auto& ue : s.ues) {
    out << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "id" << YAML::Value << ue.profile.id.value;
    out << YAML::Key << "slice" << YAML::Value << ue.slice.value;
    out << YAML::Key << "demand_mbps" << YAML::Value << ue.profile.demand_mbps;
    out << YAML::Key << "attacker" << YAML::Value << ue.profile.attacker;
    out << YAML::Key << "attack_onset_ms" << YAML::Value << ue.profile.attack_onset;
    out << YAML::Key << "attack_multiplier" << YAML::Value << ue.profile.attack_multiplier;
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;

  const auto& d = s.detector;
  out << YAML::Key << "detector" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "backend" << YAML::Value << std::string(flag_name(d.backend));
  out << YAML::Key << "base_limit_per_ue" << YAML::Value << d.base_limit_per_ue;
  out << YAML::Key << "confirmations" << YAML::Value << d.static_threshold.confirmations;
  if (d.static_threshold.threshold_pkts) {
    out << YAML::Key << "threshold_pkts" << YAML::Value << *d.static_threshold.threshold_pkts;
  }
  out << YAML::Key << "accuracy" << YAML::Value << d.mock.accuracy;
  if (d.mock.seed) out << YAML::Key << "mock_seed" << YAML::Value << *d.mock.seed;
  if (!d.external.endpoint.empty()) {
    out << YAML::Key << "endpoint" << YAML::Value << d.external.endpoint;
  }
  if (!d.external.model.empty()) out << YAML::Key << "model" << YAML::Value << d.external.model;
  out << YAML::Key << "timeout_ms" << YAML::Value << d.external.timeout_ms;
  out << YAML::Key << "max_retries" << YAML::Value << d.external.max_retries;
  out << YAML::Key << "undecided" << YAML::Value
      << (d.undecided == UndecidedPolicy::TreatMalicious ? "malicious" : "legitimate");
  out << YAML::EndMap;

  out << YAML::Key << "dataset" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "n" << YAML::Value << s.dataset.n;
  out << YAML::Key << "ue_min" << YAML::Value << s.dataset.ue_min;
  out << YAML::Key << "ue_max" << YAML::Value << s.dataset.ue_max;
  out << YAML::Key << "pkt_min" << YAML::Value << s.dataset.pkt_min;
  out << YAML::Key << "pkt_max" << YAML::Value << s.dataset.pkt_max;
  out << YAML::EndMap;

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

Scenario load_scenario(const std::string& path_or_name) {
  const std::filesystem::path path(path_or_name);
  if (!std::filesystem::exists(path)) {
    if (path_or_name == "paper_default") return parse_scenario(paper_default_yaml());
    throw ConfigError("scenario file not found: " + path_or_name);
  }
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_scenario(buffer.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path_or_name + ": " + e.what());
  }
}

void apply_overrides(Scenario& s, const Overrides& o) {
  if (o.detector) s.detector.backend = detector_from_flag(*o.detector);
  if (o.confirmations) s.detector.static_threshold.confirmations = *o.confirmations;
  if (o.threshold_pkts) s.detector.static_threshold.threshold_pkts = *o.threshold_pkts;
  if (o.accuracy) s.detector.mock.accuracy = *o.accuracy;
  if (o.seed) s.seed = *o.seed;
  if (o.duration_ms) s.duration_ms = *o.duration_ms;
  if (o.output_dir) s.output_dir = *o.output_dir;
  if (o.endpoint) s.detector.external.endpoint = *o.endpoint;
  if (o.model) s.detector.external.model = *o.model;
  if (o.debug_prompts) s.debug_prompts = *o.debug_prompts;
  if (o.wall_clock) s.clock = *o.wall_clock ? ClockMode::Wall : ClockMode::Virtual;
  s.validate();
}

}  // namespace ricsec
