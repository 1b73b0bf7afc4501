#include <sstream>

#include "ricsec/llm_id.hpp"

namespace ricsec {

void DetectorConfig::validate() const {
  std::vector<std::string> problems;
  if (base_limit_per_ue <= 0) problems.emplace_back("detector.base_limit_per_ue must be > 0");
  switch (backend) {
    case DetectorKind::StaticThreshold:
      if (static_threshold.confirmations < 1) {
        problems.emplace_back("detector.confirmations must be >= 1");
      }
      if (static_threshold.threshold_pkts && *static_threshold.threshold_pkts < 0) {
        problems.emplace_back("detector.threshold_pkts must be >= 0");
      }
      break;
    case DetectorKind::MockLlm:
      if (!(mock.accuracy >= 0.0 && mock.accuracy <= 1.0)) {
        problems.emplace_back("detector.accuracy must be within [0, 1]");
      }
      break;
    case DetectorKind::ExternalLlm:
      if (external.endpoint.empty()) problems.emplace_back("detector.endpoint is required");
      if (external.model.empty()) problems.emplace_back("detector.model is required");
      if (external.timeout_ms <= 0) problems.emplace_back("detector.timeout_ms must be > 0");
      if (external.max_retries < 0) problems.emplace_back("detector.max_retries must be >= 0");
      if (external.api_key.empty()) {
        problems.emplace_back("missing API key (set RICSEC_LLM_API_KEY)");
      }
      break;
    case DetectorKind::RuleOracle:
      break;
  }
  if (!problems.empty()) {
    std::ostringstream msg;
    for (std::size_t i = 0; i < problems.size(); ++i) msg << (i ? "; " : "") << problems[i];
    throw ConfigError(msg.str());
  }
}

Classification RuleOracleDetector::classify(const KpmReport& report) {
  return {Outcome::Decided, rule_oracle_classify(report.num_ues, report.tx_pkts, base_),
          std::nullopt, {}};
}

StaticThresholdDetector::StaticThresholdDetector(StaticThresholdParams params, std::int64_t base)
    : params_(params), base_(base) {}

Classification StaticThresholdDetector::classify(const KpmReport& report) {
  const auto threshold = params_.threshold_pkts.value_or(base_ * report.num_ues);
  auto& streak = streak_[report.ue];
  streak = report.tx_pkts > threshold ? streak + 1 : 0;
  const auto label = streak >= params_.confirmations ? Label::Malicious : Label::Legitimate;
  return {Outcome::Decided, label, std::nullopt, {}};
}

MockLlmDetector::MockLlmDetector(MockLlmParams params, std::int64_t base)
    : base_(base), correct_(params.accuracy), rng_(params.seed.value_or(0)) {}

Classification MockLlmDetector::classify(const KpmReport& report) {
  auto label = rule_oracle_classify(report.num_ues, report.tx_pkts, base_);
  if (!correct_(rng_)) {
    label = label == Label::Malicious ? Label::Legitimate : Label::Malicious;
  }
  return {Outcome::Decided, label, std::string(to_string(label)), {}};
}

std::unique_ptr<Detector> make_detector(const DetectorConfig& cfg) {
  cfg.validate();
  switch (cfg.backend) {
    case DetectorKind::RuleOracle:
      return std::make_unique<RuleOracleDetector>(cfg.base_limit_per_ue);
    case DetectorKind::StaticThreshold:
      return std::make_unique<StaticThresholdDetector>(cfg.static_threshold,
                                                       cfg.base_limit_per_ue);
    case DetectorKind::MockLlm:
      return std::make_unique<MockLlmDetector>(cfg.mock, cfg.base_limit_per_ue);
    case DetectorKind::ExternalLlm:
      return std::make_unique<ExternalLlmDetector>(
          cfg.external, PromptTemplate{.base_limit_per_ue = cfg.base_limit_per_ue});
  }
  throw ConfigError("unknown detector backend");
}

}  // namespace ricsec
