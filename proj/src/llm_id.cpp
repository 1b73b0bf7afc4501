#include <chrono>
#include <cmath>
#include <iostream>

#include "ricsec/llm_id.hpp"

namespace ricsec {

LlmIdXapp::LlmIdXapp(RicBus& bus, ReportStore* store, std::unique_ptr<Detector> detector,
                     LlmIdOptions options)
    : bus_(bus), store_(store), detector_(std::move(detector)), options_(options) {
  if (!detector_) throw ConfigError("LLM-ID xApp needs a detector");
  if (options_.input == InputPath::Store && !store_) {
    throw ConfigError("store input path selected without a report store");
  }
  if (!bus_.is_registered(kName)) bus_.register_component(kName);
  std::set<MessageKind> kinds{MessageKind::SliceControlAck};
  if (options_.input == InputPath::Bus) kinds.insert(MessageKind::KpmIndication);
  bus_.subscribe(kName, kinds);
}

void LlmIdXapp::poll(VirtualMs now) {
  std::vector<KpmReport> incoming;
  for (auto& message : bus_.drain(kName, now)) {
    if (const auto* ack = std::get_if<SliceControlAck>(&message.payload)) {
      pending_.erase(ack->ue);
    } else if (const auto* ind = std::get_if<KpmIndication>(&message.payload)) {
      incoming.push_back(ind->report);
    }
  }
  if (options_.input == InputPath::Store) {
    auto fetch = store_->fetch_since(std::string(kStoreConsumer), position_);
    position_ = fetch.position;
    incoming = std::move(fetch.reports);
  }
  for (const auto& report : incoming) process_report(report, now);
}

std::optional<Alert> LlmIdXapp::process_report(const KpmReport& report, VirtualMs received_at) {
  if (report.slice == kQuarantineSlice) {
    ++metrics_.skipped_quarantined;
    return std::nullopt;
  }

  const auto start = std::chrono::steady_clock::now();
  auto result = detector_->classify(report);
  VirtualMs latency = 0;
  if (options_.wall_clock) {
    const auto elapsed =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start);
    latency = static_cast<VirtualMs>(std::ceil(elapsed.count()));
  }
  ++metrics_.classified;

  if (options_.debug_prompts) {
    std::cerr << "[llm_id] t=" << received_at << " ue=" << report.ue.value << " prompt=\""
              << build_prompt(report.num_ues, report.tx_pkts,
                              PromptTemplate{.base_limit_per_ue = options_.base_limit_per_ue})
              << "\" response=\"" << result.raw_text.value_or("") << "\"\n";
  }

  Label label;
  if (result.outcome == Outcome::Decided) {
    label = *result.label;
    verdicts_.push_back(Verdict{report.ue, report.timestamp, label, detector_->kind(),
                                result.raw_text, latency});
  } else {
    if (result.outcome == Outcome::ParseFailure) {
      ++metrics_.parse_failures;
    } else {
      ++metrics_.detector_errors;
    }
    undecided_.push_back(UndecidedReport{report.ue, report.timestamp, result.outcome, result.error});
    if (options_.undecided != UndecidedPolicy::TreatMalicious) return std::nullopt;
    label = Label::Malicious;
  }

  if (label != Label::Malicious) return std::nullopt;
  ++metrics_.malicious;
  if (pending_.contains(report.ue)) {
    ++metrics_.suppressed;
    return std::nullopt;
  }
  pending_.insert(report.ue);
  Alert alert{report.ue, Verdict{report.ue, report.timestamp, label, detector_->kind(),
                                 result.raw_text, latency}};
  bus_.publish(kName, alert, received_at + latency);
  ++metrics_.alerts;
  return alert;
}

}  // namespace ricsec
