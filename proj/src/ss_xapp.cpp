#include "ricsec/ss_xapp.hpp"

namespace ricsec {

std::optional<VirtualMs> MitigationRecord::detection_response_latency() const {
  if (!ack_time) return std::nullopt;
  return *ack_time - report_receipt;
}

SsXapp::SsXapp(RicBus& bus) : bus_(bus) {
  if (!bus_.is_registered(kName)) bus_.register_component(kName);
  bus_.subscribe(kName, {MessageKind::Alert, MessageKind::SliceControlAck});
}

void SsXapp::poll(VirtualMs now) {
  for (const auto& message : bus_.drain(kName, now)) {
    if (const auto* alert = std::get_if<Alert>(&message.payload)) {
      handle_alert(*alert, message.sent_at, now);
    } else if (const auto* ack = std::get_if<SliceControlAck>(&message.payload)) {
      handle_ack(*ack, now);
    }
  }
}

std::optional<SliceControlReq> SsXapp::handle_alert(const Alert& alert, VirtualMs alert_sent_at,
                                                    VirtualMs now) {
  if (quarantined_.contains(alert.ue) || open_.contains(alert.ue)) {
    ++duplicates_;
    return std::nullopt;
  }
  MitigationRecord record;
  record.ue = alert.ue;
  record.alert_time = alert_sent_at;
  record.decision_latency = alert.verdict.decision_latency;
  record.report_receipt = alert_sent_at - alert.verdict.decision_latency;
  record.report_timestamp = alert.verdict.report_timestamp;
  record.control_sent = now;
  open_[alert.ue] = records_.size();
  records_.push_back(record);

  SliceControlReq req{alert.ue, kQuarantineSlice};
  bus_.publish(kName, req, now);
  return req;
}

std::optional<MitigationRecord> SsXapp::handle_ack(const SliceControlAck& ack, VirtualMs now) {
  auto it = open_.find(ack.ue);
  if (it == open_.end()) {
    ++anomalies_;
    return std::nullopt;
  }
  auto& record = records_[it->second];
  record.ack_time = now;
  record.success = ack.success;
  if (ack.success) quarantined_.insert(ack.ue);
  open_.erase(it);
  return record;
}

}  // namespace ricsec
