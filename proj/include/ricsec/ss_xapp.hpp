#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "ricsec/bus.hpp"
#include "ricsec/kpm.hpp"

namespace ricsec {

struct MitigationRecord {
  UeId ue;
  /// Receipt of the triggering report by the detector (verdict time minus decision latency).
  VirtualMs report_receipt = 0;
  /// Verdict time, i.e. when the Alert was sent.
  VirtualMs alert_time = 0;
  VirtualMs control_sent = 0;
  std::optional<VirtualMs> ack_time;
  std::optional<bool> success;
  VirtualMs decision_latency = 0;
  VirtualMs report_timestamp = 0;

  bool closed() const { return ack_time.has_value(); }

  /// Report receipt to ack; only defined once closed.
  std::optional<VirtualMs> detection_response_latency() const;
};

/// Secure-slicing xApp: turns Alerts into quarantine rebind requests.
class SsXapp {
 public:
  static constexpr std::string_view kName = "ss_xapp";

  explicit SsXapp(RicBus& bus);

  void poll(VirtualMs now);

  /// Publishes SliceControlReq{ue -> quarantine} unless the UE is already quarantined
  /// or has an open record. `now` is the alert receipt time.
  std::optional<SliceControlReq> handle_alert(const Alert& alert, VirtualMs alert_sent_at,
                                              VirtualMs now);

  /// Closes the open record for ack.ue; returns it, or nullopt for an unmatched ack.
  std::optional<MitigationRecord> handle_ack(const SliceControlAck& ack, VirtualMs now);

  const std::vector<MitigationRecord>& records() const { return records_; }
  std::uint64_t duplicate_alerts() const { return duplicates_; }
  std::uint64_t unmatched_acks() const { return anomalies_; }
  bool quarantined(UeId ue) const { return quarantined_.contains(ue); }

 private:
  RicBus& bus_;
  std::vector<MitigationRecord> records_;
  std::map<UeId, std::size_t> open_;
  std::set<UeId> quarantined_;
  std::uint64_t duplicates_ = 0;
  std::uint64_t anomalies_ = 0;
};

}  // namespace ricsec
