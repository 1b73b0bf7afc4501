#include <doctest.h>

#include "ricsec/ss_xapp.hpp"

using namespace ricsec;

namespace {

Alert alert_for(std::uint32_t ue, VirtualMs report_ts, VirtualMs latency = 0) {
  return Alert{UeId{ue}, Verdict{UeId{ue}, report_ts, Label::Malicious, DetectorKind::RuleOracle,
                                 std::nullopt, latency}};
}

struct Fixture {
  RicBus bus{1};
  Fixture() {
    bus.register_component("e2node");
    bus.register_component("llm_id");
    bus.subscribe("e2node", {MessageKind::SliceControlReq});
  }
};

}  // namespace

TEST_CASE_FIXTURE(Fixture, "alert becomes a quarantine request") {
  SsXapp ss(bus);
  const auto req = ss.handle_alert(alert_for(1, 1000), 1001, 1002);
  REQUIRE(req);
  CHECK(req->ue == UeId{1});
  CHECK(req->target_slice == kQuarantineSlice);
  const auto sent = bus.drain("e2node");
  REQUIRE(sent.size() == 1);
  CHECK(std::get<SliceControlReq>(sent[0].payload) == *req);
}

TEST_CASE_FIXTURE(Fixture, "duplicate alerts do not send a second request") {
  SsXapp ss(bus);
  CHECK(ss.handle_alert(alert_for(1, 1000), 1001, 1002));
  CHECK_FALSE(ss.handle_alert(alert_for(1, 2000), 2001, 2002));
  CHECK(bus.drain("e2node").size() == 1);
  CHECK(ss.duplicate_alerts() == 1);

  ss.handle_ack(SliceControlAck{UeId{1}, true}, 1004);
  CHECK(ss.quarantined(UeId{1}));
  CHECK_FALSE(ss.handle_alert(alert_for(1, 3000), 3001, 3002));
  CHECK(ss.duplicate_alerts() == 2);
}

TEST_CASE_FIXTURE(Fixture, "successful ack closes the record with latency") {
  SsXapp ss(bus);
  ss.handle_alert(alert_for(1, 1000, 5), 1006, 1007);
  const auto rec = ss.handle_ack(SliceControlAck{UeId{1}, true}, 1009);
  REQUIRE(rec);
  CHECK(rec->success == true);
  CHECK(rec->report_receipt == 1001);
  CHECK(rec->alert_time <= rec->control_sent);
  CHECK(rec->control_sent <= *rec->ack_time);
  // receipt->verdict + verdict->control + control->ack
  CHECK(*rec->detection_response_latency() ==
        rec->decision_latency + (rec->control_sent - rec->alert_time) +
            (*rec->ack_time - rec->control_sent));
  CHECK(*rec->detection_response_latency() == 8);
}

TEST_CASE_FIXTURE(Fixture, "failed ack re-arms mitigation") {
  SsXapp ss(bus);
  ss.handle_alert(alert_for(1, 1000), 1001, 1002);
  const auto rec = ss.handle_ack(SliceControlAck{UeId{1}, false}, 1004);
  REQUIRE(rec);
  CHECK(rec->success == false);
  CHECK_FALSE(ss.quarantined(UeId{1}));
  CHECK(ss.handle_alert(alert_for(1, 2000), 2001, 2002));
  CHECK(ss.records().size() == 2);
}

TEST_CASE_FIXTURE(Fixture, "unmatched ack is an anomaly") {
  SsXapp ss(bus);
  CHECK_FALSE(ss.handle_ack(SliceControlAck{UeId{9}, true}, 10));
  CHECK(ss.unmatched_acks() == 1);
}

TEST_CASE_FIXTURE(Fixture, "poll routes alerts and acks from the bus") {
  SsXapp ss(bus);
  bus.publish("llm_id", alert_for(2, 1000), 1000);
  ss.poll(1001);
  REQUIRE(ss.records().size() == 1);
  CHECK(ss.records()[0].alert_time == 1000);
  CHECK(ss.records()[0].control_sent == 1001);
  bus.publish("e2node", SliceControlAck{UeId{2}, true}, 1002);
  ss.poll(1003);
  CHECK(ss.records()[0].ack_time == 1003);
}
