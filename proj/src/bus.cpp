#include "ricsec/bus.hpp"

#include <algorithm>

#include <json.hpp>

namespace ricsec {

std::string_view to_string(MessageKind kind) {
  switch (kind) {
    case MessageKind::KpmIndication: return "KpmIndication";
    case MessageKind::Alert: return "Alert";
    case MessageKind::SliceControlReq: return "SliceControlReq";
    case MessageKind::SliceControlAck: return "SliceControlAck";
  }
  return "unknown";
}

MessageKind kind_of(const Payload& payload) {
  return static_cast<MessageKind>(payload.index());
}

RicBus::RicBus(VirtualMs hop_latency) : hop_latency_(hop_latency) {
  if (hop_latency < 0) throw ConfigError("hop latency must be >= 0");
}

void RicBus::register_component(std::string_view name) {
  std::lock_guard lock(mutex_);
  if (components_.contains(name)) throw BusError("component already registered: " + std::string(name));
  Component c;
  c.rank = components_.size();
  components_.emplace(std::string(name), std::move(c));
}

bool RicBus::is_registered(std::string_view name) const {
  std::lock_guard lock(mutex_);
  return components_.contains(name);
}

RicBus::Component& RicBus::component_locked(std::string_view name) {
  auto it = components_.find(name);
  if (it == components_.end()) throw BusError("unknown component: " + std::string(name));
  return it->second;
}

Subscription RicBus::subscribe(std::string_view component, const std::set<MessageKind>& kinds) {
  std::lock_guard lock(mutex_);
  auto& c = component_locked(component);
  for (auto kind : kinds) {
    if (c.kinds.contains(kind)) {
      throw BusError(std::string(component) + " already subscribed to " +
                     std::string(to_string(kind)));
    }
  }
  c.kinds.insert(kinds.begin(), kinds.end());
  return Subscription{std::string(component), kinds};
}

std::size_t RicBus::publish(std::string_view sender, Payload payload, VirtualMs sent_at) {
  std::lock_guard lock(mutex_);
  auto& from = component_locked(sender);
  BusMessage message{std::string(sender), from.next_seq++, sent_at, std::move(payload)};
  const auto kind = message.kind();
  std::size_t count = 0;
  for (auto& [name, c] : components_) {
    if (!c.kinds.contains(kind)) continue;
    c.inbox.push_back(Pending{sent_at + hop_latency_, from.rank, message.seq, message});
    ++count;
  }
  enqueued_ += count;
  trace_.push_back(std::move(message));
  return count;
}

std::vector<BusMessage> RicBus::drain_locked(Component& c, std::optional<VirtualMs> now) {
  auto ready_end = c.inbox.end();
  if (now) {
    ready_end = std::stable_partition(c.inbox.begin(), c.inbox.end(),
                                      [&](const Pending& p) { return p.deliver_at <= *now; });
  }
  std::stable_sort(c.inbox.begin(), ready_end, [](const Pending& a, const Pending& b) {
    return std::tie(a.deliver_at, a.sender_rank, a.seq) <
           std::tie(b.deliver_at, b.sender_rank, b.seq);
  });
  std::vector<BusMessage> out;
  out.reserve(static_cast<std::size_t>(ready_end - c.inbox.begin()));
  for (auto it = c.inbox.begin(); it != ready_end; ++it) out.push_back(std::move(it->message));
  c.inbox.erase(c.inbox.begin(), ready_end);
  delivered_ += out.size();
  return out;
}

std::vector<BusMessage> RicBus::drain(std::string_view component) {
  std::lock_guard lock(mutex_);
  return drain_locked(component_locked(component), std::nullopt);
}

std::vector<BusMessage> RicBus::drain(std::string_view component, VirtualMs now) {
  std::lock_guard lock(mutex_);
  return drain_locked(component_locked(component), now);
}

std::optional<VirtualMs> RicBus::next_delivery_time() const {
  std::lock_guard lock(mutex_);
  std::optional<VirtualMs> best;
  for (const auto& [name, c] : components_) {
    for (const auto& p : c.inbox) {
      if (!best || p.deliver_at < *best) best = p.deliver_at;
    }
  }
  return best;
}

bool RicBus::has_deliverable(VirtualMs now) const {
  const auto next = next_delivery_time();
  return next && *next <= now;
}

bool RicBus::idle() const { return !next_delivery_time().has_value(); }

std::vector<BusMessage> RicBus::trace() const {
  std::lock_guard lock(mutex_);
  return trace_;
}

std::uint64_t RicBus::published_count() const {
  std::lock_guard lock(mutex_);
  return trace_.size();
}

std::uint64_t RicBus::delivered_count() const {
  std::lock_guard lock(mutex_);
  return delivered_;
}

std::uint64_t RicBus::enqueued_count() const {
  std::lock_guard lock(mutex_);
  return enqueued_;
}

namespace {

using nlohmann::ordered_json;

ordered_json report_json(const KpmReport& r) {
  return ordered_json{{"timestamp", r.timestamp}, {"ue", r.ue.value},
                      {"slice", r.slice.value},   {"dl_bytes", r.dl_bytes},
                      {"ul_bytes", r.ul_bytes},   {"dl_prbs", r.dl_prbs},
                      {"ul_prbs", r.ul_prbs},     {"tx_pkts", r.tx_pkts},
                      {"rx_pkts", r.rx_pkts},     {"tx_errors", r.tx_errors},
                      {"ul_errors", r.ul_errors}, {"num_ues", r.num_ues}};
}

KpmReport report_from(const ordered_json& j) {
  KpmReport r;
  r.timestamp = j.at("timestamp").get<VirtualMs>();
  r.ue = UeId{j.at("ue").get<std::uint32_t>()};
  r.slice = SliceId{j.at("slice").get<std::uint32_t>()};
  r.dl_bytes = j.at("dl_bytes").get<std::int64_t>();
  r.ul_bytes = j.at("ul_bytes").get<std::int64_t>();
  r.dl_prbs = j.at("dl_prbs").get<std::int64_t>();
  r.ul_prbs = j.at("ul_prbs").get<std::int64_t>();
  r.tx_pkts = j.at("tx_pkts").get<std::int64_t>();
  r.rx_pkts = j.at("rx_pkts").get<std::int64_t>();
  r.tx_errors = j.at("tx_errors").get<std::int64_t>();
  r.ul_errors = j.at("ul_errors").get<std::int64_t>();
  r.num_ues = j.at("num_ues").get<std::int64_t>();
  return r;
}

ordered_json verdict_json(const Verdict& v) {
  ordered_json j{{"ue", v.ue.value},
                 {"report_timestamp", v.report_timestamp},
                 {"label", to_string(v.label)},
                 {"detector", to_string(v.detector)},
                 {"raw_text", nullptr},
                 {"decision_latency", v.decision_latency}};
  if (v.raw_text) j["raw_text"] = *v.raw_text;
  return j;
}

Verdict verdict_from(const ordered_json& j) {
  Verdict v;
  v.ue = UeId{j.at("ue").get<std::uint32_t>()};
  v.report_timestamp = j.at("report_timestamp").get<VirtualMs>();
  v.label = label_from_string(j.at("label").get<std::string>());
  v.detector = detector_kind_from_string(j.at("detector").get<std::string>());
  if (!j.at("raw_text").is_null()) v.raw_text = j.at("raw_text").get<std::string>();
  v.decision_latency = j.at("decision_latency").get<VirtualMs>();
  return v;
}

}  // namespace

std::string to_json_line(const BusMessage& m) {
  ordered_json j{{"seq", m.seq},
                 {"sender", m.sender},
                 {"sent_at", m.sent_at},
                 {"kind", to_string(m.kind())}};
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, KpmIndication>) {
          j["payload"] = report_json(p.report);
        } else if constexpr (std::is_same_v<T, Alert>) {
          j["payload"] = ordered_json{{"ue", p.ue.value}, {"verdict", verdict_json(p.verdict)}};
        } else if constexpr (std::is_same_v<T, SliceControlReq>) {
          j["payload"] = ordered_json{{"ue", p.ue.value}, {"target_slice", p.target_slice.value}};
        } else {
          j["payload"] = ordered_json{{"ue", p.ue.value}, {"success", p.success}};
        }
      },
      m.payload);
  return j.dump();
}

BusMessage message_from_json_line(std::string_view line) {
  ordered_json j;
  try {
    j = ordered_json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad trace line: ") + e.what());
  }
  try {
    BusMessage m;
    m.seq = j.at("seq").get<std::uint64_t>();
    m.sender = j.at("sender").get<std::string>();
    m.sent_at = j.at("sent_at").get<VirtualMs>();
    const auto kind = j.at("kind").get<std::string>();
    const auto& p = j.at("payload");
    if (kind == "KpmIndication") {
      m.payload = KpmIndication{report_from(p)};
    } else if (kind == "Alert") {
      m.payload = Alert{UeId{p.at("ue").get<std::uint32_t>()}, verdict_from(p.at("verdict"))};
    } else if (kind == "SliceControlReq") {
      m.payload = SliceControlReq{UeId{p.at("ue").get<std::uint32_t>()},
                                  SliceId{p.at("target_slice").get<std::uint32_t>()}};
    } else if (kind == "SliceControlAck") {
      m.payload = SliceControlAck{UeId{p.at("ue").get<std::uint32_t>()}, p.at("success").get<bool>()};
    } else {
      throw ParseError("unknown message kind '" + kind + "'");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad trace line: ") + e.what());
  }
}

}  // namespace ricsec
