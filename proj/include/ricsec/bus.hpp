#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ricsec/kpm.hpp"

namespace ricsec {

struct KpmIndication {
  KpmReport report;
  friend bool operator==(const KpmIndication&, const KpmIndication&) = default;
};

struct Alert {
  UeId ue;
  Verdict verdict;
  friend bool operator==(const Alert&, const Alert&) = default;
};

struct SliceControlReq {
  UeId ue;
  SliceId target_slice;
  friend bool operator==(const SliceControlReq&, const SliceControlReq&) = default;
};

struct SliceControlAck {
  UeId ue;
  bool success = false;
  friend bool operator==(const SliceControlAck&, const SliceControlAck&) = default;
};

using Payload = std::variant<KpmIndication, Alert, SliceControlReq, SliceControlAck>;

enum class MessageKind : std::uint8_t { KpmIndication, Alert, SliceControlReq, SliceControlAck };

std::string_view to_string(MessageKind kind);
MessageKind kind_of(const Payload& payload);

struct BusMessage {
  std::string sender;
  std::uint64_t seq = 0;
  VirtualMs sent_at = 0;
  Payload payload;

  MessageKind kind() const { return kind_of(payload); }
  friend bool operator==(const BusMessage&, const BusMessage&) = default;
};

struct Subscription {
  std::string subscriber;
  std::set<MessageKind> kinds;
};

class BusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// In-process RIC message router.
///
/// Delivery is pull-based: a message published at `sent_at` becomes visible to
/// `drain(component, now)` once `now >= sent_at + hop_latency`. Drained messages are
/// ordered by (delivery time, sender registration order, seq), which gives per-sender
/// FIFO and a deterministic total order. All members are internally serialized.
class RicBus {
 public:
  explicit RicBus(VirtualMs hop_latency = 1);

  RicBus(const RicBus&) = delete;
  RicBus& operator=(const RicBus&) = delete;

  void register_component(std::string_view name);
  bool is_registered(std::string_view name) const;

  /// Throws BusError on an unknown component or a kind it is already subscribed to.
  Subscription subscribe(std::string_view component, const std::set<MessageKind>& kinds);

  /// Assigns the sender's next seq, enqueues to every subscriber of the payload's kind
  /// and returns that subscriber count.
  std::size_t publish(std::string_view sender, Payload payload, VirtualMs sent_at);

  /// Every pending message for `component` regardless of delivery time.
  std::vector<BusMessage> drain(std::string_view component);

  /// Pending messages whose delivery time is <= now.
  std::vector<BusMessage> drain(std::string_view component, VirtualMs now);

  /// Earliest delivery time over all pending messages.
  std::optional<VirtualMs> next_delivery_time() const;
  bool has_deliverable(VirtualMs now) const;
  bool idle() const;

  VirtualMs hop_latency() const { return hop_latency_; }

  /// Every published message, in publish order.
  std::vector<BusMessage> trace() const;
  std::uint64_t published_count() const;
  std::uint64_t delivered_count() const;
  std::uint64_t enqueued_count() const;

 private:
  struct Pending {
    VirtualMs deliver_at;
    std::size_t sender_rank;
    std::uint64_t seq;
    BusMessage message;
  };

  struct Component {
    std::size_t rank = 0;
    std::uint64_t next_seq = 1;
    std::set<MessageKind> kinds;
    std::vector<Pending> inbox;
  };

  Component& component_locked(std::string_view name);
  std::vector<BusMessage> drain_locked(Component& c, std::optional<VirtualMs> now);

  mutable std::mutex mutex_;
  VirtualMs hop_latency_;
  std::map<std::string, Component, std::less<>> components_;
  std::vector<BusMessage> trace_;
  std::uint64_t enqueued_ = 0;
  std::uint64_t delivered_ = 0;
};

/// One JSON object per line; see docs/formats.md.
std::string to_json_line(const BusMessage& message);
BusMessage message_from_json_line(std::string_view line);

}  // namespace ricsec
