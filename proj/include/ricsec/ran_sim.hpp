#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <vector>

#include "ricsec/bus.hpp"
#include "ricsec/kpm.hpp"

namespace ricsec {

/// Uplink packets per second generated by one Mbps of requested demand.
/// A 10 Mbps UE reports 312 tx packets per 1 s interval.
inline constexpr double kPktsPerMbpsSec = 31.2;

/// Bytes carried per Mbps per millisecond (1e6 / 8 / 1000).
inline constexpr double kBytesPerMbpsMs = 125.0;

/// Nominal uplink packet size used for the ul_bytes counter.
inline constexpr std::int64_t kUplinkPacketBytes = 1500;

struct CellConfig {
  double bandwidth_mhz = 20.0;
  std::int64_t total_prbs = 100;
  double rate_per_prb = 0.30;  // Mbps
  /// Std-dev of multiplicative noise on achieved rate; 0 disables it.
  double rate_noise = 0.0;

  friend bool operator==(const CellConfig&, const CellConfig&) = default;
};

struct UeProfile {
  UeId id;
  double demand_mbps = 10.0;
  bool attacker = false;
  VirtualMs attack_onset = 0;
  double attack_multiplier = 4.0;

  /// Demand the UE requests from the scheduler at `now`.
  double requested_mbps(VirtualMs now) const;

  friend bool operator==(const UeProfile&, const UeProfile&) = default;
};

struct SliceControlResult;

/// Slices, their PRB budgets, and UE bindings. Always contains the quarantine slice.
class SliceTable {
 public:
  SliceTable();
  explicit SliceTable(std::vector<SliceConfig> slices);

  void add_slice(SliceConfig slice);
  void bind(UeId ue, SliceId slice);

  const std::vector<SliceConfig>& slices() const { return slices_; }
  const std::map<UeId, SliceId>& bindings() const { return binding_; }
  const SliceConfig* find_slice(SliceId id) const;
  std::optional<SliceId> slice_of(UeId ue) const;
  bool is_quarantined(UeId ue) const;

  /// UEs bound to slices other than quarantine.
  std::int64_t active_ue_count() const;

  /// Throws ConfigError listing every violated invariant.
  void validate(const CellConfig& cell) const;

  friend bool operator==(const SliceTable&, const SliceTable&) = default;

 private:
  std::vector<SliceConfig> slices_;
  std::map<UeId, SliceId> binding_;
};

struct UeAllocation {
  UeId ue;
  SliceId slice;
  double requested_mbps = 0.0;
  std::int64_t prbs = 0;
  double achieved_mbps = 0.0;
};

/// Per-slice demand-proportional PRB split, largest remainder, ties to lowest UeId.
/// Requests are taken at face value.
std::vector<UeAllocation> schedule_tick(const SliceTable& table, const CellConfig& cell,
                                        const std::vector<UeProfile>& profiles, VirtualMs now);

/// Builds one report per bound UE from the allocation snapshot at `now`.
/// Throws ConfigError unless interval is within [1, 1000] ms.
std::vector<KpmReport> emit_kpm_reports(const std::vector<UeAllocation>& allocations,
                                        const SliceTable& table, VirtualMs now,
                                        VirtualMs interval);

struct SliceControlResult {
  SliceTable table;
  SliceControlAck ack;
};

/// Rebinds req.ue to req.target_slice. Unknown UE or slice yields success=false and an
/// unchanged table.
SliceControlResult apply_slice_control(const SliceTable& table, const SliceControlReq& req);

/// The simulated E2 node: owns the slice table and advances the scheduler.
class E2Node {
 public:
  static constexpr std::string_view kName = "e2node";

  E2Node(RicBus& bus, CellConfig cell, SliceTable table, std::vector<UeProfile> profiles,
         VirtualMs report_interval, std::uint64_t seed);

  /// Applies every control request delivered by `now` and acks each.
  void handle_controls(VirtualMs now);

  /// Runs the scheduler; when `now` is a report boundary, publishes KPM indications.
  const std::vector<UeAllocation>& tick(VirtualMs now);

  const SliceTable& table() const { return table_; }
  const std::vector<UeProfile>& profiles() const { return profiles_; }
  const CellConfig& cell() const { return cell_; }

  /// Times at which control requests were applied, per UE.
  const std::vector<std::pair<VirtualMs, SliceControlReq>>& applied_controls() const {
    return applied_;
  }

 private:
  RicBus& bus_;
  CellConfig cell_;
  SliceTable table_;
  std::vector<UeProfile> profiles_;
  VirtualMs report_interval_;
  std::mt19937_64 rng_;
  std::vector<UeAllocation> last_;
  std::vector<std::pair<VirtualMs, SliceControlReq>> applied_;
};

}  // namespace ricsec
