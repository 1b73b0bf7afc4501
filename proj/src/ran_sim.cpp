#include "ricsec/ran_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace ricsec {

double UeProfile::requested_mbps(VirtualMs now) const {
  if (attacker && now >= attack_onset) return demand_mbps * attack_multiplier;
  return demand_mbps;
}

SliceTable::SliceTable() { slices_.push_back(SliceConfig{kQuarantineSlice, 0, "quarantine"}); }

SliceTable::SliceTable(std::vector<SliceConfig> slices) : slices_(std::move(slices)) {
  const bool has_quarantine = std::any_of(slices_.begin(), slices_.end(), [](const auto& s) {
    return s.id == kQuarantineSlice;
  });
  if (!has_quarantine) {
    slices_.insert(slices_.begin(), SliceConfig{kQuarantineSlice, 0, "quarantine"});
  }
}

void SliceTable::add_slice(SliceConfig slice) {
  if (find_slice(slice.id)) {
    throw ConfigError("duplicate slice id " + std::to_string(slice.id.value));
  }
  slices_.push_back(std::move(slice));
}

void SliceTable::bind(UeId ue, SliceId slice) {
  if (!find_slice(slice)) {
    throw ConfigError("UE " + std::to_string(ue.value) + " bound to unknown slice " +
                      std::to_string(slice.value));
  }
  binding_[ue] = slice;
}

const SliceConfig* SliceTable::find_slice(SliceId id) const {
  auto it = std::find_if(slices_.begin(), slices_.end(), [&](const auto& s) { return s.id == id; });
  return it == slices_.end() ? nullptr : &*it;
}

std::optional<SliceId> SliceTable::slice_of(UeId ue) const {
  auto it = binding_.find(ue);
  if (it == binding_.end()) return std::nullopt;
  return it->second;
}

bool SliceTable::is_quarantined(UeId ue) const { return slice_of(ue) == kQuarantineSlice; }

std::int64_t SliceTable::active_ue_count() const {
  return std::count_if(binding_.begin(), binding_.end(),
                       [](const auto& b) { return b.second != kQuarantineSlice; });
}

void SliceTable::validate(const CellConfig& cell) const {
  std::vector<std::string> problems;
  if (cell.total_prbs <= 0) problems.emplace_back("cell.total_prbs must be > 0");
  if (!(cell.rate_per_prb > 0)) problems.emplace_back("cell.rate_per_prb must be > 0");
  if (cell.rate_noise < 0) problems.emplace_back("cell.rate_noise must be >= 0");

  std::set<SliceId> seen;
  std::int64_t total = 0;
  for (const auto& s : slices_) {
    if (!seen.insert(s.id).second) {
      problems.push_back("slices: duplicate id " + std::to_string(s.id.value));
    }
    if (s.prb_budget < 0 || s.prb_budget > cell.total_prbs) {
      problems.push_back("slices[" + std::to_string(s.id.value) + "].prb_budget out of range");
    }
    if (s.id == kQuarantineSlice && s.prb_budget != 0) {
      problems.emplace_back("slices[0].prb_budget must be 0 (quarantine)");
    }
    total += s.prb_budget;
  }
  if (total > cell.total_prbs) {
    problems.push_back("slices: sum of prb_budget " + std::to_string(total) + " exceeds " +
                       std::to_string(cell.total_prbs));
  }
  for (const auto& [ue, slice] : binding_) {
    if (!seen.contains(slice)) {
      problems.push_back("ue " + std::to_string(ue.value) + ": unknown slice " +
                         std::to_string(slice.value));
    }
  }
  if (!problems.empty()) {
    std::ostringstream msg;
    for (std::size_t i = 0; i < problems.size(); ++i) msg << (i ? "; " : "") << problems[i];
    throw ConfigError(msg.str());
  }
}

std::vector<UeAllocation> schedule_tick(const SliceTable& table, const CellConfig& cell,
                                        const std::vector<UeProfile>& profiles, VirtualMs now) {
  std::map<UeId, const UeProfile*> by_id;
  for (const auto& p : profiles) by_id[p.id] = &p;

  std::vector<UeAllocation> out;
  for (const auto& slice : table.slices()) {
    std::vector<UeAllocation> members;
    for (const auto& [ue, bound] : table.bindings()) {
      if (bound != slice.id) continue;
      auto it = by_id.find(ue);
      const double requested = it == by_id.end() ? 0.0 : it->second->requested_mbps(now);
      members.push_back(UeAllocation{ue, slice.id, requested, 0, 0.0});
    }
    if (members.empty()) continue;

    const double total_demand = std::accumulate(
        members.begin(), members.end(), 0.0,
        [](double acc, const UeAllocation& a) { return acc + a.requested_mbps; });

    if (slice.prb_budget > 0 && total_demand > 0) {
      std::vector<double> remainders(members.size());
      std::int64_t assigned = 0;
      for (std::size_t i = 0; i < members.size(); ++i) {
        const double exact =
            static_cast<double>(slice.prb_budget) * members[i].requested_mbps / total_demand;
        members[i].prbs = static_cast<std::int64_t>(std::floor(exact));
        remainders[i] = exact - static_cast<double>(members[i].prbs);
        assigned += members[i].prbs;
      }
      // members are in ascending UeId order, so a stable sort keeps the lowest id first on ties
      std::vector<std::size_t> order(members.size());
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return remainders[a] > remainders[b] + 1e-9;
      });
      for (std::size_t k = 0; assigned < slice.prb_budget && k < order.size(); ++k, ++assigned) {
        ++members[order[k]].prbs;
      }
    }

    for (auto& m : members) {
      m.achieved_mbps =
          std::min(static_cast<double>(m.prbs) * cell.rate_per_prb, m.requested_mbps);
      out.push_back(m);
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.ue < b.ue; });
  return out;
}

std::vector<KpmReport> emit_kpm_reports(const std::vector<UeAllocation>& allocations,
                                        const SliceTable& table, VirtualMs now,
                                        VirtualMs interval) {
  if (interval < 1 || interval > 1000) {
    throw ConfigError("report interval must be within [1, 1000] ms, got " +
                      std::to_string(interval));
  }
  const auto num_ues = std::max<std::int64_t>(1, table.active_ue_count());
  const double seconds = static_cast<double>(interval) / 1000.0;

  std::vector<KpmReport> reports;
  reports.reserve(allocations.size());
  for (const auto& a : allocations) {
    KpmReport r;
    r.timestamp = now;
    r.ue = a.ue;
    r.slice = a.slice;
    r.dl_prbs = a.prbs;
    r.ul_prbs = 0;
    r.dl_bytes = std::llround(a.achieved_mbps * kBytesPerMbpsMs * static_cast<double>(interval));
    r.tx_pkts = std::llround(a.requested_mbps * seconds * kPktsPerMbpsSec);
    r.ul_bytes = r.tx_pkts * kUplinkPacketBytes;
    r.rx_pkts = std::llround(a.achieved_mbps * seconds * kPktsPerMbpsSec);
    r.tx_errors = 0;
    r.ul_errors = 0;
    r.num_ues = num_ues;
    reports.push_back(r);
  }
  return reports;
}

SliceControlResult apply_slice_control(const SliceTable& table, const SliceControlReq& req) {
  if (!table.slice_of(req.ue) || !table.find_slice(req.target_slice)) {
    return {table, SliceControlAck{req.ue, false}};
  }
  SliceTable updated = table;
  updated.bind(req.ue, req.target_slice);
  return {std::move(updated), SliceControlAck{req.ue, true}};
}

E2Node::E2Node(RicBus& bus, CellConfig cell, SliceTable table, std::vector<UeProfile> profiles,
               VirtualMs report_interval, std::uint64_t seed)
    : bus_(bus),
      cell_(cell),
      table_(std::move(table)),
      profiles_(std::move(profiles)),
      report_interval_(report_interval),
      rng_(seed) {
  if (report_interval_ < 1 || report_interval_ > 1000) {
    throw ConfigError("report interval must be within [1, 1000] ms");
  }
  table_.validate(cell_);
  if (!bus_.is_registered(kName)) bus_.register_component(kName);
  bus_.subscribe(kName, {MessageKind::SliceControlReq});
}

void E2Node::handle_controls(VirtualMs now) {
  for (auto& message : bus_.drain(kName, now)) {
    const auto* req = std::get_if<SliceControlReq>(&message.payload);
    if (!req) continue;
    auto result = apply_slice_control(table_, *req);
    table_ = std::move(result.table);
    if (result.ack.success) applied_.emplace_back(now, *req);
    bus_.publish(kName, result.ack, now);
  }
}

const std::vector<UeAllocation>& E2Node::tick(VirtualMs now) {
  last_ = schedule_tick(table_, cell_, profiles_, now);
  if (cell_.rate_noise > 0) {
    std::normal_distribution<double> noise(0.0, cell_.rate_noise);
    for (auto& a : last_) {
      const double capacity = static_cast<double>(a.prbs) * cell_.rate_per_prb;
      a.achieved_mbps = std::clamp(capacity * (1.0 + noise(rng_)), 0.0, a.requested_mbps);
    }
  }
  if (now % report_interval_ == 0) {
    for (auto& report : emit_kpm_reports(last_, table_, now, report_interval_)) {
      bus_.publish(kName, KpmIndication{report}, now);
    }
  }
  return last_;
}

}  // namespace ricsec
