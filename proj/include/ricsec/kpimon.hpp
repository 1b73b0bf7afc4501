#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <shared_mutex>
#include <string>
#include <variant>
#include <vector>

#include "ricsec/bus.hpp"
#include "ricsec/kpm.hpp"

namespace ricsec {

struct Rejected {
  std::vector<std::string> violations;
};

/// Append-only in-memory report database shared by KPIMON (writer) and consumers.
/// Positions are 1-based append counts: position n means "the first n reports".
class ReportStore {
 public:
  explicit ReportStore(std::int64_t cell_prbs = 100) : cell_prbs_(cell_prbs) {}

  /// Validates and appends. Returns the new position or the violation list.
  std::variant<std::size_t, Rejected> ingest(const KpmReport& report);

  struct Fetch {
    std::vector<KpmReport> reports;
    std::size_t position = 0;
  };

  /// Reports after `position`, in append order. Records the consumer's high-water mark.
  /// Throws std::out_of_range if position is beyond the store size.
  Fetch fetch_since(const std::string& consumer, std::size_t position);

  std::size_t size() const;
  std::uint64_t dropped() const;
  std::size_t consumer_position(const std::string& consumer) const;
  std::vector<KpmReport> snapshot() const;

  /// Reports for one UE in timestamp order.
  std::vector<KpmReport> reports_for(UeId ue) const;

  void flush_csv(const std::filesystem::path& path) const;

 private:
  mutable std::shared_mutex mutex_;
  std::int64_t cell_prbs_;
  std::vector<KpmReport> reports_;
  std::map<std::pair<UeId, VirtualMs>, std::size_t> index_;
  std::map<UeId, VirtualMs> last_timestamp_;
  std::map<std::string, std::size_t> consumers_;
  std::uint64_t dropped_ = 0;
};

/// Drains KPM indications from the bus into a ReportStore.
class KpimonXapp {
 public:
  static constexpr std::string_view kName = "kpimon";

  KpimonXapp(RicBus& bus, ReportStore& store);

  /// Ingests everything delivered by `now`; returns the number stored.
  std::size_t poll(VirtualMs now);

 private:
  RicBus& bus_;
  ReportStore& store_;
};

}  // namespace ricsec
