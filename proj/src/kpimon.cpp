#include "ricsec/kpimon.hpp"

#include <fstream>
#include <mutex>
#include <stdexcept>

namespace ricsec {

std::variant<std::size_t, Rejected> ReportStore::ingest(const KpmReport& report) {
  std::unique_lock lock(mutex_);
  auto violations = validate_report(report, cell_prbs_);
  auto last = last_timestamp_.find(report.ue);
  if (last != last_timestamp_.end() && report.timestamp < last->second) {
    violations.emplace_back("timestamp non-decreasing per UE");
  }
  if (!violations.empty()) {
    ++dropped_;
    return Rejected{std::move(violations)};
  }
  reports_.push_back(report);
  index_[{report.ue, report.timestamp}] = reports_.size();
  last_timestamp_[report.ue] = report.timestamp;
  return reports_.size();
}

ReportStore::Fetch ReportStore::fetch_since(const std::string& consumer, std::size_t position) {
  std::unique_lock lock(mutex_);
  if (position > reports_.size()) {
    throw std::out_of_range("fetch position " + std::to_string(position) +
                            " beyond high-water mark " + std::to_string(reports_.size()));
  }
  Fetch fetch;
  fetch.reports.assign(reports_.begin() + static_cast<std::ptrdiff_t>(position), reports_.end());
  fetch.position = reports_.size();
  consumers_[consumer] = fetch.position;
  return fetch;
}

std::size_t ReportStore::size() const {
  std::shared_lock lock(mutex_);
  return reports_.size();
}

std::uint64_t ReportStore::dropped() const {
  std::shared_lock lock(mutex_);
  return dropped_;
}

std::size_t ReportStore::consumer_position(const std::string& consumer) const {
  std::shared_lock lock(mutex_);
  auto it = consumers_.find(consumer);
  return it == consumers_.end() ? 0 : it->second;
}

std::vector<KpmReport> ReportStore::snapshot() const {
  std::shared_lock lock(mutex_);
  return reports_;
}

std::vector<KpmReport> ReportStore::reports_for(UeId ue) const {
  std::shared_lock lock(mutex_);
  std::vector<KpmReport> out;
  for (auto it = index_.lower_bound({ue, INT64_MIN}); it != index_.end() && it->first.first == ue;
       ++it) {
    out.push_back(reports_[it->second - 1]);
  }
  return out;
}

void ReportStore::flush_csv(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  write_reports_csv(out, snapshot());
}

KpimonXapp::KpimonXapp(RicBus& bus, ReportStore& store) : bus_(bus), store_(store) {
  if (!bus_.is_registered(kName)) bus_.register_component(kName);
  bus_.subscribe(kName, {MessageKind::KpmIndication});
}

std::size_t KpimonXapp::poll(VirtualMs now) {
  std::size_t stored = 0;
  for (const auto& message : bus_.drain(kName, now)) {
    const auto* indication = std::get_if<KpmIndication>(&message.payload);
    if (!indication) continue;
    if (std::holds_alternative<std::size_t>(store_.ingest(indication->report))) {
      ++stored;
    }
  }
  return stored;
}

}  // namespace ricsec
