#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "ricsec/eval.hpp"
#include "ricsec/kpimon.hpp"

namespace ricsec {

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

nlohmann::ordered_json optional_ms(const std::optional<VirtualMs>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

std::string format_mbps(double mbps) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", mbps);
  return buf;
}

void extract_events(const Scenario& sc, const E2Node& e2, const SsXapp& ss,
                    const std::vector<BusMessage>& trace,
                    const std::map<UeId, double>& pre_onset, TimelineResult& tl) {
  if (const auto* attacker = sc.first_attacker()) {
    tl.attacker = attacker->profile.id;
    tl.attack_onset = attacker->profile.attack_onset;
    tl.events.push_back({*tl.attack_onset, *tl.attacker, "attack_onset"});
  }

  for (const auto& m : trace) {
    const auto* alert = std::get_if<Alert>(&m.payload);
    if (!alert) continue;
    tl.events.push_back({m.sent_at, alert->ue, "alert"});
    if (tl.attacker && alert->ue == *tl.attacker && !tl.detection_time &&
        alert->verdict.report_timestamp >= *tl.attack_onset) {
      tl.detection_time = alert->verdict.report_timestamp;
      tl.alert_time = m.sent_at;
      tl.events.push_back({*tl.detection_time, alert->ue, "detection"});
    }
  }

  for (const auto& [time, req] : e2.applied_controls()) {
    tl.events.push_back({time, req.ue, "quarantine"});
    if (tl.attacker && req.ue == *tl.attacker && tl.alert_time && !tl.mitigation_time &&
        time >= *tl.alert_time) {
      tl.mitigation_time = time;
    }
  }

  if (tl.attacker) {
    for (const auto& record : ss.records()) {
      if (record.ue == *tl.attacker && record.success.value_or(false) && record.ack_time &&
          tl.mitigation_time && *record.ack_time >= *tl.mitigation_time) {
        tl.ack_time = record.ack_time;
        break;
      }
    }
  }

  if (tl.mitigation_time) {
    std::map<VirtualMs, bool> recovered_at;
    for (const auto& p : tl.rates) {
      if (p.time < *tl.mitigation_time || p.ue == *tl.attacker) continue;
      auto target_it = pre_onset.find(p.ue);
      double target = 0.0;
      if (target_it != pre_onset.end()) {
        target = target_it->second;
      } else {
        for (const auto& ue : sc.ues) {
          if (ue.profile.id == p.ue) target = ue.profile.demand_mbps;
        }
      }
      auto [it, inserted] = recovered_at.try_emplace(p.time, true);
      it->second = it->second && p.mbps + 1e-9 >= target;
    }
    for (const auto& [time, ok] : recovered_at) {
      if (ok) {
        tl.recovery_time = time;
        break;
      }
    }
    if (tl.recovery_time) {
      for (const auto& ue : sc.ues) {
        if (ue.profile.id != *tl.attacker) tl.events.push_back({*tl.recovery_time, ue.profile.id, "recovery"});
      }
    }
  }

  std::stable_sort(tl.events.begin(), tl.events.end(),
                   [](const auto& a, const auto& b) { return a.time < b.time; });
}

}  // namespace

std::optional<double> TimelineResult::rate_at(UeId ue, VirtualMs time) const {
  for (const auto& p : rates) {
    if (p.ue == ue && p.time == time) return p.mbps;
  }
  return std::nullopt;
}

std::size_t RunResult::successful_mitigations(UeId ue) const {
  return static_cast<std::size_t>(std::count_if(
      mitigations.begin(), mitigations.end(),
      [&](const MitigationRecord& r) { return r.ue == ue && r.success.value_or(false); }));
}

RunResult run_timeline_experiment(const Scenario& sc) {
  sc.validate();
  const auto detector_cfg = sc.effective_detector();

  RicBus bus(sc.hop_latency_ms);
  ReportStore store(sc.cell.total_prbs);
  E2Node e2(bus, sc.cell, sc.slice_table(), sc.profiles(), sc.report_interval_ms, sc.seed);
  KpimonXapp kpimon(bus, store);
  LlmIdXapp llm(bus, &store, make_detector(detector_cfg),
                LlmIdOptions{.input = sc.llm_input,
                             .undecided = detector_cfg.undecided,
                             .wall_clock = sc.clock == ClockMode::Wall,
                             .debug_prompts = sc.debug_prompts,
                             .base_limit_per_ue = detector_cfg.base_limit_per_ue});
  SsXapp ss(bus);

  RunResult run;
  run.scenario = sc;
  auto& tl = run.timeline;

  const auto* attacker = sc.first_attacker();
  std::map<UeId, double> pre_onset;

  VirtualMs next_tick = 0;
  while (true) {
    std::optional<VirtualMs> now;
    if (next_tick < sc.duration_ms) now = next_tick;
    if (const auto delivery = bus.next_delivery_time()) {
      now = now ? std::min(*now, *delivery) : *delivery;
    }
    if (!now) break;

    bool tick_pending = next_tick < sc.duration_ms && *now == next_tick;
    do {
      e2.handle_controls(*now);
      if (tick_pending) {
        for (const auto& a : e2.tick(*now)) {
          tl.rates.push_back(RatePoint{*now, a.ue, a.slice, a.prbs, a.achieved_mbps});
          if (attacker && *now < attacker->profile.attack_onset) pre_onset[a.ue] = a.achieved_mbps;
        }
        next_tick += sc.tick_ms;
        tick_pending = false;
      }
      kpimon.poll(*now);
      llm.poll(*now);
      ss.poll(*now);
    } while (bus.has_deliverable(*now));
  }

  run.trace = bus.trace();
  run.bus_enqueued = bus.enqueued_count();
  run.bus_delivered = bus.delivered_count();
  run.mitigations = ss.records();
  run.verdicts = llm.verdicts();
  run.undecided = llm.undecided();
  run.llm = llm.metrics();
  run.reports = store.snapshot();
  run.reports_dropped = store.dropped();
  run.duplicate_alerts = ss.duplicate_alerts();
  run.unmatched_acks = ss.unmatched_acks();
  extract_events(sc, e2, ss, run.trace, pre_onset, tl);
  return run;
}

std::string timeline_csv(const RunResult& run) {
  std::map<UeId, std::vector<const TimelineEvent*>> pending;
  for (const auto& e : run.timeline.events) pending[e.ue].push_back(&e);
  std::map<UeId, std::size_t> cursor;

  std::string out = "time_ms,ue,slice,prbs,mbps,events\n";
  for (const auto& p : run.timeline.rates) {
    std::string events;
    auto& queue = pending[p.ue];
    auto& i = cursor[p.ue];
    while (i < queue.size() && queue[i]->time <= p.time) {
      if (!events.empty()) events += ';';
      events += queue[i]->name;
      ++i;
    }
    out += std::to_string(p.time) + ',' + std::to_string(p.ue.value) + ',' +
           std::to_string(p.slice.value) + ',' + std::to_string(p.prbs) + ',' +
           format_mbps(p.mbps) + ',' + events + '\n';
  }
  return out;
}

std::string run_summary_json(const RunResult& run) {
  using nlohmann::ordered_json;
  const auto& sc = run.scenario;
  const auto& tl = run.timeline;

  ordered_json mitigations = ordered_json::array();
  double latency_sum = 0.0;
  std::size_t latency_count = 0;
  std::size_t false_quarantines = 0;
  for (const auto& r : run.mitigations) {
    const auto latency = r.detection_response_latency();
    ordered_json j{{"ue", r.ue.value},
                   {"report_timestamp_ms", r.report_timestamp},
                   {"report_receipt_ms", r.report_receipt},
                   {"alert_time_ms", r.alert_time},
                   {"control_sent_ms", r.control_sent},
                   {"ack_time_ms", optional_ms(r.ack_time)},
                   {"success", r.success ? ordered_json(*r.success) : ordered_json(nullptr)},
                   {"decision_latency_ms", r.decision_latency},
                   {"detection_response_latency_ms", optional_ms(latency)}};
    mitigations.push_back(std::move(j));
    if (r.success.value_or(false)) {
      latency_sum += static_cast<double>(*latency);
      ++latency_count;
      if (!tl.attacker || r.ue != *tl.attacker) ++false_quarantines;
    }
  }

  ordered_json summary{
      {"scenario", sc.name},
      {"seed", sc.seed},
      {"detector", to_string(sc.detector.backend)},
      {"clock", sc.clock == ClockMode::Wall ? "wall" : "virtual"},
      {"duration_ms", sc.duration_ms},
      {"report_interval_ms", sc.report_interval_ms},
      {"tick_ms", sc.tick_ms},
      {"hop_latency_ms", sc.hop_latency_ms},
      {"attacker", tl.attacker ? ordered_json(tl.attacker->value) : ordered_json(nullptr)},
      {"attack_onset_ms", optional_ms(tl.attack_onset)},
      {"detection_time_ms", optional_ms(tl.detection_time)},
      {"alert_time_ms", optional_ms(tl.alert_time)},
      {"mitigation_time_ms", optional_ms(tl.mitigation_time)},
      {"ack_time_ms", optional_ms(tl.ack_time)},
      {"recovery_time_ms", optional_ms(tl.recovery_time)},
      {"detection_delay_ms",
       tl.detection_time ? ordered_json(*tl.detection_time - *tl.attack_onset)
                         : ordered_json(nullptr)},
      {"mean_detection_response_latency_ms",
       latency_count ? ordered_json(latency_sum / static_cast<double>(latency_count))
                     : ordered_json(nullptr)},
      {"false_quarantines", false_quarantines},
      {"mitigations", mitigations},
      {"counters",
       {{"reports_stored", run.reports.size()},
        {"reports_dropped", run.reports_dropped},
        {"classified", run.llm.classified},
        {"malicious_verdicts", run.llm.malicious},
        {"alerts", run.llm.alerts},
        {"suppressed_alerts", run.llm.suppressed},
        {"parse_failures", run.llm.parse_failures},
        {"detector_errors", run.llm.detector_errors},
        {"undecided", run.undecided.size()},
        {"skipped_quarantined", run.llm.skipped_quarantined},
        {"duplicate_alerts", run.duplicate_alerts},
        {"unmatched_acks", run.unmatched_acks},
        {"bus_published", run.trace.size()},
        {"bus_enqueued", run.bus_enqueued},
        {"bus_delivered", run.bus_delivered}}}};
  return summary.dump(2) + "\n";
}

std::string trace_jsonl(const std::vector<BusMessage>& trace) {
  std::string out;
  for (const auto& m : trace) {
    out += to_json_line(m);
    out += '\n';
  }
  return out;
}

void write_run_outputs(const RunResult& run, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file(dir / "timeline.csv", timeline_csv(run));
  write_file(dir / "run_summary.json", run_summary_json(run));
  write_file(dir / "bus_trace.jsonl", trace_jsonl(run.trace));
  write_file(dir / "effective_scenario.yaml", dump_scenario(run.scenario));
  if (run.scenario.flush_store) {
    std::ostringstream csv;
    write_reports_csv(csv, run.reports);
    write_file(dir / "kpm_reports.csv", csv.str());
  }
}

}  // namespace ricsec
