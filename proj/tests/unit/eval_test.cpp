#include <doctest.h>

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "ricsec/eval.hpp"

using namespace ricsec;

namespace {

/// Independent restatement of the labelling rule.
bool over_bound(std::int64_t n, std::int64_t p) { return p > 312 * n; }

Scenario quick_scenario() {
  auto sc = parse_scenario(paper_default_yaml());
  sc.duration_ms = 20'000;
  sc.ues[0].profile.attack_onset = 8'000;
  return sc;
}

}  // namespace

TEST_CASE("generated labels agree with an independent bound check") {
  const DatasetSpec ranges{1000, 1, 3, 0, 2000};
  const auto samples = generate_dataset(1000, 7, ranges);
  REQUIRE(samples.size() == 1000);
  for (const auto& s : samples) {
    CHECK(s.num_ues >= 1);
    CHECK(s.num_ues <= 3);
    CHECK(s.tx_pkts >= 0);
    CHECK(s.tx_pkts <= 2000);
    CHECK((s.label == Label::Malicious) == over_bound(s.num_ues, s.tx_pkts));
  }
}

TEST_CASE("all-legitimate range") {
  for (const auto& s : generate_dataset(500, 1, DatasetSpec{500, 1, 1, 0, 312})) {
    CHECK(s.label == Label::Legitimate);
  }
}

TEST_CASE("dataset generation is deterministic per seed") {
  const DatasetSpec ranges;
  CHECK(dataset_jsonl(generate_dataset(200, 9, ranges)) == dataset_jsonl(generate_dataset(200, 9, ranges)));
  CHECK(dataset_jsonl(generate_dataset(200, 9, ranges)) != dataset_jsonl(generate_dataset(200, 10, ranges)));
}

TEST_CASE("default ranges are close to balanced") {
  const auto samples = generate_dataset(10'000, 4, DatasetSpec{});
  const auto malicious = std::count_if(samples.begin(), samples.end(),
                                       [](const auto& s) { return s.label == Label::Malicious; });
  CHECK(std::abs(static_cast<double>(malicious) / 10'000 - 0.5) < 0.02);
}

TEST_CASE("degenerate ranges are configuration errors") {
  CHECK_THROWS_AS(generate_dataset(10, 1, DatasetSpec{10, 3, 1, 0, 10}), ConfigError);
  CHECK_THROWS_AS(generate_dataset(10, 1, DatasetSpec{10, 1, 1, 10, 0}), ConfigError);
  CHECK_THROWS_AS(generate_dataset(0, 1, DatasetSpec{}), ConfigError);
}

TEST_CASE("JSONL rows pair the prompt with a one-word target") {
  const auto samples = generate_dataset(5, 2, DatasetSpec{});
  std::istringstream in(dataset_jsonl(samples));
  std::string line;
  std::size_t i = 0;
  while (std::getline(in, line)) {
    const auto row = nlohmann::json::parse(line);
    CHECK(row.size() == 2);
    CHECK(row.at("instruction") == build_prompt(samples[i].num_ues, samples[i].tx_pkts));
    CHECK(row.at("output") == std::string(to_string(samples[i].label)));
    ++i;
  }
  CHECK(i == 5);
}

TEST_CASE("samples CSV round trip") {
  const auto samples = generate_dataset(50, 5, DatasetSpec{});
  std::istringstream in(samples_csv(samples));
  CHECK(read_samples_csv(in) == samples);
}

TEST_CASE("rule oracle scores 1.0") {
  const auto result = evaluate_detector(generate_dataset(1000, 1, DatasetSpec{}), DetectorConfig{});
  CHECK(result.n_correct == 1000);
  CHECK(result.accuracy() == 1.0);
  CHECK(result.true_malicious + result.true_legitimate == 1000);
}

TEST_CASE("static threshold with K>1 never confirms on isolated samples") {
  DetectorConfig cfg;
  cfg.backend = DetectorKind::StaticThreshold;
  cfg.static_threshold.confirmations = 2;
  const auto samples = generate_dataset(300, 1, DatasetSpec{});
  const auto result = evaluate_detector(samples, cfg);
  CHECK(result.false_legitimate ==
        static_cast<std::size_t>(std::count_if(samples.begin(), samples.end(), [](const auto& s) {
          return s.label == Label::Malicious;
        })));
  CHECK(result.true_malicious == 0);
}

TEST_CASE("evaluate_detector rejects an empty dataset") {
  CHECK_THROWS_AS(evaluate_detector({}, DetectorConfig{}), ConfigError);
}

TEST_CASE("accuracy JSON carries the counts") {
  DetectorConfig cfg;
  cfg.backend = DetectorKind::MockLlm;
  cfg.mock = MockLlmParams{0.9, 1};
  const auto result = evaluate_detector(generate_dataset(100, 1, DatasetSpec{}), cfg);
  const auto j = nlohmann::json::parse(accuracy_json(result));
  CHECK(j.at("detector") == "MockLlm");
  CHECK(j.at("n_samples") == 100);
  CHECK(j.at("n_correct").get<std::size_t>() + j.at("n_incorrect").get<std::size_t>() == 100);
}

TEST_CASE("timeline run on a shortened default scenario") {
  const auto run = run_timeline_experiment(quick_scenario());
  const auto& tl = run.timeline;
  REQUIRE(tl.detection_time);
  CHECK(*tl.detection_time == 8'000);
  CHECK(*tl.alert_time == 8'001);
  CHECK(*tl.mitigation_time == 8'003);
  CHECK(*tl.ack_time == 8'004);
  CHECK(*tl.recovery_time == 8'100);
  CHECK(*tl.attack_onset <= *tl.detection_time);
  CHECK(*tl.detection_time <= *tl.mitigation_time);
  CHECK(*tl.mitigation_time <= *tl.recovery_time);
  CHECK(run.successful_mitigations(UeId{1}) == 1);
  CHECK(run.reports.size() == 60);
  CHECK(run.bus_enqueued == run.bus_delivered);

  // quarantined from the first tick after the rebind onwards
  for (const auto& p : tl.rates) {
    if (p.ue == UeId{1} && p.time > *tl.mitigation_time) CHECK(p.prbs == 0);
  }
}

TEST_CASE("control run without an attacker") {
  auto sc = quick_scenario();
  sc.ues[0].profile.attacker = false;
  const auto run = run_timeline_experiment(sc);
  CHECK_FALSE(run.timeline.attacker);
  CHECK_FALSE(run.timeline.detection_time);
  CHECK(run.llm.alerts == 0);
  CHECK(run.mitigations.empty());
  for (const auto& p : run.timeline.rates) CHECK(std::abs(p.mbps - 10.0) <= 0.3 + 1e-9);
}

TEST_CASE("bus input path gives the same verdicts as the store path") {
  auto sc = quick_scenario();
  const auto via_store = run_timeline_experiment(sc);
  sc.llm_input = InputPath::Bus;
  const auto via_bus = run_timeline_experiment(sc);
  CHECK(via_bus.verdicts == via_store.verdicts);
  CHECK(via_bus.timeline.detection_time == via_store.timeline.detection_time);
}

TEST_CASE("hop latency zero collapses the pipeline into one instant") {
  auto sc = quick_scenario();
  sc.hop_latency_ms = 0;
  const auto run = run_timeline_experiment(sc);
  REQUIRE(run.mitigations.size() == 1);
  CHECK(*run.mitigations[0].detection_response_latency() == 0);
  CHECK(*run.timeline.mitigation_time == 8'000);
}

TEST_CASE("timeline CSV attaches events to rate rows") {
  const auto run = run_timeline_experiment(quick_scenario());
  const auto csv = timeline_csv(run);
  CHECK(csv.rfind("time_ms,ue,slice,prbs,mbps,events\n", 0) == 0);
  CHECK(csv.find("8000,1,1,67,20.100,attack_onset;detection") != std::string::npos);
  CHECK(csv.find("8100,1,0,0,0.000,alert;quarantine") != std::string::npos);
  CHECK(csv.find("8100,2,1,50,10.000,recovery") != std::string::npos);
}

TEST_CASE("run summary reports the mitigation latency") {
  const auto run = run_timeline_experiment(quick_scenario());
  const auto j = nlohmann::json::parse(run_summary_json(run));
  CHECK(j.at("detection_time_ms") == 8000);
  CHECK(j.at("mean_detection_response_latency_ms") == 3.0);
  CHECK(j.at("false_quarantines") == 0);
  CHECK(j.at("mitigations").size() == 1);
  CHECK(j.at("counters").at("reports_dropped") == 0);
}
