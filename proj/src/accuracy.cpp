#include <atomic>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "ricsec/eval.hpp"

namespace ricsec {

namespace {

KpmReport sample_report(const LabeledSample& s, std::size_t index) {
  KpmReport r;
  r.timestamp = static_cast<VirtualMs>(index);
  // Distinct UE per sample: no detector state carries across samples.
  r.ue = UeId{static_cast<std::uint32_t>(index)};
  r.slice = SliceId{1};
  r.num_ues = s.num_ues;
  r.tx_pkts = s.tx_pkts;
  return r;
}

void tally(AccuracyResult& acc, const LabeledSample& s, const Classification& c) {
  ++acc.n_samples;
  switch (c.outcome) {
    case Outcome::TransportError: ++acc.n_detector_errors; return;
    case Outcome::ParseFailure: ++acc.n_undecided; return;
    case Outcome::Decided: break;
  }
  const bool said_malicious = *c.label == Label::Malicious;
  const bool is_malicious = s.label == Label::Malicious;
  if (said_malicious == is_malicious) {
    ++acc.n_correct;
    ++(is_malicious ? acc.true_malicious : acc.true_legitimate);
  } else {
    ++acc.n_incorrect;
    ++(said_malicious ? acc.false_malicious : acc.false_legitimate);
  }
}

bool over_ceiling(const AccuracyResult& acc, const EvalOptions& options) {
  return acc.n_samples >= options.min_samples_before_abort &&
         static_cast<double>(acc.n_detector_errors) >
             options.max_error_rate * static_cast<double>(acc.n_samples);
}

}  // namespace

AccuracyResult evaluate_detector(const std::vector<LabeledSample>& dataset,
                                 const DetectorConfig& cfg, const EvalOptions& options) {
  if (dataset.empty()) throw ConfigError("dataset is empty");
  AccuracyResult acc;
  acc.detector = std::string(to_string(cfg.backend));
  acc.n_requested = dataset.size();

  const bool concurrent = cfg.backend == DetectorKind::ExternalLlm && options.max_in_flight > 1;
  if (!concurrent) {
    auto detector = make_detector(cfg);
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      tally(acc, dataset[i], detector->classify(sample_report(dataset[i], i)));
      if (over_ceiling(acc, options)) {
        acc.aborted = true;
        break;
      }
    }
    return acc;
  }

  cfg.validate();
  std::mutex mutex;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  {
    std::vector<std::jthread> workers;
    const auto n_workers = std::min(options.max_in_flight, dataset.size());
    for (std::size_t w = 0; w < n_workers; ++w) {
      workers.emplace_back([&] {
        auto detector = make_detector(cfg);
        while (!abort) {
          const auto i = next++;
          if (i >= dataset.size()) break;
          const auto c = detector->classify(sample_report(dataset[i], i));
          std::lock_guard lock(mutex);
          if (abort) break;
          tally(acc, dataset[i], c);
          if (over_ceiling(acc, options)) abort = true;
        }
      });
    }
  }
  acc.aborted = abort;
  return acc;
}

std::string accuracy_json(const AccuracyResult& a) {
  nlohmann::ordered_json j{{"detector", a.detector},
                           {"n_requested", a.n_requested},
                           {"n_samples", a.n_samples},
                           {"n_correct", a.n_correct},
                           {"n_incorrect", a.n_incorrect},
                           {"n_undecided", a.n_undecided},
                           {"n_detector_errors", a.n_detector_errors},
                           {"accuracy", a.accuracy()},
                           {"aborted", a.aborted},
                           {"confusion",
                            {{"true_malicious", a.true_malicious},
                             {"false_malicious", a.false_malicious},
                             {"true_legitimate", a.true_legitimate},
                             {"false_legitimate", a.false_legitimate}}}};
  return j.dump(2) + "\n";
}

}  // namespace ricsec
