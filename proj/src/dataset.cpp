#include <istream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "ricsec/eval.hpp"

namespace ricsec {

std::vector<LabeledSample> generate_dataset(std::size_t n, std::uint64_t seed,
                                            const DatasetSpec& ranges, std::int64_t base) {
  if (n == 0) throw ConfigError("dataset size must be > 0");
  if (ranges.ue_min < 1 || ranges.ue_max < ranges.ue_min) {
    throw ConfigError("degenerate ue range [" + std::to_string(ranges.ue_min) + ", " +
                      std::to_string(ranges.ue_max) + "]");
  }
  if (ranges.pkt_min < 0 || ranges.pkt_max < ranges.pkt_min) {
    throw ConfigError("degenerate pkt range [" + std::to_string(ranges.pkt_min) + ", " +
                      std::to_string(ranges.pkt_max) + "]");
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::int64_t> ues(ranges.ue_min, ranges.ue_max);
  std::uniform_int_distribution<std::int64_t> pkts(ranges.pkt_min, ranges.pkt_max);

  std::vector<LabeledSample> samples;
  samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    LabeledSample s;
    s.num_ues = ues(rng);
    s.tx_pkts = pkts(rng);
    s.label = rule_oracle_classify(s.num_ues, s.tx_pkts, base);
    samples.push_back(s);
  }
  return samples;
}

std::string dataset_jsonl(const std::vector<LabeledSample>& samples, const PromptTemplate& tmpl) {
  std::string out;
  for (const auto& s : samples) {
    nlohmann::ordered_json row{{"instruction", build_prompt(s.num_ues, s.tx_pkts, tmpl)},
                               {"output", to_string(s.label)}};
    out += row.dump();
    out += '\n';
  }
  return out;
}

std::string samples_csv(const std::vector<LabeledSample>& samples) {
  std::ostringstream out;
  out << "num_ues,tx_pkts,label\n";
  for (const auto& s : samples) out << s.num_ues << ',' << s.tx_pkts << ',' << to_string(s.label) << '\n';
  return out.str();
}

std::vector<LabeledSample> read_samples_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("num_ues,tx_pkts,label", 0) != 0) {
    throw ParseError("missing samples CSV header");
  }
  std::vector<LabeledSample> samples;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string ues, pkts, label;
    if (!std::getline(row, ues, ',') || !std::getline(row, pkts, ',') || !std::getline(row, label)) {
      throw ParseError("line " + std::to_string(line_no) + ": expected 3 columns");
    }
    try {
      samples.push_back(LabeledSample{std::stoll(ues), std::stoll(pkts), label_from_string(label)});
    } catch (const std::logic_error&) {
      throw ParseError("line " + std::to_string(line_no) + ": bad number");
    }
  }
  return samples;
}

}  // namespace ricsec
