#include "ricsec/kpm.hpp"

#include <array>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

namespace ricsec {

namespace {

constexpr std::array<std::string_view, 12> kColumns = {
    "timestamp", "ue",      "slice",   "dl_bytes",  "ul_bytes",  "dl_prbs",
    "ul_prbs",   "tx_pkts", "rx_pkts", "tx_errors", "ul_errors", "num_ues"};

std::int64_t parse_field(std::string_view text, std::string_view column) {
  std::int64_t value = 0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (text.empty() || ec != std::errc{} || ptr != last) {
    throw ParseError("bad value for column '" + std::string(column) + "': '" +
                     std::string(text) + "'");
  }
  return value;
}

std::uint32_t parse_id(std::string_view text, std::string_view column) {
  const auto value = parse_field(text, column);
  if (value < 0 || value > static_cast<std::int64_t>(UINT32_MAX)) {
    throw ParseError("out-of-range id for column '" + std::string(column) + "'");
  }
  return static_cast<std::uint32_t>(value);
}

std::string_view trim_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

}  // namespace

std::string_view to_string(Label label) {
  return label == Label::Malicious ? "Malicious" : "Legitimate";
}

std::string_view to_string(DetectorKind kind) {
  switch (kind) {
    case DetectorKind::RuleOracle: return "RuleOracle";
    case DetectorKind::StaticThreshold: return "StaticThreshold";
    case DetectorKind::ExternalLlm: return "ExternalLlm";
    case DetectorKind::MockLlm: return "MockLlm";
  }
  return "unknown";
}

Label label_from_string(std::string_view text) {
  if (text == "Malicious") return Label::Malicious;
  if (text == "Legitimate") return Label::Legitimate;
  throw ParseError("unknown label '" + std::string(text) + "'");
}

DetectorKind detector_kind_from_string(std::string_view text) {
  for (auto kind : {DetectorKind::RuleOracle, DetectorKind::StaticThreshold,
                    DetectorKind::ExternalLlm, DetectorKind::MockLlm}) {
    if (to_string(kind) == text) return kind;
  }
  throw ParseError("unknown detector kind '" + std::string(text) + "'");
}

std::vector<std::string> validate_report(const KpmReport& r, std::int64_t cell_prbs) {
  std::vector<std::string> violations;
  const std::array<std::pair<std::string_view, std::int64_t>, 10> counters = {{
      {"dl_bytes", r.dl_bytes},
      {"ul_bytes", r.ul_bytes},
      {"dl_prbs", r.dl_prbs},
      {"ul_prbs", r.ul_prbs},
      {"tx_pkts", r.tx_pkts},
      {"rx_pkts", r.rx_pkts},
      {"tx_errors", r.tx_errors},
      {"ul_errors", r.ul_errors},
      {"num_ues", r.num_ues},
      {"timestamp", r.timestamp},
  }};
  for (const auto& [name, value] : counters) {
    if (value < 0) violations.push_back(std::string(name) + " >= 0");
  }
  if (r.tx_errors > r.tx_pkts) violations.emplace_back("tx_errors <= tx_pkts");
  if (r.ul_errors > r.rx_pkts) violations.emplace_back("ul_errors <= rx_pkts");
  if (r.num_ues < 1) violations.emplace_back("num_ues >= 1");
  if (r.dl_prbs + r.ul_prbs > cell_prbs) violations.emplace_back("PRB budget exceeded");
  return violations;
}

std::string serialize_report(const KpmReport& r) {
  std::ostringstream out;
  out << r.timestamp << ',' << r.ue.value << ',' << r.slice.value << ',' << r.dl_bytes << ','
      << r.ul_bytes << ',' << r.dl_prbs << ',' << r.ul_prbs << ',' << r.tx_pkts << ','
      << r.rx_pkts << ',' << r.tx_errors << ',' << r.ul_errors << ',' << r.num_ues;
  return out.str();
}

KpmReport parse_report(std::string_view row) {
  row = trim_cr(row);
  if (row.empty()) throw ParseError("empty KPM row");

  std::array<std::string_view, kColumns.size()> fields;
  std::size_t count = 0;
  std::size_t start = 0;
  while (true) {
    const auto comma = row.find(',', start);
    const auto field = row.substr(start, comma == std::string_view::npos ? row.npos : comma - start);
    if (count == fields.size()) {
      throw ParseError("too many columns in KPM row (expected " +
                       std::to_string(kColumns.size()) + ")");
    }
    fields[count++] = field;
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (count != fields.size()) {
    throw ParseError("missing column '" + std::string(kColumns[count]) + "'");
  }

  KpmReport r;
  r.timestamp = parse_field(fields[0], kColumns[0]);
  r.ue = UeId{parse_id(fields[1], kColumns[1])};
  r.slice = SliceId{parse_id(fields[2], kColumns[2])};
  r.dl_bytes = parse_field(fields[3], kColumns[3]);
  r.ul_bytes = parse_field(fields[4], kColumns[4]);
  r.dl_prbs = parse_field(fields[5], kColumns[5]);
  r.ul_prbs = parse_field(fields[6], kColumns[6]);
  r.tx_pkts = parse_field(fields[7], kColumns[7]);
  r.rx_pkts = parse_field(fields[8], kColumns[8]);
  r.tx_errors = parse_field(fields[9], kColumns[9]);
  r.ul_errors = parse_field(fields[10], kColumns[10]);
  r.num_ues = parse_field(fields[11], kColumns[11]);
  return r;
}

void write_reports_csv(std::ostream& out, const std::vector<KpmReport>& reports) {
  out << kKpmCsvHeader << '\n';
  for (const auto& r : reports) out << serialize_report(r) << '\n';
}

std::vector<KpmReport> read_reports_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim_cr(line) != kKpmCsvHeader) {
    throw ParseError("missing or malformed KPM CSV header");
  }
  std::vector<KpmReport> reports;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim_cr(line).empty()) continue;
    try {
      reports.push_back(parse_report(line));
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return reports;
}

}  // namespace ricsec
