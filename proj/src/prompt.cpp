#include <algorithm>
#include <cctype>

#include "ricsec/llm_id.hpp"

namespace ricsec {

namespace {

void replace_all(std::string& text, std::string_view slot, std::string_view value) {
  for (auto pos = text.find(slot); pos != std::string::npos;
       pos = text.find(slot, pos + value.size())) {
    text.replace(pos, slot.size(), value);
  }
}

std::string lowercase(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

std::string render_instruction(const PromptTemplate& tmpl) {
  std::string text = tmpl.text;
  replace_all(text, "{Limit1}", std::to_string(tmpl.base_limit_per_ue));
  replace_all(text, "{Limit2}", std::to_string(tmpl.base_limit_per_ue * 2));
  return text;
}

std::string build_prompt(std::int64_t num_ues, std::int64_t tx_pkts, const PromptTemplate& tmpl) {
  std::string text = render_instruction(tmpl);
  replace_all(text, "{NumUE}", std::to_string(num_ues));
  replace_all(text, "{TXPackets}", std::to_string(tx_pkts));
  return text;
}

Label rule_oracle_classify(std::int64_t num_ues, std::int64_t tx_pkts, std::int64_t base) {
  return tx_pkts <= base * num_ues ? Label::Legitimate : Label::Malicious;
}

Label static_threshold_classify(const std::vector<bool>& exceedances, int confirmations) {
  if (confirmations < 1 || exceedances.size() < static_cast<std::size_t>(confirmations)) {
    return Label::Legitimate;
  }
  const bool confirmed = std::all_of(exceedances.end() - confirmations, exceedances.end(),
                                     [](bool exceeded) { return exceeded; });
  return confirmed ? Label::Malicious : Label::Legitimate;
}

std::optional<Label> parse_llm_response(std::string_view text) {
  const auto lower = lowercase(text);
  const bool legit = lower.find("legitimate") != std::string::npos;
  const bool malicious = lower.find("malicious") != std::string::npos;
  if (legit == malicious) return std::nullopt;
  return malicious ? Label::Malicious : Label::Legitimate;
}

}  // namespace ricsec
