#include <chrono>
#include <iostream>

#include <httplib.h>
#include <json.hpp>

#include "ricsec/llm_id.hpp"

namespace ricsec {

namespace {

struct SplitUrl {
  std::string base;
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("endpoint must be an absolute URL: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

std::string redact(std::string_view key) {
  if (key.size() <= 4) return "****";
  return std::string(key.substr(0, 2)) + "****" + std::string(key.substr(key.size() - 2));
}

}  // namespace

std::string chat_request_body(std::string_view model, std::string_view prompt) {
  nlohmann::ordered_json body{
      {"model", model},
      {"messages", nlohmann::ordered_json::array({{{"role", "user"}, {"content", prompt}}})},
      {"temperature", 0}};
  return body.dump();
}

std::string chat_response_text(std::string_view body) {
  try {
    const auto j = nlohmann::json::parse(body);
    const auto& choice = j.at("choices").at(0);
    if (choice.contains("message")) return choice.at("message").at("content").get<std::string>();
    return choice.at("text").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("unexpected chat-completions response: ") + e.what());
  }
}

ExternalLlmDetector::ExternalLlmDetector(ExternalLlmParams params, PromptTemplate tmpl)
    : params_(std::move(params)), template_(std::move(tmpl)) {
  auto split = split_url(params_.endpoint);
  base_url_ = std::move(split.base);
  path_ = std::move(split.path);
}

LlmExchange ExternalLlmDetector::exchange(std::int64_t num_ues, std::int64_t tx_pkts) {
  LlmExchange ex;
  ex.prompt = build_prompt(num_ues, tx_pkts, template_);
  const auto body = chat_request_body(params_.model, ex.prompt);

  httplib::Client client(base_url_);
  const auto timeout = std::chrono::milliseconds(params_.timeout_ms);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  httplib::Headers headers{{"Authorization", "Bearer " + params_.api_key}};

  if (params_.debug) {
    std::cerr << "[llm] POST " << params_.endpoint << " Authorization: Bearer "
              << redact(params_.api_key) << "\n[llm] request " << body << '\n';
  }

  const auto start = std::chrono::steady_clock::now();
  for (ex.attempts = 1; ex.attempts <= params_.max_retries + 1; ++ex.attempts) {
    auto res = client.Post(path_, headers, body, "application/json");
    if (!res) {
      ex.error = "transport: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      ex.error = "http status " + std::to_string(res->status);
      continue;
    }
    if (params_.debug) std::cerr << "[llm] response " << res->body << '\n';
    try {
      ex.raw_response = chat_response_text(res->body);
      ex.error.clear();
    } catch (const ParseError& e) {
      ex.error = e.what();
      continue;
    }
    ex.parsed = parse_llm_response(ex.raw_response);
    break;
  }
  if (ex.attempts > params_.max_retries + 1) ex.attempts = params_.max_retries + 1;
  ex.round_trip_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                              start)
                         .count();
  return ex;
}

Classification ExternalLlmDetector::classify(const KpmReport& report) {
  auto ex = exchange(report.num_ues, report.tx_pkts);
  if (!ex.error.empty()) return {Outcome::TransportError, std::nullopt, std::nullopt, ex.error};
  if (!ex.parsed) return {Outcome::ParseFailure, std::nullopt, ex.raw_response, "no single keyword"};
  return {Outcome::Decided, ex.parsed, ex.raw_response, {}};
}

}  // namespace ricsec
