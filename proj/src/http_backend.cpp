#include "httplib.h"

#include <chrono>
#include <cstdlib>

#include "poskit/error.hpp"
#include "poskit/eval_runner.hpp"

namespace poskit {
namespace {

using nlohmann::json;

struct Url {
  std::string base;  // scheme://host[:port]
  std::string path;
};

Url split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error(ErrorCode::Config, "endpoint '" + url + "' lacks a scheme");
  const auto path_begin = url.find('/', scheme_end + 3);
  if (path_begin == std::string::npos) return {url, "/"};
  return {url.substr(0, path_begin), url.substr(path_begin)};
}

bool transient_status(int status) { return status == 408 || status == 429 || status >= 500; }

}  // namespace

HttpBackend::HttpBackend(BackendConfig config) : config_(std::move(config)) {
  validate_backend_config(config_);
  split_url(config_.endpoint);
  api_key_ = config_.api_key;
  if (api_key_.empty() && !config_.api_key_env.empty()) {
    if (const char* env = std::getenv(config_.api_key_env.c_str())) api_key_ = env;
  }
}

json HttpBackend::request_body(const PromptInstance& prompt, bool reasoning) const {
  json messages = json::array();
  if (reasoning && config_.reasoning_channel == ReasoningChannel::ThinkTag) {
    messages.push_back({{"role", "system"}, {"content", think_tag_instruction(config_.reasoning_budget)}});
  }
  for (const auto& m : prompt.messages) messages.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  json body{{"model", config_.model},
            {"messages", messages},
            {"temperature", config_.temperature},
            {"max_tokens", config_.max_tokens + (reasoning ? config_.reasoning_budget : 0)}};
  if (config_.reasoning_channel == ReasoningChannel::Native) {
    body["chat_template_kwargs"] = {{"enable_thinking", reasoning}};
  }
  return body;
}

Completion HttpBackend::parse_response_body(std::string_view body, ReasoningChannel channel) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedResponse, std::string("response is not JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("choices") || !doc["choices"].is_array() || doc["choices"].empty()) {
    throw Error(ErrorCode::MalformedResponse, "response has no choices");
  }
  const json& choice = doc["choices"][0];
  if (!choice.is_object() || !choice.contains("message") || !choice["message"].is_object()) {
    throw Error(ErrorCode::MalformedResponse, "first choice has no message");
  }
  const json& message = choice["message"];
  std::string content;
  if (message.contains("content") && message["content"].is_string()) {
    content = message["content"].get<std::string>();
  } else if (!(message.contains("content") && message["content"].is_null())) {
    throw Error(ErrorCode::MalformedResponse, "message content is missing");
  }
  Completion out;
  for (const char* key : {"reasoning_content", "reasoning"}) {
    if (message.contains(key) && message[key].is_string()) {
      out.reasoning = message[key].get<std::string>();
      break;
    }
  }
  auto [cleaned, trace] = strip_think_blocks(content);
  if (trace && (!out.reasoning || channel == ReasoningChannel::ThinkTag)) out.reasoning = trace;
  out.content = std::move(cleaned);
  return out;
}

Completion HttpBackend::complete(const PromptInstance& prompt, bool reasoning) {
  const auto url = split_url(config_.endpoint);
  httplib::Client client(url.base);
  const auto secs = static_cast<time_t>(config_.timeout_seconds);
  const auto usecs = static_cast<time_t>((config_.timeout_seconds - static_cast<double>(secs)) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  const auto start = std::chrono::steady_clock::now();
  auto res = client.Post(url.path, headers, request_body(prompt, reasoning).dump(), "application/json");
  const auto elapsed = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  if (!res) throw TransientFailure("request to " + config_.endpoint + " failed: " + httplib::to_string(res.error()));
  if (transient_status(res->status)) {
    throw TransientFailure("HTTP " + std::to_string(res->status) + " from " + config_.endpoint);
  }
  if (res->status != 200) {
    throw Error(ErrorCode::BackendUnavailable, "HTTP " + std::to_string(res->status) + " from " + config_.endpoint +
                                                   ": " + res->body.substr(0, 200));
  }
  auto completion = parse_response_body(res->body, config_.reasoning_channel);
  completion.latency_ms = elapsed;
  return completion;
}

}  // namespace poskit
