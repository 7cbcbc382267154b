#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <thread>
#include <utility>

#include "httplib.h"
#include "json.hpp"
#include "rubricjudge/judge.hpp"

namespace rubricjudge {

namespace {

using nlohmann::json;

std::string env_or_empty(const char* name) {
  const char* value = std::getenv(name);
  return value != nullptr ? std::string(value) : std::string();
}

struct ParsedUrl {
  std::string scheme_host_port;
  std::string path_prefix;
};

ParsedUrl parse_base_url(const std::string& url) {
  const auto sep = url.find("://");
  if (sep == std::string::npos) {
    throw BackendMisconfigured("base URL '" + url + "' has no scheme, expected http(s)://host[:port]");
  }
  const std::string scheme = url.substr(0, sep);
  if (scheme != "http" && scheme != "https") {
    throw BackendMisconfigured("base URL scheme '" + scheme + "' is not supported");
  }
  ParsedUrl out;
  const auto path_start = url.find('/', sep + 3);
  if (path_start == std::string::npos) {
    out.scheme_host_port = url;
  } else {
    out.scheme_host_port = url.substr(0, path_start);
    out.path_prefix = url.substr(path_start);
    while (!out.path_prefix.empty() && out.path_prefix.back() == '/') out.path_prefix.pop_back();
  }
  if (out.scheme_host_port.size() <= sep + 3) {
    throw BackendMisconfigured("base URL '" + url + "' has no host");
  }
  return out;
}

std::string truncate_for_log(const std::string& text) {
  constexpr std::size_t kMax = 200;
  if (text.size() <= kMax) return text;
  return text.substr(0, kMax) + "...";
}

class HttpBackend : public JudgeBackend {
 public:
  HttpBackend(std::string base_url, std::string api_key) {
    if (base_url.empty()) base_url = env_or_empty("RUBRIC_JUDGE_BASE_URL");
    if (base_url.empty()) {
      throw BackendMisconfigured(
          "http backend needs a base URL; set RUBRIC_JUDGE_BASE_URL or pass one explicitly");
    }
    if (api_key.empty()) api_key = env_or_empty("RUBRIC_JUDGE_API_KEY");
    api_key_ = std::move(api_key);
    url_ = parse_base_url(base_url);
  }

  std::string complete(const RenderedPrompt& prompt, const JudgeConfig& config, int run_index,
                       const std::string& condition) override {
    (void)run_index;
    (void)condition;
    return request(prompt.text, config);
  }

  std::string complete_text(const std::string& prompt, const JudgeConfig& config) override {
    return request(prompt, config);
  }

 private:
  std::string request(const std::string& content, const JudgeConfig& config) const {
    const json body = {
        {"model", config.model_name},
        {"temperature", config.temperature},
        {"max_tokens", config.max_output_tokens},
        {"messages", json::array({json{{"role", "user"}, {"content", content}}})},
    };
    const std::string payload = body.dump();
    const std::string path =
        url_.path_prefix.empty() ? "/v1/chat/completions" : url_.path_prefix + "/chat/completions";

    const int attempts = std::max(1, config.retry_limit);
    bool last_was_timeout = false;
    std::string last_failure = "no attempt made";
    for (int attempt = 1; attempt <= attempts; ++attempt) {
      if (attempt > 1) {
        const long long delay =
            std::min<long long>(8000, static_cast<long long>(config.backoff_ms)
                                          << std::min(attempt - 2, 10));
        std::this_thread::sleep_for(std::chrono::milliseconds(std::max<long long>(0, delay)));
      }

      // httplib clients are not safe for concurrent requests, so build one
      // per call; grade_corpus may invoke this from several worker threads.
      httplib::Client client(url_.scheme_host_port);
      const auto seconds = static_cast<time_t>(config.timeout_seconds);
      const auto usec =
          static_cast<time_t>((config.timeout_seconds - static_cast<double>(seconds)) * 1e6);
      client.set_connection_timeout(seconds, usec);
      client.set_read_timeout(seconds, usec);
      client.set_write_timeout(seconds, usec);

      httplib::Headers headers;
      if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

      auto res = client.Post(path, headers, payload, "application/json");
      if (!res) {
        const httplib::Error err = res.error();
        // httplib reports read timeouts as Error::Read.
        last_was_timeout =
            err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read;
        last_failure = "transport error: " + httplib::to_string(err);
        continue;
      }
      if (res->status == 200) return extract_content(res->body);
      if (res->status == 429 || res->status >= 500) {
        last_was_timeout = false;
        last_failure = "judge endpoint returned HTTP " + std::to_string(res->status);
        continue;
      }
      throw BackendMisconfigured("judge endpoint returned HTTP " + std::to_string(res->status) +
                                 ": " + truncate_for_log(res->body));
    }

    std::ostringstream msg;
    msg << last_failure << " after " << attempts << (attempts == 1 ? " attempt" : " attempts");
    if (last_was_timeout) throw TimeoutError(msg.str());
    throw TransportError(msg.str());
  }

  static std::string extract_content(const std::string& body) {
    const json doc = json::parse(body, nullptr, false);
    if (doc.is_discarded()) {
      throw TransportError("judge endpoint returned unparseable JSON: " + truncate_for_log(body));
    }
    if (!doc.contains("choices") || !doc["choices"].is_array() || doc["choices"].empty()) {
      throw TransportError("completion response has no choices: " + truncate_for_log(body));
    }
    const json& first = doc["choices"][0];
    if (!first.contains("message") || !first["message"].contains("content") ||
        !first["message"]["content"].is_string()) {
      throw TransportError("completion response has no message content: " +
                           truncate_for_log(body));
    }
    return first["message"]["content"].get<std::string>();
  }

  ParsedUrl url_;
  std::string api_key_;
};

}  // namespace

std::unique_ptr<JudgeBackend> make_http_backend(std::string base_url, std::string api_key) {
  return std::make_unique<HttpBackend>(std::move(base_url), std::move(api_key));
}

std::unique_ptr<JudgeBackend> make_http_backend_from_env() {
  return std::make_unique<HttpBackend>(std::string(), std::string());
}

}  // namespace rubricjudge
