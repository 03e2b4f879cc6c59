#include <cmath>
#include <cstdlib>

#include "httplib.h"
#include "json.hpp"

#include "dualad/reasoner.hpp"

namespace dualad {

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  const auto host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
  const auto slash = url.find('/', host_start);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

class HttpTransport final : public ChatTransport {
 public:
  ChatResponse post(const std::string& url, const std::string& body, const std::string& bearer,
                    double timeout) override {
    ChatResponse out;
    const SplitUrl u = split_url(url);
    httplib::Client cli(u.origin);
    if (!cli.is_valid()) {
      out.error = "unsupported endpoint " + u.origin;
      return out;
    }
    const auto sec = static_cast<time_t>(std::floor(timeout));
    const auto usec = static_cast<time_t>(std::llround((timeout - static_cast<double>(sec)) * 1e6));
    cli.set_connection_timeout(sec, usec);
    cli.set_read_timeout(sec, usec);
    cli.set_write_timeout(sec, usec);
    httplib::Headers headers;
    if (!bearer.empty()) headers.emplace("Authorization", "Bearer " + bearer);
    auto res = cli.Post(u.path, headers, body, "application/json");
    if (!res) {
      const auto err = res.error();
      out.timed_out = err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read;
      out.error = httplib::to_string(err);
      return out;
    }
    out.status = res->status;
    out.body = res->body;
    return out;
  }
};

// Content of the first choice, or nullopt for any unexpected shape.
std::optional<std::string> reply_content(const std::string& body) {
  const auto j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  const auto choices = j.find("choices");
  if (choices == j.end() || !choices->is_array() || choices->empty()) return std::nullopt;
  const auto& first = (*choices)[0];
  if (!first.is_object() || !first.contains("message") || !first["message"].is_object()) return std::nullopt;
  const auto& msg = first["message"];
  if (!msg.contains("content") || !msg["content"].is_string()) return std::nullopt;
  return msg["content"].get<std::string>();
}

}  // namespace

std::unique_ptr<ChatTransport> make_http_transport() { return std::make_unique<HttpTransport>(); }

RemoteBackend::RemoteBackend(ReasonerBackendConfig cfg, std::unique_ptr<ChatTransport> transport)
    : cfg_(std::move(cfg)), transport_(transport ? std::move(transport) : make_http_transport()) {}

ReasonerDecision RemoteBackend::decide(const ReasonerRequest& req) {
  last_reply_.reset();
  try {
    const char* key = std::getenv(cfg_.api_key_env_var.c_str());
    const std::string bearer = key != nullptr ? key : "";
    const std::string body = chat_request_body(cfg_.model_name, req);
    for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
      const ChatResponse res = transport_->post(cfg_.endpoint_url, body, bearer, cfg_.timeout);
      if (res.status < 200 || res.status >= 300) continue;
      const auto content = reply_content(res.body);
      if (!content) continue;
      if (auto d = parse_reply(*content)) {
        last_reply_ = *content;
        return *d;
      }
    }
  } catch (...) {
  }
  ++failures_;
  return {};
}

}  // namespace dualad
