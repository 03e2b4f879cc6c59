#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dualad/encoder.hpp"
#include "dualad/frame.hpp"

namespace dualad {

inline constexpr double kMaxSuggestedSpeed = 15.0;

enum class DecisionSource { remote_llm, mock, fallback };
const char* to_string(DecisionSource s);

struct ReasonerDecision {
  double suggested_speed = kMaxSuggestedSpeed;
  std::string rationale;
  DecisionSource source = DecisionSource::fallback;
  /// The raw suggestion was outside [0, 15] and got clamped.
  bool clamped = false;
};

struct ReasonerBackendConfig {
  std::string endpoint_url = "http://127.0.0.1:8000/v1/chat/completions";
  std::string model_name = "gpt-4o";
  std::string api_key_env_var = "DUALAD_API_KEY";
  double timeout = 10.0;
  int max_retries = 2;
  double call_period = 1.0;
  bool async_mode = false;
  std::size_t prompt_max_length = 8000;

  void validate(double sim_step) const;
};

/// Fixed task statement sent as the system message.
const std::string& system_instructions();

/// Ego line plus agent blocks. Blocks are dropped from the end (farthest
/// first) until the whole prompt fits `max_length` characters.
std::string build_user_message(const std::vector<AgentDescription>& descriptions, double ego_speed,
                               double speed_limit, std::size_t max_length = 8000);

/// System instructions, a blank line, then the user message.
std::string build_prompt(const std::vector<AgentDescription>& descriptions, double ego_speed, double speed_limit,
                         std::size_t max_length = 8000);

/// Parses the first balanced JSON object holding a numeric "speed".
/// Returns nullopt when there is none.
std::optional<ReasonerDecision> parse_reply(const std::string& content);

/// min(v_rule, clamp(suggestion, 0, 15)); the suggestion wins only below v_rule.
double arbitrate(double v_rule, const ReasonerDecision& decision);

/// A zero suggestion asks for maximum deceleration, not just a zero cap.
bool requests_hard_brake(const ReasonerDecision& decision);

/// Earliest time within `horizon` at which the ego box, moving straight at
/// its current speed, touches a constant-velocity agent box. Agents whose
/// centre lies behind the ego are ignored. +infinity when none.
double min_time_to_collision(const WorldFrame& frame, const VehicleParams& vehicle, double horizon,
                             double step = 0.1);

/// suggestion = clamp(2 * TTC, 0, 15) when TTC < 4 s, else 15.
ReasonerDecision mock_reason(const WorldFrame& frame, const VehicleParams& vehicle = {});

struct ReasonerRequest {
  std::size_t step = 0;
  const WorldFrame* frame = nullptr;
  std::string system;
  std::string user;

  std::string prompt() const { return system + "\n\n" + user; }
  std::string prompt_hash() const;
};

/// Never throws from `decide`; failures become fallback decisions.
class ReasonerBackend {
 public:
  virtual ~ReasonerBackend() = default;
  virtual ReasonerDecision decide(const ReasonerRequest& req) = 0;
  virtual std::size_t failure_count() const { return 0; }
  virtual bool uses_prompt() const { return true; }
  /// Backends that talk to a remote service may run off the simulation thread.
  virtual bool remote() const { return false; }
};

class MockBackend final : public ReasonerBackend {
 public:
  explicit MockBackend(VehicleParams vehicle = {}) : vehicle_(vehicle) {}
  ReasonerDecision decide(const ReasonerRequest& req) override;
  bool uses_prompt() const override { return false; }

 private:
  VehicleParams vehicle_;
};

struct ChatResponse {
  int status = 0;
  std::string body;
  bool timed_out = false;
  std::string error;
};

class ChatTransport {
 public:
  virtual ~ChatTransport() = default;
  virtual ChatResponse post(const std::string& url, const std::string& body, const std::string& bearer,
                            double timeout) = 0;
};

/// HTTP(S) transport over cpp-httplib.
std::unique_ptr<ChatTransport> make_http_transport();

/// JSON body of a chat-completions request.
std::string chat_request_body(const std::string& model, const ReasonerRequest& req);

class RemoteBackend final : public ReasonerBackend {
 public:
  explicit RemoteBackend(ReasonerBackendConfig cfg, std::unique_ptr<ChatTransport> transport = nullptr);
  ReasonerDecision decide(const ReasonerRequest& req) override;
  std::size_t failure_count() const override { return failures_; }
  bool remote() const override { return true; }
  /// Content of the last successful reply; nullopt after a failure.
  const std::optional<std::string>& last_reply() const { return last_reply_; }

 private:
  ReasonerBackendConfig cfg_;
  std::unique_ptr<ChatTransport> transport_;
  std::size_t failures_ = 0;
  std::optional<std::string> last_reply_;
};

struct ReplayEntry {
  std::size_t step = 0;
  std::string prompt_hash;
  std::optional<std::string> reply;
};

std::vector<ReplayEntry> load_replay(const std::string& path);

/// Answers from a recorded JSONL file. A missing step, hash mismatch or
/// recorded failure yields a fallback decision and counts a failure.
class ReplayBackend final : public ReasonerBackend {
 public:
  explicit ReplayBackend(const std::vector<ReplayEntry>& entries);
  ReasonerDecision decide(const ReasonerRequest& req) override;
  std::size_t failure_count() const override { return failures_; }

 private:
  std::map<std::size_t, ReplayEntry> entries_;
  std::size_t failures_ = 0;
};

/// Forwards to a RemoteBackend and appends {step, prompt_hash, reply} lines.
class RecordingBackend final : public ReasonerBackend {
 public:
  RecordingBackend(std::unique_ptr<RemoteBackend> inner, const std::string& path);
  ReasonerDecision decide(const ReasonerRequest& req) override;
  std::size_t failure_count() const override { return inner_->failure_count(); }
  bool remote() const override { return true; }

 private:
  std::unique_ptr<RemoteBackend> inner_;
  std::string path_;
};

}  // namespace dualad
