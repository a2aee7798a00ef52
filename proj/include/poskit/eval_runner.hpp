#pragma once

// Runs prompt sets against chat-completion backends, with a content-addressed
// response cache, retry with exponential backoff, and bounded concurrency.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "poskit/prompting.hpp"
#include "poskit/trial.hpp"

namespace poskit {

enum class BackendKind { Http, MockOracle, MockRandom, MockReasoningOracle };

/// How reasoning is switched on: the server's own thinking flag, or a system
/// instruction to think inside <think>...</think> that is stripped afterwards.
enum class ReasoningChannel { Native, ThinkTag };

struct BackendConfig {
  BackendKind kind = BackendKind::MockOracle;
  std::string id;        // cache identity; derived from kind/model when empty
  std::string endpoint;  // full URL of the chat-completions route
  std::string model;
  double temperature = 0.7;
  int max_tokens = 32;
  bool reasoning = false;
  int reasoning_budget = 256;
  ReasoningChannel reasoning_channel = ReasoningChannel::Native;
  double timeout_seconds = 60.0;
  int max_retries = 3;
  int initial_backoff_ms = 500;
  int concurrency = 4;
  std::string api_key_env = "POSKIT_API_KEY";
  std::string api_key;  // takes precedence over api_key_env
  std::uint64_t mock_seed = 0;
};

void validate_backend_config(const BackendConfig& config);
std::string backend_id(const BackendConfig& config);

/// Canonical sampling parameters that affect the response.
std::string sampling_key(const BackendConfig& config, bool reasoning);

struct Completion {
  std::string content;
  std::optional<std::string> reasoning;
  double latency_ms = 0.0;

  friend bool operator==(const Completion&, const Completion&) = default;
};

/// Retryable failure: connection errors, timeouts, 408/429/5xx.
class TransientFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string id() const = 0;

  /// Throws TransientFailure (retried), Error(BackendUnavailable) (fatal) or
  /// Error(MalformedResponse) (recorded on the trial).
  virtual Completion complete(const PromptInstance& prompt, bool reasoning) = 0;
};

/// Answers every prompt with its gold text.
class OracleBackend : public Backend {
 public:
  std::string id() const override { return "mock-oracle"; }
  Completion complete(const PromptInstance& prompt, bool reasoning) override;
};

/// Uniform guesses: a sequence item for item answers, 1..L for integer
/// answers over a sequence, 0..99 otherwise. Seeded per prompt, so results do
/// not depend on call order.
class RandomBackend : public Backend {
 public:
  explicit RandomBackend(std::uint64_t seed) : seed_(seed) {}
  std::string id() const override;
  Completion complete(const PromptInstance& prompt, bool reasoning) override;

 private:
  std::uint64_t seed_;
};

/// Oracle when reasoning is on; an unparseable reply otherwise.
class ReasoningGatedOracle : public Backend {
 public:
  std::string id() const override { return "mock-reasoning-oracle"; }
  Completion complete(const PromptInstance& prompt, bool reasoning) override;
};

class HttpBackend : public Backend {
 public:
  explicit HttpBackend(BackendConfig config);
  std::string id() const override { return backend_id(config_); }
  Completion complete(const PromptInstance& prompt, bool reasoning) override;

  /// Request body in the chat-completions schema.
  nlohmann::json request_body(const PromptInstance& prompt, bool reasoning) const;

  /// Extracts content (and reasoning trace) from a response body; throws
  /// MalformedResponse.
  static Completion parse_response_body(std::string_view body, ReasoningChannel channel);

 private:
  BackendConfig config_;
  std::string api_key_;
};

std::unique_ptr<Backend> make_backend(const BackendConfig& config);

std::string think_tag_instruction(int budget);

/// Removes <think>...</think> blocks; returns the cleaned text and the
/// concatenated trace when any block was present.
std::pair<std::string, std::optional<std::string>> strip_think_blocks(std::string_view text);

/// Content-addressed store of completions; one JSON file per key. An empty
/// directory keeps entries in memory only.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir = {});

  static std::string key(std::string_view backend, std::string_view prompt_hash, std::string_view sampling);

  std::optional<Completion> get(const std::string& key);
  void put(const std::string& key, const Completion& completion);

  int hits() const { return hits_.load(); }
  int misses() const { return misses_.load(); }

 private:
  std::filesystem::path path_for(const std::string& key) const;

  std::filesystem::path dir_;
  std::mutex mutex_;
  std::map<std::string, Completion> memory_;
  std::atomic<int> hits_{0};
  std::atomic<int> misses_{0};
};

/// Counts requests currently in flight and the peak seen.
class InFlightGauge {
 public:
  void enter();
  void leave();
  int current() const { return current_.load(); }
  int peak() const { return peak_.load(); }

 private:
  std::atomic<int> current_{0};
  std::atomic<int> peak_{0};
};

struct ReasoningPair {
  std::string prompt_hash;
  TrialRecord off;
  TrialRecord on;
};

class Runner {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  Runner(Backend& backend, BackendConfig config, ResponseCache* cache = nullptr);

  /// One record per prompt, in prompt order, using config.reasoning.
  std::vector<TrialRecord> run_condition(const std::vector<PromptInstance>& prompts);

  /// Identical prompts with reasoning off and on; one pair per prompt hash.
  std::vector<ReasoningPair> run_reasoning_comparison(const std::vector<PromptInstance>& prompts);

  void set_sleeper(Sleeper sleeper) { sleeper_ = std::move(sleeper); }

  const InFlightGauge& gauge() const { return gauge_; }
  int backend_calls() const { return backend_calls_.load(); }

 private:
  std::vector<TrialRecord> run(const std::vector<PromptInstance>& prompts, bool reasoning);
  TrialRecord run_one(const PromptInstance& prompt, bool reasoning);
  Completion call_with_retries(const PromptInstance& prompt, bool reasoning);

  Backend& backend_;
  BackendConfig config_;
  ResponseCache* cache_;
  Sleeper sleeper_;
  InFlightGauge gauge_;
  std::atomic<int> backend_calls_{0};
};

std::vector<TrialRecord> run_condition(const std::vector<PromptInstance>& prompts, Backend& backend,
                                       const BackendConfig& config, ResponseCache* cache = nullptr);
std::vector<ReasoningPair> run_reasoning_comparison(const std::vector<PromptInstance>& prompts, Backend& backend,
                                                    const BackendConfig& config, ResponseCache* cache = nullptr);

struct ReasoningRow {
  std::string condition_id;
  int position = 0;
  int n_pairs = 0;
  double off_accuracy = 0.0;
  double on_accuracy = 0.0;
};

/// Per-condition, per-position paired accuracy, conditions in first-seen order.
std::vector<ReasoningRow> reasoning_table(const std::vector<ReasoningPair>& pairs);
/// condition,position,n_pairs,off_accuracy,on_accuracy
std::string reasoning_table_csv(const std::vector<ReasoningRow>& rows);

std::string_view to_string(BackendKind kind);
std::string_view to_string(ReasoningChannel channel);
BackendKind parse_backend_kind(std::string_view text);
ReasoningChannel parse_reasoning_channel(std::string_view text);

}  // namespace poskit
