#include "poskit/eval_runner.hpp"

#include <algorithm>
#include <cstdio>
#include <exception>
#include <map>
#include <thread>

#include "poskit/error.hpp"
#include "poskit/hash.hpp"
#include "poskit/io.hpp"
#include "poskit/random.hpp"
#include "poskit/scoring.hpp"

namespace poskit {
namespace {

using nlohmann::json;

constexpr std::string_view kThinkOpen = "<think>";
constexpr std::string_view kThinkClose = "</think>";

}  // namespace

void validate_backend_config(const BackendConfig& config) {
  if (!(config.temperature >= 0.0)) throw Error(ErrorCode::Config, "temperature must be >= 0");
  if (config.max_tokens < 1) throw Error(ErrorCode::Config, "max_tokens must be >= 1");
  if (config.reasoning_budget < 1) throw Error(ErrorCode::Config, "reasoning budget must be >= 1");
  if (!(config.timeout_seconds > 0.0)) throw Error(ErrorCode::Config, "timeout must be positive");
  if (config.max_retries < 0 || config.max_retries > 16) throw Error(ErrorCode::Config, "max_retries must be in [0, 16]");
  if (config.initial_backoff_ms < 0) throw Error(ErrorCode::Config, "initial backoff must be >= 0");
  if (config.concurrency < 1) throw Error(ErrorCode::Config, "concurrency must be >= 1");
  if (config.kind == BackendKind::Http && config.endpoint.empty()) {
    throw Error(ErrorCode::Config, "http backend needs an endpoint");
  }
}

std::string backend_id(const BackendConfig& config) {
  if (!config.id.empty()) return config.id;
  switch (config.kind) {
    case BackendKind::Http: return "http:" + config.model + "@" + config.endpoint;
    case BackendKind::MockOracle: return OracleBackend().id();
    case BackendKind::MockRandom: return RandomBackend(config.mock_seed).id();
    case BackendKind::MockReasoningOracle: return ReasoningGatedOracle().id();
  }
  return "unknown";
}

std::string sampling_key(const BackendConfig& config, bool reasoning) {
  json j{{"model", config.model},
         {"temperature", config.temperature},
         {"max_tokens", config.max_tokens},
         {"reasoning", reasoning}};
  if (reasoning) {
    j["reasoning_budget"] = config.reasoning_budget;
    j["reasoning_channel"] = to_string(config.reasoning_channel);
  }
  return j.dump();
}

Completion OracleBackend::complete(const PromptInstance& prompt, bool) { return Completion{prompt.gold_text, {}, 0.0}; }

std::string RandomBackend::id() const { return "mock-random:" + std::to_string(seed_); }

Completion RandomBackend::complete(const PromptInstance& prompt, bool reasoning) {
  Rng stream(derive_seed(seed_, {prompt_hash(prompt.messages), reasoning ? 1 : 0}));
  if (prompt.answer_space == AnswerSpace::Item && prompt.sequence) {
    const auto items = prompt.sequence->items();
    return {items[static_cast<std::size_t>(stream.uniform_int(0, static_cast<std::int64_t>(items.size()) - 1))].text,
            {}, 0.0};
  }
  const std::int64_t value = prompt.sequence ? stream.uniform_int(1, prompt.sequence->length()) : stream.uniform_int(0, 99);
  return {std::to_string(value), {}, 0.0};
}

Completion ReasoningGatedOracle::complete(const PromptInstance& prompt, bool reasoning) {
  if (reasoning) return Completion{prompt.gold_text, std::string("checked each position"), 0.0};
  return Completion{"no answer", {}, 0.0};
}

std::unique_ptr<Backend> make_backend(const BackendConfig& config) {
  validate_backend_config(config);
  switch (config.kind) {
    case BackendKind::Http: return std::make_unique<HttpBackend>(config);
    case BackendKind::MockOracle: return std::make_unique<OracleBackend>();
    case BackendKind::MockRandom: return std::make_unique<RandomBackend>(config.mock_seed);
    case BackendKind::MockReasoningOracle: return std::make_unique<ReasoningGatedOracle>();
  }
  throw Error(ErrorCode::Config, "unknown backend kind");
}

std::string think_tag_instruction(int budget) {
  return "Before answering, think step by step inside <think> and </think>, using at most " + std::to_string(budget) +
         " tokens. After </think>, give only the final answer in the requested format.";
}

std::pair<std::string, std::optional<std::string>> strip_think_blocks(std::string_view text) {
  std::string cleaned;
  std::optional<std::string> trace;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto open = text.find(kThinkOpen, pos);
    const auto close_only = text.find(kThinkClose, pos);
    // Some servers drop the opening tag and emit only "...</think>answer".
    if (close_only != std::string_view::npos && (open == std::string_view::npos || close_only < open)) {
      if (!trace) trace.emplace();
      *trace += std::string(text.substr(pos, close_only - pos));
      pos = close_only + kThinkClose.size();
      continue;
    }
    if (open == std::string_view::npos) {
      cleaned += text.substr(pos);
      break;
    }
    cleaned += text.substr(pos, open - pos);
    const auto body = open + kThinkOpen.size();
    const auto close = text.find(kThinkClose, body);
    if (!trace) trace.emplace();
    if (close == std::string_view::npos) {
      // An unterminated block consumed the whole answer budget.
      *trace += std::string(text.substr(body));
      break;
    }
    *trace += std::string(text.substr(body, close - body));
    pos = close + kThinkClose.size();
  }
  return {cleaned, trace};
}

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::string ResponseCache::key(std::string_view backend, std::string_view prompt_hash, std::string_view sampling) {
  return sha256_hex(json::array({backend, prompt_hash, sampling}).dump());
}

std::filesystem::path ResponseCache::path_for(const std::string& key) const {
  return dir_ / key.substr(0, 2) / (key + ".json");
}

std::optional<Completion> ResponseCache::get(const std::string& key) {
  std::lock_guard lock(mutex_);
  if (auto it = memory_.find(key); it != memory_.end()) {
    ++hits_;
    return it->second;
  }
  if (!dir_.empty()) {
    const auto path = path_for(key);
    std::error_code ec;
    if (std::filesystem::exists(path, ec)) {
      try {
        const auto j = json::parse(read_text_file(path));
        Completion c{j.at("content").get<std::string>(),
                     j.at("reasoning").is_null() ? std::nullopt
                                                 : std::optional<std::string>(j.at("reasoning").get<std::string>()),
                     j.at("latency_ms").get<double>()};
        memory_.emplace(key, c);
        ++hits_;
        return c;
      } catch (const std::exception&) {
        // A corrupt entry is treated as a miss and overwritten.
      }
    }
  }
  ++misses_;
  return std::nullopt;
}

void ResponseCache::put(const std::string& key, const Completion& completion) {
  std::lock_guard lock(mutex_);
  memory_[key] = completion;
  if (dir_.empty()) return;
  const json j{{"key", key},
               {"content", completion.content},
               {"reasoning", completion.reasoning ? json(*completion.reasoning) : json(nullptr)},
               {"latency_ms", completion.latency_ms}};
  write_text_file_atomic(path_for(key), j.dump() + "\n");
}

void InFlightGauge::enter() {
  const int now = ++current_;
  int seen = peak_.load();
  while (now > seen && !peak_.compare_exchange_weak(seen, now)) {
  }
}

void InFlightGauge::leave() { --current_; }

Runner::Runner(Backend& backend, BackendConfig config, ResponseCache* cache)
    : backend_(backend),
      config_(std::move(config)),
      cache_(cache),
      sleeper_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }) {
  validate_backend_config(config_);
}

Completion Runner::call_with_retries(const PromptInstance& prompt, bool reasoning) {
  for (int attempt = 0;; ++attempt) {
    try {
      gauge_.enter();
      ++backend_calls_;
      struct Leave {
        InFlightGauge& g;
        ~Leave() { g.leave(); }
      } leave{gauge_};
      return backend_.complete(prompt, reasoning);
    } catch (const TransientFailure& e) {
      if (attempt >= config_.max_retries) {
        throw Error(ErrorCode::BackendUnavailable, backend_.id() + " failed after " + std::to_string(attempt + 1) +
                                                       " attempts: " + e.what());
      }
      sleeper_(std::chrono::milliseconds(static_cast<std::int64_t>(config_.initial_backoff_ms) << attempt));
    }
  }
}

TrialRecord Runner::run_one(const PromptInstance& prompt, bool reasoning) {
  TrialRecord t;
  t.condition = prompt.condition;
  t.queried_value = prompt.queried_value;
  if (prompt.test_query && prompt.test_query->anchor.kind == AnchorKind::Relative) {
    t.anchor_position = prompt.test_query->anchor.position;
  }
  if (prompt.sequence) t.candidates = prompt.sequence->texts();
  t.answer_space = prompt.answer_space;
  t.gold_text = prompt.gold_text;
  t.prompt_hash = prompt_hash(prompt.messages);
  t.reasoning = reasoning;
  t.backend_id = backend_.id();
  t.seed = prompt.seed;

  const auto key = ResponseCache::key(t.backend_id, t.prompt_hash, sampling_key(config_, reasoning));
  std::optional<Completion> completion = cache_ ? cache_->get(key) : std::nullopt;
  if (!completion) {
    try {
      completion = call_with_retries(prompt, reasoning);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::MalformedResponse) throw;
      t.error = e.detail();
      t.parsed = ParsedAnswer::unparseable();
      t.correct = false;
      return t;
    }
    if (cache_) cache_->put(key, *completion);
  }
  t.raw_response = completion->content;
  t.reasoning_trace = completion->reasoning;
  t.latency_ms = completion->latency_ms;
  t.parsed = parse_response(t.raw_response, prompt);
  t.correct = is_correct(t.parsed, t.answer_space, t.gold_text);
  return t;
}

std::vector<TrialRecord> Runner::run(const std::vector<PromptInstance>& prompts, bool reasoning) {
  if (prompts.empty()) throw Error(ErrorCode::InvalidArgument, "no prompts to run");
  std::vector<std::optional<TrialRecord>> slots(prompts.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    while (!abort.load()) {
      const std::size_t i = next++;
      if (i >= prompts.size()) return;
      try {
        slots[i] = run_one(prompts[i], reasoning);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        abort = true;
      }
    }
  };
  const int threads = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(config_.concurrency), prompts.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  std::vector<TrialRecord> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

std::vector<TrialRecord> Runner::run_condition(const std::vector<PromptInstance>& prompts) {
  return run(prompts, config_.reasoning);
}

std::vector<ReasoningPair> Runner::run_reasoning_comparison(const std::vector<PromptInstance>& prompts) {
  std::vector<PromptInstance> unique;
  std::map<std::string, bool> seen;
  for (const auto& p : prompts) {
    if (seen.emplace(prompt_hash(p.messages), true).second) unique.push_back(p);
  }
  auto off = run(unique, false);
  auto on = run(unique, true);
  std::vector<ReasoningPair> pairs;
  pairs.reserve(unique.size());
  for (std::size_t i = 0; i < unique.size(); ++i) {
    pairs.push_back(ReasoningPair{off[i].prompt_hash, std::move(off[i]), std::move(on[i])});
  }
  return pairs;
}

std::vector<TrialRecord> run_condition(const std::vector<PromptInstance>& prompts, Backend& backend,
                                       const BackendConfig& config, ResponseCache* cache) {
  return Runner(backend, config, cache).run_condition(prompts);
}

std::vector<ReasoningPair> run_reasoning_comparison(const std::vector<PromptInstance>& prompts, Backend& backend,
                                                    const BackendConfig& config, ResponseCache* cache) {
  return Runner(backend, config, cache).run_reasoning_comparison(prompts);
}

std::vector<ReasoningRow> reasoning_table(const std::vector<ReasoningPair>& pairs) {
  std::vector<ReasoningRow> rows;
  std::map<std::pair<std::string, int>, std::size_t> index;
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::size_t>> by_condition;
  for (const auto& p : pairs) {
    const auto id = p.off.condition.id();
    const auto key = std::make_pair(id, p.off.queried_value);
    auto [it, inserted] = index.emplace(key, rows.size());
    if (inserted) {
      if (!by_condition.count(id)) order.push_back(id);
      by_condition[id].push_back(rows.size());
      rows.push_back(ReasoningRow{id, p.off.queried_value, 0, 0.0, 0.0});
    }
    auto& row = rows[it->second];
    ++row.n_pairs;
    row.off_accuracy += p.off.correct ? 1.0 : 0.0;
    row.on_accuracy += p.on.correct ? 1.0 : 0.0;
  }
  std::vector<ReasoningRow> out;
  for (const auto& id : order) {
    auto members = by_condition[id];
    std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) { return rows[a].position < rows[b].position; });
    for (auto m : members) {
      auto row = rows[m];
      row.off_accuracy /= row.n_pairs;
      row.on_accuracy /= row.n_pairs;
      out.push_back(row);
    }
  }
  return out;
}

std::string reasoning_table_csv(const std::vector<ReasoningRow>& rows) {
  std::string out = "condition,position,n_pairs,off_accuracy,on_accuracy\n";
  char buf[64];
  for (const auto& r : rows) {
    out += r.condition_id + "," + std::to_string(r.position) + "," + std::to_string(r.n_pairs) + ",";
    std::snprintf(buf, sizeof buf, "%.10g,%.10g\n", r.off_accuracy, r.on_accuracy);
    out += buf;
  }
  return out;
}

std::string_view to_string(BackendKind kind) {
  switch (kind) {
    case BackendKind::Http: return "http";
    case BackendKind::MockOracle: return "mock-oracle";
    case BackendKind::MockRandom: return "mock-random";
    case BackendKind::MockReasoningOracle: return "mock-reasoning-oracle";
  }
  return "http";
}

std::string_view to_string(ReasoningChannel channel) {
  return channel == ReasoningChannel::Native ? "native" : "think_tag";
}

BackendKind parse_backend_kind(std::string_view text) {
  for (auto k : {BackendKind::Http, BackendKind::MockOracle, BackendKind::MockRandom, BackendKind::MockReasoningOracle}) {
    if (to_string(k) == text) return k;
  }
  throw Error(ErrorCode::Config, "unknown backend '" + std::string(text) + "'");
}

ReasoningChannel parse_reasoning_channel(std::string_view text) {
  if (text == "native") return ReasoningChannel::Native;
  if (text == "think_tag") return ReasoningChannel::ThinkTag;
  throw Error(ErrorCode::Config, "unknown reasoning channel '" + std::string(text) + "'");
}

}  // namespace poskit
