#pragma once

// JSON forms of the toolkit's records. Objects are emitted with sorted keys,
// so equal values always serialize to equal bytes.

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "poskit/corpus_adapters.hpp"
#include "poskit/prompting.hpp"
#include "poskit/pyindex.hpp"
#include "poskit/trial.hpp"

namespace poskit {

using Json = nlohmann::json;

Json to_json(const ChatMessage& message);
ChatMessage message_from_json(const Json& j);
Json to_json(const std::vector<ChatMessage>& messages);
std::vector<ChatMessage> messages_from_json(const Json& j);

Json to_json(const Sequence& seq);
Sequence sequence_from_json(const Json& j);

Json to_json(const IndexQuery& query);
IndexQuery query_from_json(const Json& j);

Json to_json(const GoldAnswer& gold);
GoldAnswer gold_from_json(const Json& j);

Json to_json(const Condition& condition);
Condition condition_from_json(const Json& j);

Json to_json(const SeedCoords& seed);
SeedCoords seed_from_json(const Json& j);

Json to_json(const PromptInstance& prompt);
PromptInstance prompt_from_json(const Json& j);

Json to_json(const ParsedAnswer& parsed);
ParsedAnswer parsed_from_json(const Json& j);

Json to_json(const TrialRecord& trial);
TrialRecord trial_from_json(const Json& j);

Json to_json(const TrainingExample& example);
TrainingExample example_from_json(const Json& j);

/// The expression is stored as text and re-parsed on load; a case whose
/// text does not re-render identically is rejected with Parse.
Json to_json(const pyindex::Case& c);
pyindex::Case case_from_json(const Json& j);

/// One compact JSON document per line, each terminated by '\n'.
std::string to_jsonl(const std::vector<Json>& records);
std::vector<Json> parse_jsonl(std::string_view text, std::string_view origin = "<memory>");

void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& records);
std::vector<Json> read_jsonl(const std::filesystem::path& path);

template <typename T>
std::vector<Json> to_json_all(const std::vector<T>& values) {
  std::vector<Json> out;
  out.reserve(values.size());
  for (const auto& v : values) out.push_back(to_json(v));
  return out;
}

}  // namespace poskit
