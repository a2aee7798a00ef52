#include "poskit/serialize.hpp"

#include "poskit/error.hpp"
#include "poskit/io.hpp"

namespace poskit {
namespace {

template <typename T>
T field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw Error(ErrorCode::Parse, std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("bad field '") + key + "': " + e.what());
  }
}

template <typename T>
T field_or(const Json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return fallback;
  return field<T>(j, key);
}

const Json& sub(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw Error(ErrorCode::Parse, std::string("missing field '") + key + "'");
  return j.at(key);
}

}  // namespace

Json to_json(const ChatMessage& message) {
  return Json{{"role", to_string(message.role)}, {"content", message.content}};
}

ChatMessage message_from_json(const Json& j) {
  return ChatMessage{parse_role(field<std::string>(j, "role")), field<std::string>(j, "content")};
}

Json to_json(const std::vector<ChatMessage>& messages) {
  Json out = Json::array();
  for (const auto& m : messages) out.push_back(to_json(m));
  return out;
}

std::vector<ChatMessage> messages_from_json(const Json& j) {
  if (!j.is_array()) throw Error(ErrorCode::Parse, "messages must be an array");
  std::vector<ChatMessage> out;
  for (const auto& m : j) out.push_back(message_from_json(m));
  return out;
}

Json to_json(const Sequence& seq) {
  return Json{{"kind", to_string(seq.items().front().kind)}, {"items", seq.texts()}};
}

Sequence sequence_from_json(const Json& j) {
  const ItemKind kind = parse_item_kind(field<std::string>(j, "kind"));
  std::vector<Item> items;
  for (auto& t : field<std::vector<std::string>>(j, "items")) items.push_back(Item{std::move(t), kind});
  return Sequence(std::move(items));
}

Json to_json(const IndexQuery& query) {
  Json j{{"kind", to_string(query.kind)},
         {"anchor", to_string(query.anchor.kind)},
         {"anchor_position", query.anchor.position},
         {"direction", to_string(query.direction)},
         {"offset", query.offset}};
  j["target"] = query.target ? Json(query.target->text) : Json(nullptr);
  if (query.target) j["target_kind"] = to_string(query.target->kind);
  return j;
}

IndexQuery query_from_json(const Json& j) {
  IndexQuery q;
  q.kind = parse_query_kind(field<std::string>(j, "kind"));
  q.anchor.kind = parse_anchor_kind(field<std::string>(j, "anchor"));
  q.anchor.position = field<int>(j, "anchor_position");
  q.direction = parse_direction(field<std::string>(j, "direction"));
  q.offset = field<int>(j, "offset");
  if (j.contains("target") && !j.at("target").is_null()) {
    q.target = Item{field<std::string>(j, "target"), parse_item_kind(field<std::string>(j, "target_kind"))};
  }
  return q;
}

Json to_json(const GoldAnswer& gold) {
  return std::visit(
      [](const auto& g) -> Json {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, ItemAnswer>) {
          return Json{{"type", "item"}, {"item", g.item.text}, {"item_kind", to_string(g.item.kind)}};
        } else if constexpr (std::is_same_v<T, OffsetAnswer>) {
          return Json{{"type", "offset"}, {"offset", g.offset}};
        } else {
          return Json{{"type", "count"}, {"count", g.count}};
        }
      },
      gold);
}

GoldAnswer gold_from_json(const Json& j) {
  const auto type = field<std::string>(j, "type");
  if (type == "item") {
    return ItemAnswer{Item{field<std::string>(j, "item"), parse_item_kind(field<std::string>(j, "item_kind"))}};
  }
  if (type == "offset") return OffsetAnswer{field<int>(j, "offset")};
  if (type == "count") return CountAnswer{field<int>(j, "count")};
  throw Error(ErrorCode::Parse, "unknown gold answer type '" + type + "'");
}

Json to_json(const Condition& c) {
  return Json{{"id", c.id()},
              {"task", to_string(c.task)},
              {"anchor", to_string(c.anchor)},
              {"direction", to_string(c.direction)},
              {"item_kind", to_string(c.item_kind)},
              {"length", c.length},
              {"variant", c.variant},
              {"category", c.category}};
}

Condition condition_from_json(const Json& j) {
  Condition c;
  c.task = parse_task_kind(field<std::string>(j, "task"));
  c.anchor = parse_anchor_kind(field<std::string>(j, "anchor"));
  c.direction = parse_direction(field<std::string>(j, "direction"));
  c.item_kind = parse_item_kind(field<std::string>(j, "item_kind"));
  c.length = field<int>(j, "length");
  c.variant = field_or<std::string>(j, "variant", "");
  c.category = field_or<std::string>(j, "category", "");
  return c;
}

Json to_json(const SeedCoords& seed) {
  return Json{{"seed", seed.seed}, {"sequence_index", seed.sequence_index}, {"instance_index", seed.instance_index}};
}

SeedCoords seed_from_json(const Json& j) {
  return SeedCoords{field<std::uint64_t>(j, "seed"), field<int>(j, "sequence_index"), field<int>(j, "instance_index")};
}

Json to_json(const PromptInstance& p) {
  Json demos = Json::array();
  for (const auto& d : p.demos) {
    demos.push_back(Json{{"sequence", to_json(d.sequence)}, {"query", to_json(d.query)}, {"answer", to_json(d.answer)}});
  }
  return Json{{"messages", to_json(p.messages)},
              {"demos", demos},
              {"sequence", p.sequence ? to_json(*p.sequence) : Json(nullptr)},
              {"test_query", p.test_query ? to_json(*p.test_query) : Json(nullptr)},
              {"gold", p.gold ? to_json(*p.gold) : Json(nullptr)},
              {"answer_space", to_string(p.answer_space)},
              {"gold_text", p.gold_text},
              {"queried_value", p.queried_value},
              {"condition", to_json(p.condition)},
              {"seed", to_json(p.seed)},
              {"prompt_hash", prompt_hash(p.messages)}};
}

PromptInstance prompt_from_json(const Json& j) {
  PromptInstance p;
  p.messages = messages_from_json(sub(j, "messages"));
  for (const auto& d : sub(j, "demos")) {
    p.demos.push_back(Demonstration{sequence_from_json(sub(d, "sequence")), query_from_json(sub(d, "query")),
                                    gold_from_json(sub(d, "answer"))});
  }
  if (!sub(j, "sequence").is_null()) p.sequence = sequence_from_json(j.at("sequence"));
  if (!sub(j, "test_query").is_null()) p.test_query = query_from_json(j.at("test_query"));
  if (!sub(j, "gold").is_null()) p.gold = gold_from_json(j.at("gold"));
  p.answer_space = parse_answer_space(field<std::string>(j, "answer_space"));
  p.gold_text = field<std::string>(j, "gold_text");
  p.queried_value = field<int>(j, "queried_value");
  p.condition = condition_from_json(sub(j, "condition"));
  p.seed = seed_from_json(sub(j, "seed"));
  return p;
}

Json to_json(const ParsedAnswer& parsed) {
  Json j{{"kind", to_string(parsed.kind)}};
  if (parsed.kind == AnswerKind::Item) j["item"] = parsed.item;
  if (parsed.kind == AnswerKind::Integer) j["value"] = parsed.value;
  return j;
}

ParsedAnswer parsed_from_json(const Json& j) {
  ParsedAnswer p;
  p.kind = parse_answer_kind(field<std::string>(j, "kind"));
  if (p.kind == AnswerKind::Item) p.item = field<std::string>(j, "item");
  if (p.kind == AnswerKind::Integer) p.value = field<std::int64_t>(j, "value");
  return p;
}

Json to_json(const TrialRecord& t) {
  return Json{{"condition", to_json(t.condition)},
              {"queried_value", t.queried_value},
              {"anchor_position", t.anchor_position},
              {"candidates", t.candidates},
              {"answer_space", to_string(t.answer_space)},
              {"gold_text", t.gold_text},
              {"prompt_hash", t.prompt_hash},
              {"raw_response", t.raw_response},
              {"reasoning_trace", t.reasoning_trace ? Json(*t.reasoning_trace) : Json(nullptr)},
              {"reasoning", t.reasoning},
              {"parsed", to_json(t.parsed)},
              {"correct", t.correct},
              {"error", t.error},
              {"latency_ms", t.latency_ms},
              {"backend_id", t.backend_id},
              {"seed", to_json(t.seed)}};
}

TrialRecord trial_from_json(const Json& j) {
  TrialRecord t;
  t.condition = condition_from_json(sub(j, "condition"));
  t.queried_value = field<int>(j, "queried_value");
  t.anchor_position = field_or<int>(j, "anchor_position", 0);
  t.candidates = field_or<std::vector<std::string>>(j, "candidates", {});
  t.answer_space = parse_answer_space(field<std::string>(j, "answer_space"));
  t.gold_text = field<std::string>(j, "gold_text");
  t.prompt_hash = field<std::string>(j, "prompt_hash");
  t.raw_response = field<std::string>(j, "raw_response");
  if (j.contains("reasoning_trace") && !j.at("reasoning_trace").is_null()) {
    t.reasoning_trace = field<std::string>(j, "reasoning_trace");
  }
  t.reasoning = field_or<bool>(j, "reasoning", false);
  t.parsed = parsed_from_json(sub(j, "parsed"));
  t.correct = field<bool>(j, "correct");
  t.error = field_or<std::string>(j, "error", "");
  t.latency_ms = field_or<double>(j, "latency_ms", 0.0);
  t.backend_id = field_or<std::string>(j, "backend_id", "");
  t.seed = j.contains("seed") ? seed_from_json(j.at("seed")) : SeedCoords{};
  return t;
}

Json to_json(const TrainingExample& ex) {
  return Json{{"messages", to_json(ex.messages)},
              {"answer_text", ex.answer_text},
              {"answer_span", Json::array({ex.span_begin, ex.span_end})},
              {"condition", to_json(ex.condition)},
              {"query", to_json(ex.query)},
              {"sequence", ex.sequence},
              {"provenance", ex.provenance}};
}

TrainingExample example_from_json(const Json& j) {
  TrainingExample ex;
  ex.messages = messages_from_json(sub(j, "messages"));
  ex.answer_text = field<std::string>(j, "answer_text");
  const auto span = field<std::vector<std::size_t>>(j, "answer_span");
  if (span.size() != 2) throw Error(ErrorCode::Parse, "answer_span must hold two offsets");
  ex.span_begin = span[0];
  ex.span_end = span[1];
  ex.condition = condition_from_json(sub(j, "condition"));
  ex.query = query_from_json(sub(j, "query"));
  ex.sequence = field<std::vector<std::string>>(j, "sequence");
  ex.provenance = field<std::string>(j, "provenance");
  return ex;
}

Json to_json(const pyindex::Case& c) {
  return Json{{"case_id", c.case_id},
              {"category", pyindex::to_string(c.category)},
              {"xs", c.xs},
              {"expression", c.expr ? Json(pyindex::render(c.expr)) : Json(nullptr)},
              {"source_text", c.source_text},
              {"gold", c.gold},
              {"seed", to_json(c.seed)}};
}

pyindex::Case case_from_json(const Json& j) {
  pyindex::Case c;
  c.case_id = field<std::string>(j, "case_id");
  c.category = pyindex::parse_category(field<std::string>(j, "category"));
  c.xs = field<std::vector<std::int64_t>>(j, "xs");
  c.source_text = field<std::string>(j, "source_text");
  const auto expression = field<std::string>(j, "expression");
  c.expr = pyindex::parse_expression(expression);
  if (pyindex::render(c.expr) != expression) {
    throw Error(ErrorCode::Parse, "expression '" + expression + "' does not round-trip");
  }
  c.gold = field<std::int64_t>(j, "gold");
  c.seed = seed_from_json(sub(j, "seed"));
  return c;
}

std::string to_jsonl(const std::vector<Json>& records) {
  std::string out;
  for (const auto& r : records) {
    out += r.dump();
    out += '\n';
  }
  return out;
}

std::vector<Json> parse_jsonl(std::string_view text, std::string_view origin) {
  std::vector<Json> out;
  std::size_t start = 0;
  std::size_t line_number = 0;
  while (start < text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    ++line_number;
    const auto line = text.substr(start, nl - start);
    start = nl + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      out.push_back(Json::parse(line));
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::Parse, std::string(origin) + ":" + std::to_string(line_number) + ": " + e.what());
    }
  }
  return out;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& records) {
  write_text_file_atomic(path, to_jsonl(records));
}

std::vector<Json> read_jsonl(const std::filesystem::path& path) {
  return parse_jsonl(read_text_file(path), path.string());
}

}  // namespace poskit
