#include <fstream>
#include <memory>

#include "json.hpp"

#include "poskit/corpus_adapters.hpp"
#include "poskit/error.hpp"

namespace poskit {
namespace {

using nlohmann::json;

Sequence to_sequence(const std::vector<std::string>& texts, ItemKind kind) {
  std::vector<Item> items;
  items.reserve(texts.size());
  for (const auto& t : texts) items.push_back(Item{t, kind});
  return Sequence(std::move(items));
}

ItemKind item_kind_for(StructureKind kind) {
  return kind == StructureKind::CodeBlock ? ItemKind::CodeLine : ItemKind::Generic;
}

// Draws direction, anchor and query kind independently, then a valid (r, n).
IndexQuery draw_query(const MixtureConfig& config, const Sequence& seq, Rng& stream) {
  const int length = seq.length();
  const Direction direction = stream.bernoulli(config.p_forward) ? Direction::Forward : Direction::Backward;
  const bool endpoint = stream.bernoulli(config.p_endpoint);
  const bool item_to_position = stream.bernoulli(0.5);
  Anchor anchor = Anchor::endpoint();
  if (!endpoint) {
    const int r = direction == Direction::Forward ? static_cast<int>(stream.uniform_int(1, length - 1))
                                                  : static_cast<int>(stream.uniform_int(2, length));
    anchor = Anchor::relative(r);
  }
  const auto offsets = valid_offsets(anchor, direction, length);
  const int n = stream.choice(offsets);
  auto query = IndexQuery::position_to_item(anchor, direction, n);
  return item_to_position ? invert_query(seq, query) : query;
}

PromptVariant draw_variant(const MixtureConfig& config, const IndexQuery& query, ListFormat format, Rng& stream) {
  PromptVariant variant;
  variant.list_format = format;
  variant.phrasing = stream.choice(compatible_phrasings(query));
  variant.answer_style = stream.bernoulli(config.p_framed) ? AnswerStyle::Framed : AnswerStyle::Bare;
  return variant;
}

TrainingExample finish_example(std::vector<ChatMessage> messages, const Sequence& seq, const IndexQuery& query,
                               const PromptVariant& variant, std::string provenance) {
  const auto gold = gold_answer(seq, query);
  TrainingExample ex;
  ex.answer_text = answer_text(gold);
  messages.push_back({Role::Assistant, render_answer_turn(gold, variant.answer_style)});
  ex.messages = std::move(messages);
  ex.span_begin = variant.answer_style == AnswerStyle::Framed ? framed_answer_prefix().size() : 0;
  ex.span_end = ex.span_begin + ex.answer_text.size();
  ex.condition.task = task_kind_for(query.kind);
  ex.condition.anchor = query.anchor.kind;
  ex.condition.direction = query.direction;
  ex.condition.item_kind = seq.items().front().kind;
  ex.condition.length = seq.length();
  ex.condition.variant = variant.id();
  ex.query = query;
  ex.sequence = seq.texts();
  ex.provenance = std::move(provenance);
  return ex;
}

TrainingExample standalone_example(const MixtureConfig& config, const Sequence& seq, ListFormat format, Rng& stream,
                                   std::string provenance) {
  const auto query = draw_query(config, seq, stream);
  const auto variant = draw_variant(config, query, format, stream);
  std::vector<ChatMessage> messages = {{Role::User, render_question_turn(seq, query, variant)}};
  return finish_example(std::move(messages), seq, query, variant, std::move(provenance));
}

TrainingExample document_example(const CorpusRecord& record, const ExtractedStructure& structure,
                                 const IndexQuery& query, const PromptVariant& variant) {
  const auto seq = to_sequence(structure.items, item_kind_for(structure.kind));
  std::vector<ChatMessage> messages = {
      {Role::User, record.text + "\n\n" + render_followup_question(seq, query, variant)}};
  return finish_example(std::move(messages), seq, query, variant, "adapted:" + record.source);
}

const json* descend(const json& root, std::string_view path) {
  const json* node = &root;
  std::size_t start = 0;
  while (start <= path.size()) {
    const std::size_t dot = path.find('.', start);
    const std::string key(path.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start));
    if (!node->is_object() || !node->contains(key)) return nullptr;
    node = &(*node)[key];
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  return node;
}

class LineReader {
 public:
  explicit LineReader(const std::filesystem::path& path) : path_(path), in_(path) {
    if (!in_) throw Error(ErrorCode::Io, "cannot open corpus '" + path.string() + "'");
  }

  // Next non-blank line, or nullopt at end of file.
  std::optional<std::string> next() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_number_;
      if (line.find_first_not_of(" \t\r") != std::string::npos) return line;
    }
    return std::nullopt;
  }

  std::size_t line_number() const { return line_number_; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  std::size_t line_number_ = 0;
};

}  // namespace

void verify_example(const TrainingExample& example) {
  if (example.messages.empty() || example.messages.back().role != Role::Assistant) {
    throw Error(ErrorCode::SpanMismatch, "example does not end with an assistant turn");
  }
  const std::string& target = example.target_text();
  if (example.span_begin > example.span_end || example.span_end > target.size() ||
      target.compare(example.span_begin, example.span_end - example.span_begin, example.answer_text) != 0 ||
      example.span_end - example.span_begin != example.answer_text.size()) {
    throw Error(ErrorCode::SpanMismatch, "answer span [" + std::to_string(example.span_begin) + ", " +
                                             std::to_string(example.span_end) + ") does not slice '" +
                                             example.answer_text + "'");
  }
  GoldAnswer gold;
  try {
    gold = gold_answer(to_sequence(example.sequence, example.condition.item_kind), example.query);
  } catch (const Error& e) {
    throw Error(ErrorCode::SpanMismatch, "gold answer cannot be re-derived: " + e.detail());
  }
  if (answer_text(gold) != example.answer_text) {
    throw Error(ErrorCode::SpanMismatch,
                "re-derived answer '" + answer_text(gold) + "' differs from '" + example.answer_text + "'");
  }
}

TrainingExample adapt_dialog(const CorpusRecord& record, const ExtractedStructure& structure, const IndexQuery& query,
                             const PromptVariant& variant) {
  if (!record.is_dialog()) {
    throw Error(ErrorCode::InvalidArgument, "record '" + record.source + "' has no dialogue turns");
  }
  const auto seq = to_sequence(structure.items, item_kind_for(structure.kind));
  std::vector<ChatMessage> messages;
  messages.reserve(record.turns.size() + 2);
  for (const auto& turn : record.turns) messages.push_back({turn.role, turn.text});
  messages.push_back({Role::User, render_followup_question(seq, query, variant)});
  return finish_example(std::move(messages), seq, query, variant, "adapted:" + record.source);
}

void validate_mixture_config(const MixtureConfig& config) {
  auto check_probability = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw Error(ErrorCode::Config, std::string(name) + " must lie in [0, 1], got " + std::to_string(p));
    }
  };
  check_probability(config.p_forward, "p_forward");
  check_probability(config.p_endpoint, "p_endpoint");
  check_probability(config.p_framed, "p_framed");
  if (config.counts.synthetic < 0 || config.counts.code < 0 || config.counts.adapted < 0) {
    throw Error(ErrorCode::Config, "mixture counts must be non-negative");
  }
  if (config.queries_per_structure < 1) throw Error(ErrorCode::Config, "queries_per_structure must be >= 1");
  if (config.min_length < 2 || config.max_length < config.min_length) {
    throw Error(ErrorCode::Config, "synthetic lengths need 2 <= min_length <= max_length");
  }
  if (config.pools.empty()) throw Error(ErrorCode::Config, "at least one synthetic pool is required");
  for (const auto& name : config.pools) {
    try {
      (void)builtin_pool(name);
    } catch (const Error&) {
      throw Error(ErrorCode::Config, "unknown synthetic pool '" + name + "'");
    }
  }
}

void build_mixture(const MixtureConfig& config, SnippetSource code, RecordSource adapted, const ExampleSink& sink) {
  validate_mixture_config(config);
  auto emit = [&](const TrainingExample& ex) {
    verify_example(ex);
    sink(ex);
  };

  for (int i = 0; i < config.counts.synthetic; ++i) {
    Rng stream(derive_seed(config.seed, {"synthetic", i}));
    const ItemPool& pool = builtin_pool(stream.choice(config.pools));
    const int hi = std::min(config.max_length, pool.size());
    const int lo = std::min(config.min_length, hi);
    const auto seq = sample_sequence(pool, static_cast<int>(stream.uniform_int(lo, hi)), stream);
    const ListFormat format = stream.bernoulli(0.5) ? ListFormat::CommaLine : ListFormat::BulletList;
    emit(standalone_example(config, seq, format, stream, "synthetic:" + pool.name));
  }

  int produced = 0;
  for (int snippet_index = 0; produced < config.counts.code; ++snippet_index) {
    auto snippet = code ? code() : std::nullopt;
    if (!snippet) {
      throw Error(ErrorCode::SourceExhausted, "code source supplied " + std::to_string(produced) + " of " +
                                                  std::to_string(config.counts.code) + " examples");
    }
    Rng stream(derive_seed(config.seed, {"code", snippet_index}));
    for (const auto& window : window_code(*snippet, stream)) {
      for (int q = 0; q < config.queries_per_structure && produced < config.counts.code; ++q, ++produced) {
        emit(standalone_example(config, window, ListFormat::CodeBlock, stream,
                                "code:" + std::to_string(snippet_index)));
      }
    }
  }

  produced = 0;
  for (int record_index = 0; produced < config.counts.adapted; ++record_index) {
    auto record = adapted ? adapted() : std::nullopt;
    if (!record) {
      throw Error(ErrorCode::SourceExhausted, "adapted source supplied " + std::to_string(produced) + " of " +
                                                  std::to_string(config.counts.adapted) + " examples");
    }
    try {
      validate_record(*record);
    } catch (const Error&) {
      continue;
    }
    Rng stream(derive_seed(config.seed, {"adapted", record_index}));
    for (const auto& structure : extract_structures(*record)) {
      const auto seq = to_sequence(structure.items, item_kind_for(structure.kind));
      for (int q = 0; q < config.queries_per_structure && produced < config.counts.adapted; ++q, ++produced) {
        const auto query = draw_query(config, seq, stream);
        const auto variant = draw_variant(config, query, ListFormat::CommaLine, stream);
        emit(record->is_dialog() ? adapt_dialog(*record, structure, query, variant)
                                 : document_example(*record, structure, query, variant));
      }
    }
  }
}

std::vector<TrainingExample> build_mixture(const MixtureConfig& config, SnippetSource code, RecordSource adapted) {
  std::vector<TrainingExample> out;
  build_mixture(config, std::move(code), std::move(adapted), [&](const TrainingExample& ex) { out.push_back(ex); });
  return out;
}

SnippetSource vector_snippet_source(std::vector<std::string> snippets) {
  auto state = std::make_shared<std::pair<std::vector<std::string>, std::size_t>>(std::move(snippets), 0);
  return [state]() -> std::optional<std::string> {
    if (state->second >= state->first.size()) return std::nullopt;
    return state->first[state->second++];
  };
}

RecordSource vector_record_source(std::vector<CorpusRecord> records) {
  auto state = std::make_shared<std::pair<std::vector<CorpusRecord>, std::size_t>>(std::move(records), 0);
  return [state]() -> std::optional<CorpusRecord> {
    if (state->second >= state->first.size()) return std::nullopt;
    return state->first[state->second++];
  };
}

CorpusRecord parse_corpus_line(std::string_view line, const CorpusFieldMap& fields, std::string_view fallback_id) {
  json doc;
  try {
    doc = json::parse(line);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("corpus line is not valid JSON: ") + e.what());
  }
  CorpusRecord record;
  const json* id = descend(doc, fields.id_field);
  if (id && id->is_string()) {
    record.source = id->get<std::string>();
  } else if (id && id->is_number_integer()) {
    record.source = std::to_string(id->get<std::int64_t>());
  } else {
    record.source = std::string(fallback_id);
  }

  const json* turns = descend(doc, fields.turns_field);
  if (turns && turns->is_array()) {
    for (const auto& t : *turns) {
      if (!t.is_object() || !t.contains(fields.role_key) || !t.contains(fields.content_key) ||
          !t[fields.role_key].is_string() || !t[fields.content_key].is_string()) {
        throw Error(ErrorCode::Parse, "malformed turn in record '" + record.source + "'");
      }
      record.turns.push_back({parse_role(t[fields.role_key].get<std::string>()), t[fields.content_key].get<std::string>()});
    }
    // The follow-up question attaches after the last assistant answer.
    while (!record.turns.empty() && record.turns.back().role != Role::Assistant) record.turns.pop_back();
    if (!record.turns.empty()) record.text = record.turns.back().text;
    return record;
  }
  const json* text = descend(doc, fields.text_field);
  if (text && text->is_string()) record.text = text->get<std::string>();
  return record;
}

RecordSource jsonl_record_source(const std::filesystem::path& path, CorpusFieldMap fields) {
  auto reader = std::make_shared<LineReader>(path);
  return [reader, fields]() -> std::optional<CorpusRecord> {
    auto line = reader->next();
    if (!line) return std::nullopt;
    const std::string fallback = reader->path().filename().string() + ":" + std::to_string(reader->line_number());
    try {
      return parse_corpus_line(*line, fields, fallback);
    } catch (const Error& e) {
      throw Error(e.code(), fallback + ": " + e.detail());
    }
  };
}

SnippetSource jsonl_snippet_source(const std::filesystem::path& path, CorpusFieldMap fields) {
  auto records = jsonl_record_source(path, std::move(fields));
  return [records]() -> std::optional<std::string> {
    auto record = records();
    if (!record) return std::nullopt;
    return record->text;
  };
}

}  // namespace poskit
