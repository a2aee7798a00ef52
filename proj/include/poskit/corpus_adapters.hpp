#pragma once

// Turns external corpora into position-retrieval training examples:
// structure extraction from markdown-ish text, code windowing, follow-up
// adaptation of dialogues, and assembly of the training mixture.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "poskit/core_tasks.hpp"
#include "poskit/prompting.hpp"
#include "poskit/random.hpp"
#include "poskit/sequence_gen.hpp"

namespace poskit {

inline constexpr int kMinStructureItems = 5;
inline constexpr std::size_t kMaxItemCodePoints = 60;
inline constexpr int kMinWindowLines = 5;
inline constexpr int kMaxWindowLines = 30;

struct Turn {
  Role role = Role::User;
  std::string text;

  friend bool operator==(const Turn&, const Turn&) = default;
};

struct CorpusRecord {
  std::string source;
  std::string text;          // document; for dialogues, the final assistant turn
  std::vector<Turn> turns;   // empty for plain documents

  bool is_dialog() const { return !turns.empty(); }
};

/// Throws InvalidArgument unless text is non-empty and turns (when present)
/// alternate user/assistant, optionally after one leading system turn.
void validate_record(const CorpusRecord& record);

enum class StructureKind { NumberedList, BulletList, MarkdownTable, CodeBlock };

struct ExtractedStructure {
  StructureKind kind = StructureKind::NumberedList;
  std::vector<std::string> items;
  std::string source;
  std::size_t begin = 0;  // byte span of the structure within the record text
  std::size_t end = 0;

  friend bool operator==(const ExtractedStructure&, const ExtractedStructure&) = default;
};

/// Every maximal numbered list, bullet list, markdown table (rows, header
/// excluded) and fenced code block holding at least five usable items after
/// trimming, the 60-code-point cap, and removal of later duplicates.
std::vector<ExtractedStructure> extract_structures(const CorpusRecord& record);

/// Markdown rendering that extract_structures reads back to the same items.
std::string render_structure(const ExtractedStructure& structure);

/// Non-empty trimmed lines, tiled into contiguous windows whose lengths are
/// drawn uniformly from [5, min(30, remaining)]. Windows with repeated lines
/// are dropped; snippets under five lines yield nothing.
std::vector<Sequence> window_code(std::string_view snippet, Rng& stream);

std::string_view to_string(StructureKind kind);
StructureKind parse_structure_kind(std::string_view text);

struct TrainingExample {
  std::vector<ChatMessage> messages;
  std::string answer_text;
  std::size_t span_begin = 0;  // byte offsets into the final assistant message
  std::size_t span_end = 0;
  Condition condition;
  IndexQuery query;
  std::vector<std::string> sequence;
  std::string provenance;

  const std::string& target_text() const { return messages.back().content; }

  friend bool operator==(const TrainingExample&, const TrainingExample&) = default;
};

/// Re-derives the gold answer from (sequence, query) and checks the answer
/// span. Throws SpanMismatch on any disagreement.
void verify_example(const TrainingExample& example);

/// Appends a positional follow-up question about `structure` (extracted from
/// the final assistant turn) and the answering assistant turn.
TrainingExample adapt_dialog(const CorpusRecord& record, const ExtractedStructure& structure,
                             const IndexQuery& query, const PromptVariant& variant);

struct MixtureCounts {
  int synthetic = 20000;
  int code = 4000;
  int adapted = 46000;
};

struct MixtureConfig {
  double p_forward = 0.3;
  double p_endpoint = 0.3;
  MixtureCounts counts;
  std::uint64_t seed = 0;
  int queries_per_structure = 1;
  double p_framed = 0.5;
  int min_length = 10;
  int max_length = 50;
  std::vector<std::string> pools = {"letters", "digits", "animals", "fruits",
                                    "cities", "elements", "languages", "instruments"};
};

void validate_mixture_config(const MixtureConfig& config);

/// Pull-style sources; returning nullopt means exhausted.
using SnippetSource = std::function<std::optional<std::string>()>;
using RecordSource = std::function<std::optional<CorpusRecord>()>;

using ExampleSink = std::function<void(const TrainingExample&)>;

/// Emits counts.synthetic + counts.code + counts.adapted examples in that
/// order. Throws SourceExhausted when a source runs dry.
void build_mixture(const MixtureConfig& config, SnippetSource code, RecordSource adapted, const ExampleSink& sink);
std::vector<TrainingExample> build_mixture(const MixtureConfig& config, SnippetSource code, RecordSource adapted);

/// Procedural offline corpora, indexed deterministically from the seed.
std::string builtin_code_snippet(std::uint64_t seed, std::size_t index);
CorpusRecord builtin_adapted_record(std::uint64_t seed, std::size_t index);
SnippetSource builtin_code_source(std::uint64_t seed);
RecordSource builtin_adapted_source(std::uint64_t seed);

SnippetSource vector_snippet_source(std::vector<std::string> snippets);
RecordSource vector_record_source(std::vector<CorpusRecord> records);

/// Field mapping for newline-delimited JSON corpora. Paths use '.' to descend.
struct CorpusFieldMap {
  std::string id_field = "id";
  std::string text_field = "text";
  std::string turns_field = "conversations";
  std::string role_key = "from";
  std::string content_key = "value";
};

CorpusRecord parse_corpus_line(std::string_view line, const CorpusFieldMap& fields, std::string_view fallback_id);
RecordSource jsonl_record_source(const std::filesystem::path& path, CorpusFieldMap fields = {});
SnippetSource jsonl_snippet_source(const std::filesystem::path& path, CorpusFieldMap fields = {});

}  // namespace poskit
