#pragma once

// Few-shot chat prompts for the retrieval, counting and code-value tasks.
// Every retrieval/counting prompt carries three demonstrations of the same
// task on independently sampled sequences, then the unanswered test turn.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "poskit/core_tasks.hpp"
#include "poskit/random.hpp"
#include "poskit/sequence_gen.hpp"

namespace poskit {

inline constexpr int kDemonstrationCount = 3;

enum class ListFormat { CommaLine, BulletList, NumberedList, CodeBlock };
enum class Phrasing { OrdinalFromStart, OrdinalFromEnd, SecondToLastStyle, RelationalBeforeAfter };
enum class AnswerStyle { Bare, Framed };

struct PromptVariant {
  ListFormat list_format = ListFormat::CommaLine;
  Phrasing phrasing = Phrasing::OrdinalFromStart;
  AnswerStyle answer_style = AnswerStyle::Bare;
  std::string answer_instruction;  // overrides the default instruction when non-empty

  std::string id() const;

  friend bool operator==(const PromptVariant&, const PromptVariant&) = default;
};

/// Phrasings that can express the query's operator.
std::vector<Phrasing> compatible_phrasings(const IndexQuery& query);
bool is_compatible(const PromptVariant& variant, const IndexQuery& query);

/// Default phrasing for the operator; comma line for letters/words, code
/// block for code lines, bullet list otherwise.
PromptVariant default_variant(const IndexQuery& query, ItemKind kind);

enum class Role { System, User, Assistant };

struct ChatMessage {
  Role role = Role::User;
  std::string content;

  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

struct Demonstration {
  Sequence sequence;
  IndexQuery query;
  GoldAnswer answer;

  friend bool operator==(const Demonstration&, const Demonstration&) = default;
};

enum class TaskKind { PositionToItem, ItemToPosition, Counting, PyIndex };
enum class AnswerSpace { Item, Integer };

struct Condition {
  TaskKind task = TaskKind::PositionToItem;
  AnchorKind anchor = AnchorKind::Endpoint;
  Direction direction = Direction::Forward;
  ItemKind item_kind = ItemKind::Letter;
  int length = 0;
  std::string variant;
  std::string category;  // PyIndex only

  /// File-name safe identifier, e.g. "p2i_end_bwd_letter_L20_comma_line.ordinal_from_end.bare".
  std::string id() const;

  friend bool operator==(const Condition&, const Condition&) = default;
};

struct SeedCoords {
  std::uint64_t seed = 0;
  int sequence_index = 0;
  int instance_index = 0;

  friend bool operator==(const SeedCoords&, const SeedCoords&) = default;
};

struct PromptInstance {
  std::vector<ChatMessage> messages;
  std::vector<Demonstration> demos;
  std::optional<Sequence> sequence;
  std::optional<IndexQuery> test_query;
  std::optional<GoldAnswer> gold;
  AnswerSpace answer_space = AnswerSpace::Item;
  std::string gold_text;
  int queried_value = 0;  // offset n; sequence length for counting
  Condition condition;
  SeedCoords seed;

  friend bool operator==(const PromptInstance&, const PromptInstance&) = default;
};

/// "3rd position from the beginning", "2nd position from the end", or with
/// to_last_style: "last", "second-to-last", "third-to-last", ...
std::string render_ordinal(int n, Direction direction, bool to_last_style = false);

/// English cardinal for 1..99 ("two", "twenty-one"); digits beyond.
std::string number_words(int n);

std::string render_list(const Sequence& seq, ListFormat format);

/// The standalone user turn for one (sequence, query) pair.
std::string render_question_turn(const Sequence& seq, const IndexQuery& query, const PromptVariant& variant);

/// Question sentence plus answer instruction, without preamble or list; used
/// for follow-up turns that refer to a list shown earlier in a dialogue.
std::string render_followup_question(const Sequence& seq, const IndexQuery& query, const PromptVariant& variant);

/// Assistant turn answering a question; framed style wraps the bare answer.
std::string render_answer_turn(const GoldAnswer& gold, AnswerStyle style);

/// Sentence that precedes the answer in framed style ("The answer is ").
std::string_view framed_answer_prefix();

/// Builds the three-shot prompt. Demonstration sequences are drawn from
/// demo_pool with the test sequence's length (counting demos draw their own
/// length) using demo_stream.
PromptInstance render_prompt(const Sequence& seq, const IndexQuery& query, const PromptVariant& variant,
                             const ItemPool& demo_pool, Rng& demo_stream);

/// Single-turn prompt asking for the value a code snippet evaluates to.
PromptInstance render_code_value_prompt(std::string_view snippet, std::int64_t gold, Condition condition);

/// The instruction text of the final user turn, without the rendered list.
std::string test_instruction_text(const PromptInstance& prompt);

/// Stable SHA-256 over the canonical serialization of the messages.
std::string prompt_hash(const std::vector<ChatMessage>& messages);

TaskKind task_kind_for(QueryKind kind);

std::string_view to_string(ListFormat format);
std::string_view to_string(Phrasing phrasing);
std::string_view to_string(AnswerStyle style);
std::string_view to_string(Role role);
std::string_view to_string(TaskKind kind);
std::string_view to_string(AnswerSpace space);
ListFormat parse_list_format(std::string_view text);
Phrasing parse_phrasing(std::string_view text);
AnswerStyle parse_answer_style(std::string_view text);
Role parse_role(std::string_view text);
TaskKind parse_task_kind(std::string_view text);
AnswerSpace parse_answer_space(std::string_view text);

}  // namespace poskit
