#include "poskit/prompting.hpp"

#include <algorithm>
#include <array>
#include <set>

#include "json.hpp"

#include "poskit/error.hpp"
#include "poskit/hash.hpp"

namespace poskit {
namespace {

constexpr int kDemoResampleBudget = 64;
constexpr std::string_view kFramedPrefix = "The answer is ";

std::string noun(ItemKind kind) {
  switch (kind) {
    case ItemKind::Letter: return "letter";
    case ItemKind::Word: return "word";
    case ItemKind::CodeLine: return "line";
    case ItemKind::Generic: return "item";
  }
  return "item";
}

std::string plural_noun(ItemKind kind) { return noun(kind) + "s"; }

// The word used in "What ___ is at ..." questions.
std::string subject_noun(ItemKind kind) { return kind == ItemKind::CodeLine ? "line" : "item"; }

std::string ordinal_suffix(int n) {
  const int mod100 = n % 100;
  if (mod100 >= 11 && mod100 <= 13) return "th";
  switch (n % 10) {
    case 1: return "st";
    case 2: return "nd";
    case 3: return "rd";
    default: return "th";
  }
}

std::string ordinal_word(int n) {
  static const std::array<const char*, 21> kWords = {
      "",        "first",    "second",     "third",     "fourth",     "fifth",    "sixth",
      "seventh", "eighth",   "ninth",      "tenth",     "eleventh",   "twelfth",  "thirteenth",
      "fourteenth", "fifteenth", "sixteenth", "seventeenth", "eighteenth", "nineteenth", "twentieth"};
  if (n >= 1 && n <= 20) return kWords[static_cast<std::size_t>(n)];
  return std::to_string(n) + ordinal_suffix(n);
}

std::string preamble(ItemKind kind, ListFormat format) {
  switch (format) {
    case ListFormat::CommaLine: return "Below is a sequence of " + plural_noun(kind) + ".";
    case ListFormat::BulletList: return "Below is a bulleted list of " + plural_noun(kind) + ".";
    case ListFormat::NumberedList: return "Below is a numbered list of " + plural_noun(kind) + ".";
    case ListFormat::CodeBlock:
      return kind == ItemKind::CodeLine ? std::string("Below is a code block.")
                                        : "Below is a code block with one " + noun(kind) + " per line.";
  }
  return {};
}

std::string positions_phrase(int n) { return number_words(n) + (n == 1 ? " position" : " positions"); }

std::string question(const Sequence& seq, const IndexQuery& query, Phrasing phrasing) {
  const ItemKind kind = seq.items().front().kind;
  const std::string subject = subject_noun(kind);
  if (query.kind == QueryKind::Counting) {
    return "How many items are in the sequence?";
  }
  const bool forward = query.direction == Direction::Forward;
  if (query.kind == QueryKind::PositionToItem) {
    switch (phrasing) {
      case Phrasing::OrdinalFromStart:
      case Phrasing::OrdinalFromEnd:
        return "What " + subject + " is at the " + render_ordinal(query.offset, query.direction) + "?";
      case Phrasing::SecondToLastStyle:
        return "What is the " + render_ordinal(query.offset, Direction::Backward, true) + " " + noun(kind) + "?";
      case Phrasing::RelationalBeforeAfter:
        return "What " + subject + " is " + positions_phrase(query.offset) + (forward ? " after " : " before ") +
               seq.at(query.anchor.position).text + "?";
    }
  }
  const std::string& target = query.target->text;
  switch (phrasing) {
    case Phrasing::OrdinalFromStart:
      return "At what position from the beginning is " + target + "? Count the first " + noun(kind) +
             " as position 1.";
    case Phrasing::OrdinalFromEnd:
      return "At what position from the end is " + target + "? Count the last " + noun(kind) +
             " as position 1.";
    case Phrasing::RelationalBeforeAfter:
      return "How many positions " + std::string(forward ? "after " : "before ") +
             seq.at(query.anchor.position).text + " is " + target + "?";
    case Phrasing::SecondToLastStyle:
      break;
  }
  throw Error(ErrorCode::IncompatibleVariant, "phrasing cannot express this query");
}

std::string instruction(const IndexQuery& query, ItemKind kind, const PromptVariant& variant) {
  if (!variant.answer_instruction.empty()) return variant.answer_instruction;
  const std::string what = query.kind == QueryKind::PositionToItem ? noun(kind) : std::string("number");
  if (variant.answer_style == AnswerStyle::Framed) {
    return "Respond in the form \"" + std::string(kFramedPrefix) + "<" + what + ">.\"";
  }
  return "Respond with ONLY that single " + what + ", nothing else.";
}

std::set<std::string> item_set(const Sequence& seq) {
  auto texts = seq.texts();
  return {texts.begin(), texts.end()};
}

// Draws an operator instance of the same kind/anchor variant/direction as the
// template query over `seq`. Returns nullopt when no offset is valid.
std::optional<IndexQuery> sample_like(const IndexQuery& like, const Sequence& seq, Rng& stream) {
  const int length = seq.length();
  if (like.kind == QueryKind::Counting) return IndexQuery::counting();
  Anchor anchor = Anchor::endpoint();
  if (like.anchor.kind == AnchorKind::Relative) {
    std::vector<int> anchors;
    for (int r = 1; r <= length; ++r) {
      if (!valid_offsets(Anchor::relative(r), like.direction, length).empty()) anchors.push_back(r);
    }
    if (anchors.empty()) return std::nullopt;
    anchor = Anchor::relative(stream.choice(anchors));
  }
  const auto offsets = valid_offsets(anchor, like.direction, length);
  if (offsets.empty()) return std::nullopt;
  auto query = IndexQuery::position_to_item(anchor, like.direction, stream.choice(offsets));
  if (like.kind == QueryKind::ItemToPosition) query = invert_query(seq, query);
  return query;
}

}  // namespace

std::string PromptVariant::id() const {
  std::string out = std::string(to_string(list_format)) + "." + std::string(to_string(phrasing)) + "." +
                    std::string(to_string(answer_style));
  if (!answer_instruction.empty()) out += ".custom";
  return out;
}

std::string Condition::id() const {
  std::string out;
  switch (task) {
    case TaskKind::PositionToItem: out = "p2i"; break;
    case TaskKind::ItemToPosition: out = "i2p"; break;
    case TaskKind::Counting: out = "count"; break;
    case TaskKind::PyIndex: return "pyindex" + (category.empty() ? std::string() : "_" + category);
  }
  if (task != TaskKind::Counting) {
    out += anchor == AnchorKind::Endpoint ? "_end" : "_rel";
    out += direction == Direction::Forward ? "_fwd" : "_bwd";
  }
  out += "_" + std::string(to_string(item_kind)) + "_L" + std::to_string(length);
  if (!variant.empty()) out += "_" + variant;
  return out;
}

std::vector<Phrasing> compatible_phrasings(const IndexQuery& query) {
  if (query.kind == QueryKind::Counting) {
    return {Phrasing::OrdinalFromStart, Phrasing::OrdinalFromEnd, Phrasing::SecondToLastStyle,
            Phrasing::RelationalBeforeAfter};
  }
  if (query.anchor.kind == AnchorKind::Relative) return {Phrasing::RelationalBeforeAfter};
  if (query.direction == Direction::Forward) return {Phrasing::OrdinalFromStart};
  if (query.kind == QueryKind::PositionToItem) return {Phrasing::OrdinalFromEnd, Phrasing::SecondToLastStyle};
  return {Phrasing::OrdinalFromEnd};
}

bool is_compatible(const PromptVariant& variant, const IndexQuery& query) {
  const auto allowed = compatible_phrasings(query);
  return std::find(allowed.begin(), allowed.end(), variant.phrasing) != allowed.end();
}

PromptVariant default_variant(const IndexQuery& query, ItemKind kind) {
  PromptVariant variant;
  variant.phrasing = compatible_phrasings(query).front();
  switch (kind) {
    case ItemKind::Letter:
    case ItemKind::Word: variant.list_format = ListFormat::CommaLine; break;
    case ItemKind::CodeLine: variant.list_format = ListFormat::CodeBlock; break;
    case ItemKind::Generic: variant.list_format = ListFormat::BulletList; break;
  }
  return variant;
}

std::string number_words(int n) {
  static const std::array<const char*, 20> kOnes = {
      "zero",    "one",     "two",       "three",    "four",     "five",    "six",
      "seven",   "eight",   "nine",      "ten",      "eleven",   "twelve",  "thirteen",
      "fourteen", "fifteen", "sixteen", "seventeen", "eighteen", "nineteen"};
  static const std::array<const char*, 10> kTens = {"",      "",      "twenty",  "thirty", "forty",
                                                    "fifty", "sixty", "seventy", "eighty", "ninety"};
  if (n >= 0 && n < 20) return kOnes[static_cast<std::size_t>(n)];
  if (n >= 20 && n < 100) {
    std::string out = kTens[static_cast<std::size_t>(n / 10)];
    if (n % 10 != 0) out += std::string("-") + kOnes[static_cast<std::size_t>(n % 10)];
    return out;
  }
  return std::to_string(n);
}

std::string render_ordinal(int n, Direction direction, bool to_last_style) {
  if (n < 1) {
    throw Error(ErrorCode::InvalidArgument, "ordinal needs n >= 1");
  }
  if (direction == Direction::Backward && to_last_style) {
    return n == 1 ? std::string("last") : ordinal_word(n) + "-to-last";
  }
  return std::to_string(n) + ordinal_suffix(n) +
         (direction == Direction::Forward ? " position from the beginning" : " position from the end");
}

std::string render_list(const Sequence& seq, ListFormat format) {
  std::string out;
  const auto items = seq.items();
  switch (format) {
    case ListFormat::CommaLine:
      for (std::size_t i = 0; i < items.size(); ++i) {
        if (i > 0) out += ", ";
        out += items[i].text;
      }
      out += ".";
      break;
    case ListFormat::BulletList:
      for (std::size_t i = 0; i < items.size(); ++i) {
        if (i > 0) out += "\n";
        out += "- " + items[i].text;
      }
      break;
    case ListFormat::NumberedList:
      for (std::size_t i = 0; i < items.size(); ++i) {
        if (i > 0) out += "\n";
        out += std::to_string(i + 1) + ". " + items[i].text;
      }
      break;
    case ListFormat::CodeBlock:
      out = "```\n";
      for (const auto& item : items) out += item.text + "\n";
      out += "```";
      break;
  }
  return out;
}

std::string render_question_turn(const Sequence& seq, const IndexQuery& query, const PromptVariant& variant) {
  if (!is_compatible(variant, query)) {
    throw Error(ErrorCode::IncompatibleVariant, "phrasing '" + std::string(to_string(variant.phrasing)) +
                                                    "' cannot express a " + std::string(to_string(query.kind)) +
                                                    " " + std::string(to_string(query.anchor.kind)) + " " +
                                                    std::string(to_string(query.direction)) + " query");
  }
  // Validates the query against the sequence (OutOfRange / TargetNotFound).
  gold_answer(seq, query);
  const ItemKind kind = seq.items().front().kind;
  return preamble(kind, variant.list_format) + " " + question(seq, query, variant.phrasing) + "\n" +
         instruction(query, kind, variant) + "\n\n" + render_list(seq, variant.list_format);
}

std::string render_followup_question(const Sequence& seq, const IndexQuery& query, const PromptVariant& variant) {
  if (!is_compatible(variant, query)) {
    throw Error(ErrorCode::IncompatibleVariant, "phrasing cannot express this query");
  }
  gold_answer(seq, query);
  const ItemKind kind = seq.items().front().kind;
  return question(seq, query, variant.phrasing) + "\n" + instruction(query, kind, variant);
}

std::string_view framed_answer_prefix() { return kFramedPrefix; }

std::string render_answer_turn(const GoldAnswer& gold, AnswerStyle style) {
  const std::string text = answer_text(gold);
  return style == AnswerStyle::Framed ? std::string(kFramedPrefix) + text + "." : text;
}

PromptInstance render_prompt(const Sequence& seq, const IndexQuery& query, const PromptVariant& variant,
                             const ItemPool& demo_pool, Rng& demo_stream) {
  const auto gold = gold_answer(seq, query);
  const std::string test_turn = render_question_turn(seq, query, variant);
  const int length = seq.length();

  PromptInstance prompt;
  std::vector<std::set<std::string>> used = {item_set(seq)};
  std::vector<std::vector<std::string>> used_ordered = {seq.texts()};
  for (int d = 0; d < kDemonstrationCount; ++d) {
    std::optional<Sequence> demo_seq;
    std::optional<IndexQuery> demo_query;
    for (int attempt = 0; attempt < kDemoResampleBudget; ++attempt) {
      int demo_length = length;
      if (query.kind == QueryKind::Counting) {
        // Independent lengths so the demonstrations do not reveal the test count.
        demo_length = static_cast<int>(demo_stream.uniform_int(1, std::min(demo_pool.size(), std::max(2 * length, 2))));
      }
      auto candidate = sample_sequence(demo_pool, demo_length, demo_stream);
      const auto candidate_set = item_set(candidate);
      const bool set_fresh = std::none_of(used.begin(), used.end(), [&](const auto& s) { return s == candidate_set; });
      const auto candidate_texts = candidate.texts();
      const bool order_fresh = std::none_of(used_ordered.begin(), used_ordered.end(),
                                            [&](const auto& s) { return s == candidate_texts; });
      // Fall back to ordered distinctness only when the pool cannot supply
      // fresh item sets (e.g. L equal to the pool size).
      if (!set_fresh && (attempt < kDemoResampleBudget / 2 || !order_fresh)) continue;
      auto candidate_query = sample_like(query, candidate, demo_stream);
      if (!candidate_query) continue;
      demo_seq = std::move(candidate);
      demo_query = std::move(candidate_query);
      break;
    }
    if (!demo_seq) {
      throw Error(ErrorCode::PoolTooSmall, "cannot draw distinct demonstration sequences from pool '" +
                                               demo_pool.name + "'");
    }
    used.push_back(item_set(*demo_seq));
    used_ordered.push_back(demo_seq->texts());
    auto demo_gold = gold_answer(*demo_seq, *demo_query);
    prompt.messages.push_back({Role::User, render_question_turn(*demo_seq, *demo_query, variant)});
    prompt.messages.push_back({Role::Assistant, render_answer_turn(demo_gold, variant.answer_style)});
    prompt.demos.push_back(Demonstration{std::move(*demo_seq), std::move(*demo_query), std::move(demo_gold)});
  }
  prompt.messages.push_back({Role::User, test_turn});

  prompt.sequence = seq;
  prompt.test_query = query;
  prompt.gold = gold;
  prompt.gold_text = answer_text(gold);
  prompt.answer_space = query.kind == QueryKind::PositionToItem ? AnswerSpace::Item : AnswerSpace::Integer;
  prompt.queried_value = query.kind == QueryKind::Counting ? length : query.offset;
  if (query.kind == QueryKind::ItemToPosition) {
    prompt.queried_value = std::get<OffsetAnswer>(gold).offset;
  }
  prompt.condition.task = task_kind_for(query.kind);
  prompt.condition.anchor = query.anchor.kind;
  prompt.condition.direction = query.direction;
  prompt.condition.item_kind = seq.items().front().kind;
  prompt.condition.length = length;
  prompt.condition.variant = variant.id();
  return prompt;
}

PromptInstance render_code_value_prompt(std::string_view snippet, std::int64_t gold, Condition condition) {
  PromptInstance prompt;
  prompt.messages.push_back(
      {Role::User, "Below is a Python snippet. What value does the final expression evaluate to?\n"
                   "Respond with ONLY that value, nothing else.\n\n```python\n" +
                       std::string(snippet) + "\n```"});
  prompt.answer_space = AnswerSpace::Integer;
  prompt.gold_text = std::to_string(gold);
  condition.task = TaskKind::PyIndex;
  prompt.condition = std::move(condition);
  return prompt;
}

std::string test_instruction_text(const PromptInstance& prompt) {
  if (prompt.messages.empty()) return {};
  const std::string& last = prompt.messages.back().content;
  const auto cut = last.find("\n\n");
  return cut == std::string::npos ? last : last.substr(0, cut);
}

std::string prompt_hash(const std::vector<ChatMessage>& messages) {
  nlohmann::json array = nlohmann::json::array();
  for (const auto& message : messages) {
    array.push_back({{"role", to_string(message.role)}, {"content", message.content}});
  }
  return sha256_hex(array.dump());
}

TaskKind task_kind_for(QueryKind kind) {
  switch (kind) {
    case QueryKind::PositionToItem: return TaskKind::PositionToItem;
    case QueryKind::ItemToPosition: return TaskKind::ItemToPosition;
    case QueryKind::Counting: return TaskKind::Counting;
  }
  return TaskKind::Counting;
}

std::string_view to_string(ListFormat format) {
  switch (format) {
    case ListFormat::CommaLine: return "comma_line";
    case ListFormat::BulletList: return "bullet_list";
    case ListFormat::NumberedList: return "numbered_list";
    case ListFormat::CodeBlock: return "code_block";
  }
  return "comma_line";
}

std::string_view to_string(Phrasing phrasing) {
  switch (phrasing) {
    case Phrasing::OrdinalFromStart: return "ordinal_from_start";
    case Phrasing::OrdinalFromEnd: return "ordinal_from_end";
    case Phrasing::SecondToLastStyle: return "second_to_last_style";
    case Phrasing::RelationalBeforeAfter: return "relational_before_after";
  }
  return "ordinal_from_start";
}

std::string_view to_string(AnswerStyle style) { return style == AnswerStyle::Bare ? "bare" : "framed"; }

std::string_view to_string(Role role) {
  switch (role) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
  }
  return "user";
}

std::string_view to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::PositionToItem: return "position_to_item";
    case TaskKind::ItemToPosition: return "item_to_position";
    case TaskKind::Counting: return "counting";
    case TaskKind::PyIndex: return "pyindex";
  }
  return "counting";
}

std::string_view to_string(AnswerSpace space) { return space == AnswerSpace::Item ? "item" : "integer"; }

ListFormat parse_list_format(std::string_view text) {
  for (auto f : {ListFormat::CommaLine, ListFormat::BulletList, ListFormat::NumberedList, ListFormat::CodeBlock}) {
    if (to_string(f) == text) return f;
  }
  throw Error(ErrorCode::Parse, "unknown list format '" + std::string(text) + "'");
}

Phrasing parse_phrasing(std::string_view text) {
  for (auto p : {Phrasing::OrdinalFromStart, Phrasing::OrdinalFromEnd, Phrasing::SecondToLastStyle,
                 Phrasing::RelationalBeforeAfter}) {
    if (to_string(p) == text) return p;
  }
  throw Error(ErrorCode::Parse, "unknown phrasing '" + std::string(text) + "'");
}

AnswerStyle parse_answer_style(std::string_view text) {
  if (text == "bare") return AnswerStyle::Bare;
  if (text == "framed") return AnswerStyle::Framed;
  throw Error(ErrorCode::Parse, "unknown answer style '" + std::string(text) + "'");
}

Role parse_role(std::string_view text) {
  if (text == "system") return Role::System;
  if (text == "user" || text == "human") return Role::User;
  if (text == "assistant" || text == "gpt") return Role::Assistant;
  throw Error(ErrorCode::Parse, "unknown role '" + std::string(text) + "'");
}

TaskKind parse_task_kind(std::string_view text) {
  for (auto k : {TaskKind::PositionToItem, TaskKind::ItemToPosition, TaskKind::Counting, TaskKind::PyIndex}) {
    if (to_string(k) == text) return k;
  }
  throw Error(ErrorCode::Parse, "unknown task '" + std::string(text) + "'");
}

AnswerSpace parse_answer_space(std::string_view text) {
  if (text == "item") return AnswerSpace::Item;
  if (text == "integer") return AnswerSpace::Integer;
  throw Error(ErrorCode::Parse, "unknown answer space '" + std::string(text) + "'");
}

}  // namespace poskit
