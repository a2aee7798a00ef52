#include <doctest.h>

#include <algorithm>
#include <set>

#include "poskit/prompting.hpp"
#include "poskit/sequence_gen.hpp"
#include "support/test_util.hpp"

using namespace poskit;

namespace {

Sequence letters(const std::string& s) {
  std::vector<Item> items;
  for (char c : s) items.push_back(make_item(std::string(1, c), ItemKind::Letter));
  return Sequence(items);
}

std::multiset<std::string> multiset_of(const Sequence& s) {
  const auto t = s.texts();
  return {t.begin(), t.end()};
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

std::vector<IndexQuery> sample_queries(const Sequence& seq) {
  std::vector<IndexQuery> out;
  const int L = seq.length();
  for (auto d : {Direction::Forward, Direction::Backward}) {
    for (int n : valid_offsets(Anchor::endpoint(), d, L)) {
      const auto q = IndexQuery::position_to_item(Anchor::endpoint(), d, n);
      out.push_back(q);
      out.push_back(invert_query(seq, q));
    }
    for (int r = 1; r <= L; ++r) {
      for (int n : valid_offsets(Anchor::relative(r), d, L)) {
        const auto q = IndexQuery::position_to_item(Anchor::relative(r), d, n);
        out.push_back(q);
        out.push_back(invert_query(seq, q));
      }
    }
  }
  out.push_back(IndexQuery::counting());
  return out;
}

}  // namespace

TEST_CASE("render_ordinal examples") {
  CHECK(render_ordinal(3, Direction::Forward) == "3rd position from the beginning");
  CHECK(render_ordinal(2, Direction::Backward) == "2nd position from the end");
  CHECK(render_ordinal(11, Direction::Forward) == "11th position from the beginning");
  CHECK(render_ordinal(12, Direction::Forward) == "12th position from the beginning");
  CHECK(render_ordinal(13, Direction::Backward) == "13th position from the end");
  CHECK(render_ordinal(21, Direction::Forward) == "21st position from the beginning");
  CHECK(render_ordinal(22, Direction::Forward) == "22nd position from the beginning");
  CHECK(render_ordinal(1, Direction::Backward, true) == "last");
  CHECK(render_ordinal(2, Direction::Backward, true) == "second-to-last");
  CHECK(render_ordinal(3, Direction::Backward, true) == "third-to-last");
}

TEST_CASE("number_words") {
  CHECK(number_words(2) == "two");
  CHECK(number_words(13) == "thirteen");
  CHECK(number_words(21) == "twenty-one");
  CHECK(number_words(40) == "forty");
  CHECK(number_words(100) == "100");
}

TEST_CASE("second-to-last prompt from the worked example") {
  Rng demos(1);
  PromptVariant v;
  v.phrasing = Phrasing::SecondToLastStyle;
  const auto p = render_prompt(letters("XVZY"), IndexQuery::position_to_item(Anchor::endpoint(), Direction::Backward, 2),
                               v, builtin_pool("letters"), demos);
  const auto& last = p.messages.back();
  CHECK(last.role == Role::User);
  CHECK(contains(last.content, "second-to-last letter"));
  CHECK(contains(last.content, "X, V, Z, Y."));
  CHECK(p.gold_text == "Z");
  CHECK(p.queried_value == 2);
  CHECK(p.answer_space == AnswerSpace::Item);
  CHECK(p.messages.size() == 2 * kDemonstrationCount + 1);
}

TEST_CASE("counting and relative phrasing") {
  Rng demos(2);
  const auto c = render_prompt(letters("XVZY"), IndexQuery::counting(),
                               default_variant(IndexQuery::counting(), ItemKind::Letter), builtin_pool("letters"), demos);
  CHECK(contains(c.messages.back().content, "How many items are in the sequence?"));
  CHECK(c.gold_text == "4");
  CHECK(c.answer_space == AnswerSpace::Integer);

  PromptVariant rv;
  rv.phrasing = Phrasing::RelationalBeforeAfter;
  const auto q = IndexQuery::position_to_item(Anchor::relative(2), Direction::Forward, 2);
  CHECK(contains(render_question_turn(letters("XVZYQ"), q, rv), "What item is two positions after V?"));
}

TEST_CASE("list formats") {
  const auto abc = letters("ABC");
  CHECK(render_list(abc, ListFormat::CommaLine) == "A, B, C.");
  CHECK(render_list(abc, ListFormat::BulletList) == "- A\n- B\n- C");
  CHECK(render_list(abc, ListFormat::NumberedList) == "1. A\n2. B\n3. C");
  CHECK(render_list(abc, ListFormat::CodeBlock) == "```\nA\nB\nC\n```");
}

TEST_CASE("framed answers") {
  CHECK(render_answer_turn(OffsetAnswer{3}, AnswerStyle::Framed) == "The answer is 3.");
  CHECK(render_answer_turn(ItemAnswer{make_item("Z", ItemKind::Letter)}, AnswerStyle::Bare) == "Z");
  CHECK(framed_answer_prefix() == "The answer is ");
}

TEST_CASE("incompatible phrasing is rejected") {
  Rng demos(3);
  PromptVariant v;
  v.phrasing = Phrasing::OrdinalFromEnd;
  CHECK_ERROR_CODE(render_prompt(letters("XVZY"), IndexQuery::position_to_item(Anchor::endpoint(), Direction::Forward, 1),
                                 v, builtin_pool("letters"), demos),
                   ErrorCode::IncompatibleVariant);
  for (const auto& q : sample_queries(letters("ABCDE"))) {
    for (auto ph : compatible_phrasings(q)) {
      PromptVariant ok;
      ok.phrasing = ph;
      CHECK(is_compatible(ok, q));
    }
    CHECK(is_compatible(default_variant(q, ItemKind::Letter), q));
  }
}

TEST_CASE("demonstrations are correct, independent and deterministic") {
  const auto& pool = builtin_pool("fruits");
  Rng seq_stream(77);
  for (int trial = 0; trial < 20; ++trial) {
    const auto seq = sample_sequence(pool, 3 + trial % 8, seq_stream);
    for (const auto& q : sample_queries(seq)) {
      for (auto ph : compatible_phrasings(q)) {
        for (auto style : {AnswerStyle::Bare, AnswerStyle::Framed}) {
          PromptVariant v;
          v.phrasing = ph;
          v.answer_style = style;
          v.list_format = static_cast<ListFormat>(trial % 4);
          Rng a(derive_seed(5, {trial}));
          Rng b(derive_seed(5, {trial}));
          const auto p = render_prompt(seq, q, v, pool, a);
          CHECK(p == render_prompt(seq, q, v, pool, b));

          REQUIRE(p.demos.size() == kDemonstrationCount);
          std::set<std::multiset<std::string>> seen = {multiset_of(seq)};
          for (const auto& d : p.demos) {
            CHECK(gold_answer(d.sequence, d.query) == d.answer);
            CHECK(d.query.kind == q.kind);
            CHECK(d.query.anchor.kind == q.anchor.kind);
            CHECK(d.query.direction == q.direction);
            CHECK(seen.insert(multiset_of(d.sequence)).second);
          }
          for (int k = 0; k < kDemonstrationCount; ++k) {
            CHECK(p.messages[2 * k].role == Role::User);
            CHECK(p.messages[2 * k + 1].role == Role::Assistant);
            CHECK(p.messages[2 * k + 1].content == render_answer_turn(p.demos[k].answer, style));
          }
          CHECK(p.gold_text == answer_text(gold_answer(seq, q)));
          if (q.kind != QueryKind::Counting) {
            CHECK_FALSE(contains(test_instruction_text(p), p.gold_text + "?"));
            if (p.answer_space == AnswerSpace::Item) {
              // The gold item may only appear inside the list, never in the question.
              const auto instruction = test_instruction_text(p);
              CHECK_FALSE(contains(instruction, " " + p.gold_text + " "));
              CHECK_FALSE(contains(instruction, " " + p.gold_text + "?"));
            }
          }
        }
      }
    }
  }
}

TEST_CASE("prompt hash tracks content") {
  std::vector<ChatMessage> a = {{Role::User, "hi"}};
  std::vector<ChatMessage> b = {{Role::User, "hi "}};
  std::vector<ChatMessage> c = {{Role::Assistant, "hi"}};
  CHECK(prompt_hash(a) == prompt_hash(a));
  CHECK(prompt_hash(a) != prompt_hash(b));
  CHECK(prompt_hash(a) != prompt_hash(c));
  CHECK(prompt_hash(a).size() == 64);
}

TEST_CASE("condition ids") {
  Rng demos(4);
  const auto p = render_prompt(letters("XVZY"), IndexQuery::position_to_item(Anchor::endpoint(), Direction::Backward, 1),
                               default_variant(IndexQuery::position_to_item(Anchor::endpoint(), Direction::Backward, 1),
                                               ItemKind::Letter),
                               builtin_pool("letters"), demos);
  CHECK(p.condition.id() == "p2i_end_bwd_letter_L4_comma_line.ordinal_from_end.bare");
}
