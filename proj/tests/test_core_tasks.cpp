#include <doctest.h>

#include <string>
#include <vector>

#include "poskit/core_tasks.hpp"
#include "support/test_util.hpp"

using namespace poskit;

namespace {

Sequence letters(const std::string& s) {
  std::vector<Item> items;
  for (char c : s) items.push_back(make_item(std::string(1, c), ItemKind::Letter));
  return Sequence(items);
}

Sequence alphabet(int length) {
  std::string s;
  for (int i = 0; i < length; ++i) s.push_back(static_cast<char>('A' + i));
  return letters(s);
}

// Walks n steps from the start boundary, the end boundary or the anchor.
std::optional<int> scan(const Anchor& anchor, Direction direction, int n, int length) {
  int p = anchor.kind == AnchorKind::Endpoint ? (direction == Direction::Forward ? 0 : length + 1) : anchor.position;
  for (int step = 0; step < n; ++step) p += direction == Direction::Forward ? 1 : -1;
  if (p < 1 || p > length) return std::nullopt;
  return p;
}

std::vector<Anchor> anchors_for(int length) {
  std::vector<Anchor> out = {Anchor::endpoint()};
  for (int r = 1; r <= length; ++r) out.push_back(Anchor::relative(r));
  return out;
}

}  // namespace

TEST_CASE("resolve_position examples") {
  CHECK(resolve_position(Anchor::endpoint(), Direction::Backward, 2, 5) == 4);
  CHECK(resolve_position(Anchor::endpoint(), Direction::Forward, 1, 20) == 1);
  CHECK_ERROR_CODE(resolve_position(Anchor::relative(19), Direction::Forward, 2, 20), ErrorCode::OutOfRange);
  CHECK(resolve_position(Anchor::relative(5), Direction::Backward, 4, 5) == 1);
  CHECK_ERROR_CODE(resolve_position(Anchor::endpoint(), Direction::Forward, 6, 5), ErrorCode::OutOfRange);
  CHECK_ERROR_CODE(resolve_position(Anchor::endpoint(), Direction::Forward, 0, 5), ErrorCode::InvalidArgument);
}

TEST_CASE("resolve_position rejects anchors outside the sequence") {
  CHECK_ERROR_CODE(resolve_position(Anchor::relative(0), Direction::Forward, 1, 5), ErrorCode::InvalidArgument);
  CHECK_ERROR_CODE(resolve_position(Anchor::relative(6), Direction::Backward, 1, 5), ErrorCode::InvalidArgument);
}

TEST_CASE("gold_answer examples") {
  const auto xvzy = letters("XVZY");
  const auto g = gold_answer(xvzy, IndexQuery::position_to_item(Anchor::endpoint(), Direction::Backward, 2));
  REQUIRE(std::holds_alternative<ItemAnswer>(g));
  CHECK(std::get<ItemAnswer>(g).item.text == "Z");

  CHECK(std::get<CountAnswer>(gold_answer(letters("ABCDE"), IndexQuery::counting())).count == 5);

  const auto qmthk = letters("QMTHK");
  const auto q = IndexQuery::item_to_position(Anchor::relative(2), Direction::Backward, make_item("Q", ItemKind::Letter));
  CHECK(std::get<OffsetAnswer>(gold_answer(qmthk, q)).offset == 1);
}

TEST_CASE("gold_answer rejects targets absent from the sequence or on the wrong side") {
  const auto seq = letters("QMTHK");
  CHECK_ERROR_CODE(gold_answer(seq, IndexQuery::item_to_position(Anchor::endpoint(), Direction::Forward,
                                                                 make_item("Z", ItemKind::Letter))),
                   ErrorCode::TargetNotFound);
  // K lies after the anchor M, so it has no backward offset from it.
  CHECK_ERROR_CODE(gold_answer(seq, IndexQuery::item_to_position(Anchor::relative(2), Direction::Backward,
                                                                 make_item("K", ItemKind::Letter))),
                   ErrorCode::OutOfRange);
}

TEST_CASE("valid_offsets examples") {
  CHECK(valid_offsets(Anchor::endpoint(), Direction::Forward, 5) == std::vector<int>{1, 2, 3, 4, 5});
  CHECK(valid_offsets(Anchor::relative(4), Direction::Backward, 10) == std::vector<int>{1, 2, 3});
  CHECK(valid_offsets(Anchor::relative(1), Direction::Backward, 10).empty());
  CHECK(valid_offsets(Anchor::relative(10), Direction::Forward, 10).empty());
}

TEST_CASE("invert_query examples") {
  const auto abc = letters("ABC");
  const auto inv = invert_query(abc, IndexQuery::position_to_item(Anchor::endpoint(), Direction::Forward, 2));
  CHECK(inv.kind == QueryKind::ItemToPosition);
  REQUIRE(inv.target.has_value());
  CHECK(inv.target->text == "B");
  CHECK(std::get<OffsetAnswer>(gold_answer(abc, inv)).offset == 2);

  const auto xvzy = letters("XVZY");
  const auto inv2 = invert_query(xvzy, IndexQuery::position_to_item(Anchor::endpoint(), Direction::Backward, 2));
  CHECK(inv2.target->text == "Z");
  CHECK(std::get<OffsetAnswer>(gold_answer(xvzy, inv2)).offset == 2);
}

TEST_CASE("operator properties hold exhaustively for L up to 20") {
  for (int length = 1; length <= 20; ++length) {
    const auto seq = alphabet(length);
    for (int n = 1; n <= length; ++n) {
      const int fwd = resolve_position(Anchor::endpoint(), Direction::Forward, n, length);
      const int bwd = resolve_position(Anchor::endpoint(), Direction::Backward, n, length);
      CHECK(bwd == length + 1 - fwd);
    }
    for (const auto& anchor : anchors_for(length)) {
      for (auto direction : {Direction::Forward, Direction::Backward}) {
        std::vector<int> naive;
        for (int n = 1; n <= length + 1; ++n) {
          const auto expected = scan(anchor, direction, n, length);
          if (expected) {
            naive.push_back(n);
            const int p = resolve_position(anchor, direction, n, length);
            CHECK(p == *expected);
            if (anchor.kind == AnchorKind::Relative) {
              CHECK((direction == Direction::Forward ? p - anchor.position : anchor.position - p) == n);
            }
          } else {
            CHECK_ERROR_CODE(resolve_position(anchor, direction, n, length), ErrorCode::OutOfRange);
          }
        }
        CHECK(valid_offsets(anchor, direction, length) == naive);
        for (int n : naive) {
          const auto q = IndexQuery::position_to_item(anchor, direction, n);
          const auto inv = invert_query(seq, q);
          CHECK(std::get<OffsetAnswer>(gold_answer(seq, inv)).offset == n);
        }
      }
    }
    CHECK(std::get<CountAnswer>(gold_answer(seq, IndexQuery::counting())).count == length);
  }
}

TEST_CASE("sequence construction validates items") {
  CHECK_ERROR_CODE(make_item("", ItemKind::Word), ErrorCode::InvalidArgument);
  CHECK_ERROR_CODE(make_item("ab", ItemKind::Letter), ErrorCode::InvalidArgument);
  CHECK_ERROR_CODE(make_item("a", ItemKind::Letter), ErrorCode::InvalidArgument);
  CHECK_ERROR_CODE(letters("ABA"), ErrorCode::InvalidArgument);
  CHECK_ERROR_CODE(Sequence(std::vector<Item>{}), ErrorCode::InvalidArgument);
  const auto seq = letters("XYZ");
  CHECK(seq.at(3).text == "Z");
  CHECK(seq.position_of("Y") == 2);
  CHECK_FALSE(seq.position_of("Q").has_value());
  CHECK_ERROR_CODE(seq.at(4), ErrorCode::OutOfRange);
}

TEST_CASE("enum names round-trip") {
  for (auto k : {ItemKind::Letter, ItemKind::Word, ItemKind::CodeLine, ItemKind::Generic})
    CHECK(parse_item_kind(to_string(k)) == k);
  for (auto k : {AnchorKind::Endpoint, AnchorKind::Relative}) CHECK(parse_anchor_kind(to_string(k)) == k);
  for (auto d : {Direction::Forward, Direction::Backward}) CHECK(parse_direction(to_string(d)) == d);
  for (auto k : {QueryKind::PositionToItem, QueryKind::ItemToPosition, QueryKind::Counting})
    CHECK(parse_query_kind(to_string(k)) == k);
  CHECK_ERROR_CODE(parse_direction("sideways"), ErrorCode::Parse);
}
