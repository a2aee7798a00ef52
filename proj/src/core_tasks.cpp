#include "poskit/core_tasks.hpp"

#include <algorithm>
#include <unordered_set>

#include "poskit/error.hpp"

namespace poskit {

Item make_item(std::string text, ItemKind kind) {
  if (text.empty()) {
    throw Error(ErrorCode::InvalidArgument, "item text must be non-empty");
  }
  if (kind == ItemKind::Letter && (text.size() != 1 || text[0] < 'A' || text[0] > 'Z')) {
    throw Error(ErrorCode::InvalidArgument, "letter item must be a single uppercase A-Z: '" + text + "'");
  }
  return Item{std::move(text), kind};
}

Sequence::Sequence(std::vector<Item> items) : items_(std::move(items)) {
  if (items_.empty()) {
    throw Error(ErrorCode::InvalidArgument, "sequence must contain at least one item");
  }
  std::unordered_set<std::string_view> seen;
  for (const auto& item : items_) {
    if (item.text.empty()) {
      throw Error(ErrorCode::InvalidArgument, "sequence item text must be non-empty");
    }
    if (!seen.insert(item.text).second) {
      throw Error(ErrorCode::InvalidArgument, "sequence items must be pairwise distinct: '" + item.text + "'");
    }
  }
}

const Item& Sequence::at(int position) const {
  if (position < 1 || position > length()) {
    throw Error(ErrorCode::OutOfRange, "position " + std::to_string(position) + " outside [1, " +
                                           std::to_string(length()) + "]");
  }
  return items_[static_cast<std::size_t>(position - 1)];
}

std::optional<int> Sequence::position_of(std::string_view text) const {
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (items_[i].text == text) {
      return static_cast<int>(i) + 1;
    }
  }
  return std::nullopt;
}

std::vector<std::string> Sequence::texts() const {
  std::vector<std::string> out;
  out.reserve(items_.size());
  for (const auto& item : items_) {
    out.push_back(item.text);
  }
  return out;
}

IndexQuery IndexQuery::position_to_item(Anchor anchor, Direction direction, int offset) {
  return IndexQuery{QueryKind::PositionToItem, anchor, direction, offset, std::nullopt};
}

IndexQuery IndexQuery::item_to_position(Anchor anchor, Direction direction, Item target) {
  // The offset is the unknown; carried as 0 until resolved.
  return IndexQuery{QueryKind::ItemToPosition, anchor, direction, 0, std::move(target)};
}

IndexQuery IndexQuery::counting() {
  return IndexQuery{QueryKind::Counting, Anchor::endpoint(), Direction::Forward, 0, std::nullopt};
}

std::string answer_text(const GoldAnswer& gold) {
  return std::visit(
      [](const auto& answer) -> std::string {
        using T = std::decay_t<decltype(answer)>;
        if constexpr (std::is_same_v<T, ItemAnswer>) {
          return answer.item.text;
        } else if constexpr (std::is_same_v<T, OffsetAnswer>) {
          return std::to_string(answer.offset);
        } else {
          return std::to_string(answer.count);
        }
      },
      gold);
}

namespace {

void check_anchor(const Anchor& anchor, int length) {
  if (length < 1) {
    throw Error(ErrorCode::InvalidArgument, "sequence length must be positive");
  }
  if (anchor.kind == AnchorKind::Relative && (anchor.position < 1 || anchor.position > length)) {
    throw Error(ErrorCode::InvalidArgument, "relative anchor " + std::to_string(anchor.position) +
                                                " outside [1, " + std::to_string(length) + "]");
  }
}

int unchecked_index(const Anchor& anchor, Direction direction, int n, int length) {
  if (anchor.kind == AnchorKind::Endpoint) {
    return direction == Direction::Forward ? n : length - n + 1;
  }
  return direction == Direction::Forward ? anchor.position + n : anchor.position - n;
}

}  // namespace

int resolve_position(const Anchor& anchor, Direction direction, int n, int length) {
  check_anchor(anchor, length);
  if (n < 1) {
    throw Error(ErrorCode::InvalidArgument, "offset must be >= 1, got " + std::to_string(n));
  }
  const int index = unchecked_index(anchor, direction, n, length);
  if (index < 1 || index > length) {
    throw Error(ErrorCode::OutOfRange, "resolved index " + std::to_string(index) + " outside [1, " +
                                           std::to_string(length) + "]");
  }
  return index;
}

std::vector<int> valid_offsets(const Anchor& anchor, Direction direction, int length) {
  check_anchor(anchor, length);
  int max_n = length;
  if (anchor.kind == AnchorKind::Relative) {
    max_n = direction == Direction::Forward ? length - anchor.position : anchor.position - 1;
  }
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(std::max(max_n, 0)));
  for (int n = 1; n <= max_n; ++n) {
    out.push_back(n);
  }
  return out;
}

GoldAnswer gold_answer(const Sequence& seq, const IndexQuery& query) {
  const int length = seq.length();
  switch (query.kind) {
    case QueryKind::Counting:
      return CountAnswer{length};
    case QueryKind::PositionToItem:
      return ItemAnswer{seq.at(resolve_position(query.anchor, query.direction, query.offset, length))};
    case QueryKind::ItemToPosition: {
      if (!query.target) {
        throw Error(ErrorCode::InvalidArgument, "item_to_position query without target");
      }
      check_anchor(query.anchor, length);
      const auto target = seq.position_of(query.target->text);
      if (!target) {
        throw Error(ErrorCode::TargetNotFound, "target '" + query.target->text + "' not in sequence");
      }
      int n = 0;
      if (query.anchor.kind == AnchorKind::Endpoint) {
        n = query.direction == Direction::Forward ? *target : length - *target + 1;
      } else {
        n = query.direction == Direction::Forward ? *target - query.anchor.position
                                                  : query.anchor.position - *target;
      }
      if (n < 1) {
        throw Error(ErrorCode::OutOfRange, "target '" + query.target->text + "' is not reachable " +
                                               "from the anchor in the queried direction");
      }
      return OffsetAnswer{n};
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown query kind");
}

IndexQuery invert_query(const Sequence& seq, const IndexQuery& query) {
  if (query.kind != QueryKind::PositionToItem) {
    throw Error(ErrorCode::InvalidArgument, "invert_query expects a position_to_item query");
  }
  const auto gold = std::get<ItemAnswer>(gold_answer(seq, query));
  auto inverted = IndexQuery::item_to_position(query.anchor, query.direction, gold.item);
  inverted.offset = query.offset;  // metadata: the offset this query is expected to recover
  return inverted;
}

std::string_view to_string(ItemKind kind) {
  switch (kind) {
    case ItemKind::Letter: return "letter";
    case ItemKind::Word: return "word";
    case ItemKind::CodeLine: return "code_line";
    case ItemKind::Generic: return "generic";
  }
  return "generic";
}

std::string_view to_string(AnchorKind kind) {
  return kind == AnchorKind::Endpoint ? "endpoint" : "relative";
}

std::string_view to_string(Direction direction) {
  return direction == Direction::Forward ? "forward" : "backward";
}

std::string_view to_string(QueryKind kind) {
  switch (kind) {
    case QueryKind::PositionToItem: return "position_to_item";
    case QueryKind::ItemToPosition: return "item_to_position";
    case QueryKind::Counting: return "counting";
  }
  return "counting";
}

ItemKind parse_item_kind(std::string_view text) {
  if (text == "letter") return ItemKind::Letter;
  if (text == "word") return ItemKind::Word;
  if (text == "code_line") return ItemKind::CodeLine;
  if (text == "generic") return ItemKind::Generic;
  throw Error(ErrorCode::Parse, "unknown item kind '" + std::string(text) + "'");
}

AnchorKind parse_anchor_kind(std::string_view text) {
  if (text == "endpoint") return AnchorKind::Endpoint;
  if (text == "relative") return AnchorKind::Relative;
  throw Error(ErrorCode::Parse, "unknown anchor '" + std::string(text) + "'");
}

Direction parse_direction(std::string_view text) {
  if (text == "forward") return Direction::Forward;
  if (text == "backward") return Direction::Backward;
  throw Error(ErrorCode::Parse, "unknown direction '" + std::string(text) + "'");
}

QueryKind parse_query_kind(std::string_view text) {
  if (text == "position_to_item") return QueryKind::PositionToItem;
  if (text == "item_to_position") return QueryKind::ItemToPosition;
  if (text == "counting") return QueryKind::Counting;
  throw Error(ErrorCode::Parse, "unknown query kind '" + std::string(text) + "'");
}

}  // namespace poskit
