#pragma once

// Operator family over ordered sequences: endpoint and relative anchors,
// forward and backward offsets, and the two query directions that share one
// operator (position -> item, item -> position), plus the counting control.
//
// Positions and offsets are 1-based throughout.

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace poskit {

enum class ItemKind { Letter, Word, CodeLine, Generic };

struct Item {
  std::string text;
  ItemKind kind = ItemKind::Generic;

  friend bool operator==(const Item&, const Item&) = default;
};

/// Validating constructor: text must be non-empty and letters must be a
/// single character A-Z.
Item make_item(std::string text, ItemKind kind);

/// Ordered list of pairwise-distinct items, L >= 1.
class Sequence {
 public:
  explicit Sequence(std::vector<Item> items);

  int length() const { return static_cast<int>(items_.size()); }
  std::span<const Item> items() const { return items_; }

  /// 1-based access.
  const Item& at(int position) const;

  /// 1-based position of the item with matching text, if present.
  std::optional<int> position_of(std::string_view text) const;

  std::vector<std::string> texts() const;

  friend bool operator==(const Sequence&, const Sequence&) = default;

 private:
  std::vector<Item> items_;
};

enum class AnchorKind { Endpoint, Relative };
enum class Direction { Forward, Backward };
enum class QueryKind { PositionToItem, ItemToPosition, Counting };

struct Anchor {
  AnchorKind kind = AnchorKind::Endpoint;
  int position = 0;  // r, meaningful only for Relative

  static Anchor endpoint() { return {AnchorKind::Endpoint, 0}; }
  static Anchor relative(int r) { return {AnchorKind::Relative, r}; }

  friend bool operator==(const Anchor&, const Anchor&) = default;
};

struct IndexQuery {
  QueryKind kind = QueryKind::PositionToItem;
  Anchor anchor;
  Direction direction = Direction::Forward;
  int offset = 1;
  std::optional<Item> target;  // present iff kind == ItemToPosition

  static IndexQuery position_to_item(Anchor anchor, Direction direction, int offset);
  static IndexQuery item_to_position(Anchor anchor, Direction direction, Item target);
  static IndexQuery counting();

  friend bool operator==(const IndexQuery&, const IndexQuery&) = default;
};

struct ItemAnswer {
  Item item;
  friend bool operator==(const ItemAnswer&, const ItemAnswer&) = default;
};
struct OffsetAnswer {
  int offset;
  friend bool operator==(const OffsetAnswer&, const OffsetAnswer&) = default;
};
struct CountAnswer {
  int count;
  friend bool operator==(const CountAnswer&, const CountAnswer&) = default;
};

using GoldAnswer = std::variant<ItemAnswer, OffsetAnswer, CountAnswer>;

/// Canonical surface form of a gold answer ("Z", "3").
std::string answer_text(const GoldAnswer& gold);

/// Maps (anchor, direction, n) to an absolute 1-based index over a sequence
/// of length L. Throws OutOfRange when the index leaves [1, L].
int resolve_position(const Anchor& anchor, Direction direction, int n, int length);

/// All n >= 1 for which resolve_position succeeds, ascending.
std::vector<int> valid_offsets(const Anchor& anchor, Direction direction, int length);

GoldAnswer gold_answer(const Sequence& seq, const IndexQuery& query);

/// Turns a position->item query into the item->position query over the same
/// operator whose gold answer is the original offset.
IndexQuery invert_query(const Sequence& seq, const IndexQuery& query);

std::string_view to_string(ItemKind kind);
std::string_view to_string(AnchorKind kind);
std::string_view to_string(Direction direction);
std::string_view to_string(QueryKind kind);

ItemKind parse_item_kind(std::string_view text);
AnchorKind parse_anchor_kind(std::string_view text);
Direction parse_direction(std::string_view text);
QueryKind parse_query_kind(std::string_view text);

}  // namespace poskit
