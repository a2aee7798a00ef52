#pragma once

// Evaluation condition grid and per-condition prompt sets.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "poskit/prompting.hpp"

namespace poskit {

struct GridCondition {
  QueryKind kind = QueryKind::PositionToItem;
  AnchorKind anchor = AnchorKind::Endpoint;
  Direction direction = Direction::Forward;
  ItemKind item_kind = ItemKind::Letter;
  int length = 0;

  /// Condition id without the prompt variant, e.g. "p2i_end_bwd_letter_L20".
  std::string id() const;

  friend bool operator==(const GridCondition&, const GridCondition&) = default;
};

struct GridSpec {
  std::vector<QueryKind> query_kinds = {QueryKind::PositionToItem, QueryKind::ItemToPosition};
  std::vector<AnchorKind> anchors = {AnchorKind::Endpoint, AnchorKind::Relative};
  std::vector<Direction> directions = {Direction::Forward, Direction::Backward};
  std::vector<ItemKind> item_kinds = {ItemKind::Letter, ItemKind::Word};
  std::vector<int> lengths = {5, 10, 20};
  bool include_counting = true;
  int sequences_per_condition = 50;
  /// When set, replaces sequences_per_condition so that every queried
  /// position receives exactly this many trials.
  std::optional<int> trials_per_position;
  std::string letter_pool = "letters";
  std::string word_pool = "fruits";
  std::optional<ListFormat> list_format;
  AnswerStyle answer_style = AnswerStyle::Bare;
  bool to_last_style = false;  // "second-to-last" wording for End- position->item
  std::uint64_t seed = 0;
};

void validate_grid(const GridSpec& spec);

/// Retrieval conditions in (kind, anchor, direction, item kind, length)
/// order, then counting conditions per (item kind, length).
std::vector<GridCondition> expand_grid(const GridSpec& spec);

/// Prompts for one condition. Each of the sequences contributes every valid
/// offset once: endpoint anchors query n = 1..L, relative anchors query
/// n = 1..L-1 with r drawn uniformly among anchors where n is valid.
/// Counting contributes one prompt per sequence. Sequences depend only on
/// (seed, item kind, L), so all conditions at one length share them.
std::vector<PromptInstance> build_condition_prompts(const GridSpec& spec, const GridCondition& condition);

const std::string& pool_for(const GridSpec& spec, ItemKind kind);

}  // namespace poskit
