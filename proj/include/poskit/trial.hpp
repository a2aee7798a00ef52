#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "poskit/prompting.hpp"

namespace poskit {

enum class AnswerKind { Item, Integer, Unparseable };

struct ParsedAnswer {
  AnswerKind kind = AnswerKind::Unparseable;
  std::string item;
  std::int64_t value = 0;

  static ParsedAnswer item_answer(std::string text) { return {AnswerKind::Item, std::move(text), 0}; }
  static ParsedAnswer integer_answer(std::int64_t v) { return {AnswerKind::Integer, {}, v}; }
  static ParsedAnswer unparseable() { return {}; }

  bool parsed() const { return kind != AnswerKind::Unparseable; }

  /// Surface form; empty for Unparseable.
  std::string text() const;

  friend bool operator==(const ParsedAnswer&, const ParsedAnswer&) = default;
};

/// One model call and its scored outcome.
struct TrialRecord {
  Condition condition;
  int queried_value = 0;    // offset n; length for counting
  int anchor_position = 0;  // r for relative anchors, 0 otherwise
  std::vector<std::string> candidates;
  AnswerSpace answer_space = AnswerSpace::Item;
  std::string gold_text;
  std::string prompt_hash;
  std::string raw_response;
  std::optional<std::string> reasoning_trace;
  bool reasoning = false;
  ParsedAnswer parsed;
  bool correct = false;
  std::string error;  // non-empty when the response was malformed
  double latency_ms = 0.0;
  std::string backend_id;
  SeedCoords seed;

  friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

std::string_view to_string(AnswerKind kind);
AnswerKind parse_answer_kind(std::string_view text);

}  // namespace poskit
