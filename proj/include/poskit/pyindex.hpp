#pragma once

// Python list-indexing benchmark: a tiny expression AST over one list `xs`,
// an interpreter with Python's indexing semantics, and a seeded generator for
// the five case categories.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "poskit/prompting.hpp"
#include "poskit/random.hpp"

namespace poskit::pyindex {

enum class Category { Forward, Backward, Nested, Expression, Chained };

inline constexpr Category kAllCategories[] = {Category::Forward, Category::Backward, Category::Nested,
                                              Category::Expression, Category::Chained};

enum class NodeKind {
  ListRef,     // xs
  IntLiteral,  // 3
  Negate,      // -e
  Add,         // a + b
  Subtract,    // a - b
  Modulo,      // a % b
  Len,         // len(l)
  Subscript,   // l[i]
  Slice,       // l[a:b]
  Index,       // l.index(v)
  Sorted,      // sorted(l)
  Reversed,    // list(reversed(l))
};

struct Node;
using Expr = std::shared_ptr<const Node>;

struct Node {
  NodeKind kind;
  std::int64_t value = 0;  // IntLiteral only
  std::vector<Expr> children;
};

Expr list_ref();
Expr literal(std::int64_t value);
Expr negate(Expr operand);
Expr add(Expr lhs, Expr rhs);
Expr subtract(Expr lhs, Expr rhs);
Expr modulo(Expr lhs, Expr rhs);
Expr len(Expr list);
Expr subscript(Expr list, Expr index);
Expr slice(Expr list, Expr start, Expr stop);
Expr index_of(Expr list, Expr value);
Expr sorted(Expr list);
Expr reversed(Expr list);

using Value = std::variant<std::int64_t, std::vector<std::int64_t>>;

/// Evaluates any node; list-valued nodes yield a list.
Value evaluate_value(const Expr& expr, const std::vector<std::int64_t>& xs);

/// Evaluates an integer-valued expression. Throws IndexOutOfRange,
/// ValueNotFound, DivisionByZero, or UnsupportedNode.
std::int64_t evaluate(const Expr& expr, const std::vector<std::int64_t>& xs);

/// Python source for the expression, e.g. "list(reversed(xs))[2]".
std::string render(const Expr& expr);

/// Parses the notation produced by render; render(parse_expression(s)) == s
/// for rendered expressions. Throws Parse on malformed input.
Expr parse_expression(std::string_view text);

int depth(const Expr& expr);

struct Case {
  Category category = Category::Forward;
  std::string case_id;
  std::vector<std::int64_t> xs;
  Expr expr;
  std::string source_text;  // "xs = [...]\n<expression>"
  std::int64_t gold = 0;
  SeedCoords seed;
};

inline constexpr int kMinListLength = 5;
inline constexpr int kMaxListLength = 12;
inline constexpr std::int64_t kMaxValue = 99;
inline constexpr int kMaxDepth = 4;

std::string render_source(const std::vector<std::int64_t>& xs, const Expr& expr);

Case generate_case(Category category, Rng& stream);

/// per_category cases for each category in declaration order, with no
/// duplicate source_text.
std::vector<Case> generate_benchmark(std::uint64_t seed, int per_category = 20);

/// Single-turn evaluation prompt for a case.
PromptInstance to_prompt(const Case& c);

std::string_view to_string(Category category);
Category parse_category(std::string_view text);

}  // namespace poskit::pyindex
