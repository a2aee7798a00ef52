#include "poskit/pyindex.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <numeric>
#include <unordered_set>

#include "poskit/error.hpp"

namespace poskit::pyindex {
namespace {

constexpr int kCaseRetryBudget = 100;
constexpr int kDuplicateRetryBudget = 1000;

Expr make(NodeKind kind, std::vector<Expr> children, std::int64_t value = 0) {
  return std::make_shared<const Node>(Node{kind, value, std::move(children)});
}

using List = std::vector<std::int64_t>;

std::int64_t as_int(const Value& v, std::string_view context) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
  throw Error(ErrorCode::UnsupportedNode, std::string(context) + " expects an integer operand");
}

const List& as_list(const Value& v, std::string_view context) {
  if (const auto* l = std::get_if<List>(&v)) return *l;
  throw Error(ErrorCode::UnsupportedNode, std::string(context) + " expects a list operand");
}

std::int64_t floor_mod(std::int64_t a, std::int64_t b) {
  if (b == 0) throw Error(ErrorCode::DivisionByZero, "integer modulo by zero");
  std::int64_t r = a % b;
  if (r != 0 && ((r < 0) != (b < 0))) r += b;
  return r;
}

std::int64_t clamp_slice_bound(std::int64_t bound, std::int64_t size) {
  if (bound < 0) bound += size;
  return std::clamp<std::int64_t>(bound, 0, size);
}

int precedence(const Node& node) {
  switch (node.kind) {
    case NodeKind::IntLiteral: return node.value < 0 ? 90 : 100;
    case NodeKind::Negate: return 90;
    case NodeKind::Modulo: return 80;
    case NodeKind::Add:
    case NodeKind::Subtract: return 70;
    default: return 100;
  }
}

std::string wrap(const Expr& e, bool parens) { return parens ? "(" + render(e) + ")" : render(e); }

std::string render_postfix_base(const Expr& e) { return wrap(e, precedence(*e) < 100); }

std::string render_binary(const Node& node, std::string_view op) {
  const int p = precedence(node);
  return wrap(node.children[0], precedence(*node.children[0]) < p) + " " + std::string(op) + " " +
         wrap(node.children[1], precedence(*node.children[1]) <= p);
}

std::vector<std::int64_t> random_values(Rng& stream, int length, std::int64_t max_value) {
  List xs(static_cast<std::size_t>(length));
  for (auto& x : xs) x = stream.uniform_int(0, max_value);
  return xs;
}

std::vector<std::int64_t> distinct_values(Rng& stream, int length) {
  List pool(kMaxValue + 1);
  std::iota(pool.begin(), pool.end(), 0);
  stream.shuffle(pool);
  pool.resize(static_cast<std::size_t>(length));
  return pool;
}

struct Draft {
  List xs;
  Expr expr;
};

Draft draft_case(Category category, Rng& stream) {
  const int length = static_cast<int>(stream.uniform_int(kMinListLength, kMaxListLength));
  switch (category) {
    case Category::Forward: {
      auto xs = random_values(stream, length, kMaxValue);
      return {std::move(xs), subscript(list_ref(), literal(stream.uniform_int(0, length - 1)))};
    }
    case Category::Backward: {
      auto xs = random_values(stream, length, kMaxValue);
      return {std::move(xs), subscript(list_ref(), negate(literal(stream.uniform_int(1, length))))};
    }
    case Category::Nested: {
      // Every element is itself a valid non-negative index.
      auto xs = random_values(stream, length, length - 1);
      return {std::move(xs), subscript(list_ref(), subscript(list_ref(), literal(stream.uniform_int(0, length - 1))))};
    }
    case Category::Expression: {
      switch (stream.uniform_int(0, 3)) {
        case 0: {
          auto xs = random_values(stream, length, kMaxValue);
          const auto target = stream.uniform_int(0, length - 1);
          const auto a = stream.uniform_int(0, target);
          return {std::move(xs), subscript(list_ref(), add(literal(a), literal(target - a)))};
        }
        case 1: {
          auto xs = random_values(stream, length, kMaxValue);
          const auto k = stream.uniform_int(1, length);
          return {std::move(xs), subscript(list_ref(), subtract(len(list_ref()), literal(k)))};
        }
        case 2: {
          auto xs = random_values(stream, length, kMaxValue);
          const auto a = stream.uniform_int(length, kMaxValue);
          return {std::move(xs), subscript(list_ref(), modulo(literal(a), len(list_ref())))};
        }
        default: {
          auto xs = distinct_values(stream, length);
          const auto v = xs[static_cast<std::size_t>(stream.uniform_int(0, length - 1))];
          return {std::move(xs), index_of(list_ref(), literal(v))};
        }
      }
    }
    case Category::Chained: {
      auto xs = random_values(stream, length, kMaxValue);
      switch (stream.uniform_int(0, 2)) {
        case 0: {
          const auto a = stream.uniform_int(0, length - 1);
          const auto b = stream.uniform_int(a + 1, length);
          const auto i = stream.uniform_int(0, b - a - 1);
          return {std::move(xs), subscript(slice(list_ref(), literal(a), literal(b)), literal(i))};
        }
        case 1:
          return {std::move(xs), subscript(reversed(list_ref()), literal(stream.uniform_int(0, length - 1)))};
        default:
          return {std::move(xs), subscript(sorted(list_ref()), literal(stream.uniform_int(0, length - 1)))};
      }
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown category");
}

}  // namespace

Expr list_ref() { return make(NodeKind::ListRef, {}); }
Expr literal(std::int64_t value) { return make(NodeKind::IntLiteral, {}, value); }
Expr negate(Expr operand) { return make(NodeKind::Negate, {std::move(operand)}); }
Expr add(Expr lhs, Expr rhs) { return make(NodeKind::Add, {std::move(lhs), std::move(rhs)}); }
Expr subtract(Expr lhs, Expr rhs) { return make(NodeKind::Subtract, {std::move(lhs), std::move(rhs)}); }
Expr modulo(Expr lhs, Expr rhs) { return make(NodeKind::Modulo, {std::move(lhs), std::move(rhs)}); }
Expr len(Expr list) { return make(NodeKind::Len, {std::move(list)}); }
Expr subscript(Expr list, Expr index) { return make(NodeKind::Subscript, {std::move(list), std::move(index)}); }
Expr slice(Expr list, Expr start, Expr stop) {
  return make(NodeKind::Slice, {std::move(list), std::move(start), std::move(stop)});
}
Expr index_of(Expr list, Expr value) { return make(NodeKind::Index, {std::move(list), std::move(value)}); }
Expr sorted(Expr list) { return make(NodeKind::Sorted, {std::move(list)}); }
Expr reversed(Expr list) { return make(NodeKind::Reversed, {std::move(list)}); }

Value evaluate_value(const Expr& expr, const List& xs) {
  if (!expr) throw Error(ErrorCode::UnsupportedNode, "null expression");
  const auto& c = expr->children;
  auto arity = [&](std::size_t n) {
    if (c.size() != n) throw Error(ErrorCode::UnsupportedNode, "malformed node arity");
  };
  switch (expr->kind) {
    case NodeKind::ListRef:
      arity(0);
      return xs;
    case NodeKind::IntLiteral:
      arity(0);
      return expr->value;
    case NodeKind::Negate:
      arity(1);
      return -as_int(evaluate_value(c[0], xs), "unary minus");
    case NodeKind::Add:
      arity(2);
      return as_int(evaluate_value(c[0], xs), "+") + as_int(evaluate_value(c[1], xs), "+");
    case NodeKind::Subtract:
      arity(2);
      return as_int(evaluate_value(c[0], xs), "-") - as_int(evaluate_value(c[1], xs), "-");
    case NodeKind::Modulo:
      arity(2);
      return floor_mod(as_int(evaluate_value(c[0], xs), "%"), as_int(evaluate_value(c[1], xs), "%"));
    case NodeKind::Len:
      arity(1);
      return static_cast<std::int64_t>(as_list(evaluate_value(c[0], xs), "len").size());
    case NodeKind::Subscript: {
      arity(2);
      const auto base = evaluate_value(c[0], xs);
      const auto& list = as_list(base, "subscript");
      std::int64_t i = as_int(evaluate_value(c[1], xs), "subscript");
      const auto size = static_cast<std::int64_t>(list.size());
      if (i < 0) i += size;
      if (i < 0 || i >= size) {
        throw Error(ErrorCode::IndexOutOfRange, "list index out of range");
      }
      return list[static_cast<std::size_t>(i)];
    }
    case NodeKind::Slice: {
      arity(3);
      const auto base = evaluate_value(c[0], xs);
      const auto& list = as_list(base, "slice");
      const auto size = static_cast<std::int64_t>(list.size());
      const auto start = clamp_slice_bound(as_int(evaluate_value(c[1], xs), "slice"), size);
      const auto stop = clamp_slice_bound(as_int(evaluate_value(c[2], xs), "slice"), size);
      if (stop <= start) return List{};
      return List(list.begin() + start, list.begin() + stop);
    }
    case NodeKind::Index: {
      arity(2);
      const auto base = evaluate_value(c[0], xs);
      const auto& list = as_list(base, "index");
      const auto v = as_int(evaluate_value(c[1], xs), "index");
      const auto it = std::find(list.begin(), list.end(), v);
      if (it == list.end()) {
        throw Error(ErrorCode::ValueNotFound, std::to_string(v) + " is not in list");
      }
      return static_cast<std::int64_t>(it - list.begin());
    }
    case NodeKind::Sorted: {
      arity(1);
      auto list = as_list(evaluate_value(c[0], xs), "sorted");
      std::sort(list.begin(), list.end());
      return list;
    }
    case NodeKind::Reversed: {
      arity(1);
      auto list = as_list(evaluate_value(c[0], xs), "reversed");
      std::reverse(list.begin(), list.end());
      return list;
    }
  }
  throw Error(ErrorCode::UnsupportedNode, "unknown node kind");
}

std::int64_t evaluate(const Expr& expr, const List& xs) {
  return as_int(evaluate_value(expr, xs), "expression result");
}

std::string render(const Expr& expr) {
  const auto& c = expr->children;
  switch (expr->kind) {
    case NodeKind::ListRef: return "xs";
    case NodeKind::IntLiteral: return std::to_string(expr->value);
    case NodeKind::Negate: return "-" + wrap(c[0], precedence(*c[0]) < 90);
    case NodeKind::Add: return render_binary(*expr, "+");
    case NodeKind::Subtract: return render_binary(*expr, "-");
    case NodeKind::Modulo: return render_binary(*expr, "%");
    case NodeKind::Len: return "len(" + render(c[0]) + ")";
    case NodeKind::Subscript: return render_postfix_base(c[0]) + "[" + render(c[1]) + "]";
    case NodeKind::Slice: return render_postfix_base(c[0]) + "[" + render(c[1]) + ":" + render(c[2]) + "]";
    case NodeKind::Index: return render_postfix_base(c[0]) + ".index(" + render(c[1]) + ")";
    case NodeKind::Sorted: return "sorted(" + render(c[0]) + ")";
    case NodeKind::Reversed: return "list(reversed(" + render(c[0]) + "))";
  }
  throw Error(ErrorCode::UnsupportedNode, "unknown node kind");
}

namespace {

class ExprParser {
 public:
  explicit ExprParser(std::string_view text) : text_(text) {}

  Expr parse() {
    auto e = additive();
    skip();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::Parse, what + " at offset " + std::to_string(pos_) + " in '" + std::string(text_) + "'");
  }
  void skip() {
    while (pos_ < text_.size() && text_[pos_] == ' ') ++pos_;
  }
  bool accept(std::string_view token) {
    skip();
    if (text_.substr(pos_, token.size()) != token) return false;
    pos_ += token.size();
    return true;
  }
  void expect(std::string_view token) {
    if (!accept(token)) fail("expected '" + std::string(token) + "'");
  }

  Expr additive() {
    auto e = multiplicative();
    while (true) {
      if (accept("+")) {
        e = add(e, multiplicative());
      } else if (accept("-")) {
        e = subtract(e, multiplicative());
      } else {
        return e;
      }
    }
  }
  Expr multiplicative() {
    auto e = unary();
    while (accept("%")) e = modulo(e, unary());
    return e;
  }
  Expr unary() {
    if (accept("-")) return negate(unary());
    return postfix();
  }
  Expr postfix() {
    auto e = primary();
    while (true) {
      if (accept("[")) {
        auto first = additive();
        if (accept(":")) {
          auto stop = additive();
          expect("]");
          e = slice(e, first, stop);
        } else {
          expect("]");
          e = subscript(e, first);
        }
      } else if (accept(".index(")) {
        auto v = additive();
        expect(")");
        e = index_of(e, v);
      } else {
        return e;
      }
    }
  }
  Expr primary() {
    skip();
    if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      std::int64_t v = 0;
      const auto [p, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), v);
      if (ec != std::errc()) fail("bad integer");
      pos_ = static_cast<std::size_t>(p - text_.data());
      return literal(v);
    }
    if (accept("(")) {
      auto e = additive();
      expect(")");
      return e;
    }
    if (accept("len(")) {
      auto e = additive();
      expect(")");
      return len(e);
    }
    if (accept("sorted(")) {
      auto e = additive();
      expect(")");
      return sorted(e);
    }
    if (accept("list(reversed(")) {
      auto e = additive();
      expect(")");
      expect(")");
      return reversed(e);
    }
    if (accept("xs")) return list_ref();
    fail("unexpected token");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse_expression(std::string_view text) { return ExprParser(text).parse(); }

int depth(const Expr& expr) {
  int deepest = 0;
  for (const auto& child : expr->children) deepest = std::max(deepest, depth(child));
  return deepest + 1;
}

std::string render_source(const List& xs, const Expr& expr) {
  std::string out = "xs = [";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i > 0) out += ", ";
    out += std::to_string(xs[i]);
  }
  return out + "]\n" + render(expr);
}

Case generate_case(Category category, Rng& stream) {
  for (int attempt = 0; attempt < kCaseRetryBudget; ++attempt) {
    auto draft = draft_case(category, stream);
    if (depth(draft.expr) > kMaxDepth) continue;
    std::int64_t gold = 0;
    try {
      gold = evaluate(draft.expr, draft.xs);
    } catch (const Error&) {
      continue;
    }
    Case out;
    out.category = category;
    out.source_text = render_source(draft.xs, draft.expr);
    out.xs = std::move(draft.xs);
    out.expr = std::move(draft.expr);
    out.gold = gold;
    out.seed.seed = stream.seed();
    return out;
  }
  throw Error(ErrorCode::GenerationExhausted, "no valid " + std::string(to_string(category)) + " case");
}

std::vector<Case> generate_benchmark(std::uint64_t seed, int per_category) {
  if (per_category < 1) {
    throw Error(ErrorCode::InvalidArgument, "per_category must be >= 1");
  }
  std::vector<Case> out;
  out.reserve(static_cast<std::size_t>(per_category) * std::size(kAllCategories));
  std::unordered_set<std::string> seen;
  for (const auto category : kAllCategories) {
    for (int i = 0; i < per_category; ++i) {
      bool placed = false;
      for (int attempt = 0; attempt < kDuplicateRetryBudget && !placed; ++attempt) {
        Rng stream(derive_seed(seed, {"pyindex", to_string(category), i, attempt}));
        auto c = generate_case(category, stream);
        if (!seen.insert(c.source_text).second) continue;
        c.seed = SeedCoords{seed, i, attempt};
        std::string index = std::to_string(i);
        c.case_id = std::string(to_string(category)) + "-" + std::string(3 - std::min<std::size_t>(3, index.size()), '0') + index;
        out.push_back(std::move(c));
        placed = true;
      }
      if (!placed) {
        throw Error(ErrorCode::GenerationExhausted, "could not draw a unique " +
                                                        std::string(to_string(category)) + " case");
      }
    }
  }
  return out;
}

PromptInstance to_prompt(const Case& c) {
  Condition condition;
  condition.task = TaskKind::PyIndex;
  condition.item_kind = ItemKind::Generic;
  condition.category = std::string(to_string(c.category));
  auto prompt = render_code_value_prompt(c.source_text, c.gold, condition);
  prompt.seed = c.seed;
  return prompt;
}

std::string_view to_string(Category category) {
  switch (category) {
    case Category::Forward: return "forward";
    case Category::Backward: return "backward";
    case Category::Nested: return "nested";
    case Category::Expression: return "expression";
    case Category::Chained: return "chained";
  }
  return "forward";
}

Category parse_category(std::string_view text) {
  for (const auto c : kAllCategories) {
    if (to_string(c) == text) return c;
  }
  throw Error(ErrorCode::Parse, "unknown PyIndex category '" + std::string(text) + "'");
}

}  // namespace poskit::pyindex
