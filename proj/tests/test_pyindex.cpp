#include <doctest.h>

#include <set>

#include "poskit/pyindex.hpp"
#include "poskit/serialize.hpp"
#include "support/reference_pyindex.hpp"
#include "support/test_util.hpp"

using namespace poskit;
using namespace poskit::pyindex;

namespace {

bool is_literal(const Expr& e) { return e->kind == NodeKind::IntLiteral; }

std::vector<std::int64_t> elements(const Case& c) { return c.xs; }

bool member(const Case& c, std::int64_t v) {
  const auto xs = elements(c);
  return std::find(xs.begin(), xs.end(), v) != xs.end();
}

// Random well-typed trees, valid and invalid alike.
Expr random_int_expr(Rng& r, int depth);

Expr random_list_expr(Rng& r, int depth) {
  if (depth <= 0) return list_ref();
  switch (r.uniform_int(0, 3)) {
    case 0: return list_ref();
    case 1: return sorted(random_list_expr(r, depth - 1));
    case 2: return reversed(random_list_expr(r, depth - 1));
    default: return slice(random_list_expr(r, depth - 1), random_int_expr(r, depth - 1), random_int_expr(r, depth - 1));
  }
}

Expr random_int_expr(Rng& r, int depth) {
  if (depth <= 0) return literal(r.uniform_int(0, 12));
  switch (r.uniform_int(0, 7)) {
    case 0: return literal(r.uniform_int(0, 12));
    case 1: return negate(random_int_expr(r, depth - 1));
    case 2: return add(random_int_expr(r, depth - 1), random_int_expr(r, depth - 1));
    case 3: return subtract(random_int_expr(r, depth - 1), random_int_expr(r, depth - 1));
    case 4: return modulo(random_int_expr(r, depth - 1), random_int_expr(r, depth - 1));
    case 5: return len(random_list_expr(r, depth - 1));
    case 6: return index_of(random_list_expr(r, depth - 1), random_int_expr(r, depth - 1));
    default: return subscript(random_list_expr(r, depth - 1), random_int_expr(r, depth - 1));
  }
}

}  // namespace

TEST_CASE("evaluate examples") {
  CHECK(evaluate(subscript(list_ref(), literal(0)), {3, 1, 2}) == 3);
  CHECK(evaluate(subscript(list_ref(), subscript(list_ref(), literal(0))), {2, 9, 7}) == 7);
  const auto e = subscript(sorted(list_ref()), literal(1));
  CHECK(evaluate(e, {5, 2, 9}) == 5);
  CHECK(reference::evaluate_source(render_source({5, 2, 9}, e)) == 5);
}

TEST_CASE("evaluate follows Python semantics") {
  const std::vector<std::int64_t> xs = {10, 20, 30, 40};
  CHECK(evaluate(subscript(list_ref(), negate(literal(1))), xs) == 40);
  CHECK(evaluate(subscript(list_ref(), negate(literal(4))), xs) == 10);
  CHECK_ERROR_CODE(evaluate(subscript(list_ref(), negate(literal(5))), xs), ErrorCode::IndexOutOfRange);
  CHECK_ERROR_CODE(evaluate(subscript(list_ref(), literal(4)), xs), ErrorCode::IndexOutOfRange);
  CHECK(evaluate(modulo(negate(literal(7)), literal(3)), xs) == 2);
  CHECK(evaluate(modulo(literal(7), negate(literal(3))), xs) == -2);
  CHECK_ERROR_CODE(evaluate(modulo(literal(7), literal(0)), xs), ErrorCode::DivisionByZero);
  CHECK(evaluate(len(slice(list_ref(), literal(1), literal(100))), xs) == 3);
  CHECK(evaluate(len(slice(list_ref(), literal(3), literal(1))), xs) == 0);
  CHECK(evaluate(subscript(slice(list_ref(), negate(literal(3)), negate(literal(1))), literal(0)), xs) == 20);
  CHECK(evaluate(index_of(list_ref(), literal(30)), xs) == 2);
  CHECK_ERROR_CODE(evaluate(index_of(list_ref(), literal(31)), xs), ErrorCode::ValueNotFound);
  CHECK(evaluate(index_of(list_ref(), literal(5)), {5, 1, 5}) == 0);
  CHECK(evaluate(subscript(reversed(list_ref()), literal(0)), xs) == 40);
  CHECK_ERROR_CODE(evaluate(list_ref(), xs), ErrorCode::UnsupportedNode);
  CHECK_ERROR_CODE(evaluate(len(literal(3)), xs), ErrorCode::UnsupportedNode);
  CHECK_ERROR_CODE(evaluate(Expr{}, xs), ErrorCode::UnsupportedNode);
}

TEST_CASE("render produces Python source") {
  CHECK(render(subscript(list_ref(), negate(literal(2)))) == "xs[-2]");
  CHECK(render(subscript(list_ref(), subtract(len(list_ref()), literal(1)))) == "xs[len(xs) - 1]");
  CHECK(render(subscript(reversed(list_ref()), literal(0))) == "list(reversed(xs))[0]");
  CHECK(render(index_of(list_ref(), literal(4))) == "xs.index(4)");
  CHECK(render(subscript(slice(list_ref(), literal(1), literal(3)), literal(0))) == "xs[1:3][0]");
  CHECK(render_source({1, 2}, subscript(list_ref(), literal(0))) == "xs = [1, 2]\nxs[0]");
}

TEST_CASE("random trees agree with the reference interpreter") {
  Rng r(31337);
  int valid = 0;
  for (int i = 0; i < 5000; ++i) {
    std::vector<std::int64_t> xs;
    const auto n = r.uniform_int(1, 8);
    for (int k = 0; k < n; ++k) xs.push_back(r.uniform_int(0, 9));
    const auto e = random_int_expr(r, static_cast<int>(r.uniform_int(1, 4)));
    const auto source = render_source(xs, e);
    CAPTURE(source);
    std::optional<std::int64_t> ours;
    std::optional<std::int64_t> theirs;
    try {
      ours = evaluate(e, xs);
    } catch (const Error&) {
    }
    try {
      theirs = reference::evaluate_source(source);
    } catch (const reference::PyError&) {
    }
    CHECK(ours == theirs);
    valid += ours ? 1 : 0;
  }
  CHECK(valid > 1000);
}

TEST_CASE("generate_case shapes and category purity") {
  for (auto category : kAllCategories) {
    for (int i = 0; i < 400; ++i) {
      Rng stream(derive_seed(8, {std::string(to_string(category)), i}));
      const auto c = generate_case(category, stream);
      CAPTURE(c.source_text);
      const int L = static_cast<int>(c.xs.size());
      CHECK(L >= kMinListLength);
      CHECK(L <= kMaxListLength);
      CHECK(c.category == category);
      CHECK(c.gold == evaluate(c.expr, c.xs));
      CHECK(c.gold == reference::evaluate_source(c.source_text));
      CHECK(c.source_text == render_source(c.xs, c.expr));
      CHECK(depth(c.expr) <= kMaxDepth);
      const auto& e = c.expr;
      switch (category) {
        case Category::Forward:
          REQUIRE(e->kind == NodeKind::Subscript);
          CHECK(e->children[0]->kind == NodeKind::ListRef);
          REQUIRE(is_literal(e->children[1]));
          CHECK(e->children[1]->value >= 0);
          CHECK(e->children[1]->value < L);
          CHECK(member(c, c.gold));
          break;
        case Category::Backward:
          REQUIRE(e->kind == NodeKind::Subscript);
          REQUIRE(e->children[1]->kind == NodeKind::Negate);
          REQUIRE(is_literal(e->children[1]->children[0]));
          CHECK(e->children[1]->children[0]->value >= 1);
          CHECK(e->children[1]->children[0]->value <= L);
          CHECK(member(c, c.gold));
          break;
        case Category::Nested:
          REQUIRE(e->kind == NodeKind::Subscript);
          CHECK(e->children[1]->kind == NodeKind::Subscript);
          for (auto v : c.xs) {
            CHECK(v >= 0);
            CHECK(v <= L - 1);
          }
          CHECK(member(c, c.gold));
          break;
        case Category::Expression:
          if (e->kind == NodeKind::Index) {
            CHECK(c.gold >= 0);
            CHECK(c.gold <= L - 1);
          } else {
            REQUIRE(e->kind == NodeKind::Subscript);
            const auto k = e->children[1]->kind;
            CHECK((k == NodeKind::Add || k == NodeKind::Subtract || k == NodeKind::Modulo || k == NodeKind::Len));
            CHECK(member(c, c.gold));
          }
          break;
        case Category::Chained: {
          REQUIRE(e->kind == NodeKind::Subscript);
          const auto k = e->children[0]->kind;
          CHECK((k == NodeKind::Slice || k == NodeKind::Sorted || k == NodeKind::Reversed));
          CHECK(member(c, c.gold));
          break;
        }
      }
    }
  }
}

TEST_CASE("generate_benchmark examples") {
  const auto a = generate_benchmark(42, 20);
  CHECK(a.size() == 100);
  std::map<Category, int> counts;
  std::set<std::string> sources;
  for (const auto& c : a) {
    ++counts[c.category];
    sources.insert(c.source_text);
    CHECK(c.gold == reference::evaluate_source(c.source_text));
  }
  for (auto category : kAllCategories) CHECK(counts[category] == 20);
  CHECK(sources.size() == a.size());

  const auto b = generate_benchmark(42, 20);
  REQUIRE(b.size() == a.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(to_json(a[i]).dump() == to_json(b[i]).dump());
  CHECK(to_json(generate_benchmark(43, 20)[0]).dump() != to_json(a[0]).dump());
  CHECK_ERROR_CODE(generate_benchmark(42, 0), ErrorCode::InvalidArgument);
}

TEST_CASE("benchmark cases round-trip and become integer prompts") {
  for (const auto& c : generate_benchmark(7, 3)) {
    const auto back = case_from_json(to_json(c));
    CHECK(back.source_text == c.source_text);
    CHECK(back.gold == c.gold);
    CHECK(evaluate(back.expr, back.xs) == c.gold);
    const auto p = to_prompt(c);
    CHECK(p.answer_space == AnswerSpace::Integer);
    CHECK(p.gold_text == std::to_string(c.gold));
    CHECK(p.condition.task == TaskKind::PyIndex);
    CHECK(p.condition.category == to_string(c.category));
    CHECK(p.messages.back().content.find(c.source_text) != std::string::npos);
  }
}

TEST_CASE("parse_expression inverts render") {
  Rng r(404);
  for (int i = 0; i < 3000; ++i) {
    const auto e = random_int_expr(r, static_cast<int>(r.uniform_int(0, 4)));
    const auto text = render(e);
    CAPTURE(text);
    CHECK(render(parse_expression(text)) == text);
  }
  CHECK_ERROR_CODE(parse_expression("xs["), ErrorCode::Parse);
  CHECK_ERROR_CODE(parse_expression("ys[0]"), ErrorCode::Parse);
  CHECK_ERROR_CODE(parse_expression("xs[0] xs"), ErrorCode::Parse);
}
