#pragma once

// Independent interpreter for the list-indexing notation. It parses the case
// source text ("xs = [...]\n<expr>") with its own recursive-descent parser
// and evaluates with Python semantics. It shares no code with the library.

#include <cctype>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace poskit::reference {

struct PyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using List = std::vector<std::int64_t>;
using PyValue = std::variant<std::int64_t, List>;

class Interpreter {
 public:
  explicit Interpreter(std::string source) : src_(std::move(source)) {}

  std::int64_t run() {
    const auto nl = src_.find('\n');
    if (nl == std::string::npos) throw PyError("missing expression line");
    pos_ = 0;
    end_ = nl;
    expect_word("xs");
    expect('=');
    auto v = expr();
    if (!std::holds_alternative<List>(v)) throw PyError("xs must be a list");
    xs_ = std::get<List>(v);
    at_end();
    pos_ = nl + 1;
    end_ = src_.size();
    auto result = expr();
    at_end();
    if (!std::holds_alternative<std::int64_t>(result)) throw PyError("result is not an integer");
    return std::get<std::int64_t>(result);
  }

 private:
  void ws() {
    while (pos_ < end_ && src_[pos_] == ' ') ++pos_;
  }
  bool peek(char c) {
    ws();
    return pos_ < end_ && src_[pos_] == c;
  }
  bool accept(char c) {
    if (!peek(c)) return false;
    ++pos_;
    return true;
  }
  void expect(char c) {
    if (!accept(c)) throw PyError(std::string("expected '") + c + "'");
  }
  bool accept_word(const std::string& w) {
    ws();
    if (src_.compare(pos_, w.size(), w) != 0) return false;
    const auto after = pos_ + w.size();
    if (after < end_ && (std::isalnum(static_cast<unsigned char>(src_[after])) || src_[after] == '_')) return false;
    pos_ = after;
    return true;
  }
  void expect_word(const std::string& w) {
    if (!accept_word(w)) throw PyError("expected " + w);
  }
  void at_end() {
    ws();
    if (pos_ != end_) throw PyError("trailing input");
  }

  static std::int64_t as_int(const PyValue& v) {
    if (!std::holds_alternative<std::int64_t>(v)) throw PyError("expected int");
    return std::get<std::int64_t>(v);
  }
  static const List& as_list(const PyValue& v) {
    if (!std::holds_alternative<List>(v)) throw PyError("expected list");
    return std::get<List>(v);
  }
  static std::int64_t floor_mod(std::int64_t a, std::int64_t b) {
    if (b == 0) throw PyError("ZeroDivisionError");
    std::int64_t m = a % b;
    if (m != 0 && ((m < 0) != (b < 0))) m += b;
    return m;
  }

  // expr := term (('+' | '-') term)*
  PyValue expr() {
    auto v = term();
    while (true) {
      if (accept('+')) {
        v = as_int(v) + as_int(term());
      } else if (accept('-')) {
        v = as_int(v) - as_int(term());
      } else {
        return v;
      }
    }
  }
  // term := unary ('%' unary)*
  PyValue term() {
    auto v = unary();
    while (accept('%')) v = floor_mod(as_int(v), as_int(unary()));
    return v;
  }
  PyValue unary() {
    if (accept('-')) return -as_int(unary());
    return postfix();
  }
  PyValue postfix() {
    auto v = primary();
    while (true) {
      if (accept('[')) {
        const List& l = as_list(v);
        std::optional<std::int64_t> a;
        std::optional<std::int64_t> b;
        if (!peek(':')) a = as_int(expr());
        if (accept(':')) {
          if (!peek(']')) b = as_int(expr());
          expect(']');
          v = slice(l, a, b);
        } else {
          expect(']');
          v = index(l, *a);
        }
      } else if (accept('.')) {
        expect_word("index");
        expect('(');
        const auto needle = as_int(expr());
        expect(')');
        const List& l = as_list(v);
        std::int64_t found = -1;
        for (std::size_t i = 0; i < l.size(); ++i) {
          if (l[i] == needle) {
            found = static_cast<std::int64_t>(i);
            break;
          }
        }
        if (found < 0) throw PyError("ValueError");
        v = found;
      } else {
        return v;
      }
    }
  }
  PyValue primary() {
    ws();
    if (pos_ < end_ && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
      std::int64_t n = 0;
      while (pos_ < end_ && std::isdigit(static_cast<unsigned char>(src_[pos_]))) n = n * 10 + (src_[pos_++] - '0');
      return n;
    }
    if (accept('[')) {
      List l;
      if (!accept(']')) {
        do {
          l.push_back(as_int(expr()));
        } while (accept(','));
        expect(']');
      }
      return l;
    }
    if (accept('(')) {
      auto v = expr();
      expect(')');
      return v;
    }
    if (accept_word("xs")) return xs_;
    if (accept_word("len")) {
      expect('(');
      auto v = expr();
      expect(')');
      return static_cast<std::int64_t>(as_list(v).size());
    }
    if (accept_word("sorted")) {
      expect('(');
      List l = as_list(expr());
      expect(')');
      // Insertion sort keeps this independent of the library's sort call.
      for (std::size_t i = 1; i < l.size(); ++i) {
        for (std::size_t j = i; j > 0 && l[j - 1] > l[j]; --j) std::swap(l[j - 1], l[j]);
      }
      return l;
    }
    if (accept_word("list")) {
      expect('(');
      expect_word("reversed");
      expect('(');
      const List l = as_list(expr());
      expect(')');
      expect(')');
      return List(l.rbegin(), l.rend());
    }
    throw PyError("unexpected token at '" + src_.substr(pos_, end_ - pos_) + "'");
  }

  static std::int64_t index(const List& l, std::int64_t i) {
    const auto n = static_cast<std::int64_t>(l.size());
    const auto k = i < 0 ? i + n : i;
    if (k < 0 || k >= n) throw PyError("IndexError");
    return l[static_cast<std::size_t>(k)];
  }
  static List slice(const List& l, std::optional<std::int64_t> a, std::optional<std::int64_t> b) {
    const auto n = static_cast<std::int64_t>(l.size());
    auto clamp = [n](std::int64_t v) {
      if (v < 0) v += n;
      if (v < 0) v = 0;
      if (v > n) v = n;
      return v;
    };
    const auto lo = a ? clamp(*a) : 0;
    const auto hi = b ? clamp(*b) : n;
    List out;
    for (auto i = lo; i < hi; ++i) out.push_back(l[static_cast<std::size_t>(i)]);
    return out;
  }

  std::string src_;
  std::size_t pos_ = 0;
  std::size_t end_ = 0;
  List xs_;
};

inline std::int64_t evaluate_source(const std::string& source) { return Interpreter(source).run(); }

}  // namespace poskit::reference
