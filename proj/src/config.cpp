#include "poskit/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>

#include "poskit/error.hpp"
#include "poskit/io.hpp"

namespace poskit {
namespace {

using Type = ConfigValue::Type;

bool is_bare_key_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

class Cursor {
 public:
  Cursor(std::string_view text, std::string_view origin) : text_(text), origin_(origin) {}

  bool done() const { return pos_ >= text_.size(); }
  char peek() const { return done() ? '\0' : text_[pos_]; }
  char get() {
    const char c = text_[pos_++];
    if (c == '\n') ++line_;
    return c;
  }
  bool consume(char c) {
    if (peek() != c) return false;
    get();
    return true;
  }

  void skip_blank() {
    while (!done() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) get();
  }

  // Whitespace, newlines and comments; used inside arrays.
  void skip_layout() {
    while (!done()) {
      if (peek() == '#') {
        while (!done() && peek() != '\n') get();
      } else if (std::isspace(static_cast<unsigned char>(peek()))) {
        get();
      } else {
        break;
      }
    }
  }

  void end_of_line() {
    skip_blank();
    if (peek() == '#') {
      while (!done() && peek() != '\n') get();
    }
    if (!done() && !consume('\n')) fail("unexpected trailing characters");
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw Error(ErrorCode::Config, std::string(origin_) + ":" + std::to_string(line_) + ": " + message);
  }

  std::string key() {
    std::string out;
    while (true) {
      skip_blank();
      std::string part;
      if (peek() == '"') {
        part = basic_string();
      } else {
        while (!done() && is_bare_key_char(peek())) part.push_back(get());
      }
      if (part.empty()) fail("expected a key");
      out += part;
      skip_blank();
      if (!consume('.')) break;
      out += '.';
    }
    return out;
  }

  ConfigValue value() {
    skip_blank();
    const char c = peek();
    if (c == '"') return ConfigValue::of(basic_string());
    if (c == '\'') return ConfigValue::of(literal_string());
    if (c == '[') return array();
    if (c == '{') fail("inline tables are not supported");
    std::string token;
    while (!done() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '+' || peek() == '-' ||
                       peek() == '.' || peek() == '_')) {
      token.push_back(get());
    }
    if (token == "true") return ConfigValue::of(true);
    if (token == "false") return ConfigValue::of(false);
    return number(token);
  }

 private:
  std::string basic_string() {
    get();  // opening quote
    std::string out;
    while (true) {
      if (done() || peek() == '\n') fail("unterminated string");
      const char c = get();
      if (c == '"') return out;
      if (c != '\\') {
        out.push_back(c);
        continue;
      }
      if (done()) fail("unterminated escape");
      const char e = get();
      switch (e) {
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        case 'r': out.push_back('\r'); break;
        case '"': out.push_back('"'); break;
        case '\\': out.push_back('\\'); break;
        case 'u': {
          std::string hex;
          for (int k = 0; k < 4 && !done(); ++k) hex.push_back(get());
          unsigned cp = 0;
          const auto [p, ec] = std::from_chars(hex.data(), hex.data() + hex.size(), cp, 16);
          if (ec != std::errc() || p != hex.data() + hex.size() || hex.size() != 4) fail("bad \\u escape");
          if (cp < 0x80) {
            out.push_back(static_cast<char>(cp));
          } else if (cp < 0x800) {
            out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
          } else {
            out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
          }
          break;
        }
        default: fail(std::string("unknown escape \\") + e);
      }
    }
  }

  std::string literal_string() {
    get();
    std::string out;
    while (true) {
      if (done() || peek() == '\n') fail("unterminated string");
      const char c = get();
      if (c == '\'') return out;
      out.push_back(c);
    }
  }

  ConfigValue array() {
    get();  // '['
    std::vector<ConfigValue> items;
    while (true) {
      skip_layout();
      if (consume(']')) break;
      items.push_back(value());
      skip_layout();
      if (consume(',')) continue;
      skip_layout();
      if (consume(']')) break;
      fail("expected ',' or ']' in array");
    }
    return ConfigValue::of(std::move(items));
  }

  ConfigValue number(std::string token) {
    if (token.empty()) fail("expected a value");
    std::string digits;
    for (char c : token) {
      if (c != '_') digits.push_back(c);
    }
    const bool looks_float = digits.find_first_of(".eE") != std::string::npos;
    const char* begin = digits.data() + (digits[0] == '+' ? 1 : 0);
    const char* end = digits.data() + digits.size();
    if (!looks_float) {
      std::int64_t v = 0;
      const auto [p, ec] = std::from_chars(begin, end, v);
      if (ec == std::errc() && p == end) return ConfigValue::of(v);
    } else {
      double v = 0;
      const auto [p, ec] = std::from_chars(begin, end, v);
      if (ec == std::errc() && p == end && std::isfinite(v)) return ConfigValue::of(v);
    }
    fail("invalid value '" + token + "'");
  }

  std::string_view text_;
  std::string_view origin_;
  std::size_t pos_ = 0;
  int line_ = 1;
};

std::string type_name(Type t) {
  switch (t) {
    case Type::Bool: return "boolean";
    case Type::Int: return "integer";
    case Type::Float: return "float";
    case Type::String: return "string";
    case Type::Array: return "array";
  }
  return "value";
}

[[noreturn]] void type_error(const std::string& key, const std::string& expected, const ConfigValue& v) {
  throw Error(ErrorCode::Config, "'" + key + "' must be " + expected + ", got " + type_name(v.type));
}

std::int64_t as_int(const std::string& key, const ConfigValue& v) {
  if (v.type != Type::Int) type_error(key, "an integer", v);
  return v.integer;
}

int as_small_int(const std::string& key, const ConfigValue& v) {
  const auto i = as_int(key, v);
  if (i < -(1LL << 31) || i >= (1LL << 31)) throw Error(ErrorCode::Config, "'" + key + "' is out of range");
  return static_cast<int>(i);
}

double as_double(const std::string& key, const ConfigValue& v) {
  if (v.type == Type::Int) return static_cast<double>(v.integer);
  if (v.type != Type::Float) type_error(key, "a number", v);
  return v.floating;
}

bool as_bool(const std::string& key, const ConfigValue& v) {
  if (v.type != Type::Bool) type_error(key, "a boolean", v);
  return v.boolean;
}

std::string as_string(const std::string& key, const ConfigValue& v) {
  if (v.type != Type::String) type_error(key, "a string", v);
  return v.string;
}

std::vector<std::string> as_strings(const std::string& key, const ConfigValue& v) {
  if (v.type != Type::Array) type_error(key, "an array of strings", v);
  std::vector<std::string> out;
  for (const auto& e : v.array) out.push_back(as_string(key, e));
  return out;
}

std::vector<int> as_ints(const std::string& key, const ConfigValue& v) {
  if (v.type != Type::Array) type_error(key, "an array of integers", v);
  std::vector<int> out;
  for (const auto& e : v.array) out.push_back(as_small_int(key, e));
  return out;
}

template <typename T, typename Parse>
std::vector<T> as_enums(const std::string& key, const ConfigValue& v, Parse parse) {
  std::vector<T> out;
  for (const auto& s : as_strings(key, v)) {
    try {
      out.push_back(parse(s));
    } catch (const Error& e) {
      throw Error(ErrorCode::Config, "'" + key + "': " + e.detail());
    }
  }
  return out;
}

template <typename T>
ConfigValue enum_list(const std::vector<T>& values) {
  std::vector<ConfigValue> out;
  for (auto v : values) out.push_back(ConfigValue::of(std::string(to_string(v))));
  return ConfigValue::of(std::move(out));
}

ConfigValue string_list(const std::vector<std::string>& values) {
  std::vector<ConfigValue> out;
  for (const auto& v : values) out.push_back(ConfigValue::of(v));
  return ConfigValue::of(std::move(out));
}

ConfigValue path_list(const std::vector<std::filesystem::path>& values) {
  std::vector<ConfigValue> out;
  for (const auto& v : values) out.push_back(ConfigValue::of(v.string()));
  return ConfigValue::of(std::move(out));
}

ConfigValue int_value(std::int64_t v) { return ConfigValue::of(v); }

template <typename F>
auto wrap_parse(const std::string& key, F f) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(ErrorCode::Config, "'" + key + "': " + e.detail());
  }
}

struct Field {
  std::string key;
  std::function<void(RunConfig&, const std::string&, const ConfigValue&)> set;
  std::function<std::optional<ConfigValue>(const RunConfig&)> get;
};

const std::vector<Field>& fields() {
  static const std::vector<Field> kFields = {
      {"seed",
       [](RunConfig& c, const std::string& k, const ConfigValue& v) {
         const auto s = as_int(k, v);
         if (s < 0) throw Error(ErrorCode::Config, "'seed' must be non-negative");
         c.seed = static_cast<std::uint64_t>(s);
       },
       [](const RunConfig& c) -> std::optional<ConfigValue> {
         if (!c.seed) return std::nullopt;
         return int_value(static_cast<std::int64_t>(*c.seed));
       }},
      {"output_dir", [](RunConfig& c, const std::string& k, const ConfigValue& v) { c.output_dir = as_string(k, v); },
       [](const RunConfig& c) -> std::optional<ConfigValue> { return ConfigValue::of(c.output_dir.string()); }},

      {"grid.query_kinds",
       [](RunConfig& c, const std::string& k, const ConfigValue& v) {
         c.grid.query_kinds = as_enums<QueryKind>(k, v, parse_query_kind);
       },
       [](const RunConfig& c) -> std::optional<ConfigValue> { return enum_list(c.grid.query_kinds); }},
      {"grid.anchors",
       [](RunConfig& c, const std::string& k, const ConfigValue& v) {
         c.grid.anchors = as_enums<AnchorKind>(k, v, parse_anchor_kind);
       },
       [](const RunConfig& c) -> std::optional<ConfigValue> { return enum_list(c.grid.anchors); }},
      {"grid.directions",
       [](RunConfig& c, const std::string& k, const ConfigValue& v) {
         c.grid.directions = as_enums<Direction>(k, v, parse_direction);
       },
       [](const RunConfig& c) -> std::optional<ConfigValue> { return enum_list(c.grid.directions); }},
      {"grid.item_kinds",
       [](RunConfig& c, const std::string& k, const ConfigValue& v) {
         c.grid.item_kinds = as_enums<ItemKind>(k, v, parse_item_kind);
       },
       [](const RunConfig& c) -> std::optional<ConfigValue> { return enum_list(c.grid.item_kinds); }},
      {"grid.lengths", [](RunConfig& c, const std::string& k, const ConfigValue& v) { c.grid.lengths = as_ints(k, v); },
       [](const RunConfig& c) -> std::optional<ConfigValue> {
         std::vector<ConfigValue> out;
         for (int l : c.grid.lengths) out.push_back(int_value(l));
         return ConfigValue::of(std::move(out));
       }},
      {"grid.include_counting",
       [](RunConfig& c, const std::string& k, const ConfigValue& v) { c.grid.include_counting = as_bool(k, v); },
       [](const RunConfig& c) -> std::optional<ConfigValue> { return ConfigValue::of(c.grid.include_counting); }},
      {"grid.sequences_per_condition",
       [](RunConfig& c, const std::string& k, const ConfigValue& v) {
         c.grid.sequences_per_condition = as_small_int(k, v);
       },
       [](const RunConfig& c) -> std::optional<ConfigValue> { return int_value(c.grid.sequences_per_condition); }},
      {"grid.trials_per_position",
       [](RunConfig& c, const std::string& k, const ConfigValue& v) { c.grid.trials_per_position = as_small_int(k, v); },
       [](const RunConfig& c) -> std::optional<ConfigValue> {
         if (!c.grid.trials_per_position) return std::nullopt;
         return int_value(*c.grid.trials_per_position);
       }},
      {"grid.letter_pool",
       [](RunConfig& c, const std::string& k, const ConfigValue& v) { c.grid.letter_pool = as_string(k, v); },
       [](const RunConfig& c) -> std::optional<ConfigValue> { return ConfigValue::of(c.grid.letter_pool); }},
      {"grid.word_pool", [](RunConfig& c, const std::string& k, const ConfigValue& v) { c.grid.word_pool = as_string(k, v); },
       [](const RunConfig& c) -> std::optional<ConfigValue> { return ConfigValue::of(c.grid.word_pool); }},
      {"grid.list_format",
       [](RunConfig& c, const std::string& k, const ConfigValue& v) {
         const auto s = as_string(k, v);
         c.grid.list_format = wrap_parse(k, [&] { return parse_list_format(s); });
       },
       [](const RunConfig& c) -> std::optional<ConfigValue> {
         if (!c.grid.list_format) return std::nullopt;
         return ConfigValue::of(std::string(to_string(*c.grid.list_format)));
       }},
      {"grid.answer_style",
       [](RunConfig& c, const std::string& k, const ConfigValue& v) {
         const auto s = as_string(k, v);
         c.grid.answer_style = wrap_parse(k, [&] { return parse_answer_style(s); });
       },
       [](const RunConfig& c) -> std::optional<ConfigValue> {
         return ConfigValue::of(std::string(to_string(c.grid.answer_style)));
       }},
      {"grid.to_last_style",
       [](RunConfig& c, const std::string& k, const ConfigValue& v) { c.grid.to_last_style = as_bool(k, v); },
       [](const RunConfig& c) -> std::optional<ConfigValue> { return ConfigValue::of(c.grid.to_last_style); }},

      {"mixture.p_forward",
       [](RunConfig& c, const std::string& k, const ConfigValue& v) { c.mixture.p_forward = as_double(k, v); },
       [](const RunConfig& c) -> std::optional<ConfigValue> { return ConfigValue::of(c.mixture.p_forward); }},
      {"mixture.p_endpoint",
       [](RunConfig& c, const std::string& k, const ConfigValue& v) { c.mixture.p_endpoint = as_double(k, v); },
       [](const RunConfig& c) -> std::optional<ConfigValue> { return ConfigValue::of(c.mixture.p_endpoint); }},
      {"mixture.p_framed",
       [](RunConfig& c, const std::string& k, const ConfigValue& v) { c.mixture.p_framed = as_double(k, v); },
       [](const RunConfig& c) -> std::optional<ConfigValue> { return ConfigValue::of(c.mixture.p_framed); }},
      {"mixture.synthetic",
       [](RunConfig& c, const std::string& k, const ConfigValue& v) { c.mixture.counts.synthetic = as_small_int(k, v); },
       [](const RunConfig& c) -> std::optional<ConfigValue> { return int_value(c.mixture.counts.synthetic); }},
      {"mixture.code",
       [](RunConfig& c, const std::string& k, const ConfigValue& v) { c.mixture.counts.code = as_small_int(k, v); },
       [](const RunConfig& c) -> std::optional<ConfigValue> { return int_value(c.mixture.counts.code); }},
      {"mixture.adapted",
       [](RunConfig& c, const std::string& k, const ConfigValue& v) { c.mixture.counts.adapted = as_small_int(k, v); },
       [](const RunConfig& c) -> std::optional<ConfigValue> { return int_value(c.mixture.counts.adapted); }},
      {"mixture.queries_per_structure",
       [](RunConfig& c, const std::string& k, const ConfigValue& v) {
         c.mixture.queries_per_structure = as_small_int(k, v);
       },
       [](const RunConfig& c) -> std::optional<ConfigValue> { return int_value(c.mixture.queries_per_structure); }},
      {"mixture.min_length",
       [](RunConfig& c, const std::string& k, const ConfigValue& v) { c.mixture.min_length = as_small_int(k, v); },
       [](const RunConfig& c) -> std::optional<ConfigValue> { return int_value(c.mixture.min_length); }},
      {"mixture.max_length",
       [](RunConfig& c, const std::string& k, const ConfigValue& v) { c.mixture.max_length = as_small_int(k, v); },
       [](const RunConfig& c) -> std::optional<ConfigValue> { return int_value(c.mixture.max_length); }},
      {"mixture.pools", [](RunConfig& c, const std::string& k, const ConfigValue& v) { c.mixture.pools = as_strings(k, v); },
       [](const RunConfig& c) -> std::optional<ConfigValue> { return string_list(c.mixture.pools); }},

      {"corpus.adapted",
       [](RunConfig& c, const std::string& k, const ConfigValue& v) {
         c.adapted_corpora.clear();
         for (const auto& s : as_strings(k, v)) c.adapted_corpora.emplace_back(s);
       },
       [](const RunConfig& c) -> std::optional<ConfigValue> { return path_list(c.adapted_corpora); }},
      {"corpus.code",
       [](RunConfig& c, const std::string& k, const ConfigValue& v) {
         c.code_corpora.clear();
         for (const auto& s : as_strings(k, v)) c.code_corpora.emplace_back(s);
       },
       [](const RunConfig& c) -> std::optional<ConfigValue> { return path_list(c.code_corpora); }},
      {"corpus.id_field",
       [](RunConfig& c, const std::string& k, const ConfigValue& v) { c.corpus_fields.id_field = as_string(k, v); },
       [](const RunConfig& c) -> std::optional<ConfigValue> { return ConfigValue::of(c.corpus_fields.id_field); }},
      {"corpus.text_field",
       [](RunConfig& c, const std::string& k, const ConfigValue& v) { c.corpus_fields.text_field = as_string(k, v); },
       [](const RunConfig& c) -> std::optional<ConfigValue> { return ConfigValue::of(c.corpus_fields.text_field); }},
      {"corpus.turns_field",
       [](RunConfig& c, const std::string& k, const ConfigValue& v) { c.corpus_fields.turns_field = as_string(k, v); },
       [](const RunConfig& c) -> std::optional<ConfigValue> { return ConfigValue::of(c.corpus_fields.turns_field); }},
      {"corpus.role_key",
       [](RunConfig& c, const std::string& k, const ConfigValue& v) { c.corpus_fields.role_key = as_string(k, v); },
       [](const RunConfig& c) -> std::optional<ConfigValue> { return ConfigValue::of(c.corpus_fields.role_key); }},
      {"corpus.content_key",
       [](RunConfig& c, const std::string& k, const ConfigValue& v) { c.corpus_fields.content_key = as_string(k, v); },
       [](const RunConfig& c) -> std::optional<ConfigValue> { return ConfigValue::of(c.corpus_fields.content_key); }},

      {"backend.kind",
       [](RunConfig& c, const std::string& k, const ConfigValue& v) {
         const auto s = as_string(k, v);
         c.backend.kind = wrap_parse(k, [&] { return parse_backend_kind(s); });
       },
       [](const RunConfig& c) -> std::optional<ConfigValue> {
         return ConfigValue::of(std::string(to_string(c.backend.kind)));
       }},
      {"backend.id", [](RunConfig& c, const std::string& k, const ConfigValue& v) { c.backend.id = as_string(k, v); },
       [](const RunConfig& c) -> std::optional<ConfigValue> {
         if (c.backend.id.empty()) return std::nullopt;
         return ConfigValue::of(c.backend.id);
       }},
      {"backend.endpoint",
       [](RunConfig& c, const std::string& k, const ConfigValue& v) { c.backend.endpoint = as_string(k, v); },
       [](const RunConfig& c) -> std::optional<ConfigValue> { return ConfigValue::of(c.backend.endpoint); }},
      {"backend.model", [](RunConfig& c, const std::string& k, const ConfigValue& v) { c.backend.model = as_string(k, v); },
       [](const RunConfig& c) -> std::optional<ConfigValue> { return ConfigValue::of(c.backend.model); }},
      {"backend.temperature",
       [](RunConfig& c, const std::string& k, const ConfigValue& v) { c.backend.temperature = as_double(k, v); },
       [](const RunConfig& c) -> std::optional<ConfigValue> { return ConfigValue::of(c.backend.temperature); }},
      {"backend.max_tokens",
       [](RunConfig& c, const std::string& k, const ConfigValue& v) { c.backend.max_tokens = as_small_int(k, v); },
       [](const RunConfig& c) -> std::optional<ConfigValue> { return int_value(c.backend.max_tokens); }},
      {"backend.reasoning",
       [](RunConfig& c, const std::string& k, const ConfigValue& v) { c.backend.reasoning = as_bool(k, v); },
       [](const RunConfig& c) -> std::optional<ConfigValue> { return ConfigValue::of(c.backend.reasoning); }},
      {"backend.reasoning_budget",
       [](RunConfig& c, const std::string& k, const ConfigValue& v) { c.backend.reasoning_budget = as_small_int(k, v); },
       [](const RunConfig& c) -> std::optional<ConfigValue> { return int_value(c.backend.reasoning_budget); }},
      {"backend.reasoning_channel",
       [](RunConfig& c, const std::string& k, const ConfigValue& v) {
         const auto s = as_string(k, v);
         c.backend.reasoning_channel = wrap_parse(k, [&] { return parse_reasoning_channel(s); });
       },
       [](const RunConfig& c) -> std::optional<ConfigValue> {
         return ConfigValue::of(std::string(to_string(c.backend.reasoning_channel)));
       }},
      {"backend.timeout_seconds",
       [](RunConfig& c, const std::string& k, const ConfigValue& v) { c.backend.timeout_seconds = as_double(k, v); },
       [](const RunConfig& c) -> std::optional<ConfigValue> { return ConfigValue::of(c.backend.timeout_seconds); }},
      {"backend.max_retries",
       [](RunConfig& c, const std::string& k, const ConfigValue& v) { c.backend.max_retries = as_small_int(k, v); },
       [](const RunConfig& c) -> std::optional<ConfigValue> { return int_value(c.backend.max_retries); }},
      {"backend.initial_backoff_ms",
       [](RunConfig& c, const std::string& k, const ConfigValue& v) { c.backend.initial_backoff_ms = as_small_int(k, v); },
       [](const RunConfig& c) -> std::optional<ConfigValue> { return int_value(c.backend.initial_backoff_ms); }},
      {"backend.concurrency",
       [](RunConfig& c, const std::string& k, const ConfigValue& v) { c.backend.concurrency = as_small_int(k, v); },
       [](const RunConfig& c) -> std::optional<ConfigValue> { return int_value(c.backend.concurrency); }},
      {"backend.api_key_env",
       [](RunConfig& c, const std::string& k, const ConfigValue& v) { c.backend.api_key_env = as_string(k, v); },
       [](const RunConfig& c) -> std::optional<ConfigValue> { return ConfigValue::of(c.backend.api_key_env); }},
      // Never echoed into snapshots.
      {"backend.api_key", [](RunConfig& c, const std::string& k, const ConfigValue& v) { c.backend.api_key = as_string(k, v); },
       [](const RunConfig&) -> std::optional<ConfigValue> { return std::nullopt; }},
      {"backend.mock_seed",
       [](RunConfig& c, const std::string& k, const ConfigValue& v) {
         const auto s = as_int(k, v);
         if (s < 0) throw Error(ErrorCode::Config, "'backend.mock_seed' must be non-negative");
         c.backend.mock_seed = static_cast<std::uint64_t>(s);
       },
       [](const RunConfig& c) -> std::optional<ConfigValue> {
         return int_value(static_cast<std::int64_t>(c.backend.mock_seed));
       }},

      {"eval.cache_dir", [](RunConfig& c, const std::string& k, const ConfigValue& v) { c.cache_dir = as_string(k, v); },
       [](const RunConfig& c) -> std::optional<ConfigValue> { return ConfigValue::of(c.resolved_cache_dir().string()); }},
      {"eval.reasoning_comparison",
       [](RunConfig& c, const std::string& k, const ConfigValue& v) { c.reasoning_comparison = as_bool(k, v); },
       [](const RunConfig& c) -> std::optional<ConfigValue> { return ConfigValue::of(c.reasoning_comparison); }},
      {"pyindex.per_category",
       [](RunConfig& c, const std::string& k, const ConfigValue& v) { c.pyindex_per_category = as_small_int(k, v); },
       [](const RunConfig& c) -> std::optional<ConfigValue> { return int_value(c.pyindex_per_category); }},
  };
  return kFields;
}

std::string render_string(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default: out.push_back(c);
    }
  }
  return out + "\"";
}

}  // namespace

ConfigValue ConfigValue::of(bool v) {
  ConfigValue c;
  c.type = Type::Bool;
  c.boolean = v;
  return c;
}
ConfigValue ConfigValue::of(std::int64_t v) {
  ConfigValue c;
  c.type = Type::Int;
  c.integer = v;
  return c;
}
ConfigValue ConfigValue::of(double v) {
  ConfigValue c;
  c.type = Type::Float;
  c.floating = v;
  return c;
}
ConfigValue ConfigValue::of(std::string v) {
  ConfigValue c;
  c.type = Type::String;
  c.string = std::move(v);
  return c;
}
ConfigValue ConfigValue::of(std::vector<ConfigValue> v) {
  ConfigValue c;
  c.type = Type::Array;
  c.array = std::move(v);
  return c;
}

std::string ConfigValue::render() const {
  switch (type) {
    case Type::Bool: return boolean ? "true" : "false";
    case Type::Int: return std::to_string(integer);
    case Type::Float: {
      char buf[64];
      const auto res = std::to_chars(buf, buf + sizeof buf, floating);
      std::string s(buf, res.ptr);
      if (s.find_first_of(".eE") == std::string::npos) s += ".0";
      return s;
    }
    case Type::String: return render_string(string);
    case Type::Array: {
      std::string out = "[";
      for (std::size_t i = 0; i < array.size(); ++i) {
        if (i > 0) out += ", ";
        out += array[i].render();
      }
      return out + "]";
    }
  }
  return {};
}

void ConfigTable::set(const std::string& key, ConfigValue value) { values_[key] = std::move(value); }

const ConfigValue* ConfigTable::find(const std::string& key) const {
  const auto it = values_.find(key);
  return it == values_.end() ? nullptr : &it->second;
}

void ConfigTable::apply_override(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw Error(ErrorCode::Config, "override '" + std::string(assignment) + "' is not key=value");
  }
  std::string key(assignment.substr(0, eq));
  while (!key.empty() && key.back() == ' ') key.pop_back();
  const auto raw = assignment.substr(eq + 1);
  ConfigValue value;
  try {
    value = parse_config_value(raw);
  } catch (const Error&) {
    value = ConfigValue::of(std::string(raw));
  }
  set(key, std::move(value));
}

std::string ConfigTable::to_toml() const {
  std::map<std::string, std::vector<std::pair<std::string, const ConfigValue*>>> tables;
  for (const auto& [key, value] : values_) {
    const auto dot = key.rfind('.');
    const std::string table = dot == std::string::npos ? "" : key.substr(0, dot);
    const std::string leaf = dot == std::string::npos ? key : key.substr(dot + 1);
    tables[table].emplace_back(leaf, &value);
  }
  std::string out;
  for (const auto& [table, entries] : tables) {
    if (!table.empty()) out += (out.empty() ? "" : "\n") + std::string("[") + table + "]\n";
    for (const auto& [leaf, value] : entries) out += leaf + " = " + value->render() + "\n";
  }
  return out;
}

ConfigValue parse_config_value(std::string_view text) {
  Cursor cursor(text, "<value>");
  auto value = cursor.value();
  cursor.skip_layout();
  if (!cursor.done()) cursor.fail("unexpected characters after value");
  return value;
}

ConfigTable parse_config(std::string_view text, std::string_view origin) {
  ConfigTable table;
  Cursor cursor(text, origin);
  std::string prefix;
  while (!cursor.done()) {
    cursor.skip_blank();
    if (cursor.peek() == '#' || cursor.peek() == '\n') {
      cursor.end_of_line();
      continue;
    }
    if (cursor.done()) break;
    if (cursor.consume('[')) {
      if (cursor.peek() == '[') cursor.fail("arrays of tables are not supported");
      const auto name = cursor.key();
      cursor.skip_blank();
      if (!cursor.consume(']')) cursor.fail("expected ']'");
      prefix = name + ".";
      cursor.end_of_line();
      continue;
    }
    const auto key = prefix + cursor.key();
    cursor.skip_blank();
    if (!cursor.consume('=')) cursor.fail("expected '=' after key '" + key + "'");
    auto value = cursor.value();
    if (table.contains(key)) cursor.fail("duplicate key '" + key + "'");
    table.set(key, std::move(value));
    cursor.end_of_line();
  }
  return table;
}

ConfigTable load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const Error& e) {
    throw Error(ErrorCode::Config, e.detail());
  }
  return parse_config(text, path.string());
}

std::filesystem::path RunConfig::resolved_cache_dir() const {
  return cache_dir.empty() ? output_dir / "cache" : cache_dir;
}

RunConfig resolve_run_config(const ConfigTable& table) {
  RunConfig config;
  std::map<std::string, const Field*> by_key;
  for (const auto& f : fields()) by_key.emplace(f.key, &f);
  for (const auto& [key, value] : table.values()) {
    const auto it = by_key.find(key);
    if (it == by_key.end()) throw Error(ErrorCode::Config, "unknown setting '" + key + "'");
    it->second->set(config, key, value);
  }
  if (config.seed) {
    config.grid.seed = *config.seed;
    config.mixture.seed = *config.seed;
  }
  return config;
}

std::uint64_t require_seed(const RunConfig& config) {
  if (!config.seed) throw Error(ErrorCode::Config, "seed required");
  return *config.seed;
}

ConfigTable snapshot(const RunConfig& config) {
  ConfigTable table;
  for (const auto& f : fields()) {
    if (auto v = f.get(config)) table.set(f.key, std::move(*v));
  }
  return table;
}

}  // namespace poskit
