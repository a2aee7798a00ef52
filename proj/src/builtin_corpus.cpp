// Procedural stand-ins for external corpora so the default mixture builds
// offline. Each snippet/record is a pure function of (seed, index).

#include <memory>

#include "poskit/corpus_adapters.hpp"

namespace poskit {
namespace {

const char* const kVerbs[] = {"load", "parse", "merge", "score", "filter", "render", "count", "split", "build", "check"};
const char* const kNouns[] = {"records", "tokens", "rows", "events", "users", "orders", "frames", "pages", "edges", "jobs"};

std::string pick_word(Rng& stream, std::string_view pool) {
  return builtin_pool(pool).members[static_cast<std::size_t>(stream.uniform_int(0, builtin_pool(pool).size() - 1))];
}

template <std::size_t N>
std::string pick(Rng& stream, const char* const (&words)[N]) {
  return words[stream.uniform_int(0, static_cast<std::int64_t>(N) - 1)];
}

std::string statement(Rng& stream, int k) {
  const auto a = std::to_string(stream.uniform_int(1, 999));
  const auto v = "v" + std::to_string(k);
  switch (stream.uniform_int(0, 7)) {
    case 0: return v + " = len(items) + " + a;
    case 1: return v + " = [x * " + a + " for x in items]";
    case 2: return "if " + v.substr(0, 1) + std::to_string(k) + "_flag > " + a + ":";
    case 3: return "result.append(" + a + ")";
    case 4: return v + " = config.get(\"" + pick(stream, kNouns) + "_" + a + "\", None)";
    case 5: return "log.debug(\"step " + std::to_string(k) + ": %s\", " + a + ")";
    case 6: return v + " = sum(items[:" + a + "])";
    default: return "assert " + v.substr(0, 1) + std::to_string(k) + " != " + a;
  }
}

std::string code_body(Rng& stream, int lines) {
  std::string out;
  const std::string name = pick(stream, kVerbs) + "_" + pick(stream, kNouns);
  out += "def " + name + "(items, config, log):\n";
  out += "    result = []\n";
  for (int k = 0; k < lines - 3; ++k) out += "    " + statement(stream, k) + "\n";
  out += "    return result\n";
  return out;
}

std::vector<std::string> distinct_words(Rng& stream, std::string_view pool, int count) {
  auto seq = sample_sequence(builtin_pool(pool), count, stream);
  return seq.texts();
}

std::string structure_text(Rng& stream, StructureKind kind, int count) {
  static const char* const kPools[] = {"animals", "fruits", "cities", "elements", "languages", "instruments"};
  const std::string pool = kPools[stream.uniform_int(0, 5)];
  const auto words = distinct_words(stream, pool, count);
  std::string out;
  switch (kind) {
    case StructureKind::NumberedList:
      for (int i = 0; i < count; ++i) out += std::to_string(i + 1) + ". " + words[i] + "\n";
      break;
    case StructureKind::BulletList: {
      const char* marker = stream.bernoulli(0.5) ? "- " : "* ";
      for (const auto& w : words) out += marker + w + "\n";
      break;
    }
    case StructureKind::MarkdownTable:
      out += "| name | rank |\n| --- | ---: |\n";
      for (int i = 0; i < count; ++i) out += "| " + words[i] + " | " + std::to_string(i + 1) + " |\n";
      break;
    case StructureKind::CodeBlock:
      out += "```\n" + code_body(stream, count) + "```\n";
      break;
  }
  return out;
}

std::string prose(Rng& stream) {
  return "Here are some notes on " + pick_word(stream, "cities") + " and " + pick_word(stream, "languages") + ".";
}

}  // namespace

std::string builtin_code_snippet(std::uint64_t seed, std::size_t index) {
  Rng stream(derive_seed(seed, {"builtin-code", static_cast<std::uint64_t>(index)}));
  // Occasional short snippets exercise the discard rule.
  const int lines = stream.bernoulli(0.1) ? static_cast<int>(stream.uniform_int(3, 4))
                                          : static_cast<int>(stream.uniform_int(8, 45));
  if (lines < 5) {
    std::string out;
    for (int k = 0; k < lines; ++k) out += "x" + std::to_string(k) + " = " + std::to_string(k) + "\n";
    return out;
  }
  return code_body(stream, lines);
}

CorpusRecord builtin_adapted_record(std::uint64_t seed, std::size_t index) {
  Rng stream(derive_seed(seed, {"builtin-adapted", static_cast<std::uint64_t>(index)}));
  const auto kind = static_cast<StructureKind>(stream.uniform_int(0, 3));
  const int count = static_cast<int>(stream.uniform_int(5, kind == StructureKind::CodeBlock ? 20 : 14));
  std::string body = prose(stream) + "\n\n" + structure_text(stream, kind, count) + "\nLet me know if you need more.";
  CorpusRecord record;
  record.source = "builtin-" + std::to_string(index);
  if (stream.bernoulli(0.5)) {
    record.turns.push_back({Role::User, "Can you give me a list of " + pick(stream, kNouns) + "?"});
    record.turns.push_back({Role::Assistant, body});
  }
  record.text = std::move(body);
  return record;
}

SnippetSource builtin_code_source(std::uint64_t seed) {
  auto next = std::make_shared<std::size_t>(0);
  return [seed, next]() -> std::optional<std::string> { return builtin_code_snippet(seed, (*next)++); };
}

RecordSource builtin_adapted_source(std::uint64_t seed) {
  auto next = std::make_shared<std::size_t>(0);
  return [seed, next]() -> std::optional<CorpusRecord> { return builtin_adapted_record(seed, (*next)++); };
}

}  // namespace poskit
