#include <algorithm>
#include <cctype>
#include <unordered_set>

#include "poskit/corpus_adapters.hpp"
#include "poskit/error.hpp"

namespace poskit {
namespace {

struct Line {
  std::size_t begin;
  std::size_t end;  // exclusive, excludes the newline and any trailing '\r'
  std::string_view text;
};

std::vector<Line> split_lines(std::string_view text) {
  std::vector<Line> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t nl = text.find('\n', start);
    std::size_t stop = nl == std::string_view::npos ? text.size() : nl;
    std::size_t content_end = stop;
    if (content_end > start && text[content_end - 1] == '\r') --content_end;
    lines.push_back({start, content_end, text.substr(start, content_end - start)});
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  return lines;
}

bool is_space(char c) { return c == ' ' || c == '\t'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && (is_space(s.front()) || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (is_space(s.back()) || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool is_blank(std::string_view s) { return trim(s).empty(); }

std::size_t indent_of(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size() && is_space(s[i])) ++i;
  return i;
}

std::size_t code_points(std::string_view s) {
  return static_cast<std::size_t>(
      std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

bool is_fence(std::string_view line) { return trim(line).substr(0, 3) == "```"; }

struct ListMarker {
  std::size_t indent;
  long number;     // numbered lists
  char delimiter;  // '.' or ')' for numbered; the bullet glyph's first byte otherwise
  std::string_view content;
};

std::optional<ListMarker> numbered_marker(std::string_view line) {
  const std::size_t indent = indent_of(line);
  std::size_t i = indent;
  std::size_t digits_begin = i;
  while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i])) && i - digits_begin < 9) ++i;
  if (i == digits_begin || i >= line.size() || (line[i] != '.' && line[i] != ')')) return std::nullopt;
  const char delimiter = line[i++];
  if (i >= line.size() || !is_space(line[i])) return std::nullopt;
  const long number = std::stol(std::string(line.substr(digits_begin, i - 1 - digits_begin)));
  return ListMarker{indent, number, delimiter, trim(line.substr(i))};
}

std::optional<ListMarker> bullet_marker(std::string_view line) {
  const std::size_t indent = indent_of(line);
  std::string_view rest = line.substr(indent);
  std::size_t marker_len = 0;
  char glyph = 0;
  if (!rest.empty() && (rest[0] == '-' || rest[0] == '*')) {
    marker_len = 1;
    glyph = rest[0];
  } else if (rest.substr(0, 3) == "\xE2\x80\xA2") {
    marker_len = 3;
    glyph = '\xE2';
  } else {
    return std::nullopt;
  }
  if (rest.size() <= marker_len || !is_space(rest[marker_len])) return std::nullopt;
  const std::string_view content = trim(rest.substr(marker_len));
  // "- - -" and "* * *" are thematic breaks, not bullets.
  if (!content.empty() && content.find_first_not_of("-*\xE2\x80\xA2 \t") == std::string_view::npos) {
    return std::nullopt;
  }
  return ListMarker{indent, 0, glyph, content};
}

std::vector<std::string_view> table_cells(std::string_view line) {
  std::string_view body = trim(line);
  if (!body.empty() && body.front() == '|') body.remove_prefix(1);
  if (!body.empty() && body.back() == '|') body.remove_suffix(1);
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    std::size_t bar = body.find('|', start);
    cells.push_back(trim(body.substr(start, bar == std::string_view::npos ? std::string_view::npos : bar - start)));
    if (bar == std::string_view::npos) break;
    start = bar + 1;
  }
  return cells;
}

bool is_table_separator(std::string_view line) {
  if (line.find('-') == std::string_view::npos) return false;
  for (auto cell : table_cells(line)) {
    if (cell.empty()) return false;
    std::string_view core = cell;
    if (core.front() == ':') core.remove_prefix(1);
    if (!core.empty() && core.back() == ':') core.remove_suffix(1);
    if (core.empty() || core.find_first_not_of('-') != std::string_view::npos) return false;
  }
  return true;
}

bool is_table_row(std::string_view line) { return !is_blank(line) && line.find('|') != std::string_view::npos; }

std::string flatten_row(std::string_view line) {
  std::string out;
  const auto cells = table_cells(line);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0) out += " | ";
    out += cells[i];
  }
  return out;
}

std::vector<std::string> usable_items(const std::vector<std::string>& raw) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& item : raw) {
    const std::string_view trimmed = trim(item);
    if (trimmed.empty() || code_points(trimmed) > kMaxItemCodePoints) continue;
    std::string text(trimmed);
    if (seen.insert(text).second) out.push_back(std::move(text));
  }
  return out;
}

// Scans a list run starting at `first`; returns one past the last line that
// belongs to the run and fills `raw` with the item contents.
template <typename MarkerFn, typename ContinuesFn>
std::size_t scan_list(const std::vector<Line>& lines, std::size_t first, MarkerFn marker_of, ContinuesFn continues,
                      std::vector<std::string>& raw, std::size_t& last_item_line) {
  const auto head = *marker_of(lines[first].text);
  ListMarker previous = head;
  raw.emplace_back(head.content);
  last_item_line = first;
  std::size_t i = first + 1;
  while (i < lines.size()) {
    const std::string_view text = lines[i].text;
    if (is_blank(text)) {
      // Blank lines stay inside the list only if the list resumes after them.
      std::size_t j = i;
      while (j < lines.size() && is_blank(lines[j].text)) ++j;
      if (j == lines.size()) break;
      auto m = marker_of(lines[j].text);
      if (!m || m->indent != head.indent || !continues(previous, *m)) break;
      i = j;
      continue;
    }
    if (is_fence(text)) break;
    auto m = marker_of(text);
    if (m && m->indent == head.indent) {
      if (!continues(previous, *m)) break;
      raw.emplace_back(m->content);
      previous = *m;
      last_item_line = i;
      ++i;
      continue;
    }
    // Deeper-indented lines are nested content of the current item.
    if (indent_of(text) > head.indent) {
      ++i;
      continue;
    }
    break;
  }
  return last_item_line + 1;
}

void emit(std::vector<ExtractedStructure>& out, StructureKind kind, const std::vector<std::string>& raw,
          const CorpusRecord& record, std::size_t begin, std::size_t end) {
  auto items = usable_items(raw);
  if (static_cast<int>(items.size()) < kMinStructureItems) return;
  out.push_back(ExtractedStructure{kind, std::move(items), record.source, begin, end});
}

}  // namespace

void validate_record(const CorpusRecord& record) {
  if (record.text.empty()) {
    throw Error(ErrorCode::InvalidArgument, "corpus record '" + record.source + "' has empty text");
  }
  std::size_t i = 0;
  if (!record.turns.empty() && record.turns.front().role == Role::System) i = 1;
  for (std::size_t k = 0; i < record.turns.size(); ++i, ++k) {
    const Role expected = k % 2 == 0 ? Role::User : Role::Assistant;
    if (record.turns[i].role != expected) {
      throw Error(ErrorCode::InvalidArgument, "corpus record '" + record.source +
                                                  "' turns must alternate user/assistant starting with user");
    }
  }
}

std::vector<ExtractedStructure> extract_structures(const CorpusRecord& record) {
  std::vector<ExtractedStructure> out;
  const std::string_view text = record.text;
  const auto lines = split_lines(text);
  std::size_t i = 0;
  while (i < lines.size()) {
    const std::string_view line = lines[i].text;
    if (is_fence(line)) {
      std::size_t close = i + 1;
      while (close < lines.size() && trim(lines[close].text) != "```") ++close;
      if (close == lines.size()) {
        ++i;
        continue;
      }
      std::vector<std::string> raw;
      for (std::size_t k = i + 1; k < close; ++k) {
        if (!is_blank(lines[k].text)) raw.emplace_back(lines[k].text);
      }
      emit(out, StructureKind::CodeBlock, raw, record, lines[i].begin, lines[close].end);
      i = close + 1;
      continue;
    }
    if (is_table_row(line) && i + 1 < lines.size() && is_table_separator(lines[i + 1].text)) {
      std::size_t k = i + 2;
      std::vector<std::string> raw;
      while (k < lines.size() && is_table_row(lines[k].text) && !is_fence(lines[k].text)) {
        raw.push_back(flatten_row(lines[k].text));
        ++k;
      }
      emit(out, StructureKind::MarkdownTable, raw, record, lines[i].begin, lines[k - 1].end);
      i = k;
      continue;
    }
    if (numbered_marker(line)) {
      std::vector<std::string> raw;
      std::size_t last = i;
      const std::size_t next = scan_list(
          lines, i, numbered_marker,
          [](const ListMarker& prev, const ListMarker& m) {
            return m.delimiter == prev.delimiter && m.number == prev.number + 1;
          },
          raw, last);
      emit(out, StructureKind::NumberedList, raw, record, lines[i].begin, lines[last].end);
      i = next;
      continue;
    }
    if (bullet_marker(line)) {
      std::vector<std::string> raw;
      std::size_t last = i;
      const std::size_t next = scan_list(
          lines, i, bullet_marker,
          [](const ListMarker& prev, const ListMarker& m) { return m.delimiter == prev.delimiter; }, raw, last);
      emit(out, StructureKind::BulletList, raw, record, lines[i].begin, lines[last].end);
      i = next;
      continue;
    }
    ++i;
  }
  return out;
}

std::string render_structure(const ExtractedStructure& structure) {
  std::string out;
  const auto& items = structure.items;
  switch (structure.kind) {
    case StructureKind::NumberedList:
      for (std::size_t i = 0; i < items.size(); ++i) out += std::to_string(i + 1) + ". " + items[i] + "\n";
      break;
    case StructureKind::BulletList:
      for (const auto& item : items) out += "- " + item + "\n";
      break;
    case StructureKind::MarkdownTable: {
      const std::size_t columns = items.empty() ? 1 : table_cells(items.front()).size();
      std::string header = "|";
      std::string separator = "|";
      for (std::size_t c = 0; c < columns; ++c) {
        header += " col" + std::to_string(c + 1) + " |";
        separator += " --- |";
      }
      out += header + "\n" + separator + "\n";
      for (const auto& item : items) out += "| " + item + " |\n";
      break;
    }
    case StructureKind::CodeBlock:
      out += "```\n";
      for (const auto& item : items) out += item + "\n";
      out += "```\n";
      break;
  }
  return out;
}

std::vector<Sequence> window_code(std::string_view snippet, Rng& stream) {
  std::vector<std::string> lines;
  for (const auto& line : split_lines(snippet)) {
    const auto trimmed = trim(line.text);
    if (!trimmed.empty()) lines.emplace_back(trimmed);
  }
  std::vector<Sequence> windows;
  std::size_t start = 0;
  while (lines.size() - start >= static_cast<std::size_t>(kMinWindowLines)) {
    const auto remaining = static_cast<std::int64_t>(lines.size() - start);
    const auto width = static_cast<std::size_t>(stream.uniform_int(kMinWindowLines, std::min<std::int64_t>(kMaxWindowLines, remaining)));
    std::unordered_set<std::string_view> seen;
    bool distinct = true;
    std::vector<Item> items;
    for (std::size_t k = start; k < start + width; ++k) {
      if (!seen.insert(lines[k]).second) {
        distinct = false;
        break;
      }
      items.push_back(Item{lines[k], ItemKind::CodeLine});
    }
    if (distinct) windows.emplace_back(std::move(items));
    start += width;
  }
  return windows;
}

std::string_view to_string(StructureKind kind) {
  switch (kind) {
    case StructureKind::NumberedList: return "numbered_list";
    case StructureKind::BulletList: return "bullet_list";
    case StructureKind::MarkdownTable: return "markdown_table";
    case StructureKind::CodeBlock: return "code_block";
  }
  return "numbered_list";
}

StructureKind parse_structure_kind(std::string_view text) {
  for (auto k : {StructureKind::NumberedList, StructureKind::BulletList, StructureKind::MarkdownTable,
                 StructureKind::CodeBlock}) {
    if (to_string(k) == text) return k;
  }
  throw Error(ErrorCode::Parse, "unknown structure kind '" + std::string(text) + "'");
}

}  // namespace poskit
