#include "poskit/scoring.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>

#include "poskit/error.hpp"
#include "poskit/io.hpp"
#include "poskit/serialize.hpp"

namespace poskit {
namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

bool is_word_byte(char c) {
  const auto u = static_cast<unsigned char>(c);
  return std::isalnum(u) || c == '_' || u >= 0x80;
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string strip_fences(const std::string& s) {
  const std::size_t open = s.find("```");
  if (open == std::string::npos) return s;
  std::size_t body = open + 3;
  // An info string ("python") may follow the opening fence on its own line.
  const std::size_t nl = s.find('\n', body);
  if (nl != std::string::npos) {
    const std::string info(trim(std::string_view(s).substr(body, nl - body)));
    if (info.find_first_of(" \t") == std::string::npos) body = nl + 1;
  }
  const std::size_t close = s.find("```", body);
  return close == std::string::npos ? s.substr(body) : s.substr(body, close - body);
}

// Strips matching quote pairs around the whole text, repeatedly.
std::string strip_quotes(std::string s) {
  static const std::pair<std::string_view, std::string_view> kPairs[] = {
      {"\"", "\""}, {"'", "'"}, {"\xE2\x80\x9C", "\xE2\x80\x9D"}, {"\xE2\x80\x98", "\xE2\x80\x99"}};
  bool changed = true;
  while (changed) {
    changed = false;
    s = std::string(trim(s));
    for (const auto& [open, close] : kPairs) {
      if (s.size() >= open.size() + close.size() && s.starts_with(open) && s.ends_with(close)) {
        s.erase(s.size() - close.size());
        s.erase(0, open.size());
        changed = true;
        break;
      }
    }
  }
  return s;
}

std::size_t first_whole_token(std::string_view text, std::string_view needle) {
  if (needle.empty()) return std::string_view::npos;
  for (std::size_t pos = text.find(needle); pos != std::string_view::npos; pos = text.find(needle, pos + 1)) {
    const bool left_ok = pos == 0 || !is_word_byte(needle.front()) || !is_word_byte(text[pos - 1]);
    const std::size_t after = pos + needle.size();
    const bool right_ok = after == text.size() || !is_word_byte(needle.back()) || !is_word_byte(text[after]);
    if (left_ok && right_ok) return pos;
  }
  return std::string_view::npos;
}

bool folds_case(ItemKind kind) { return kind == ItemKind::Word || kind == ItemKind::Generic; }

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string task_key(const Condition& c) {
  Condition key = c;
  key.direction = Direction::Forward;
  key.variant.clear();
  std::string id = key.id();
  const auto fwd = id.find("_fwd");
  if (fwd != std::string::npos) id.erase(fwd, 4);
  return id;
}

ConditionSummary summarize_group(std::string id, const Condition& condition, std::span<const TrialRecord> trials) {
  ConditionSummary s;
  s.condition_id = std::move(id);
  s.condition = condition;
  s.n_trials = static_cast<int>(trials.size());
  s.accuracy = accuracy(trials);
  s.positions = per_offset_accuracy(trials);
  std::vector<double> accs;
  for (const auto& p : s.positions) accs.push_back(p.accuracy);
  s.mean = std::accumulate(accs.begin(), accs.end(), 0.0) / static_cast<double>(accs.size());
  s.sd = population_sd(accs);
  return s;
}

Json to_json(const PositionAccuracy& p) {
  return Json{{"position", p.position}, {"accuracy", p.accuracy}, {"n_trials", p.n_trials}};
}

Json to_json(const ConditionSummary& s) {
  Json positions = Json::array();
  for (const auto& p : s.positions) positions.push_back(to_json(p));
  return Json{{"condition_id", s.condition_id}, {"condition", poskit::to_json(s.condition)},
              {"n_trials", s.n_trials},         {"accuracy", s.accuracy},
              {"mean", s.mean},                 {"sd", s.sd},
              {"positions", positions}};
}

}  // namespace

std::string ParsedAnswer::text() const {
  switch (kind) {
    case AnswerKind::Item: return item;
    case AnswerKind::Integer: return std::to_string(value);
    case AnswerKind::Unparseable: return {};
  }
  return {};
}

std::string_view to_string(AnswerKind kind) {
  switch (kind) {
    case AnswerKind::Item: return "item";
    case AnswerKind::Integer: return "integer";
    case AnswerKind::Unparseable: return "unparseable";
  }
  return "unparseable";
}

AnswerKind parse_answer_kind(std::string_view text) {
  for (auto k : {AnswerKind::Item, AnswerKind::Integer, AnswerKind::Unparseable}) {
    if (to_string(k) == text) return k;
  }
  throw Error(ErrorCode::Parse, "unknown answer kind '" + std::string(text) + "'");
}

std::string normalize_response(std::string_view raw) {
  const std::string unfenced = strip_fences(std::string(trim(raw)));
  const std::string_view s = trim(unfenced);
  std::string no_ticks;
  no_ticks.reserve(s.size());
  for (char c : s) {
    if (c != '`') no_ticks.push_back(c);
  }
  return strip_quotes(std::move(no_ticks));
}

ParsedAnswer parse_item_response(std::string_view raw, std::span<const Item> candidates) {
  std::string text = normalize_response(raw);
  if (text.size() == 1 && std::islower(static_cast<unsigned char>(text[0])) && !candidates.empty() &&
      candidates.front().kind == ItemKind::Letter) {
    text[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(text[0])));
  }
  const std::string folded = ascii_lower(text);
  std::size_t best_pos = std::string_view::npos;
  const Item* best = nullptr;
  for (const auto& c : candidates) {
    const bool fold = folds_case(c.kind);
    const std::size_t pos = fold ? first_whole_token(folded, ascii_lower(c.text)) : first_whole_token(text, c.text);
    if (pos == std::string_view::npos) continue;
    if (best == nullptr || pos < best_pos || (pos == best_pos && c.text.size() > best->text.size())) {
      best_pos = pos;
      best = &c;
    }
  }
  return best ? ParsedAnswer::item_answer(best->text) : ParsedAnswer::unparseable();
}

ParsedAnswer parse_integer_response(std::string_view raw) {
  const std::string text = normalize_response(raw);
  const auto begin = std::find_if(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; });
  if (begin == text.end()) return ParsedAnswer::unparseable();
  const auto end = std::find_if(begin, text.end(), [](char c) { return c < '0' || c > '9'; });
  std::int64_t value = 0;
  const auto [ptr, ec] = std::from_chars(&*begin, &*begin + (end - begin), value);
  if (ec != std::errc()) return ParsedAnswer::unparseable();
  return ParsedAnswer::integer_answer(value);
}

ParsedAnswer parse_response(std::string_view raw, const PromptInstance& prompt) {
  if (prompt.answer_space == AnswerSpace::Integer) return parse_integer_response(raw);
  if (!prompt.sequence) throw Error(ErrorCode::InvalidArgument, "item answers need the trial's sequence");
  return parse_item_response(raw, prompt.sequence->items());
}

bool is_correct(const ParsedAnswer& parsed, AnswerSpace space, std::string_view gold_text) {
  if (space == AnswerSpace::Item) return parsed.kind == AnswerKind::Item && parsed.item == gold_text;
  if (parsed.kind != AnswerKind::Integer) return false;
  std::int64_t gold = 0;
  const auto [ptr, ec] = std::from_chars(gold_text.data(), gold_text.data() + gold_text.size(), gold);
  return ec == std::errc() && ptr == gold_text.data() + gold_text.size() && parsed.value == gold;
}

void rescore(TrialRecord& trial) {
  if (!trial.error.empty()) {
    trial.parsed = ParsedAnswer::unparseable();
    trial.correct = false;
    return;
  }
  if (trial.answer_space == AnswerSpace::Integer) {
    trial.parsed = parse_integer_response(trial.raw_response);
  } else {
    std::vector<Item> items;
    for (const auto& c : trial.candidates) items.push_back(Item{c, trial.condition.item_kind});
    trial.parsed = parse_item_response(trial.raw_response, items);
  }
  trial.correct = is_correct(trial.parsed, trial.answer_space, trial.gold_text);
}

double accuracy(std::span<const TrialRecord> trials, const TrialPredicate& subset) {
  std::size_t n = 0;
  std::size_t hits = 0;
  for (const auto& t : trials) {
    if (subset && !subset(t)) continue;
    ++n;
    if (t.correct) ++hits;
  }
  if (n == 0) throw Error(ErrorCode::EmptySubset, "accuracy over an empty trial subset");
  return static_cast<double>(hits) / static_cast<double>(n);
}

std::vector<PositionAccuracy> per_offset_accuracy(std::span<const TrialRecord> trials) {
  std::map<int, std::pair<int, int>> tally;  // position -> (hits, n)
  for (const auto& t : trials) {
    auto& [hits, n] = tally[t.queried_value];
    ++n;
    if (t.correct) ++hits;
  }
  std::vector<PositionAccuracy> out;
  for (const auto& [position, hn] : tally) {
    out.push_back({position, static_cast<double>(hn.first) / hn.second, hn.second});
  }
  return out;
}

double population_sd(std::span<const double> values) {
  if (values.empty()) return 0.0;
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size()));
}

int answered_bin(const TrialRecord& trial) {
  switch (trial.parsed.kind) {
    case AnswerKind::Unparseable: return kUnparseableBin;
    case AnswerKind::Integer:
      return static_cast<int>(std::clamp<std::int64_t>(trial.parsed.value, kUnparseableBin / 2, -kUnparseableBin / 2));
    case AnswerKind::Item: break;
  }
  const auto it = std::find(trial.candidates.begin(), trial.candidates.end(), trial.parsed.item);
  if (it == trial.candidates.end()) return kUnparseableBin;
  const int p = static_cast<int>(it - trial.candidates.begin()) + 1;
  const int length = static_cast<int>(trial.candidates.size());
  const bool forward = trial.condition.direction == Direction::Forward;
  if (trial.condition.anchor == AnchorKind::Endpoint) return forward ? p : length - p + 1;
  return forward ? p - trial.anchor_position : trial.anchor_position - p;
}

ConfusionMatrix confusion(std::span<const TrialRecord> trials) {
  if (trials.empty()) throw Error(ErrorCode::EmptySubset, "confusion matrix over no trials");
  const Condition& c = trials.front().condition;
  for (const auto& t : trials) {
    if (!(t.condition == c)) {
      throw Error(ErrorCode::MixedConditions,
                  "trials span conditions '" + c.id() + "' and '" + t.condition.id() + "'");
    }
  }
  ConfusionMatrix m;
  m.condition_id = c.id();
  m.task = c.task;
  m.descending = c.direction == Direction::Backward &&
                 (c.task == TaskKind::PositionToItem || c.task == TaskKind::ItemToPosition);
  std::set<int> rows;
  std::set<int> cols;
  for (const auto& t : trials) {
    rows.insert(t.queried_value);
    cols.insert(t.queried_value);
    const int bin = answered_bin(t);
    if (bin != kUnparseableBin) cols.insert(bin);
  }
  m.queried.assign(rows.begin(), rows.end());
  m.answered.assign(cols.begin(), cols.end());
  if (m.descending) {
    std::reverse(m.queried.begin(), m.queried.end());
    std::reverse(m.answered.begin(), m.answered.end());
  }
  auto index_of = [](const std::vector<int>& axis, int v) {
    return static_cast<std::size_t>(std::find(axis.begin(), axis.end(), v) - axis.begin());
  };
  m.counts.assign(m.queried.size(), std::vector<int>(m.answered.size() + 1, 0));
  for (const auto& t : trials) {
    const int bin = answered_bin(t);
    const std::size_t col = bin == kUnparseableBin ? m.answered.size() : index_of(m.answered, bin);
    ++m.counts[index_of(m.queried, t.queried_value)][col];
  }
  m.row_percent.assign(m.queried.size(), std::vector<double>(m.answered.size() + 1, 0.0));
  for (std::size_t r = 0; r < m.counts.size(); ++r) {
    const int total = std::accumulate(m.counts[r].begin(), m.counts[r].end(), 0);
    if (total == 0) continue;
    for (std::size_t k = 0; k < m.counts[r].size(); ++k) {
      m.row_percent[r][k] = 100.0 * m.counts[r][k] / total;
    }
  }
  return m;
}

std::vector<std::pair<std::string, std::vector<TrialRecord>>> group_by_condition(std::span<const TrialRecord> trials) {
  std::vector<std::pair<std::string, std::vector<TrialRecord>>> groups;
  std::map<std::string, std::size_t> index;
  for (const auto& t : trials) {
    const auto id = t.condition.id();
    auto [it, inserted] = index.emplace(id, groups.size());
    if (inserted) groups.emplace_back(id, std::vector<TrialRecord>{});
    groups[it->second].second.push_back(t);
  }
  return groups;
}

AccuracyReport summarize(std::span<const TrialRecord> trials) {
  AccuracyReport report;
  report.n_trials = static_cast<int>(trials.size());
  report.overall = accuracy(trials);
  report.per_offset = per_offset_accuracy(trials);
  for (const auto& [id, group] : group_by_condition(trials)) {
    report.conditions.push_back(summarize_group(id, group.front().condition, group));
  }

  // Pair directions per task, pooling prompt variants.
  std::map<std::string, std::pair<std::vector<TrialRecord>, std::vector<TrialRecord>>> by_task;
  std::vector<std::string> order;
  for (const auto& t : trials) {
    if (t.condition.task != TaskKind::PositionToItem && t.condition.task != TaskKind::ItemToPosition) continue;
    const auto key = task_key(t.condition);
    if (!by_task.count(key)) order.push_back(key);
    auto& slot = by_task[key];
    (t.condition.direction == Direction::Forward ? slot.first : slot.second).push_back(t);
  }
  for (const auto& key : order) {
    const auto& [fwd, bwd] = by_task[key];
    if (fwd.empty() || bwd.empty()) continue;
    AsymmetryEntry entry;
    entry.task = key;
    entry.forward = summarize_group(key + "_fwd", fwd.front().condition, fwd);
    entry.backward = summarize_group(key + "_bwd", bwd.front().condition, bwd);
    entry.asymmetry = entry.forward.mean - entry.backward.mean;
    report.asymmetry.push_back(std::move(entry));
  }
  return report;
}

AccuracyReport asymmetry_report(std::span<const TrialRecord> trials) {
  auto report = summarize(trials);
  if (report.asymmetry.empty()) {
    throw Error(ErrorCode::MissingDirection, "no task has trials in both directions");
  }
  return report;
}

void write_report_json(const AccuracyReport& report, const std::filesystem::path& path) {
  Json per_offset = Json::array();
  for (const auto& p : report.per_offset) per_offset.push_back(to_json(p));
  Json conditions = Json::array();
  for (const auto& s : report.conditions) conditions.push_back(to_json(s));
  Json asymmetry = Json::array();
  for (const auto& a : report.asymmetry) {
    asymmetry.push_back(Json{{"task", a.task},
                             {"forward", to_json(a.forward)},
                             {"backward", to_json(a.backward)},
                             {"asymmetry", a.asymmetry}});
  }
  const Json doc{{"n_trials", report.n_trials},
                 {"overall", report.overall},
                 {"per_offset", per_offset},
                 {"conditions", conditions},
                 {"asymmetry", asymmetry}};
  write_text_file_atomic(path, doc.dump(2) + "\n");
}

void write_confusion_csv(const ConfusionMatrix& m, const std::filesystem::path& dir) {
  std::string out = "queried,answered,count,row_pct\n";
  for (std::size_t r = 0; r < m.queried.size(); ++r) {
    for (std::size_t k = 0; k <= m.answered.size(); ++k) {
      const std::string answered = k == m.answered.size() ? "unparseable" : std::to_string(m.answered[k]);
      out += std::to_string(m.queried[r]) + "," + answered + "," + std::to_string(m.counts[r][k]) + "," +
             format_number(m.row_percent[r][k]) + "\n";
    }
  }
  write_text_file_atomic(dir / ("confusion_" + m.condition_id + ".csv"), out);
}

void write_accuracy_csv(const ConditionSummary& s, const std::filesystem::path& dir) {
  std::vector<PositionAccuracy> rows = s.positions;
  if (s.condition.direction == Direction::Backward && s.condition.task != TaskKind::Counting &&
      s.condition.task != TaskKind::PyIndex) {
    std::reverse(rows.begin(), rows.end());
  }
  std::string out = "position,accuracy,n_trials\n";
  for (const auto& p : rows) {
    out += std::to_string(p.position) + "," + format_number(p.accuracy) + "," + std::to_string(p.n_trials) + "\n";
  }
  write_text_file_atomic(dir / ("accuracy_" + s.condition_id + ".csv"), out);
}

void write_summary_csv(const AccuracyReport& report, const std::filesystem::path& dir) {
  std::string summary = "task,mean,sd,n_trials\n";
  for (const auto& s : report.conditions) {
    summary += s.condition_id + "," + format_number(s.mean) + "," + format_number(s.sd) + "," +
               std::to_string(s.n_trials) + "\n";
  }
  write_text_file_atomic(dir / "summary.csv", summary);
  std::string asym = "task,forward_mean,forward_sd,backward_mean,backward_sd,asymmetry\n";
  for (const auto& a : report.asymmetry) {
    asym += a.task + "," + format_number(a.forward.mean) + "," + format_number(a.forward.sd) + "," +
            format_number(a.backward.mean) + "," + format_number(a.backward.sd) + "," + format_number(a.asymmetry) +
            "\n";
  }
  write_text_file_atomic(dir / "asymmetry.csv", asym);
}

}  // namespace poskit
