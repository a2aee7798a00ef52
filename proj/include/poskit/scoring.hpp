#pragma once

// Response parsing, exact-match accuracy, per-offset summaries, confusion
// matrices and forward/backward asymmetry.

#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "poskit/trial.hpp"

namespace poskit {

/// Trims, unwraps code fences, drops backticks and surrounding quotes.
std::string normalize_response(std::string_view raw);

/// Candidate whose first whole-token occurrence is earliest (longest wins a
/// tie). Word-like items match case-insensitively; letters and code lines
/// match exactly, except that a lone lowercase letter is uppercased.
ParsedAnswer parse_item_response(std::string_view raw, std::span<const Item> candidates);

/// First maximal run of decimal digits.
ParsedAnswer parse_integer_response(std::string_view raw);

ParsedAnswer parse_response(std::string_view raw, const PromptInstance& prompt);
bool is_correct(const ParsedAnswer& parsed, AnswerSpace space, std::string_view gold_text);

/// Re-parses raw_response from the stored candidates and updates correct.
void rescore(TrialRecord& trial);

using TrialPredicate = std::function<bool(const TrialRecord&)>;

/// Fraction correct over the subset; throws EmptySubset when it is empty.
double accuracy(std::span<const TrialRecord> trials, const TrialPredicate& subset = {});

struct PositionAccuracy {
  int position = 0;
  double accuracy = 0.0;
  int n_trials = 0;
};

/// Acc(T_n) for every queried value present, ascending.
std::vector<PositionAccuracy> per_offset_accuracy(std::span<const TrialRecord> trials);

/// Population standard deviation.
double population_sd(std::span<const double> values);

inline constexpr int kUnparseableBin = -1000000;

struct ConfusionMatrix {
  std::string condition_id;
  TaskKind task = TaskKind::PositionToItem;
  bool descending = false;  // backward tasks list values in decreasing order
  std::vector<int> queried;   // row labels
  std::vector<int> answered;  // column labels; an Unparseable column follows
  std::vector<std::vector<int>> counts;          // rows x (answered + 1)
  std::vector<std::vector<double>> row_percent;  // same shape, rows sum to 100

  int unparseable_column() const { return static_cast<int>(answered.size()); }
};

/// Answer bin of a trial in the queried-value space: the offset under the
/// trial's operator that selects the answered item, the integer itself for
/// integer answers, or kUnparseableBin.
int answered_bin(const TrialRecord& trial);

/// Throws MixedConditions unless all trials share one condition.
ConfusionMatrix confusion(std::span<const TrialRecord> trials);

struct ConditionSummary {
  std::string condition_id;
  Condition condition;
  int n_trials = 0;
  double accuracy = 0.0;  // pooled over trials
  double mean = 0.0;      // mean of per-position accuracies
  double sd = 0.0;        // SD across per-position accuracies
  std::vector<PositionAccuracy> positions;
};

struct AsymmetryEntry {
  std::string task;  // e.g. "p2i_end_letter_L20"
  ConditionSummary forward;
  ConditionSummary backward;
  double asymmetry = 0.0;  // forward.mean - backward.mean
};

struct AccuracyReport {
  int n_trials = 0;
  double overall = 0.0;
  std::vector<PositionAccuracy> per_offset;
  std::vector<ConditionSummary> conditions;
  std::vector<AsymmetryEntry> asymmetry;
};

/// Overall, per-offset and per-condition summaries; asymmetry pairs for
/// every task that has both directions.
AccuracyReport summarize(std::span<const TrialRecord> trials);

/// As summarize, but throws MissingDirection when no task has both directions.
AccuracyReport asymmetry_report(std::span<const TrialRecord> trials);

/// Groups trials by condition id, in first-seen order.
std::vector<std::pair<std::string, std::vector<TrialRecord>>> group_by_condition(std::span<const TrialRecord> trials);

void write_report_json(const AccuracyReport& report, const std::filesystem::path& path);
/// confusion_<condition>.csv: queried,answered,count,row_pct
void write_confusion_csv(const ConfusionMatrix& matrix, const std::filesystem::path& dir);
/// accuracy_<condition>.csv: position,accuracy,n_trials
void write_accuracy_csv(const ConditionSummary& summary, const std::filesystem::path& dir);
/// summary.csv: task,mean,sd,n_trials; asymmetry.csv:
/// task,forward_mean,forward_sd,backward_mean,backward_sd,asymmetry
void write_summary_csv(const AccuracyReport& report, const std::filesystem::path& dir);

}  // namespace poskit
