#include <doctest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "poskit/eval_grid.hpp"
#include "poskit/eval_runner.hpp"
#include "poskit/io.hpp"
#include "poskit/scoring.hpp"
#include "poskit/serialize.hpp"
#include "support/test_util.hpp"

using namespace poskit;

namespace {

std::vector<Item> items(std::initializer_list<const char*> texts, ItemKind kind) {
  std::vector<Item> out;
  for (const char* t : texts) out.push_back(Item{t, kind});
  return out;
}

TrialRecord trial(int queried, const std::string& answered, bool correct, Direction d = Direction::Forward) {
  TrialRecord t;
  t.condition.task = TaskKind::PositionToItem;
  t.condition.direction = d;
  t.condition.length = 5;
  t.candidates = {"A", "B", "C", "D", "E"};
  t.queried_value = queried;
  t.gold_text = t.candidates[static_cast<std::size_t>(queried - 1)];
  t.parsed = answered.empty() ? ParsedAnswer::unparseable() : ParsedAnswer::item_answer(answered);
  t.correct = correct;
  return t;
}

std::vector<TrialRecord> mock_trials(BackendKind kind, Direction direction, int length, int sequences,
                                     std::uint64_t mock_seed = 7) {
  GridSpec spec;
  spec.seed = 42;
  spec.item_kinds = {ItemKind::Letter};
  spec.lengths = {length};
  spec.sequences_per_condition = sequences;
  const GridCondition gc{QueryKind::PositionToItem, AnchorKind::Endpoint, direction, ItemKind::Letter, length};
  BackendConfig cfg;
  cfg.kind = kind;
  cfg.mock_seed = mock_seed;
  auto backend = make_backend(cfg);
  return run_condition(build_condition_prompts(spec, gc), *backend, cfg);
}

void check_row_stochastic(const ConfusionMatrix& m) {
  for (std::size_t r = 0; r < m.counts.size(); ++r) {
    const int n = std::accumulate(m.counts[r].begin(), m.counts[r].end(), 0);
    if (n == 0) continue;
    const double total = std::accumulate(m.row_percent[r].begin(), m.row_percent[r].end(), 0.0);
    CHECK(std::abs(total - 100.0) <= 1e-9);
  }
}

}  // namespace

TEST_CASE("parse_item_response examples") {
  const auto xvzy = items({"X", "V", "Z", "Y"}, ItemKind::Letter);
  CHECK(parse_item_response("```\nG\n```", items({"A", "G"}, ItemKind::Letter)) == ParsedAnswer::item_answer("G"));
  CHECK(parse_item_response("The answer is Z.", xvzy) == ParsedAnswer::item_answer("Z"));
  CHECK(parse_item_response("Q or Z", items({"Q", "R", "Z"}, ItemKind::Letter)) == ParsedAnswer::item_answer("Q"));
  CHECK(parse_item_response("", xvzy) == ParsedAnswer::unparseable());
}

TEST_CASE("parse_integer_response examples") {
  CHECK(parse_integer_response("It is at the 4th position.") == ParsedAnswer::integer_answer(4));
  CHECK(parse_integer_response("20") == ParsedAnswer::integer_answer(20));
  CHECK(parse_integer_response("no idea") == ParsedAnswer::unparseable());
}

TEST_CASE("normalize_response strips fences, backticks and quotes") {
  CHECK(normalize_response("```python\nx\n```") == "x");
  CHECK(normalize_response("  `Z`  ") == "Z");
  CHECK(normalize_response("\"'Q'\"") == "Q");
  CHECK(normalize_response("\xE2\x80\x9CX\xE2\x80\x9D") == "X");
  CHECK(normalize_response("plain") == "plain");
}

TEST_CASE("scoring is deterministic") {
  const auto cands = items({"apple", "pineapple", "grape"}, ItemKind::Word);
  for (const char* raw : {"pineapple", "grape or apple", "nothing", "\"Apple\""}) {
    CHECK(parse_item_response(raw, cands) == parse_item_response(raw, cands));
  }
}

TEST_CASE("hand-labeled scoring fixture") {
  const auto rows = read_jsonl(test::fixture_dir() / "scoring_pairs.jsonl");
  const auto meta = Json::parse(read_text_file(test::fixture_dir() / "scoring_pairs.meta.json"));
  REQUIRE(rows.size() == 100);
  std::vector<TrialRecord> trials;
  std::set<std::string> categories;
  for (const auto& row : rows) {
    TrialRecord t;
    t.answer_space = parse_answer_space(row.at("answer_space").get<std::string>());
    t.condition.item_kind = parse_item_kind(row.at("item_kind").get<std::string>());
    t.candidates = row.at("candidates").get<std::vector<std::string>>();
    t.gold_text = row.at("gold").get<std::string>();
    t.raw_response = row.at("response").get<std::string>();
    rescore(t);
    CAPTURE(row.at("id").get<int>());
    CAPTURE(t.raw_response);
    if (row.at("expected").is_null()) {
      CHECK(t.parsed.kind == AnswerKind::Unparseable);
    } else {
      CHECK(t.parsed.parsed());
      CHECK(t.parsed.text() == row.at("expected").get<std::string>());
    }
    CHECK(t.correct == row.at("correct").get<bool>());
    categories.insert(row.at("category").get<std::string>());
    trials.push_back(t);
  }
  CHECK(categories.size() == 6);
  const int correct = meta.at("correct").get<int>();
  CHECK(correct == 59);
  CHECK(accuracy(trials) == static_cast<double>(correct) / 100.0);
}

TEST_CASE("accuracy examples and exactness") {
  std::vector<TrialRecord> t = {trial(1, "A", true), trial(2, "B", true), trial(3, "C", true), trial(4, "A", false)};
  CHECK(accuracy(t) == 0.75);
  CHECK_ERROR_CODE(accuracy(t, [](const TrialRecord& r) { return r.queried_value > 10; }), ErrorCode::EmptySubset);
  CHECK(accuracy(t, [](const TrialRecord& r) { return r.queried_value <= 2; }) == 1.0);

  std::vector<TrialRecord> all;
  for (int i = 1; i <= 5; ++i) all.push_back(trial(i, std::string(1, static_cast<char>('A' + i - 1)), true));
  CHECK(accuracy(all) == 1.0);
  all.push_back(trial(1, "E", false));
  CHECK(accuracy(all) == doctest::Approx(1.0 - 1.0 / 6.0));
}

TEST_CASE("overall accuracy is the count-weighted mean of per-offset accuracy") {
  const auto trials = mock_trials(BackendKind::MockRandom, Direction::Forward, 10, 50);
  double weighted = 0.0;
  int n = 0;
  for (const auto& p : per_offset_accuracy(trials)) {
    weighted += p.accuracy * p.n_trials;
    n += p.n_trials;
  }
  CHECK(n == static_cast<int>(trials.size()));
  CHECK(weighted / n == doctest::Approx(accuracy(trials)).epsilon(1e-12));
}

TEST_CASE("confusion examples") {
  const std::vector<TrialRecord> two = {trial(3, "C", true), trial(3, "E", false)};
  const auto m = confusion(two);
  REQUIRE(m.queried == std::vector<int>{3});
  REQUIRE(m.answered == std::vector<int>{3, 5});
  CHECK(m.row_percent[0][0] == 50.0);
  CHECK(m.row_percent[0][1] == 50.0);
  CHECK(m.row_percent[0][m.unparseable_column()] == 0.0);

  const std::vector<TrialRecord> missed = {trial(2, "", false)};
  CHECK(confusion(missed).counts[0][confusion(missed).unparseable_column()] == 1);

  std::vector<TrialRecord> mixed = {trial(1, "A", true), trial(1, "A", true, Direction::Backward)};
  CHECK_ERROR_CODE(confusion(mixed), ErrorCode::MixedConditions);
  CHECK_ERROR_CODE(confusion(std::vector<TrialRecord>{}), ErrorCode::EmptySubset);
}

TEST_CASE("integer answers bin at their value") {
  TrialRecord t = trial(3, "", false);
  t.condition.task = TaskKind::ItemToPosition;
  t.parsed = ParsedAnswer::integer_answer(4);
  CHECK(answered_bin(t) == 4);
  t.parsed = ParsedAnswer::integer_answer(-2);
  CHECK(answered_bin(t) == -2);
  t.parsed = ParsedAnswer::integer_answer(std::int64_t{1} << 40);
  CHECK(answered_bin(t) == -kUnparseableBin / 2);
  t.parsed = ParsedAnswer::integer_answer(3);
  const auto m = confusion(std::vector<TrialRecord>{t});
  CHECK(m.answered == std::vector<int>{3});
  CHECK(m.counts[0][0] == 1);
}

TEST_CASE("backward confusion bins follow the operator offset and descend") {
  // Backward endpoint over A..E: answering D means offset 2 from the end.
  const std::vector<TrialRecord> t = {trial(2, "D", true, Direction::Backward), trial(1, "D", false, Direction::Backward)};
  CHECK(answered_bin(t[0]) == 2);
  const auto m = confusion(t);
  CHECK(m.descending);
  CHECK(m.queried == std::vector<int>{2, 1});
  CHECK(m.answered == std::vector<int>{2, 1});

  TrialRecord rel = trial(1, "B", true, Direction::Backward);
  rel.condition.anchor = AnchorKind::Relative;
  rel.anchor_position = 4;
  CHECK(answered_bin(rel) == 2);
  rel.condition.direction = Direction::Forward;
  rel.anchor_position = 1;
  CHECK(answered_bin(rel) == 1);
}

TEST_CASE("oracle confusion is diagonal and random confusion is row stochastic") {
  const auto oracle = mock_trials(BackendKind::MockOracle, Direction::Backward, 10, 50);
  const auto m = confusion(oracle);
  for (std::size_t r = 0; r < m.queried.size(); ++r) {
    for (std::size_t c = 0; c <= m.answered.size(); ++c) {
      const bool diagonal = c < m.answered.size() && m.answered[c] == m.queried[r];
      if (diagonal) {
        CHECK(m.row_percent[r][c] == 100.0);
      } else {
        CHECK(m.counts[r][c] == 0);
      }
    }
  }
  check_row_stochastic(m);
  check_row_stochastic(confusion(mock_trials(BackendKind::MockRandom, Direction::Forward, 20, 50)));
}

TEST_CASE("mock-random L=10 confusion matches the frozen fixtures") {
  test::TempDir dir;
  for (auto [direction, name] : {std::pair{Direction::Forward, "fwd"}, std::pair{Direction::Backward, "bwd"}}) {
    const auto m = confusion(mock_trials(BackendKind::MockRandom, direction, 10, 50));
    write_confusion_csv(m, dir.path());
    const auto produced = read_text_file(dir / ("confusion_" + m.condition_id + ".csv"));
    const auto frozen =
        read_text_file(test::fixture_dir() / "golden" / ("confusion_mock_random_L10_" + std::string(name) + ".csv"));
    CHECK(produced == frozen);
  }
}

TEST_CASE("asymmetry of a forward oracle against a backward random mock") {
  auto trials = mock_trials(BackendKind::MockOracle, Direction::Forward, 20, 100);
  const auto backward = mock_trials(BackendKind::MockRandom, Direction::Backward, 20, 100);
  trials.insert(trials.end(), backward.begin(), backward.end());
  const auto report = asymmetry_report(trials);
  REQUIRE(report.asymmetry.size() == 1);
  const auto& a = report.asymmetry[0];
  CHECK(a.task == "p2i_end_letter_L20");
  CHECK(a.forward.mean == 1.0);
  const double n = static_cast<double>(backward.size());
  const double sigma = std::sqrt(0.05 * 0.95 / n);
  CHECK(std::abs(a.asymmetry - 0.95) <= 4 * sigma);
}

TEST_CASE("symmetric oracle has zero asymmetry and a missing direction is reported") {
  auto trials = mock_trials(BackendKind::MockOracle, Direction::Forward, 5, 10);
  CHECK_ERROR_CODE(asymmetry_report(trials), ErrorCode::MissingDirection);
  const auto backward = mock_trials(BackendKind::MockOracle, Direction::Backward, 5, 10);
  trials.insert(trials.end(), backward.begin(), backward.end());
  const auto report = asymmetry_report(trials);
  REQUIRE(report.asymmetry.size() == 1);
  CHECK(report.asymmetry[0].asymmetry == 0.0);
  CHECK(report.overall == 1.0);
}

TEST_CASE("summary table columns") {
  auto trials = mock_trials(BackendKind::MockRandom, Direction::Forward, 5, 20);
  const auto backward = mock_trials(BackendKind::MockRandom, Direction::Backward, 5, 20);
  trials.insert(trials.end(), backward.begin(), backward.end());
  test::TempDir dir;
  const auto report = summarize(trials);
  write_summary_csv(report, dir.path());
  write_report_json(report, dir / "report.json");
  const auto summary = read_text_file(dir / "summary.csv");
  CHECK(summary.rfind("task,mean,sd,n_trials\n", 0) == 0);
  const auto asym = read_text_file(dir / "asymmetry.csv");
  CHECK(asym.rfind("task,forward_mean,forward_sd,backward_mean,backward_sd,asymmetry\n", 0) == 0);
  const auto j = Json::parse(read_text_file(dir / "report.json"));
  CHECK(j.at("n_trials").get<int>() == static_cast<int>(trials.size()));

  for (const auto& s : report.conditions) {
    std::vector<double> accs;
    for (const auto& p : s.positions) accs.push_back(p.accuracy);
    CHECK(s.sd == doctest::Approx(population_sd(accs)));
  }
  const std::vector<double> v = {0.0, 1.0};
  CHECK(population_sd(v) == 0.5);
}

TEST_CASE("rescore treats malformed trials as unparseable") {
  TrialRecord t = trial(1, "A", true);
  t.raw_response = "A";
  t.condition.item_kind = ItemKind::Letter;
  t.error = "MalformedResponse: no choices";
  rescore(t);
  CHECK_FALSE(t.correct);
  CHECK(t.parsed.kind == AnswerKind::Unparseable);
}
