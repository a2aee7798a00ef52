#include "poskit/eval_grid.hpp"

#include "poskit/error.hpp"
#include "poskit/random.hpp"
#include "poskit/sequence_gen.hpp"

namespace poskit {

std::string GridCondition::id() const {
  Condition c;
  c.task = task_kind_for(kind);
  c.anchor = anchor;
  c.direction = direction;
  c.item_kind = item_kind;
  c.length = length;
  return c.id();
}

const std::string& pool_for(const GridSpec& spec, ItemKind kind) {
  if (kind == ItemKind::Letter) return spec.letter_pool;
  if (kind == ItemKind::Word) return spec.word_pool;
  throw Error(ErrorCode::Config, "evaluation grids support letter and word items only");
}

void validate_grid(const GridSpec& spec) {
  if (spec.item_kinds.empty() || spec.lengths.empty()) throw Error(ErrorCode::Config, "grid has no conditions");
  const bool retrieval = !spec.query_kinds.empty() && !spec.anchors.empty() && !spec.directions.empty();
  if (!retrieval && !spec.include_counting) throw Error(ErrorCode::Config, "grid has no conditions");
  if (spec.sequences_per_condition < 1) throw Error(ErrorCode::Config, "sequences_per_condition must be >= 1");
  if (spec.trials_per_position && *spec.trials_per_position < 1) {
    throw Error(ErrorCode::Config, "trials_per_position must be >= 1");
  }
  for (auto kind : spec.query_kinds) {
    if (kind == QueryKind::Counting) throw Error(ErrorCode::Config, "counting is enabled with include_counting");
  }
  for (auto kind : spec.item_kinds) {
    const auto& pool = builtin_pool(pool_for(spec, kind));
    if (pool.kind != kind) throw Error(ErrorCode::Config, "pool '" + pool.name + "' does not hold " + std::string(to_string(kind)) + " items");
    for (int length : spec.lengths) {
      if (length < 1) throw Error(ErrorCode::Config, "lengths must be >= 1");
      if (length > pool.size()) {
        throw Error(ErrorCode::Config, "length " + std::to_string(length) + " exceeds pool '" + pool.name + "'");
      }
    }
  }
  for (auto anchor : spec.anchors) {
    if (anchor != AnchorKind::Relative) continue;
    for (int length : spec.lengths) {
      if (length < 2) throw Error(ErrorCode::Config, "relative anchors need L >= 2");
    }
  }
}

std::vector<GridCondition> expand_grid(const GridSpec& spec) {
  validate_grid(spec);
  std::vector<GridCondition> out;
  for (auto kind : spec.query_kinds)
    for (auto anchor : spec.anchors)
      for (auto direction : spec.directions)
        for (auto item_kind : spec.item_kinds)
          for (int length : spec.lengths) out.push_back({kind, anchor, direction, item_kind, length});
  if (spec.include_counting) {
    for (auto item_kind : spec.item_kinds)
      for (int length : spec.lengths)
        out.push_back({QueryKind::Counting, AnchorKind::Endpoint, Direction::Forward, item_kind, length});
  }
  return out;
}

std::vector<PromptInstance> build_condition_prompts(const GridSpec& spec, const GridCondition& condition) {
  const ItemPool& pool = builtin_pool(pool_for(spec, condition.item_kind));
  const int count = spec.trials_per_position.value_or(spec.sequences_per_condition);
  const int length = condition.length;
  const std::string cid = condition.id();

  GenSpec gen;
  gen.pool = pool.name;
  gen.length = {length, length};
  gen.seed = derive_seed(spec.seed, {"eval-sequences", to_string(condition.item_kind), length});
  gen.count = count;
  const auto sequences = generate_eval_set(gen, pool);

  auto variant_for = [&](const IndexQuery& q) {
    PromptVariant v = default_variant(q, condition.item_kind);
    if (spec.list_format) v.list_format = *spec.list_format;
    v.answer_style = spec.answer_style;
    if (spec.to_last_style && is_compatible(PromptVariant{v.list_format, Phrasing::SecondToLastStyle, v.answer_style, {}}, q)) {
      v.phrasing = Phrasing::SecondToLastStyle;
    }
    return v;
  };

  std::vector<PromptInstance> out;
  for (int s = 0; s < count; ++s) {
    const Sequence& seq = sequences[static_cast<std::size_t>(s)];
    std::vector<IndexQuery> queries;
    if (condition.kind == QueryKind::Counting) {
      queries.push_back(IndexQuery::counting());
    } else if (condition.anchor == AnchorKind::Endpoint) {
      for (int n = 1; n <= length; ++n) queries.push_back(IndexQuery::position_to_item(Anchor::endpoint(), condition.direction, n));
    } else {
      for (int n = 1; n < length; ++n) {
        Rng anchor_stream(derive_seed(spec.seed, {"eval-anchor", cid, s, n}));
        const int r = condition.direction == Direction::Forward
                          ? static_cast<int>(anchor_stream.uniform_int(1, length - n))
                          : static_cast<int>(anchor_stream.uniform_int(n + 1, length));
        queries.push_back(IndexQuery::position_to_item(Anchor::relative(r), condition.direction, n));
      }
    }
    for (std::size_t k = 0; k < queries.size(); ++k) {
      IndexQuery q = queries[k];
      if (condition.kind == QueryKind::ItemToPosition) q = invert_query(seq, q);
      Rng demo_stream(derive_seed(spec.seed, {"eval-demos", cid, s, static_cast<int>(k)}));
      auto prompt = render_prompt(seq, q, variant_for(q), pool, demo_stream);
      prompt.seed = SeedCoords{spec.seed, s, static_cast<int>(k)};
      out.push_back(std::move(prompt));
    }
  }
  return out;
}

}  // namespace poskit
