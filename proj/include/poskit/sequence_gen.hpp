#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "poskit/core_tasks.hpp"
#include "poskit/random.hpp"

namespace poskit {

struct ItemPool {
  std::string name;
  ItemKind kind = ItemKind::Word;
  std::vector<std::string> members;

  int size() const { return static_cast<int>(members.size()); }
};

/// Names of the pinned built-in pools.
const std::vector<std::string>& builtin_pool_names();

/// letters, digits, animals, fruits, cities, elements, languages, instruments.
const ItemPool& builtin_pool(std::string_view name);

/// Reads a pool file: UTF-8, one member per line, '#' starts a comment line.
ItemPool load_pool_file(const std::filesystem::path& path, std::string name, ItemKind kind);

/// Checks the pool invariants (distinct members, each at most 30 bytes).
void validate_pool(const ItemPool& pool);

/// L distinct items drawn uniformly without replacement.
Sequence sample_sequence(const ItemPool& pool, int length, Rng& stream);

struct LengthRange {
  int min = 1;
  int max = 1;
};

struct GenSpec {
  std::string pool = "letters";
  LengthRange length;
  std::uint64_t seed = 0;
  int count = 1;
};

/// spec.count sequences; sequence i is drawn from its own substream
/// derived from (seed, i), so the output does not depend on generation order.
std::vector<Sequence> generate_eval_set(const GenSpec& spec, const ItemPool& pool);
std::vector<Sequence> generate_eval_set(const GenSpec& spec);

}  // namespace poskit
