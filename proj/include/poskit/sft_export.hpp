#pragma once

// Serialized training examples with answer-span byte offsets. A trainer
// builds the per-token mask m_t by marking every token whose character span
// overlaps [start, end) of the final assistant message; the loss is
//   L = -sum_t m_t * log p(y_t | y_<t, x).

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <string>
#include <tuple>
#include <vector>

#include "poskit/corpus_adapters.hpp"
#include "poskit/hash.hpp"
#include "poskit/serialize.hpp"

namespace poskit {

inline constexpr const char* kSftFileName = "sft.jsonl";
inline constexpr const char* kManifestFileName = "manifest.json";

/// Throws SpanMismatch unless 0 <= start < end <= |target|, the span is
/// valid UTF-8 on code-point boundaries, it slices answer_text exactly, and
/// the answer re-derives from (sequence, query).
void validate_sft_example(const TrainingExample& example);

bool is_valid_utf8(std::string_view text);

/// Per-byte indicator over the final assistant message: 1 inside the answer
/// span, 0 elsewhere.
std::vector<std::uint8_t> answer_mask(const TrainingExample& example);

struct SftManifest {
  std::uint64_t seed = 0;
  std::int64_t total = 0;
  std::map<std::string, std::int64_t> by_task;
  std::map<std::string, std::int64_t> by_anchor;
  std::map<std::string, std::int64_t> by_direction;
  std::map<std::string, std::int64_t> by_source;
  std::map<std::tuple<std::string, std::string, std::string, std::string>, std::int64_t> cells;
  std::string records_sha256;

  Json to_json() const;
};

/// "synthetic", "code" or "adapted": the provenance tag up to ':'.
std::string source_of(const TrainingExample& example);

/// Streams records to <dir>/sft.jsonl through a temporary file. finish()
/// publishes the data and manifest; an exception or destruction without
/// finish() leaves no output behind.
class SftWriter {
 public:
  SftWriter(std::filesystem::path dir, std::uint64_t seed);
  ~SftWriter();
  SftWriter(const SftWriter&) = delete;
  SftWriter& operator=(const SftWriter&) = delete;

  void add(const TrainingExample& example);
  SftManifest finish();

 private:
  void abort();

  std::filesystem::path dir_;
  std::filesystem::path tmp_;
  std::ofstream out_;
  SftManifest manifest_;
  std::unique_ptr<Sha256> digest_;
  bool open_ = false;
};

SftManifest export_sft(const std::vector<TrainingExample>& examples, const std::filesystem::path& dir,
                       std::uint64_t seed);

std::vector<TrainingExample> read_sft(const std::filesystem::path& file);

}  // namespace poskit
