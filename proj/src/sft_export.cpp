#include "poskit/sft_export.hpp"

#include "poskit/error.hpp"
#include "poskit/io.hpp"

namespace poskit {
namespace {

bool continuation(unsigned char c) { return (c & 0xC0) == 0x80; }

Json counts_json(const std::map<std::string, std::int64_t>& m) {
  Json j = Json::object();
  for (const auto& [k, v] : m) j[k] = v;
  return j;
}

}  // namespace

bool is_valid_utf8(std::string_view text) {
  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    std::size_t n = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      n = 1;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      n = 2;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      n = 3;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + n >= text.size()) return false;
    for (std::size_t k = 1; k <= n; ++k) {
      const auto cc = static_cast<unsigned char>(text[i + k]);
      if (!continuation(cc)) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    static constexpr std::uint32_t kMin[] = {0, 0x80, 0x800, 0x10000};
    if (cp < kMin[n] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
    i += n + 1;
  }
  return true;
}

void validate_sft_example(const TrainingExample& example) {
  if (example.messages.empty()) throw Error(ErrorCode::SpanMismatch, "example has no messages");
  const std::string& target = example.target_text();
  if (!(example.span_begin < example.span_end && example.span_end <= target.size())) {
    throw Error(ErrorCode::SpanMismatch, "answer span [" + std::to_string(example.span_begin) + ", " +
                                             std::to_string(example.span_end) + ") is outside the target of " +
                                             std::to_string(target.size()) + " bytes");
  }
  const std::string_view slice = std::string_view(target).substr(example.span_begin, example.span_end - example.span_begin);
  if (!is_valid_utf8(slice) || (example.span_end < target.size() && continuation(static_cast<unsigned char>(target[example.span_end])))) {
    throw Error(ErrorCode::SpanMismatch, "answer span does not fall on UTF-8 boundaries");
  }
  verify_example(example);
}

std::vector<std::uint8_t> answer_mask(const TrainingExample& example) {
  const std::string& target = example.target_text();
  std::vector<std::uint8_t> mask(target.size(), 0);
  for (std::size_t i = example.span_begin; i < example.span_end && i < target.size(); ++i) mask[i] = 1;
  return mask;
}

std::string source_of(const TrainingExample& example) {
  const auto colon = example.provenance.find(':');
  return example.provenance.substr(0, colon);
}

Json SftManifest::to_json() const {
  Json cell_list = Json::array();
  for (const auto& [key, count] : cells) {
    const auto& [task, anchor, direction, source] = key;
    cell_list.push_back(
        Json{{"task", task}, {"anchor", anchor}, {"direction", direction}, {"source", source}, {"count", count}});
  }
  return Json{{"seed", seed},
              {"total", total},
              {"by_task", counts_json(by_task)},
              {"by_anchor", counts_json(by_anchor)},
              {"by_direction", counts_json(by_direction)},
              {"by_source", counts_json(by_source)},
              {"cells", cell_list},
              {"records", {{"file", kSftFileName}, {"sha256", records_sha256}}}};
}

SftWriter::SftWriter(std::filesystem::path dir, std::uint64_t seed)
    : dir_(std::move(dir)), digest_(std::make_unique<Sha256>()) {
  manifest_.seed = seed;
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create '" + dir_.string() + "': " + ec.message());
  tmp_ = dir_ / (std::string(kSftFileName) + ".tmp");
  out_.open(tmp_, std::ios::binary | std::ios::trunc);
  if (!out_) throw Error(ErrorCode::Io, "cannot write '" + tmp_.string() + "'");
  open_ = true;
}

SftWriter::~SftWriter() {
  if (open_) abort();
}

void SftWriter::abort() {
  out_.close();
  std::error_code ec;
  std::filesystem::remove(tmp_, ec);
  open_ = false;
}

void SftWriter::add(const TrainingExample& example) {
  if (!open_) throw Error(ErrorCode::Io, "sft writer is closed");
  try {
    validate_sft_example(example);
  } catch (...) {
    abort();
    throw;
  }
  const std::string line = poskit::to_json(example).dump() + "\n";
  out_.write(line.data(), static_cast<std::streamsize>(line.size()));
  digest_->update(line);
  ++manifest_.total;
  const std::string task(to_string(example.condition.task));
  const std::string anchor(to_string(example.condition.anchor));
  const std::string direction(to_string(example.condition.direction));
  const std::string source = source_of(example);
  ++manifest_.by_task[task];
  ++manifest_.by_anchor[anchor];
  ++manifest_.by_direction[direction];
  ++manifest_.by_source[source];
  ++manifest_.cells[{task, anchor, direction, source}];
}

SftManifest SftWriter::finish() {
  if (!open_) throw Error(ErrorCode::Io, "sft writer is closed");
  out_.flush();
  if (!out_) {
    abort();
    throw Error(ErrorCode::Io, "short write to '" + tmp_.string() + "'");
  }
  out_.close();
  open_ = false;
  manifest_.records_sha256 = digest_->finish();
  std::error_code ec;
  std::filesystem::rename(tmp_, dir_ / kSftFileName, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot publish '" + (dir_ / kSftFileName).string() + "'");
  write_text_file_atomic(dir_ / kManifestFileName, manifest_.to_json().dump(2) + "\n");
  return manifest_;
}

SftManifest export_sft(const std::vector<TrainingExample>& examples, const std::filesystem::path& dir,
                       std::uint64_t seed) {
  SftWriter writer(dir, seed);
  for (const auto& ex : examples) writer.add(ex);
  return writer.finish();
}

std::vector<TrainingExample> read_sft(const std::filesystem::path& file) {
  std::vector<TrainingExample> out;
  for (const auto& j : read_jsonl(file)) out.push_back(example_from_json(j));
  return out;
}

}  // namespace poskit
