#include "poskit/sequence_gen.hpp"

#include <fstream>
#include <map>
#include <numeric>
#include <unordered_set>

#include "poskit/error.hpp"

namespace poskit {
namespace {

constexpr std::size_t kMaxMemberBytes = 30;

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && (text[i] == ' ' || text[i] == '\n')) ++i;
    std::size_t j = i;
    while (j < text.size() && text[j] != ' ' && text[j] != '\n') ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

std::map<std::string, ItemPool, std::less<>> make_builtin_pools() {
  std::map<std::string, ItemPool, std::less<>> pools;

  ItemPool letters{"letters", ItemKind::Letter, {}};
  for (char c = 'A'; c <= 'Z'; ++c) letters.members.emplace_back(1, c);
  pools.emplace(letters.name, letters);

  ItemPool digits{"digits", ItemKind::Generic, {}};
  for (int i = 0; i < 100; ++i) digits.members.push_back(std::to_string(i));
  pools.emplace(digits.name, digits);

  pools.emplace("animals", ItemPool{"animals", ItemKind::Word, split_words(R"(
      aardvark alligator alpaca antelope armadillo badger bat beaver bison buffalo camel caribou
      cat cheetah chicken chimpanzee cobra cougar coyote crab crocodile crow deer dingo dog
      dolphin donkey duck eagle eel elephant elk falcon ferret flamingo fox frog gazelle gecko
      giraffe goat goose gorilla hamster hedgehog heron hippo horse hyena iguana jackal jaguar
      kangaroo koala lemur leopard lion lizard llama lobster lynx meerkat mole moose mouse
      octopus otter owl panda panther parrot pelican penguin pig pigeon rabbit raccoon rat raven
      rhino salmon seal shark sheep skunk sloth snake sparrow squid squirrel swan tiger toad
      turkey turtle walrus weasel whale wolf wombat yak zebra)")});

  pools.emplace("fruits", ItemPool{"fruits", ItemKind::Word, split_words(R"(
      apple apricot avocado banana blackberry blueberry boysenberry cantaloupe cherry clementine
      coconut cranberry currant date dragonfruit durian elderberry fig gooseberry grape
      grapefruit guava honeydew huckleberry jackfruit jujube kiwi kumquat lemon lime lingonberry
      loquat lychee mandarin mango mangosteen mulberry nectarine olive orange papaya
      passionfruit peach pear persimmon pineapple plantain plum pomegranate pomelo quince raisin
      rambutan raspberry redcurrant salak satsuma soursop starfruit strawberry tamarind
      tangerine watermelon yuzu feijoa medlar cloudberry rhubarb sapodilla longan)")});

  pools.emplace("cities", ItemPool{"cities", ItemKind::Word, split_words(R"(
      Amsterdam Athens Atlanta Auckland Baghdad Bangkok Barcelona Beijing Berlin Bogota Boston
      Brussels Budapest Cairo Calgary Chicago Copenhagen Dallas Denver Dublin Dubai Edinburgh
      Florence Geneva Glasgow Hamburg Hanoi Havana Helsinki Houston Istanbul Jakarta Karachi
      Kyoto Lagos Lima Lisbon London Madrid Manila Melbourne Miami Milan Montreal Moscow Mumbai
      Munich Nairobi Naples Osaka Oslo Ottawa Paris Perth Prague Quito Riga Rome Santiago
      Seattle Seoul Shanghai Singapore Stockholm Sydney Taipei Tokyo Toronto Vancouver Venice
      Vienna Warsaw Zurich)")});

  pools.emplace("elements", ItemPool{"elements", ItemKind::Word, split_words(R"(
      Hydrogen Helium Lithium Beryllium Boron Carbon Nitrogen Oxygen Fluorine Neon Sodium
      Magnesium Aluminum Silicon Phosphorus Sulfur Chlorine Argon Potassium Calcium Scandium
      Titanium Vanadium Chromium Manganese Iron Cobalt Nickel Copper Zinc Gallium Germanium
      Arsenic Selenium Bromine Krypton Rubidium Strontium Yttrium Zirconium Niobium Molybdenum
      Technetium Ruthenium Rhodium Palladium Silver Cadmium Indium Tin Antimony Tellurium Iodine
      Xenon Cesium Barium Lanthanum Cerium Neodymium Europium Gadolinium Platinum Gold Mercury
      Lead Bismuth Radon Radium Uranium Plutonium)")});

  pools.emplace("languages", ItemPool{"languages", ItemKind::Word, split_words(R"(
      English French Spanish German Italian Portuguese Dutch Swedish Norwegian Danish Finnish
      Icelandic Polish Czech Slovak Hungarian Romanian Bulgarian Greek Turkish Russian Ukrainian
      Serbian Croatian Slovenian Albanian Latvian Lithuanian Estonian Irish Welsh Basque Catalan
      Galician Maltese Arabic Hebrew Persian Kurdish Urdu Hindi Bengali Punjabi Gujarati Marathi
      Tamil Telugu Kannada Malayalam Sinhala Nepali Thai Lao Khmer Burmese Vietnamese Malay
      Indonesian Tagalog Mandarin Cantonese Japanese Korean Mongolian Tibetan Swahili Amharic
      Yoruba Igbo Hausa Zulu Xhosa Somali Afrikaans)")});

  pools.emplace("instruments", ItemPool{"instruments", ItemKind::Word, split_words(R"(
      accordion bagpipes banjo bassoon bongo bugle castanets cello clarinet cornet cymbal
      didgeridoo drum dulcimer euphonium fiddle flute glockenspiel gong guitar harmonica harp
      harpsichord kazoo keyboard lute lyre mandolin marimba maracas oboe ocarina organ piano
      piccolo recorder saxophone sitar snare sousaphone tambourine theremin timpani triangle
      trombone trumpet tuba ukulele viola violin xylophone zither balalaika bouzouki celesta
      clavichord djembe erhu koto shamisen tabla vibraphone melodica autoharp steelpan cajon
      conga harmonium oud pipa)")});

  for (const auto& [name, pool] : pools) validate_pool(pool);
  return pools;
}

const std::map<std::string, ItemPool, std::less<>>& pools() {
  static const auto instance = make_builtin_pools();
  return instance;
}

}  // namespace

const std::vector<std::string>& builtin_pool_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, pool] : pools()) out.push_back(name);
    return out;
  }();
  return names;
}

const ItemPool& builtin_pool(std::string_view name) {
  const auto& all = pools();
  auto it = all.find(name);
  if (it == all.end()) {
    throw Error(ErrorCode::InvalidArgument, "unknown item pool '" + std::string(name) + "'");
  }
  return it->second;
}

void validate_pool(const ItemPool& pool) {
  if (pool.members.empty()) {
    throw Error(ErrorCode::InvalidArgument, "pool '" + pool.name + "' is empty");
  }
  std::unordered_set<std::string_view> seen;
  for (const auto& member : pool.members) {
    if (member.empty() || member.size() > kMaxMemberBytes) {
      throw Error(ErrorCode::InvalidArgument, "pool '" + pool.name + "' member '" + member +
                                                  "' must be 1-30 bytes");
    }
    if (!seen.insert(member).second) {
      throw Error(ErrorCode::InvalidArgument, "pool '" + pool.name + "' has duplicate '" + member + "'");
    }
    make_item(member, pool.kind);
  }
}

ItemPool load_pool_file(const std::filesystem::path& path, std::string name, ItemKind kind) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::Io, "cannot open pool file " + path.string());
  }
  ItemPool pool{std::move(name), kind, {}};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    auto last = line.find_last_not_of(" \t");
    pool.members.push_back(line.substr(first, last - first + 1));
  }
  validate_pool(pool);
  return pool;
}

Sequence sample_sequence(const ItemPool& pool, int length, Rng& stream) {
  if (length < 1) {
    throw Error(ErrorCode::InvalidArgument, "sequence length must be positive");
  }
  if (length > pool.size()) {
    throw Error(ErrorCode::PoolTooSmall, "pool '" + pool.name + "' has " + std::to_string(pool.size()) +
                                             " members, cannot draw " + std::to_string(length));
  }
  // Partial Fisher-Yates over member indices.
  std::vector<int> order(pool.members.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<Item> items;
  items.reserve(static_cast<std::size_t>(length));
  for (int i = 0; i < length; ++i) {
    auto j = static_cast<std::size_t>(stream.uniform_int(i, pool.size() - 1));
    std::swap(order[static_cast<std::size_t>(i)], order[j]);
    items.push_back(Item{pool.members[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])], pool.kind});
  }
  return Sequence(std::move(items));
}

std::vector<Sequence> generate_eval_set(const GenSpec& spec, const ItemPool& pool) {
  if (spec.count < 1) {
    throw Error(ErrorCode::InvalidArgument, "count must be >= 1");
  }
  if (spec.length.min < 1 || spec.length.min > spec.length.max) {
    throw Error(ErrorCode::InvalidArgument, "invalid length range");
  }
  if (spec.length.max > pool.size()) {
    throw Error(ErrorCode::PoolTooSmall, "pool '" + pool.name + "' cannot supply length " +
                                             std::to_string(spec.length.max));
  }
  std::vector<Sequence> out;
  out.reserve(static_cast<std::size_t>(spec.count));
  for (int i = 0; i < spec.count; ++i) {
    Rng stream(derive_seed(spec.seed, {"sequence", pool.name, i}));
    const int length = static_cast<int>(stream.uniform_int(spec.length.min, spec.length.max));
    out.push_back(sample_sequence(pool, length, stream));
  }
  return out;
}

std::vector<Sequence> generate_eval_set(const GenSpec& spec) {
  return generate_eval_set(spec, builtin_pool(spec.pool));
}

}  // namespace poskit
