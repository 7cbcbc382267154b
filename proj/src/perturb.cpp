#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "rubricjudge/perturb.hpp"
#include "rubricjudge/rng.hpp"

namespace rubricjudge {

namespace {

const char* const kDefaultOcrRows[] = {
    "rn\tm",  "m\trn",  "cl\td",  "vv\tw",  "w\tvv",  "nn\tm",
    "o\t0",   "O\t0",   "l\t1",   "I\tl,1", "1\tl",   "s\t5",
    "S\t5",   "5\ts",   "B\t8",   "8\tB",   "g\t9,q", "q\tg",
    "e\tc",   "c\te",   "a\to",   "u\tv",   "v\tu",   "h\tb",
    "b\th",   "Z\t2",   "G\t6",
};

const char* const kDefaultQwertyRows[] = {
    "q\twa",     "w\tqeas",   "e\twrsd",   "r\tetdf",   "t\tryfg",   "y\ttugh",
    "u\tyihj",   "i\tuojk",   "o\tipkl",   "p\tol",     "a\tqwsz",   "s\tawedzx",
    "d\tserfxc", "f\tdrtgcv", "g\tftyhvb", "h\tgyujbn", "j\thuiknm", "k\tjiolm",
    "l\tkop",    "z\tasx",    "x\tzsdc",   "c\txdfv",   "v\tcfgb",   "b\tvghn",
    "n\tbhjm",   "m\tnjk",
};

const char* const kDefaultHomoglyphRows[] = {
    "a\t\xD0\xB0", "c\t\xD1\x81", "e\t\xD0\xB5", "o\t\xD0\xBE", "p\t\xD1\x80",
    "x\t\xD1\x85", "y\t\xD1\x83", "i\t\xD1\x96", "s\t\xD1\x95", "j\t\xD1\x98",
    "A\t\xD0\x90", "B\t\xD0\x92", "C\t\xD0\xA1", "E\t\xD0\x95", "H\t\xD0\x9D",
    "I\t\xD0\x86", "K\t\xD0\x9A", "M\t\xD0\x9C", "O\t\xD0\x9E", "P\t\xD0\xA0",
    "S\t\xD0\x85", "T\t\xD0\xA2", "X\t\xD0\xA5", "Y\t\xD0\xA3",
};

const char* const kDefaultStopwords[] = {
    "the",  "a",     "an",    "is",    "are",  "was",   "were", "be",    "been", "being",
    "to",   "of",    "in",    "on",    "at",   "and",   "or",   "but",   "if",   "it",
    "its",  "this",  "that",  "these", "those", "with",  "as",   "by",    "for",  "from",
    "not",  "no",    "so",    "than",  "then", "there", "their", "they",  "he",   "she",
    "we",   "you",   "i",     "his",   "her",  "them",  "what", "which", "who",  "whom",
    "will", "would", "can",   "could", "do",   "does",  "did",  "have",  "has",  "had",
    "into", "about", "over",  "under", "up",   "down",  "out",  "very",
};

const char* const kDefaultFillers[] = {
    "basically", "actually",  "honestly", "literally", "you know",
    "kind of",   "sort of",   "I mean",   "well",      "like",
};

std::vector<std::string> read_resource_lines(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) {
    throw MissingResource(std::string(what) + " resource file cannot be read: " + path);
  }
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    lines.push_back(line);
  }
  return lines;
}

std::vector<std::string> default_lines(const char* const* rows, std::size_t n) {
  return std::vector<std::string>(rows, rows + n);
}

std::vector<std::string> split_alternatives(const std::string& field) {
  std::vector<std::string> alts;
  std::string current;
  for (char c : field) {
    if (c == ',') {
      if (!current.empty()) alts.push_back(current);
      current.clear();
    } else {
      current += c;
    }
  }
  if (!current.empty()) alts.push_back(current);
  return alts;
}

std::pair<std::string, std::string> split_tab(const std::string& line, const char* what) {
  const auto tab = line.find('\t');
  if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size()) {
    throw MissingResource(std::string(what) + " entry is not 'key<TAB>values': " + line);
  }
  return {line.substr(0, tab), line.substr(tab + 1)};
}

bool is_ascii_letter(unsigned char c) { return std::isalpha(c) != 0; }
bool is_vowel(unsigned char c) {
  switch (std::tolower(c)) {
    case 'a':
    case 'e':
    case 'i':
    case 'o':
    case 'u':
      return true;
    default:
      return false;
  }
}
bool is_word_char(unsigned char c) { return std::isalnum(c) != 0 || c == '\''; }

struct WordSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
};

std::vector<WordSpan> tokenize_words(const std::string& text) {
  std::vector<WordSpan> words;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!is_word_char(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    WordSpan span;
    span.begin = i;
    while (i < text.size() && is_word_char(static_cast<unsigned char>(text[i]))) ++i;
    span.end = i;
    words.push_back(span);
  }
  return words;
}

std::string lowercase(std::string_view word) {
  std::string out(word);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

int char_budget(double rate, std::size_t eligible, int max_changes) {
  return static_cast<int>(std::ceil(rate * static_cast<double>(eligible))) + max_changes;
}

std::string apply_ocr(const std::string& text, const PerturbResources& res, CounterRng& rng,
                      double rate, int max_changes, int& changes) {
  auto match_at = [&](std::size_t pos) -> const std::pair<std::string, std::vector<std::string>>* {
    for (const auto& entry : res.ocr) {
      if (text.compare(pos, entry.first.size(), entry.first) == 0) return &entry;
    }
    return nullptr;
  };

  std::size_t eligible = 0;
  for (std::size_t i = 0; i < text.size();) {
    if (const auto* entry = match_at(i)) {
      ++eligible;
      i += entry->first.size();
    } else {
      ++i;
    }
  }
  const int budget = char_budget(rate, eligible, max_changes);

  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size();) {
    const auto* entry = match_at(i);
    if (entry == nullptr) {
      out += text[i];
      ++i;
      continue;
    }
    if (rng.next_double() < rate && changes < budget) {
      out += entry->second[rng.next_below(entry->second.size())];
      ++changes;
    } else {
      out.append(text, i, entry->first.size());
    }
    i += entry->first.size();
  }
  return out;
}

std::string apply_typo(const std::string& text, const PerturbResources& res, CounterRng& rng,
                       double rate, int max_changes, int& changes) {
  auto row_for = [&](char c) -> const std::string* {
    if (!is_ascii_letter(static_cast<unsigned char>(c))) return nullptr;
    auto it = res.qwerty.find(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    return it != res.qwerty.end() ? &it->second : nullptr;
  };

  std::size_t eligible = 0;
  for (char c : text) {
    if (row_for(c) != nullptr) ++eligible;
  }
  const int budget = char_budget(rate, eligible, max_changes);

  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    const std::string* row = row_for(c);
    if (row == nullptr) {
      out += c;
      continue;
    }
    if (rng.next_double() < rate && changes < budget) {
      char replacement = (*row)[rng.next_below(row->size())];
      if (std::isupper(static_cast<unsigned char>(c)) != 0) {
        replacement = static_cast<char>(std::toupper(static_cast<unsigned char>(replacement)));
      }
      out += replacement;
      ++changes;
    } else {
      out += c;
    }
  }
  return out;
}

std::string apply_homoglyph(const std::string& text, const PerturbResources& res, CounterRng& rng,
                            double rate, int max_changes, int& changes) {
  std::size_t eligible = 0;
  for (char c : text) {
    if (res.homoglyph.count(c) > 0) ++eligible;
  }
  const int budget = char_budget(rate, eligible, max_changes);

  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    auto it = res.homoglyph.find(c);
    if (it == res.homoglyph.end()) {
      out += c;
      continue;
    }
    if (rng.next_double() < rate && changes < budget) {
      out += it->second[rng.next_below(it->second.size())];
      ++changes;
    } else {
      out += c;
    }
  }
  return out;
}

std::string apply_hyphen(const std::string& text, CounterRng& rng, double rate, int max_changes,
                         int& changes) {
  std::string out;
  out.reserve(text.size());
  out += text.empty() ? "" : std::string(1, text[0]);
  for (std::size_t i = 1; i < text.size(); ++i) {
    const unsigned char prev = static_cast<unsigned char>(text[i - 1]);
    const unsigned char cur = static_cast<unsigned char>(text[i]);
    const bool site = is_ascii_letter(prev) && is_vowel(prev) && is_ascii_letter(cur) &&
                      !is_vowel(cur);
    if (site && rng.next_double() < rate && changes < max_changes) {
      out += '-';
      ++changes;
    }
    out += text[i];
  }
  return out;
}

std::string apply_synonym(const std::string& text, const PerturbResources& res, CounterRng& rng,
                          double rate, int max_changes, int& changes) {
  const std::vector<WordSpan> words = tokenize_words(text);
  std::string out;
  out.reserve(text.size());
  std::size_t copied = 0;
  for (const WordSpan& span : words) {
    const std::string word = text.substr(span.begin, span.end - span.begin);
    const std::string key = lowercase(word);
    if (res.stopwords.count(key) > 0) continue;
    auto it = res.synonyms.find(key);
    if (it == res.synonyms.end() || it->second.empty()) continue;
    if (rng.next_double() < rate && changes < max_changes) {
      std::string replacement = it->second[rng.next_below(it->second.size())];
      if (!word.empty() && std::isupper(static_cast<unsigned char>(word[0])) != 0 &&
          !replacement.empty()) {
        replacement[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(replacement[0])));
      }
      out.append(text, copied, span.begin - copied);
      out += replacement;
      copied = span.end;
      ++changes;
    }
  }
  out.append(text, copied, text.size() - copied);
  return out;
}

std::string apply_non_influential(const std::string& text, const PerturbResources& res,
                                  CounterRng& rng, double rate, int max_changes, int& changes) {
  const std::vector<WordSpan> words = tokenize_words(text);
  if (words.empty() || res.fillers.empty()) return text;

  std::vector<std::pair<std::size_t, std::string>> inserts;  // (byte offset, inserted text)
  for (std::size_t site = 0; site <= words.size(); ++site) {
    if (rng.next_double() < rate && changes < max_changes) {
      const std::string& filler = res.fillers[rng.next_below(res.fillers.size())];
      if (site < words.size()) {
        inserts.emplace_back(words[site].begin, filler + " ");
      } else {
        inserts.emplace_back(words.back().end, " " + filler);
      }
      ++changes;
    }
  }

  std::string out;
  out.reserve(text.size() + inserts.size() * 8);
  std::size_t copied = 0;
  for (const auto& [pos, insert] : inserts) {
    out.append(text, copied, pos - copied);
    out += insert;
    copied = pos;
  }
  out.append(text, copied, text.size() - copied);
  return out;
}

}  // namespace

std::string_view perturb_operator_name(PerturbOperator op) {
  switch (op) {
    case PerturbOperator::Ocr:
      return "ocr";
    case PerturbOperator::Typo:
      return "typo";
    case PerturbOperator::Hyphen:
      return "hyphen";
    case PerturbOperator::Homoglyph:
      return "homoglyph";
    case PerturbOperator::Synonym:
      return "synonym";
    case PerturbOperator::Paraphrase:
      return "paraphrase";
    case PerturbOperator::NonInfluential:
      return "non_influential";
  }
  return "typo";
}

PerturbOperator perturb_operator_from_name(std::string_view name) {
  for (PerturbOperator op : all_perturb_operators()) {
    if (perturb_operator_name(op) == name) return op;
  }
  throw std::invalid_argument("unknown perturbation operator: " + std::string(name));
}

const std::vector<PerturbOperator>& all_perturb_operators() {
  static const std::vector<PerturbOperator> ops = {
      PerturbOperator::Ocr,      PerturbOperator::Typo,       PerturbOperator::Hyphen,
      PerturbOperator::Homoglyph, PerturbOperator::Synonym,   PerturbOperator::Paraphrase,
      PerturbOperator::NonInfluential,
  };
  return ops;
}

PerturbResources PerturbResources::load(const ResourcePaths& paths) {
  PerturbResources res;

  const std::vector<std::string> ocr_lines =
      paths.ocr_map.empty()
          ? default_lines(kDefaultOcrRows, std::size(kDefaultOcrRows))
          : read_resource_lines(paths.ocr_map, "ocr map");
  for (const std::string& line : ocr_lines) {
    auto [key, rest] = split_tab(line, "ocr map");
    res.ocr.emplace_back(key, split_alternatives(rest));
  }
  std::stable_sort(res.ocr.begin(), res.ocr.end(), [](const auto& a, const auto& b) {
    return a.first.size() > b.first.size();
  });

  const std::vector<std::string> qwerty_lines =
      paths.qwerty_map.empty()
          ? default_lines(kDefaultQwertyRows, std::size(kDefaultQwertyRows))
          : read_resource_lines(paths.qwerty_map, "qwerty map");
  for (const std::string& line : qwerty_lines) {
    auto [key, rest] = split_tab(line, "qwerty map");
    if (key.size() != 1) throw MissingResource("qwerty map key must be one letter: " + line);
    res.qwerty[key[0]] = rest;
  }

  const std::vector<std::string> homoglyph_lines =
      paths.homoglyph_map.empty()
          ? default_lines(kDefaultHomoglyphRows, std::size(kDefaultHomoglyphRows))
          : read_resource_lines(paths.homoglyph_map, "homoglyph map");
  for (const std::string& line : homoglyph_lines) {
    auto [key, rest] = split_tab(line, "homoglyph map");
    if (key.size() != 1) throw MissingResource("homoglyph map key must be one character: " + line);
    res.homoglyph[key[0]] = split_alternatives(rest);
  }

  const std::vector<std::string> stopword_lines =
      paths.stopwords.empty()
          ? default_lines(kDefaultStopwords, std::size(kDefaultStopwords))
          : read_resource_lines(paths.stopwords, "stopword list");
  res.stopwords.insert(stopword_lines.begin(), stopword_lines.end());

  const std::vector<std::string> filler_lines =
      paths.fillers.empty()
          ? default_lines(kDefaultFillers, std::size(kDefaultFillers))
          : read_resource_lines(paths.fillers, "filler list");
  res.fillers = filler_lines;

  if (!paths.synonyms.empty()) {
    for (const std::string& line : read_resource_lines(paths.synonyms, "synonym lexicon")) {
      auto [key, rest] = split_tab(line, "synonym lexicon");
      res.synonyms[lowercase(key)] = split_alternatives(rest);
    }
  }

  return res;
}

std::string apply_perturbation(const std::string& text, const PerturbationConfig& config,
                               const std::string& item_id, const PerturbResources& resources,
                               const ParaphraseFn& paraphrase, int* changes_out) {
  if (text.empty()) throw std::invalid_argument("cannot perturb empty text");
  if (config.rate < 0.0 || config.rate > 1.0) {
    throw std::invalid_argument("perturbation rate must be in [0, 1]");
  }
  if (changes_out != nullptr) *changes_out = 0;
  if (config.rate == 0.0) return text;

  if (config.op == PerturbOperator::Paraphrase) {
    if (!paraphrase) {
      throw BackendRequired("paraphrase perturbation needs a backend paraphrase function");
    }
    const std::string result = paraphrase(text);
    if (changes_out != nullptr) *changes_out = result != text ? 1 : 0;
    return result;
  }
  if (config.op == PerturbOperator::Synonym && resources.synonyms.empty()) {
    throw MissingResource("synonym operator needs a lexicon (resources.synonyms)");
  }

  CounterRng rng = CounterRng::keyed(
      {std::to_string(config.seed), item_id, perturb_operator_name(config.op)});
  int changes = 0;
  std::string out;
  switch (config.op) {
    case PerturbOperator::Ocr:
      out = apply_ocr(text, resources, rng, config.rate, config.max_changes, changes);
      break;
    case PerturbOperator::Typo:
      out = apply_typo(text, resources, rng, config.rate, config.max_changes, changes);
      break;
    case PerturbOperator::Hyphen:
      out = apply_hyphen(text, rng, config.rate, config.max_changes, changes);
      break;
    case PerturbOperator::Homoglyph:
      out = apply_homoglyph(text, resources, rng, config.rate, config.max_changes, changes);
      break;
    case PerturbOperator::Synonym:
      out = apply_synonym(text, resources, rng, config.rate, config.max_changes, changes);
      break;
    case PerturbOperator::NonInfluential:
      out = apply_non_influential(text, resources, rng, config.rate, config.max_changes, changes);
      break;
    case PerturbOperator::Paraphrase:
      out = text;  // handled above
      break;
  }
  if (changes_out != nullptr) *changes_out = changes;
  return out;
}

std::string apply_perturbation(const std::string& text, const PerturbationConfig& config,
                               const std::string& item_id, const ParaphraseFn& paraphrase,
                               int* changes_out) {
  const PerturbResources resources = PerturbResources::load(config.resources);
  return apply_perturbation(text, config, item_id, resources, paraphrase, changes_out);
}

PerturbedCorpus perturb_corpus(const Corpus& corpus, const PerturbationConfig& config,
                               const ParaphraseFn& paraphrase) {
  const PerturbResources resources = PerturbResources::load(config.resources);
  if (config.op == PerturbOperator::Paraphrase && config.rate > 0.0 && !paraphrase) {
    throw BackendRequired("paraphrase perturbation needs a backend paraphrase function");
  }
  if (config.op == PerturbOperator::Synonym && config.rate > 0.0 && resources.synonyms.empty()) {
    throw MissingResource("synonym operator needs a lexicon (resources.synonyms)");
  }

  PerturbedCorpus out;
  out.corpus = corpus;
  out.corpus.source = "perturb:" + std::string(perturb_operator_name(config.op));
  for (GradingItem& item : out.corpus.items) {
    try {
      item.student_answer =
          apply_perturbation(item.student_answer, config, item.id, resources, paraphrase);
    } catch (const std::exception& e) {
      out.warnings.push_back(item.id + ": kept original answer (" + e.what() + ")");
    }
  }
  return out;
}

}  // namespace rubricjudge
