#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rubricjudge/dataset.hpp"

namespace rubricjudge {

enum class PerturbOperator {
  Ocr,
  Typo,
  Hyphen,
  Homoglyph,
  Synonym,
  Paraphrase,
  NonInfluential,
};

std::string_view perturb_operator_name(PerturbOperator op);
PerturbOperator perturb_operator_from_name(std::string_view name);
const std::vector<PerturbOperator>& all_perturb_operators();

struct MissingResource : std::runtime_error {
  explicit MissingResource(const std::string& what) : std::runtime_error(what) {}
};
struct BackendRequired : std::runtime_error {
  explicit BackendRequired(const std::string& what) : std::runtime_error(what) {}
};

// Empty fields select the built-in defaults. The synonym lexicon has no
// built-in default; the synonym operator needs a file.
struct ResourcePaths {
  std::string ocr_map;
  std::string qwerty_map;
  std::string homoglyph_map;
  std::string stopwords;
  std::string fillers;
  std::string synonyms;
};

// Substitution tables backing the operators. File format, one entry per
// line, '#' comments and blank lines skipped:
//   ocr / homoglyph / synonyms:  key<TAB>alt1,alt2,...
//   qwerty:                      letter<TAB>neighbors (a string of letters)
//   stopwords / fillers:         one entry per line
struct PerturbResources {
  std::vector<std::pair<std::string, std::vector<std::string>>> ocr;  // longest keys first
  std::map<char, std::string> qwerty;
  std::map<char, std::vector<std::string>> homoglyph;
  std::set<std::string> stopwords;
  std::vector<std::string> fillers;
  std::map<std::string, std::vector<std::string>> synonyms;

  // Throws MissingResource when a named file cannot be read.
  static PerturbResources load(const ResourcePaths& paths);
};

struct PerturbationConfig {
  PerturbOperator op = PerturbOperator::Typo;
  double rate = 0.1;
  int max_changes = 2;
  std::uint64_t seed = 0;
  ResourcePaths resources;
};

using ParaphraseFn = std::function<std::string(const std::string&)>;

// Deterministic text corruption. All randomness comes from the counter RNG
// keyed ("<seed>", item_id, operator_name); draws happen left to right, one
// next_double() per candidate site to decide firing, then one next_below(k)
// to pick among k replacements (only when the site fires).
//
// Candidate sites and change budgets:
//   ocr        table-key matches, longest key first, a match consumes its
//              span whether or not it fires; budget ceil(rate*n) + max_changes
//   typo       letters with a keyboard-adjacency row (case preserved);
//              budget ceil(rate*n) + max_changes
//   homoglyph  characters with a homoglyph row; budget ceil(rate*n) + max_changes
//   hyphen     vowel-consonant boundaries inside words; budget max_changes
//   synonym    words outside the stop list with a lexicon row (initial
//              capital preserved); budget max_changes
//   non_influential  word boundaries (before, between, after words), filler
//              inserted with a separating space; budget max_changes
//   paraphrase rate Bernoulli is skipped: rate == 0 is the identity, any
//              other rate rewrites through `paraphrase` (BackendRequired
//              when absent)
//
// rate == 0 is the identity for every operator. Throws
// std::invalid_argument for empty text or rate outside [0, 1]. changes_out,
// when given, receives the number of edits performed.
std::string apply_perturbation(const std::string& text, const PerturbationConfig& config,
                               const std::string& item_id, const PerturbResources& resources,
                               const ParaphraseFn& paraphrase = {}, int* changes_out = nullptr);

// Convenience overload that loads config.resources first.
std::string apply_perturbation(const std::string& text, const PerturbationConfig& config,
                               const std::string& item_id, const ParaphraseFn& paraphrase = {},
                               int* changes_out = nullptr);

struct PerturbedCorpus {
  Corpus corpus;
  std::vector<std::string> warnings;  // items kept unperturbed, with reasons
};

// Rewrites every student_answer; ids, questions, references, and gold labels
// are untouched. The result's source is "perturb:<operator>". Per-item
// failures keep the original answer and add a warning instead of aborting;
// resource and backend configuration problems still throw.
PerturbedCorpus perturb_corpus(const Corpus& corpus, const PerturbationConfig& config,
                               const ParaphraseFn& paraphrase = {});

}  // namespace rubricjudge
