#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "rubricjudge/core.hpp"

namespace rubricjudge {

enum class CorpusFormat { Jsonl, Csv };

struct Corpus {
  std::vector<GradingItem> items;
  std::string source;  // provenance, e.g. file path or "perturb:ocr"
  std::set<SchemeId> schemes_present;

  bool empty() const { return items.empty(); }
  std::size_t size() const { return items.size(); }
  const GradingItem* find(std::string_view id) const;
};

struct MalformedRecord : std::runtime_error {
  MalformedRecord(std::size_t line_no, const std::string& reason)
      : std::runtime_error("line " + std::to_string(line_no) + ": " + reason), line(line_no) {}
  std::size_t line;
};
struct DuplicateId : std::runtime_error {
  explicit DuplicateId(const std::string& id)
      : std::runtime_error("duplicate item id \"" + id + "\""), duplicate(id) {}
  std::string duplicate;
};
struct EmptyCorpus : std::runtime_error {
  EmptyCorpus() : std::runtime_error("corpus has no items") {}
};
struct SampleTooLarge : std::runtime_error {
  SampleTooLarge(std::size_t n, std::size_t have)
      : std::runtime_error("sample of " + std::to_string(n) + " from corpus of " +
                           std::to_string(have)) {}
};

// Canonical record fields: id, question, reference_answer, student_answer and
// at least one of gold_2way / gold_3way / gold_5way (numeric code or label
// name). JSONL is one object per line; CSV carries the same field names in a
// header row, RFC 4180 quoting, UTF-8.
Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format);
Corpus parse_corpus_jsonl(std::string_view text, std::string source);
Corpus parse_corpus_csv(std::string_view text, std::string source);

// Canonical JSONL serialization; load(serialize(c)) == c.
std::string serialize_corpus_jsonl(const Corpus& corpus);
std::string serialize_corpus_csv(const Corpus& corpus);
void save_corpus_jsonl(const Corpus& corpus, const std::filesystem::path& path);

// Content fingerprint of the canonical serialization, 16 hex chars.
std::string corpus_fingerprint(const Corpus& corpus);

// Seeded sample without replacement; selected items keep corpus order and the
// same (corpus, n, seed) always selects the same items.
Corpus sample_corpus(const Corpus& corpus, std::size_t n, std::uint64_t seed);

// Rebuilds schemes_present (intersection of gold keys) and checks id
// uniqueness. Throws DuplicateId / EmptyCorpus.
void finalize_corpus(Corpus& corpus);

}  // namespace rubricjudge
