#include "rubricjudge/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "rubricjudge/csv.hpp"
#include "rubricjudge/rng.hpp"

namespace rubricjudge {
namespace {

using nlohmann::json;

constexpr std::pair<SchemeId, const char*> kGoldFields[] = {
    {SchemeId::TwoWay, "gold_2way"},
    {SchemeId::ThreeWay, "gold_3way"},
    {SchemeId::FiveWay, "gold_5way"},
};

Label parse_gold_value(const json& value, SchemeId scheme, std::size_t line_no) {
  std::string token;
  if (value.is_number_integer()) {
    token = std::to_string(value.get<long long>());
  } else if (value.is_string()) {
    token = value.get<std::string>();
  } else {
    throw MalformedRecord(line_no, "gold label must be a code or a name");
  }
  if (auto label = try_parse_label(token, scheme)) return *label;
  throw MalformedRecord(line_no, "unresolvable gold label \"" + token + "\" for scheme " +
                                     std::string(scheme_name(scheme)));
}

std::string require_string(const json& record, const char* field, std::size_t line_no) {
  auto it = record.find(field);
  if (it == record.end() || !it->is_string()) {
    throw MalformedRecord(line_no, std::string("missing required field \"") + field + "\"");
  }
  return it->get<std::string>();
}

GradingItem item_from_json(const json& record, std::size_t line_no) {
  GradingItem item;
  item.id = require_string(record, "id", line_no);
  if (item.id.empty()) throw MalformedRecord(line_no, "empty item id");
  item.question = require_string(record, "question", line_no);
  item.reference_answer = require_string(record, "reference_answer", line_no);
  item.student_answer = require_string(record, "student_answer", line_no);
  for (const auto& [scheme, field] : kGoldFields) {
    if (auto it = record.find(field); it != record.end() && !it->is_null()) {
      item.gold.emplace(scheme, parse_gold_value(*it, scheme, line_no));
    }
  }
  if (item.gold.empty()) throw MalformedRecord(line_no, "record has no gold label field");
  return item;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

const GradingItem* Corpus::find(std::string_view id) const {
  for (const auto& item : items) {
    if (item.id == id) return &item;
  }
  return nullptr;
}

void finalize_corpus(Corpus& corpus) {
  if (corpus.items.empty()) throw EmptyCorpus();
  std::set<std::string> seen;
  for (const auto& item : corpus.items) {
    if (!seen.insert(item.id).second) throw DuplicateId(item.id);
  }
  corpus.schemes_present = {SchemeId::TwoWay, SchemeId::ThreeWay, SchemeId::FiveWay};
  for (const auto& item : corpus.items) {
    std::set<SchemeId> keep;
    for (SchemeId s : corpus.schemes_present) {
      if (item.gold.count(s)) keep.insert(s);
    }
    corpus.schemes_present = std::move(keep);
  }
}

Corpus parse_corpus_jsonl(std::string_view text, std::string source) {
  Corpus corpus;
  corpus.source = std::move(source);
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    ++line_no;
    start = end + 1;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string_view::npos) {
      if (end == text.size()) break;
      continue;
    }
    json record = json::parse(line, nullptr, false);
    if (record.is_discarded() || !record.is_object()) {
      throw MalformedRecord(line_no, "not a JSON object");
    }
    corpus.items.push_back(item_from_json(record, line_no));
    if (end == text.size()) break;
  }
  finalize_corpus(corpus);
  return corpus;
}

Corpus parse_corpus_csv(std::string_view text, std::string source) {
  const auto rows = csv_parse(text);
  if (rows.empty()) throw EmptyCorpus();
  const auto& header = rows[0];
  auto column = [&](std::string_view name) -> int {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
  };

  json record;
  Corpus corpus;
  corpus.source = std::move(source);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    record = json::object();
    for (std::size_t c = 0; c < header.size() && c < row.size(); ++c) {
      record[header[c]] = row[c];
    }
    // Gold columns may be left blank for schemes a record does not carry.
    for (const auto& [scheme, field] : kGoldFields) {
      (void)scheme;
      if (record.contains(field) && record[field].get<std::string>().empty()) {
        record.erase(field);
      }
    }
    const std::size_t line_no = r + 1;  // header is line 1
    if (column("id") < 0) throw MalformedRecord(line_no, "header has no id column");
    corpus.items.push_back(item_from_json(record, line_no));
  }
  finalize_corpus(corpus);
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format) {
  const std::string text = read_file(path);
  return format == CorpusFormat::Jsonl ? parse_corpus_jsonl(text, path.string())
                                       : parse_corpus_csv(text, path.string());
}

std::string serialize_corpus_jsonl(const Corpus& corpus) {
  std::string out;
  for (const auto& item : corpus.items) {
    json record = {
        {"id", item.id},
        {"question", item.question},
        {"reference_answer", item.reference_answer},
        {"student_answer", item.student_answer},
    };
    for (const auto& [scheme, field] : kGoldFields) {
      if (auto it = item.gold.find(scheme); it != item.gold.end()) {
        record[field] = std::string(it->second.name());
      }
    }
    out += record.dump();
    out.push_back('\n');
  }
  return out;
}

std::string serialize_corpus_csv(const Corpus& corpus) {
  std::string out = "id,question,reference_answer,student_answer,gold_2way,gold_3way,gold_5way\n";
  for (const auto& item : corpus.items) {
    std::vector<std::string> row = {item.id, item.question, item.reference_answer,
                                    item.student_answer};
    for (const auto& [scheme, field] : kGoldFields) {
      (void)field;
      auto it = item.gold.find(scheme);
      row.push_back(it == item.gold.end() ? "" : std::string(it->second.name()));
    }
    out += csv_row(row);
    out.push_back('\n');
  }
  return out;
}

void save_corpus_jsonl(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << serialize_corpus_jsonl(corpus);
}

std::string corpus_fingerprint(const Corpus& corpus) {
  return to_hex16(fnv1a64(serialize_corpus_jsonl(corpus)));
}

Corpus sample_corpus(const Corpus& corpus, std::size_t n, std::uint64_t seed) {
  if (n < 1 || n > corpus.items.size()) throw SampleTooLarge(n, corpus.items.size());

  // Partial Fisher-Yates over the index vector, then restore corpus order.
  std::vector<std::size_t> indices(corpus.items.size());
  std::iota(indices.begin(), indices.end(), 0);
  CounterRng rng = CounterRng::keyed({std::to_string(seed), "sample"});
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + rng.next_below(indices.size() - i);
    std::swap(indices[i], indices[j]);
  }
  indices.resize(n);
  std::sort(indices.begin(), indices.end());

  Corpus out;
  out.source = corpus.source;
  out.items.reserve(n);
  for (std::size_t idx : indices) out.items.push_back(corpus.items[idx]);
  finalize_corpus(out);
  return out;
}

}  // namespace rubricjudge
