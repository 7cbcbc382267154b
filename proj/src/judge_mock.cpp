#include <cmath>
#include <sstream>
#include <utility>

#include "rubricjudge/judge.hpp"
#include "rubricjudge/rng.hpp"

namespace rubricjudge {

namespace {

std::vector<std::vector<double>> identity_matrix(int n) {
  std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) m[i][i] = 1.0;
  return m;
}

void validate_matrix(SchemeId scheme, const std::vector<std::vector<double>>& m) {
  const std::size_t n = static_cast<std::size_t>(cardinality(scheme));
  if (m.size() != n) {
    std::ostringstream msg;
    msg << "mock confusion matrix for " << scheme_name(scheme) << " has " << m.size()
        << " rows, expected " << n;
    throw BackendMisconfigured(msg.str());
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (m[i].size() != n) {
      std::ostringstream msg;
      msg << "mock confusion matrix for " << scheme_name(scheme) << " row " << i << " has "
          << m[i].size() << " columns, expected " << n;
      throw BackendMisconfigured(msg.str());
    }
    double sum = 0.0;
    for (double p : m[i]) {
      if (p < 0.0) {
        std::ostringstream msg;
        msg << "mock confusion matrix for " << scheme_name(scheme) << " row " << i
            << " has a negative entry";
        throw BackendMisconfigured(msg.str());
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      std::ostringstream msg;
      msg << "mock confusion matrix for " << scheme_name(scheme) << " row " << i << " sums to "
          << sum << ", expected 1";
      throw BackendMisconfigured(msg.str());
    }
  }
}

class MockBackend : public JudgeBackend {
 public:
  explicit MockBackend(MockOracleConfig config) : config_(std::move(config)) {
    for (const auto& [scheme, matrix] : config_.confusion) validate_matrix(scheme, matrix);
    // complete() runs concurrently, so fill the scheme map up front instead
    // of inserting identity rows lazily.
    for (SchemeId scheme : {SchemeId::TwoWay, SchemeId::ThreeWay, SchemeId::FiveWay}) {
      config_.confusion.try_emplace(scheme, identity_matrix(cardinality(scheme)));
    }
  }

  void begin_run(const Corpus& corpus, SchemeId scheme) override {
    (void)scheme;
    corpus_ = &corpus;
  }

  std::string complete(const RenderedPrompt& prompt, const JudgeConfig& config, int run_index,
                       const std::string& condition) override {
    (void)config;
    if (corpus_ == nullptr) {
      throw BackendMisconfigured("mock backend used before begin_run bound a corpus");
    }
    std::ostringstream out;
    for (std::size_t k = 0; k < prompt.item_ids.size(); ++k) {
      const GradingItem* item = corpus_->find(prompt.item_ids[k]);
      if (item == nullptr) {
        throw BackendMisconfigured("mock backend prompt references unknown item " +
                                   prompt.item_ids[k]);
      }
      const Label verdict = predict(*item, prompt.scheme, run_index, condition);
      if (k > 0) out << "\n";
      if (prompt.batch) out << "Item " << (k + 1) << ": ";
      out << "Score: " << verdict.code << " - mock justification.";
    }
    return out.str();
  }

  std::string complete_text(const std::string& prompt, const JudgeConfig& config) override {
    (void)config;
    if (prompt.rfind(kParaphraseInstruction, 0) == 0) {
      std::string original = prompt.substr(kParaphraseInstruction.size());
      if (!original.empty() && original.front() == '\n') original.erase(0, 1);
      return "In other words, " + original;
    }
    return "Score: 0 - mock justification.";
  }

 private:
  const std::vector<std::vector<double>>& matrix_for(SchemeId scheme) const {
    return config_.confusion.at(scheme);
  }

  Label predict(const GradingItem& item, SchemeId scheme, int run_index,
                const std::string& condition) const {
    for (const MockRule& rule : config_.rules) {
      if (item.student_answer.find(rule.contains) == std::string::npos) continue;
      if (rule.label_code < 0 || rule.label_code >= cardinality(scheme)) {
        std::ostringstream msg;
        msg << "mock rule label code " << rule.label_code << " is out of range for "
            << scheme_name(scheme);
        throw BackendMisconfigured(msg.str());
      }
      return make_label(scheme, rule.label_code);
    }

    const std::optional<Label> gold = gold_for(item, scheme);
    if (!gold) {
      throw BackendMisconfigured("mock backend needs a gold label for item " + item.id +
                                 " under scheme " + std::string(scheme_name(scheme)));
    }
    const auto& row = matrix_for(scheme)[static_cast<std::size_t>(gold->code)];
    const int n = cardinality(scheme);
    CounterRng rng = CounterRng::keyed(
        {std::to_string(config_.seed), item.id, std::to_string(run_index), condition});

    auto difficulty = config_.per_item_difficulty.find(item.id);
    if (difficulty != config_.per_item_difficulty.end()) {
      const double d = std::min(1.0, std::max(0.0, difficulty->second));
      if (rng.next_double() < 1.0 - d) return *gold;
      double total = 0.0;
      for (int j = 0; j < n; ++j) {
        if (j != gold->code) total += row[static_cast<std::size_t>(j)];
      }
      const double v = rng.next_double();
      double cum = 0.0;
      int last = -1;
      for (int j = 0; j < n; ++j) {
        if (j == gold->code) continue;
        last = j;
        cum += total > 0.0 ? row[static_cast<std::size_t>(j)] / total : 1.0 / (n - 1);
        if (v < cum) return make_label(scheme, j);
      }
      if (last < 0) return *gold;  // degenerate single-label scheme guard
      return make_label(scheme, last);
    }

    const double u = rng.next_double();
    double cum = 0.0;
    for (int j = 0; j < n; ++j) {
      cum += row[static_cast<std::size_t>(j)];
      if (u < cum) return make_label(scheme, j);
    }
    return make_label(scheme, n - 1);
  }

  MockOracleConfig config_;
  const Corpus* corpus_ = nullptr;
};

}  // namespace

std::unique_ptr<JudgeBackend> make_mock_backend(MockOracleConfig config) {
  return std::make_unique<MockBackend>(std::move(config));
}

}  // namespace rubricjudge
