#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "rubricjudge/core.hpp"
#include "rubricjudge/dataset.hpp"
#include "rubricjudge/judge_types.hpp"
#include "rubricjudge/prompt.hpp"

namespace rubricjudge {

struct TransportError : std::runtime_error {
  explicit TransportError(const std::string& what) : std::runtime_error(what) {}
};
struct TimeoutError : TransportError {
  explicit TimeoutError(const std::string& what) : TransportError(what) {}
};
struct BackendMisconfigured : std::runtime_error {
  explicit BackendMisconfigured(const std::string& what) : std::runtime_error(what) {}
};
struct CallBudgetExhausted : std::runtime_error {
  CallBudgetExhausted() : std::runtime_error("backend call budget exhausted") {}
};

enum class BackendKind { Http, Mock };

struct JudgeConfig {
  BackendKind backend = BackendKind::Mock;
  std::string model_name = "qwen2.5-72b-instruct";
  double temperature = 0.7;  // consensus voting needs sampling diversity
  int max_output_tokens = 256;
  int runs_per_item = 10;
  int parallelism = 1;
  int retry_limit = 3;
  double timeout_seconds = 30.0;
  int batch_size = 1;
  double requests_per_second = 0.0;  // token bucket; 0 disables rate limiting
  int backoff_ms = 250;              // exponential backoff base between retries
  bool strict_parsing = false;
};

// Deterministic stand-in for a remote judge. Given an item's gold label g,
// the predicted label is sampled from the confusion row of g with the
// counter RNG keyed ("<seed>", item_id, "<run_index>", condition):
//   - a rule whose `contains` substring occurs in the student answer wins
//     outright (no RNG draw);
//   - otherwise, when per_item_difficulty has the item, draw u: u < 1 -
//     difficulty emits gold, else a second draw picks among non-gold labels
//     by inverse CDF over the row's renormalized non-gold mass (uniform when
//     the row is all-gold);
//   - otherwise one draw picks by inverse CDF over the full confusion row.
// Schemes without a configured matrix use the identity matrix.
struct MockRule {
  std::string contains;
  int label_code = 0;
};

struct MockOracleConfig {
  std::map<SchemeId, std::vector<std::vector<double>>> confusion;
  std::map<std::string, double> per_item_difficulty;
  std::uint64_t seed = 0;
  std::vector<MockRule> rules;
};

class JudgeBackend {
 public:
  virtual ~JudgeBackend() = default;

  // Called once before a grading pass; the corpus stays alive for its
  // duration. The mock backend resolves gold labels through it.
  virtual void begin_run(const Corpus& corpus, SchemeId scheme) {
    (void)corpus;
    (void)scheme;
  }

  // One completion request for a rendered grading prompt. Retries (where
  // applicable) happen inside; throws TransportError / TimeoutError once
  // they are exhausted and BackendMisconfigured for non-retryable setup
  // problems.
  virtual std::string complete(const RenderedPrompt& prompt, const JudgeConfig& config,
                               int run_index, const std::string& condition) = 0;

  // Free-form completion (used by the paraphrase perturbation).
  virtual std::string complete_text(const std::string& prompt, const JudgeConfig& config) = 0;
};

// Throws BackendMisconfigured when a confusion row does not sum to 1 (+-1e-9)
// or a rule label code is out of range for its matrix.
std::unique_ptr<JudgeBackend> make_mock_backend(MockOracleConfig config);

// OpenAI-compatible chat-completions backend. Empty base_url falls back to
// RUBRIC_JUDGE_BASE_URL, empty api_key to RUBRIC_JUDGE_API_KEY (a missing key
// just omits the Authorization header).
std::unique_ptr<JudgeBackend> make_http_backend(std::string base_url, std::string api_key);
std::unique_ptr<JudgeBackend> make_http_backend_from_env();

// Persistence behind grade_corpus. Keys are (item_id, run_index, condition);
// append() must be safe to call from one thread at a time (grade_corpus
// serializes appends itself).
class ResponseStore {
 public:
  virtual ~ResponseStore() = default;
  virtual bool contains(const std::string& item_id, int run_index,
                        const std::string& condition) const = 0;
  virtual const JudgeResponse* find(const std::string& item_id, int run_index,
                                    const std::string& condition) const = 0;
  virtual void append(const JudgeResponse& response) = 0;
  virtual std::size_t size() const = 0;
};

class InMemoryResponseStore : public ResponseStore {
 public:
  bool contains(const std::string& item_id, int run_index,
                const std::string& condition) const override;
  const JudgeResponse* find(const std::string& item_id, int run_index,
                            const std::string& condition) const override;
  void append(const JudgeResponse& response) override;
  std::size_t size() const override { return responses_.size(); }

 private:
  std::map<std::string, JudgeResponse> responses_;
};

std::string response_key(const std::string& item_id, int run_index, const std::string& condition);

// Caps the number of backend calls a grading pass may issue; decremented per
// request. Exhaustion aborts the pass with CallBudgetExhausted after all
// completed responses reached the store, which is how the CLI simulates an
// interrupted run.
struct CallBudget {
  std::atomic<long long> remaining{0};
};

// Issues runs_per_item responses per item (batched when batch_size > 1),
// skipping (item, run, condition) keys already in `store`, appending every
// new response to `store` before returning. Transport and parse failures are
// recorded per response; only BackendMisconfigured aborts. The returned
// matrix covers all items and runs, including previously stored responses,
// ordered by corpus position then run index.
std::vector<JudgeResponse> grade_corpus(const Corpus& corpus, SchemeId scheme,
                                        const JudgeConfig& config, JudgeBackend& backend,
                                        const std::string& condition,
                                        ResponseStore* store = nullptr,
                                        CallBudget* budget = nullptr,
                                        const PromptTemplates& tpl = default_templates());

}  // namespace rubricjudge
