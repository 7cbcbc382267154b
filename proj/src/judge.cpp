#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <utility>

#include "rubricjudge/judge.hpp"
#include "rubricjudge/parse.hpp"

namespace rubricjudge {

std::string response_key(const std::string& item_id, int run_index,
                         const std::string& condition) {
  std::string key = item_id;
  key += '\x1f';
  key += std::to_string(run_index);
  key += '\x1f';
  key += condition;
  return key;
}

bool InMemoryResponseStore::contains(const std::string& item_id, int run_index,
                                     const std::string& condition) const {
  return responses_.count(response_key(item_id, run_index, condition)) > 0;
}

const JudgeResponse* InMemoryResponseStore::find(const std::string& item_id, int run_index,
                                                 const std::string& condition) const {
  auto it = responses_.find(response_key(item_id, run_index, condition));
  return it != responses_.end() ? &it->second : nullptr;
}

void InMemoryResponseStore::append(const JudgeResponse& response) {
  responses_.emplace(response_key(response.item_id, response.run_index, response.condition),
                     response);
}

namespace {

// Pacing limiter with a one-token bucket: successive acquisitions are spaced
// at least 1/rps seconds apart. rps <= 0 disables it.
class TokenBucket {
 public:
  explicit TokenBucket(double rps) : rps_(rps), tokens_(1.0), last_(Clock::now()) {}

  void acquire() {
    if (rps_ <= 0.0) return;
    std::unique_lock<std::mutex> lock(mu_);
    for (;;) {
      refill();
      if (tokens_ >= 1.0) {
        tokens_ -= 1.0;
        return;
      }
      const auto wait = std::chrono::duration<double>((1.0 - tokens_) / rps_);
      cv_.wait_for(lock, std::chrono::duration_cast<std::chrono::microseconds>(wait));
    }
  }

 private:
  using Clock = std::chrono::steady_clock;

  void refill() {
    const auto now = Clock::now();
    const double elapsed = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    tokens_ = std::min(1.0, tokens_ + elapsed * rps_);
  }

  double rps_;
  double tokens_;
  Clock::time_point last_;
  std::mutex mu_;
  std::condition_variable cv_;
};

struct Task {
  int run_index = 0;
  std::vector<std::size_t> item_indices;
};

JudgeResponse base_response(const GradingItem& item, SchemeId scheme, int run_index,
                            const std::string& condition, double latency_ms) {
  JudgeResponse r;
  r.item_id = item.id;
  r.run_index = run_index;
  r.condition = condition;
  r.scheme = scheme;
  r.latency_ms = latency_ms;
  return r;
}

void apply_parse_result(JudgeResponse& response, const SingleParseResult& result) {
  if (result.verdict) {
    response.parsed = *result.verdict;
  } else if (result.error) {
    response.error = to_response_error(*result.error);
  } else {
    response.error = ResponseError{"missing_score", "parser produced no verdict and no error"};
  }
}

}  // namespace

std::vector<JudgeResponse> grade_corpus(const Corpus& corpus, SchemeId scheme,
                                        const JudgeConfig& config, JudgeBackend& backend,
                                        const std::string& condition, ResponseStore* store,
                                        CallBudget* budget, const PromptTemplates& tpl) {
  if (corpus.items.empty()) throw EmptyCorpus();
  if (config.runs_per_item < 1) throw std::invalid_argument("runs_per_item must be >= 1");
  if (config.parallelism < 1) throw std::invalid_argument("parallelism must be >= 1");
  if (config.batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");

  InMemoryResponseStore scratch;
  ResponseStore& sink = store != nullptr ? *store : scratch;

  backend.begin_run(corpus, scheme);

  std::vector<Task> tasks;
  for (int run = 0; run < config.runs_per_item; ++run) {
    Task current;
    current.run_index = run;
    for (std::size_t i = 0; i < corpus.items.size(); ++i) {
      if (sink.contains(corpus.items[i].id, run, condition)) continue;
      current.item_indices.push_back(i);
      if (static_cast<int>(current.item_indices.size()) == config.batch_size) {
        tasks.push_back(std::move(current));
        current = Task{};
        current.run_index = run;
      }
    }
    if (!current.item_indices.empty()) tasks.push_back(std::move(current));
  }

  TokenBucket limiter(config.requests_per_second);
  std::atomic<std::size_t> next_task{0};
  std::atomic<bool> budget_exhausted{false};
  std::mutex sink_mu;
  std::mutex fatal_mu;
  std::exception_ptr fatal;

  auto worker = [&]() {
    ParseOptions parse_opts;
    parse_opts.strict = config.strict_parsing;
    for (;;) {
      {
        std::lock_guard<std::mutex> lock(fatal_mu);
        if (fatal) return;
      }
      if (budget_exhausted.load()) return;
      const std::size_t index = next_task.fetch_add(1);
      if (index >= tasks.size()) return;
      const Task& task = tasks[index];

      if (budget != nullptr) {
        if (budget->remaining.fetch_sub(1) <= 0) {
          budget->remaining.fetch_add(1);
          budget_exhausted.store(true);
          return;
        }
      }

      std::vector<const GradingItem*> items;
      items.reserve(task.item_indices.size());
      for (std::size_t i : task.item_indices) items.push_back(&corpus.items[i]);

      std::vector<JudgeResponse> out;
      try {
        RenderedPrompt prompt;
        if (items.size() == 1) {
          prompt = render_single(*items[0], scheme, tpl);
        } else {
          std::vector<GradingItem> batch_items;
          batch_items.reserve(items.size());
          for (const GradingItem* item : items) batch_items.push_back(*item);
          prompt = render_batch(batch_items, scheme, tpl);
        }

        limiter.acquire();
        const auto t0 = std::chrono::steady_clock::now();
        const std::string raw = backend.complete(prompt, config, task.run_index, condition);
        const double latency_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                .count();

        if (items.size() == 1) {
          JudgeResponse r =
              base_response(*items[0], scheme, task.run_index, condition, latency_ms);
          r.raw_text = raw;
          apply_parse_result(r, parse_single_response(raw, scheme, parse_opts));
          out.push_back(std::move(r));
        } else {
          const BatchParseResult parsed =
              parse_batch_response(raw, prompt.item_ids, scheme, parse_opts);
          for (std::size_t k = 0; k < items.size(); ++k) {
            JudgeResponse r =
                base_response(*items[k], scheme, task.run_index, condition, latency_ms);
            r.raw_text = raw;
            apply_parse_result(r, parsed.items[k].second);
            out.push_back(std::move(r));
          }
        }
      } catch (const TimeoutError& e) {
        out.clear();
        for (const GradingItem* item : items) {
          JudgeResponse r = base_response(*item, scheme, task.run_index, condition, 0.0);
          r.error = ResponseError{"timeout", e.what()};
          out.push_back(std::move(r));
        }
      } catch (const TransportError& e) {
        out.clear();
        for (const GradingItem* item : items) {
          JudgeResponse r = base_response(*item, scheme, task.run_index, condition, 0.0);
          r.error = ResponseError{"transport", e.what()};
          out.push_back(std::move(r));
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(fatal_mu);
        if (!fatal) fatal = std::current_exception();
        return;
      }

      {
        std::lock_guard<std::mutex> lock(sink_mu);
        for (const JudgeResponse& r : out) {
          if (!sink.contains(r.item_id, r.run_index, r.condition)) sink.append(r);
        }
      }
    }
  };

  const std::size_t n_threads =
      std::min<std::size_t>(static_cast<std::size_t>(config.parallelism),
                            std::max<std::size_t>(tasks.size(), 1));
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();

  if (fatal) std::rethrow_exception(fatal);
  if (budget_exhausted.load()) throw CallBudgetExhausted();

  std::vector<JudgeResponse> matrix;
  matrix.reserve(corpus.items.size() * static_cast<std::size_t>(config.runs_per_item));
  for (const GradingItem& item : corpus.items) {
    for (int run = 0; run < config.runs_per_item; ++run) {
      const JudgeResponse* r = sink.find(item.id, run, condition);
      if (r != nullptr) matrix.push_back(*r);
    }
  }
  return matrix;
}

}  // namespace rubricjudge
