#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include <signal.h>
#include <unistd.h>

#include "json.hpp"
#include "rubricjudge/consensus.hpp"
#include "rubricjudge/csv.hpp"
#include "rubricjudge/metrics.hpp"
#include "rubricjudge/rng.hpp"
#include "rubricjudge/runlog.hpp"
#include "rubricjudge/runner.hpp"
#include "rubricjudge/svg.hpp"

namespace rubricjudge {

namespace fs = std::filesystem;

namespace {

using nlohmann::json;

std::string format6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string format2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string utc_now_iso() {
  const std::time_t now = std::time(nullptr);
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string provenance_line(const std::string& run_id, const std::string& fingerprint) {
  return "# run_id=" + run_id + " corpus=" + fingerprint + "\n";
}

std::string with_svg_provenance(const std::string& svg_text, const std::string& run_id,
                                const std::string& fingerprint) {
  const auto first_newline = svg_text.find('\n');
  if (first_newline == std::string::npos) return svg_text;
  return svg_text.substr(0, first_newline + 1) + "<!-- run_id=" + run_id + " corpus=" +
         fingerprint + " -->\n" + svg_text.substr(first_newline + 1);
}

// (run_id, fingerprint) recovered from a report's leading comment line.
std::pair<std::string, std::string> parse_provenance(const std::string& line) {
  std::pair<std::string, std::string> out{"unknown", "unknown"};
  const auto rid = line.find("run_id=");
  if (rid != std::string::npos) {
    const auto end = line.find(' ', rid);
    out.first = line.substr(rid + 7, end == std::string::npos ? std::string::npos : end - rid - 7);
  }
  const auto fp = line.find("corpus=");
  if (fp != std::string::npos) {
    const auto end = line.find(' ', fp);
    out.second = line.substr(fp + 7, end == std::string::npos ? std::string::npos : end - fp - 7);
  }
  return out;
}

// One lock per output directory, reclaimed automatically when the owning
// process is gone (identified by pid).
class DirLock {
 public:
  explicit DirLock(const fs::path& dir) : path_(dir / ".rubricjudge.lock") {
    fs::create_directories(dir);
    std::ifstream existing(path_);
    if (existing) {
      long pid = 0;
      existing >> pid;
      existing.close();
      if (pid > 0 && pid != static_cast<long>(getpid())) {
        const int rc = kill(static_cast<pid_t>(pid), 0);
        if (rc == 0 || errno == EPERM) {
          throw OutputDirLocked("output dir " + dir.string() + " is locked by running pid " +
                                std::to_string(pid));
        }
      }
    }
    std::ofstream out(path_, std::ios::trunc);
    out << getpid() << "\n";
    if (!out) throw std::runtime_error("cannot write lock file " + path_.string());
    owned_ = true;
  }

  ~DirLock() {
    if (owned_) {
      std::error_code ec;
      fs::remove(path_, ec);
    }
  }

  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;

 private:
  fs::path path_;
  bool owned_ = false;
};

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& section) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&](const char* k) { return key == k; }) == allowed.end()) {
      throw std::runtime_error("config section " + section + " has unknown key \"" + key + "\"");
    }
  }
}

json judge_echo(const JudgeConfig& j) {
  return json{{"backend", j.backend == BackendKind::Mock ? "mock" : "http"},
              {"model_name", j.model_name},
              {"temperature", j.temperature},
              {"max_output_tokens", j.max_output_tokens},
              {"runs_per_item", j.runs_per_item},
              {"parallelism", j.parallelism},
              {"retry_limit", j.retry_limit},
              {"timeout_seconds", j.timeout_seconds},
              {"batch_size", j.batch_size},
              {"requests_per_second", j.requests_per_second},
              {"backoff_ms", j.backoff_ms},
              {"strict_parsing", j.strict_parsing}};
}

struct RunSetup {
  std::string run_id;
  std::string fingerprint;
  std::unique_ptr<JudgeBackend> backend;
  std::unique_ptr<JsonlRunLog> log;
  std::unique_ptr<CallBudget> budget;
};

RunSetup setup_run(const RunContext& ctx, const std::string& experiment,
                   const std::vector<SchemeId>& schemes) {
  RunSetup run;
  run.run_id = compute_run_id(experiment, ctx.corpus, ctx.config, schemes);
  run.fingerprint = corpus_fingerprint(ctx.corpus);
  run.backend = make_backend(ctx.config);
  run.log = std::make_unique<JsonlRunLog>(ctx.out_dir / ("runlog_" + run.run_id + ".jsonl"),
                                          run.run_id);
  if (ctx.max_calls > 0) {
    run.budget = std::make_unique<CallBudget>();
    run.budget->remaining.store(ctx.max_calls);
  }
  return run;
}

void require_gold(const Corpus& corpus, SchemeId scheme) {
  for (const GradingItem& item : corpus.items) {
    if (!gold_for(item, scheme)) {
      throw MissingGold("item " + item.id + " has no gold label under scheme " +
                        std::string(scheme_name(scheme)));
    }
  }
}

struct Aligned {
  std::vector<Label> preds;
  std::vector<Label> golds;
  int missing = 0;  // items with no parsed prediction
};

Aligned align_predictions(const Corpus& corpus, const std::map<std::string, Label>& preds,
                          SchemeId scheme) {
  Aligned out;
  for (const GradingItem& item : corpus.items) {
    auto it = preds.find(item.id);
    if (it == preds.end()) {
      ++out.missing;
      continue;
    }
    out.preds.push_back(it->second);
    out.golds.push_back(*gold_for(item, scheme));
  }
  return out;
}

json metrics_to_json(const MetricsReport& rep, const std::string& run_id,
                     const std::string& fingerprint) {
  json out;
  out["run_id"] = run_id;
  out["corpus_fingerprint"] = fingerprint;
  out["scheme"] = std::string(scheme_name(rep.scheme));
  out["n"] = rep.n;
  out["accuracy"] = rep.accuracy;
  out["accuracy_ci95"] = {rep.accuracy_ci95.first, rep.accuracy_ci95.second};
  out["kappa"] = rep.kappa;
  out["kappa_ci95"] = {rep.kappa_ci95.first, rep.kappa_ci95.second};
  if (rep.spearman) {
    out["spearman"] = *rep.spearman;
    out["spearman_ci95"] = {rep.spearman_ci95->first, rep.spearman_ci95->second};
  } else {
    out["spearman"] = nullptr;
    out["spearman_ci95"] = nullptr;
  }
  out["spearman_caveat"] = rep.spearman_caveat;
  out["confusion"] = rep.confusion;
  return out;
}

std::vector<std::string> metrics_csv_row(const std::string& group, const MetricsReport& rep) {
  std::vector<std::string> row{group,
                               std::to_string(rep.n),
                               format6(rep.accuracy),
                               format6(rep.accuracy_ci95.first),
                               format6(rep.accuracy_ci95.second),
                               format6(rep.kappa),
                               format6(rep.kappa_ci95.first),
                               format6(rep.kappa_ci95.second)};
  if (rep.spearman) {
    row.push_back(format6(*rep.spearman));
    row.push_back(format6(rep.spearman_ci95->first));
    row.push_back(format6(rep.spearman_ci95->second));
  } else {
    row.push_back("");
    row.push_back("");
    row.push_back("");
  }
  row.push_back(rep.spearman_caveat);
  return row;
}

const std::vector<std::string>& metrics_csv_tail() {
  static const std::vector<std::string> tail = {
      "n",     "accuracy", "accuracy_lo", "accuracy_hi",    "kappa",       "kappa_lo",
      "kappa_hi", "spearman", "spearman_lo", "spearman_hi", "spearman_caveat"};
  return tail;
}

std::string metrics_csv_header(const std::string& first_column) {
  std::vector<std::string> header{first_column};
  header.insert(header.end(), metrics_csv_tail().begin(), metrics_csv_tail().end());
  return csv_row(header);
}

svg::Bar to_accuracy_bar(const std::string& label, const MetricsReport& rep) {
  return svg::Bar{label, rep.accuracy, rep.accuracy_ci95.first, rep.accuracy_ci95.second};
}

svg::Bar to_kappa_point(const std::string& label, const MetricsReport& rep) {
  return svg::Bar{label, rep.kappa, rep.kappa_ci95.first, rep.kappa_ci95.second};
}

void write_manifest(const RunContext& ctx, const std::string& experiment, const RunSetup& run,
                    const std::vector<SchemeId>& schemes,
                    const std::vector<std::string>& conditions, ExperimentResult& result) {
  json manifest;
  manifest["run_id"] = run.run_id;
  manifest["experiment"] = experiment;
  manifest["created_utc"] = utc_now_iso();
  manifest["corpus"] = {{"source", ctx.corpus.source},
                        {"fingerprint", run.fingerprint},
                        {"items", ctx.corpus.size()}};
  json scheme_names = json::array();
  for (SchemeId s : schemes) scheme_names.push_back(std::string(scheme_name(s)));
  manifest["schemes"] = scheme_names;
  manifest["conditions"] = conditions;
  manifest["seed"] = ctx.config.seed;
  manifest["judge"] = judge_echo(ctx.config.judge);
  json outputs = json::array();
  for (const fs::path& p : result.outputs) outputs.push_back(p.filename().string());
  manifest["outputs"] = outputs;
  const fs::path path = ctx.out_dir / ("manifest_" + experiment + ".json");
  write_text_file(path, manifest.dump(2) + "\n");
  result.outputs.push_back(path);
}

std::string trust_curve_csv_text(const std::string& run_id, const std::string& fingerprint,
                                 std::span<const TrustCurvePoint> points) {
  std::ostringstream out;
  out << provenance_line(run_id, fingerprint);
  out << csv_row({"scheme", "threshold", "coverage", "effective_accuracy", "n_graded",
                  "n_total"})
      << "\n";
  for (const TrustCurvePoint& p : points) {
    out << csv_row({std::string(scheme_name(p.scheme)), format2(p.threshold),
                    format6(p.coverage),
                    p.effective_accuracy ? format6(*p.effective_accuracy) : std::string(),
                    std::to_string(p.n_graded), std::to_string(p.n_total)})
        << "\n";
  }
  return out.str();
}

std::string trust_curve_svg_text(std::span<const TrustCurvePoint> points) {
  std::vector<svg::Series> series;
  auto series_for = [&](const std::string& name) -> svg::Series& {
    for (svg::Series& s : series) {
      if (s.name == name) return s;
    }
    series.push_back(svg::Series{name, {}});
    return series.back();
  };
  for (const TrustCurvePoint& p : points) {
    const std::string scheme(scheme_name(p.scheme));
    series_for(scheme + " coverage").points.emplace_back(p.threshold, p.coverage);
    if (p.effective_accuracy) {
      series_for(scheme + " effective accuracy")
          .points.emplace_back(p.threshold, *p.effective_accuracy);
    }
  }
  return svg::line_chart("Consensus trust curve", "consensus threshold", "fraction", series);
}

// Shared by run_robustness/run_complexity chart building and report
// regeneration, which reads the numbers back out of the CSV.
std::string metrics_bar_chart(const std::string& title, const std::vector<svg::Bar>& acc,
                              const std::vector<svg::Bar>& kappa) {
  return svg::bar_line_chart(title, "accuracy", acc, "kappa", kappa);
}

struct ParaphraseCache {
  fs::path path;
  std::map<std::string, std::string> entries;
  bool dirty = false;

  void load() {
    if (!fs::exists(path)) return;
    const json doc = json::parse(read_text_file(path), nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
      throw std::runtime_error("paraphrase cache is not a JSON object: " + path.string());
    }
    for (const auto& [key, value] : doc.items()) entries[key] = value.get<std::string>();
  }

  void save() const {
    if (!dirty) return;
    json doc(entries);
    write_text_file(path, doc.dump(2) + "\n");
  }
};

}  // namespace

HarnessConfig load_harness_config(const fs::path& path) {
  const json doc = json::parse(read_text_file(path), nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw std::runtime_error("config file is not a JSON object: " + path.string());
  }
  check_keys(doc, {"seed", "judge", "mock", "perturb", "attack", "thresholds"}, "(top level)");

  HarnessConfig cfg;
  cfg.seed = doc.value("seed", std::uint64_t{0});

  if (doc.contains("judge")) {
    const json& j = doc.at("judge");
    check_keys(j,
               {"backend", "model_name", "temperature", "max_output_tokens", "runs_per_item",
                "parallelism", "retry_limit", "timeout_seconds", "batch_size",
                "requests_per_second", "backoff_ms", "strict_parsing"},
               "judge");
    const std::string backend = j.value("backend", std::string("mock"));
    if (backend == "mock") {
      cfg.judge.backend = BackendKind::Mock;
    } else if (backend == "http") {
      cfg.judge.backend = BackendKind::Http;
    } else {
      throw std::runtime_error("judge.backend must be \"mock\" or \"http\", got \"" + backend +
                               "\"");
    }
    cfg.judge.model_name = j.value("model_name", cfg.judge.model_name);
    cfg.judge.temperature = j.value("temperature", cfg.judge.temperature);
    cfg.judge.max_output_tokens = j.value("max_output_tokens", cfg.judge.max_output_tokens);
    cfg.judge.runs_per_item = j.value("runs_per_item", cfg.judge.runs_per_item);
    cfg.judge.parallelism = j.value("parallelism", cfg.judge.parallelism);
    cfg.judge.retry_limit = j.value("retry_limit", cfg.judge.retry_limit);
    cfg.judge.timeout_seconds = j.value("timeout_seconds", cfg.judge.timeout_seconds);
    cfg.judge.batch_size = j.value("batch_size", cfg.judge.batch_size);
    cfg.judge.requests_per_second = j.value("requests_per_second", cfg.judge.requests_per_second);
    cfg.judge.backoff_ms = j.value("backoff_ms", cfg.judge.backoff_ms);
    cfg.judge.strict_parsing = j.value("strict_parsing", cfg.judge.strict_parsing);
  }

  if (doc.contains("mock")) {
    const json& m = doc.at("mock");
    check_keys(m, {"seed", "confusion", "per_item_difficulty", "rules"}, "mock");
    cfg.mock.seed = m.value("seed", std::uint64_t{0});
    if (m.contains("confusion")) {
      for (const auto& [name, matrix] : m.at("confusion").items()) {
        cfg.mock.confusion[require_scheme(name)] =
            matrix.get<std::vector<std::vector<double>>>();
      }
    }
    if (m.contains("per_item_difficulty")) {
      for (const auto& [id, d] : m.at("per_item_difficulty").items()) {
        cfg.mock.per_item_difficulty[id] = d.get<double>();
      }
    }
    if (m.contains("rules")) {
      for (const json& rule : m.at("rules")) {
        check_keys(rule, {"contains", "label_code"}, "mock.rules[]");
        cfg.mock.rules.push_back(
            {rule.at("contains").get<std::string>(), rule.at("label_code").get<int>()});
      }
    }
  }

  if (doc.contains("perturb")) {
    const json& p = doc.at("perturb");
    check_keys(p, {"rate", "max_changes", "operators", "resources"}, "perturb");
    cfg.perturb.rate = p.value("rate", cfg.perturb.rate);
    cfg.perturb.max_changes = p.value("max_changes", cfg.perturb.max_changes);
    if (p.contains("operators")) {
      cfg.perturb.operators = p.at("operators").get<std::vector<std::string>>();
      for (const std::string& name : cfg.perturb.operators) perturb_operator_from_name(name);
    }
    if (p.contains("resources")) {
      const json& r = p.at("resources");
      check_keys(r, {"ocr_map", "qwerty_map", "homoglyph_map", "stopwords", "fillers", "synonyms"},
                 "perturb.resources");
      cfg.perturb.resources.ocr_map = r.value("ocr_map", std::string());
      cfg.perturb.resources.qwerty_map = r.value("qwerty_map", std::string());
      cfg.perturb.resources.homoglyph_map = r.value("homoglyph_map", std::string());
      cfg.perturb.resources.stopwords = r.value("stopwords", std::string());
      cfg.perturb.resources.fillers = r.value("fillers", std::string());
      cfg.perturb.resources.synonyms = r.value("synonyms", std::string());
    }
  }

  if (doc.contains("attack")) {
    const json& a = doc.at("attack");
    check_keys(a, {"group_size", "payload_files"}, "attack");
    cfg.attack.group_size = a.value("group_size", cfg.attack.group_size);
    if (a.contains("payload_files")) {
      for (const auto& [name, file] : a.at("payload_files").items()) {
        attack_from_name(name);
        cfg.attack.payload_files[name] = file.get<std::string>();
      }
    }
  }

  if (doc.contains("thresholds")) {
    cfg.thresholds = doc.at("thresholds").get<std::vector<double>>();
    for (double t : cfg.thresholds) {
      if (!(t > 0.5) || t > 1.0) {
        throw std::runtime_error("thresholds must lie in (0.5, 1], got " + format2(t));
      }
    }
  }

  return cfg;
}

std::unique_ptr<JudgeBackend> make_backend(const HarnessConfig& config) {
  if (config.judge.backend == BackendKind::Mock) return make_mock_backend(config.mock);
  return make_http_backend_from_env();
}

std::string compute_run_id(const std::string& experiment, const Corpus& corpus,
                           const HarnessConfig& config, const std::vector<SchemeId>& schemes) {
  json desc;
  desc["experiment"] = experiment;
  desc["corpus"] = corpus_fingerprint(corpus);
  json scheme_names = json::array();
  for (SchemeId s : schemes) scheme_names.push_back(std::string(scheme_name(s)));
  desc["schemes"] = scheme_names;
  desc["seed"] = config.seed;
  const JudgeConfig& j = config.judge;
  desc["judge"] = json{{"backend", j.backend == BackendKind::Mock ? "mock" : "http"},
                       {"model_name", j.model_name},
                       {"temperature", j.temperature},
                       {"max_output_tokens", j.max_output_tokens},
                       {"runs_per_item", j.runs_per_item},
                       {"batch_size", j.batch_size},
                       {"strict_parsing", j.strict_parsing}};
  if (j.backend == BackendKind::Mock) {
    json confusion = json::object();
    for (const auto& [scheme, matrix] : config.mock.confusion) {
      confusion[std::string(scheme_name(scheme))] = matrix;
    }
    json rules = json::array();
    for (const MockRule& rule : config.mock.rules) {
      rules.push_back(json{{"contains", rule.contains}, {"label_code", rule.label_code}});
    }
    desc["mock"] = json{{"seed", config.mock.seed},
                        {"confusion", confusion},
                        {"per_item_difficulty", config.mock.per_item_difficulty},
                        {"rules", rules}};
  }
  desc["perturb"] = json{{"rate", config.perturb.rate},
                         {"max_changes", config.perturb.max_changes},
                         {"operators", config.perturb.operators},
                         {"resources",
                          json{{"ocr_map", config.perturb.resources.ocr_map},
                               {"qwerty_map", config.perturb.resources.qwerty_map},
                               {"homoglyph_map", config.perturb.resources.homoglyph_map},
                               {"stopwords", config.perturb.resources.stopwords},
                               {"fillers", config.perturb.resources.fillers},
                               {"synonyms", config.perturb.resources.synonyms}}}};
  desc["attack"] =
      json{{"group_size", config.attack.group_size}, {"payload_files", config.attack.payload_files}};
  return to_hex16(fnv1a64(desc.dump()));
}

std::vector<SchemeId> schemes_available(const Corpus& corpus) {
  std::vector<SchemeId> out;
  for (SchemeId scheme : {SchemeId::TwoWay, SchemeId::ThreeWay, SchemeId::FiveWay}) {
    const bool full = std::all_of(corpus.items.begin(), corpus.items.end(),
                                  [&](const GradingItem& item) {
                                    return gold_for(item, scheme).has_value();
                                  });
    if (full) out.push_back(scheme);
  }
  return out;
}

std::map<std::string, Label> plurality_predictions(std::span<const JudgeResponse> responses) {
  std::map<std::string, std::map<Label, int>> votes;
  for (const JudgeResponse& r : responses) {
    if (r.parsed) ++votes[r.item_id][r.parsed->label];
  }
  std::map<std::string, Label> out;
  for (const auto& [item_id, counts] : votes) {
    const Label* best = nullptr;
    int best_count = 0;
    for (const auto& [label, count] : counts) {
      if (count > best_count) {
        best = &label;
        best_count = count;
      }
    }
    if (best != nullptr) out.emplace(item_id, *best);
  }
  return out;
}

ExperimentResult run_complexity(const RunContext& ctx) {
  const std::vector<SchemeId> schemes = {SchemeId::TwoWay, SchemeId::ThreeWay, SchemeId::FiveWay};
  for (SchemeId scheme : schemes) require_gold(ctx.corpus, scheme);

  DirLock lock(ctx.out_dir);
  RunSetup run = setup_run(ctx, "complexity", schemes);
  ExperimentResult result;
  result.run_id = run.run_id;

  JudgeConfig single_run = ctx.config.judge;
  single_run.runs_per_item = 1;

  std::ostringstream csv;
  csv << provenance_line(run.run_id, run.fingerprint);
  csv << metrics_csv_header("scheme") << "\n";
  std::vector<svg::Bar> acc_bars;
  std::vector<svg::Bar> kappa_points;
  std::vector<std::string> conditions;

  for (SchemeId scheme : schemes) {
    const std::string name(scheme_name(scheme));
    const std::string condition = "control@" + name;
    conditions.push_back(condition);
    const std::vector<JudgeResponse> responses = grade_corpus(
        ctx.corpus, scheme, single_run, *run.backend, condition, run.log.get(), run.budget.get());
    const Aligned aligned =
        align_predictions(ctx.corpus, plurality_predictions(responses), scheme);
    if (aligned.missing > 0) {
      result.warnings.push_back(name + ": " + std::to_string(aligned.missing) +
                                " item(s) had no parsed verdict and were dropped from metrics");
    }
    if (aligned.preds.size() < 2) {
      result.warnings.push_back(name + ": too few parsed verdicts for metrics, skipped");
      continue;
    }
    const MetricsReport rep =
        compute_metrics_report(aligned.preds, aligned.golds, ctx.config.seed);
    const fs::path metrics_path = ctx.out_dir / ("metrics_" + name + ".json");
    write_text_file(metrics_path, metrics_to_json(rep, run.run_id, run.fingerprint).dump(2) + "\n");
    result.outputs.push_back(metrics_path);
    const fs::path grid_path = ctx.out_dir / ("confusion_" + name + ".txt");
    write_text_file(grid_path, provenance_line(run.run_id, run.fingerprint) + confusion_grid(rep));
    result.outputs.push_back(grid_path);

    csv << csv_row(metrics_csv_row(name, rep)) << "\n";
    acc_bars.push_back(to_accuracy_bar(name, rep));
    kappa_points.push_back(to_kappa_point(name, rep));
  }

  const fs::path csv_path = ctx.out_dir / "complexity.csv";
  write_text_file(csv_path, csv.str());
  result.outputs.push_back(csv_path);

  const fs::path svg_path = ctx.out_dir / "complexity.svg";
  write_text_file(svg_path,
                  with_svg_provenance(metrics_bar_chart("Grading agreement by label scheme",
                                                        acc_bars, kappa_points),
                                      run.run_id, run.fingerprint));
  result.outputs.push_back(svg_path);

  write_manifest(ctx, "complexity", run, schemes, conditions, result);
  return result;
}

ExperimentResult run_trust_curve(const RunContext& ctx, std::vector<SchemeId> schemes) {
  if (schemes.empty()) schemes = schemes_available(ctx.corpus);
  if (schemes.empty()) {
    throw MissingGold("no scheme has gold labels for every item in the corpus");
  }
  for (SchemeId scheme : schemes) require_gold(ctx.corpus, scheme);
  const std::vector<double> thresholds =
      ctx.config.thresholds.empty() ? default_threshold_grid() : ctx.config.thresholds;

  DirLock lock(ctx.out_dir);
  RunSetup run = setup_run(ctx, "trust_curve", schemes);
  ExperimentResult result;
  result.run_id = run.run_id;

  std::vector<TrustCurvePoint> points;
  std::vector<std::string> conditions;
  for (SchemeId scheme : schemes) {
    const std::string name(scheme_name(scheme));
    const std::string condition = "control@" + name;
    conditions.push_back(condition);
    const std::vector<JudgeResponse> responses =
        grade_corpus(ctx.corpus, scheme, ctx.config.judge, *run.backend, condition,
                     run.log.get(), run.budget.get());
    std::map<std::string, Label> golds;
    for (const GradingItem& item : ctx.corpus.items) golds.emplace(item.id, *gold_for(item, scheme));
    const std::vector<TrustCurvePoint> scheme_points = trust_curve(responses, golds, thresholds);
    points.insert(points.end(), scheme_points.begin(), scheme_points.end());
  }

  const fs::path csv_path = ctx.out_dir / "trust_curve.csv";
  write_text_file(csv_path, trust_curve_csv_text(run.run_id, run.fingerprint, points));
  result.outputs.push_back(csv_path);

  const fs::path svg_path = ctx.out_dir / "trust_curve.svg";
  write_text_file(svg_path,
                  with_svg_provenance(trust_curve_svg_text(points), run.run_id, run.fingerprint));
  result.outputs.push_back(svg_path);

  write_manifest(ctx, "trust_curve", run, schemes, conditions, result);
  return result;
}

ExperimentResult run_robustness(const RunContext& ctx, SchemeId scheme) {
  require_gold(ctx.corpus, scheme);
  std::vector<std::string> operators = ctx.config.perturb.operators;
  if (operators.empty()) {
    for (PerturbOperator op : all_perturb_operators()) {
      operators.emplace_back(perturb_operator_name(op));
    }
  }
  for (const std::string& name : operators) perturb_operator_from_name(name);

  DirLock lock(ctx.out_dir);
  RunSetup run = setup_run(ctx, "robustness", {scheme});
  ExperimentResult result;
  result.run_id = run.run_id;
  const std::string sname(scheme_name(scheme));
  std::vector<std::string> conditions;

  const std::string control_condition = "control@" + sname;
  conditions.push_back(control_condition);
  const std::vector<JudgeResponse> control_responses =
      grade_corpus(ctx.corpus, scheme, ctx.config.judge, *run.backend, control_condition,
                   run.log.get(), run.budget.get());
  const std::map<std::string, Label> control_preds = plurality_predictions(control_responses);

  std::ostringstream csv;
  csv << provenance_line(run.run_id, run.fingerprint);
  csv << metrics_csv_header("group") << "\n";
  std::vector<svg::Bar> acc_bars;
  std::vector<svg::Bar> kappa_points;

  {
    const Aligned aligned = align_predictions(ctx.corpus, control_preds, scheme);
    if (aligned.preds.size() < 2) {
      throw std::runtime_error("control pass produced too few parsed verdicts for metrics");
    }
    const MetricsReport rep =
        compute_metrics_report(aligned.preds, aligned.golds, ctx.config.seed);
    csv << csv_row(metrics_csv_row("control", rep)) << "\n";
    acc_bars.push_back(to_accuracy_bar("control", rep));
    kappa_points.push_back(to_kappa_point("control", rep));
  }

  // Paraphrases are cached on disk keyed by the source text's hash, so a
  // resumed run feeds the judge the same rewritten answers even over http.
  ParaphraseCache cache{ctx.out_dir / "paraphrase_cache.json", {}, false};
  const bool wants_paraphrase =
      std::find(operators.begin(), operators.end(), "paraphrase") != operators.end();
  ParaphraseFn paraphrase;
  if (wants_paraphrase && ctx.config.perturb.rate > 0.0) {
    cache.load();
    JudgeBackend* backend = run.backend.get();
    const JudgeConfig* judge_cfg = &ctx.config.judge;
    ParaphraseCache* cache_ptr = &cache;
    paraphrase = [backend, judge_cfg, cache_ptr](const std::string& text) {
      const std::string key = to_hex16(fnv1a64(text));
      auto it = cache_ptr->entries.find(key);
      if (it != cache_ptr->entries.end()) return it->second;
      const std::string rewritten =
          backend->complete_text(render_paraphrase_prompt(text), *judge_cfg);
      cache_ptr->entries.emplace(key, rewritten);
      cache_ptr->dirty = true;
      return rewritten;
    };
  }

  std::ostringstream flips;
  flips << provenance_line(run.run_id, run.fingerprint);
  flips << csv_row({"item_id", "operator", "control_verdict", "perturbed_verdict",
                    "perturbed_answer", "justification"})
        << "\n";

  for (const std::string& op_name : operators) {
    try {
      PerturbationConfig pc;
      pc.op = perturb_operator_from_name(op_name);
      pc.rate = ctx.config.perturb.rate;
      pc.max_changes = ctx.config.perturb.max_changes;
      pc.seed = ctx.config.seed;
      pc.resources = ctx.config.perturb.resources;
      const PerturbedCorpus perturbed = perturb_corpus(ctx.corpus, pc, paraphrase);
      for (const std::string& w : perturbed.warnings) {
        result.warnings.push_back(op_name + ": " + w);
      }

      const std::string condition = "perturb:" + op_name + "@" + sname;
      conditions.push_back(condition);
      const std::vector<JudgeResponse> responses =
          grade_corpus(perturbed.corpus, scheme, ctx.config.judge, *run.backend, condition,
                       run.log.get(), run.budget.get());
      const std::map<std::string, Label> preds = plurality_predictions(responses);
      const Aligned aligned = align_predictions(ctx.corpus, preds, scheme);
      if (aligned.preds.size() < 2) {
        result.warnings.push_back(op_name + ": too few parsed verdicts for metrics, skipped");
        continue;
      }
      const MetricsReport rep =
          compute_metrics_report(aligned.preds, aligned.golds, ctx.config.seed);
      csv << csv_row(metrics_csv_row(op_name, rep)) << "\n";
      acc_bars.push_back(to_accuracy_bar(op_name, rep));
      kappa_points.push_back(to_kappa_point(op_name, rep));

      for (const GradingItem& item : ctx.corpus.items) {
        auto before = control_preds.find(item.id);
        auto after = preds.find(item.id);
        if (before == control_preds.end() || after == preds.end()) continue;
        if (before->second == after->second) continue;
        std::string justification;
        for (const JudgeResponse& r : responses) {
          if (r.item_id == item.id && r.parsed && r.parsed->label == after->second) {
            justification = r.parsed->justification;
            break;
          }
        }
        const GradingItem* perturbed_item = perturbed.corpus.find(item.id);
        flips << csv_row({item.id, op_name, std::string(before->second.name()),
                          std::string(after->second.name()),
                          perturbed_item != nullptr ? perturbed_item->student_answer : "",
                          justification})
              << "\n";
      }
    } catch (const CallBudgetExhausted&) {
      throw;
    } catch (const BackendMisconfigured&) {
      throw;
    } catch (const std::exception& e) {
      result.warnings.push_back(op_name + ": skipped (" + std::string(e.what()) + ")");
    }
  }
  cache.save();

  const fs::path csv_path = ctx.out_dir / "robustness.csv";
  write_text_file(csv_path, csv.str());
  result.outputs.push_back(csv_path);

  const fs::path flips_path = ctx.out_dir / "robustness_flips.csv";
  write_text_file(flips_path, flips.str());
  result.outputs.push_back(flips_path);

  const fs::path svg_path = ctx.out_dir / "robustness.svg";
  write_text_file(svg_path, with_svg_provenance(metrics_bar_chart("Perturbation robustness",
                                                                  acc_bars, kappa_points),
                                                run.run_id, run.fingerprint));
  result.outputs.push_back(svg_path);

  write_manifest(ctx, "robustness", run, {scheme}, conditions, result);
  return result;
}

ExperimentResult run_attack(const RunContext& ctx, SchemeId scheme) {
  require_gold(ctx.corpus, scheme);
  if (ctx.config.attack.group_size > ctx.corpus.size()) {
    throw std::invalid_argument("attack group_size " +
                                std::to_string(ctx.config.attack.group_size) +
                                " exceeds corpus size " + std::to_string(ctx.corpus.size()));
  }
  std::vector<AttackKind> kinds = default_attack_kinds();
  for (const auto& [name, file] : ctx.config.attack.payload_files) {
    const AttackName kind_name = attack_from_name(name);
    if (kind_name == AttackName::Control) {
      throw std::invalid_argument("the control group takes no payload file");
    }
    for (AttackKind& kind : kinds) {
      if (kind.name == kind_name) kind.payloads = load_payload_file(file);
    }
  }

  DirLock lock(ctx.out_dir);
  RunSetup run = setup_run(ctx, "attack", {scheme});
  ExperimentResult result;
  result.run_id = run.run_id;
  const std::string sname(scheme_name(scheme));
  std::vector<std::string> conditions;

  std::ostringstream defense;
  defense << provenance_line(run.run_id, run.fingerprint);
  defense << csv_row({"attack", "n", "defense_rate", "top1", "top2", "top3"}) << "\n";
  std::ostringstream distribution;
  distribution << provenance_line(run.run_id, run.fingerprint);
  distribution << csv_row({"attack", "label", "count", "fraction"}) << "\n";
  std::ostringstream failures;
  failures << provenance_line(run.run_id, run.fingerprint);
  failures << csv_row({"attack", "item_id", "payload", "verdict", "justification"}) << "\n";
  std::vector<svg::StackColumn> columns;

  for (const AttackKind& kind : kinds) {
    const std::string kind_str(attack_name(kind.name));
    const std::uint64_t sample_seed =
        CounterRng::keyed({std::to_string(ctx.config.seed), "attack-sample", kind_str})
            .next_u64();
    const Corpus sample = sample_corpus(ctx.corpus, ctx.config.attack.group_size, sample_seed);
    const Corpus attacked = build_attack_corpus(sample, kind, ctx.config.seed);
    const std::string condition = "attack:" + kind_str + "@" + sname;
    conditions.push_back(condition);
    const std::vector<JudgeResponse> responses =
        grade_corpus(attacked, scheme, ctx.config.judge, *run.backend, condition, run.log.get(),
                     run.budget.get());
    const std::map<std::string, Label> preds = plurality_predictions(responses);

    std::vector<Label> verdicts;
    verdicts.reserve(preds.size());
    for (const GradingItem& item : attacked.items) {
      auto it = preds.find(item.id);
      if (it != preds.end()) verdicts.push_back(it->second);
    }

    std::string defense_cell;
    if (kind.name != AttackName::Control) {
      if (verdicts.empty()) {
        result.warnings.push_back(kind_str + ": no parsed verdicts, defense rate skipped");
      } else {
        defense_cell = format6(attack_defense_rate(kind.name, verdicts, scheme));
      }
    }

    std::vector<int> counts(static_cast<std::size_t>(cardinality(scheme)), 0);
    for (const Label& v : verdicts) ++counts[static_cast<std::size_t>(v.code)];

    std::vector<std::pair<int, int>> ranked;  // (count, code)
    for (int code = 0; code < cardinality(scheme); ++code) {
      ranked.emplace_back(counts[static_cast<std::size_t>(code)], code);
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    std::vector<std::string> top_cells;
    for (std::size_t k = 0; k < 3; ++k) {
      if (k < ranked.size() && ranked[k].first > 0) {
        top_cells.push_back(std::string(make_label(scheme, ranked[k].second).name()) + "=" +
                            std::to_string(ranked[k].first));
      } else {
        top_cells.push_back("");
      }
    }
    defense << csv_row({kind_str, std::to_string(verdicts.size()), defense_cell, top_cells[0],
                        top_cells[1], top_cells[2]})
            << "\n";

    svg::StackColumn column;
    column.label = kind_str;
    for (int code = 0; code < cardinality(scheme); ++code) {
      const Label label = make_label(scheme, code);
      const double fraction =
          verdicts.empty()
              ? 0.0
              : static_cast<double>(counts[static_cast<std::size_t>(code)]) /
                    static_cast<double>(verdicts.size());
      distribution << csv_row({kind_str, std::string(label.name()),
                               std::to_string(counts[static_cast<std::size_t>(code)]),
                               format6(fraction)})
                   << "\n";
      column.segments.push_back({std::string(label.name()), fraction});
    }
    columns.push_back(std::move(column));

    if (kind.name != AttackName::Control) {
      for (const FailureRow& row : failure_report(responses, attacked, scheme)) {
        failures << csv_row({kind_str, row.item_id, row.payload, std::string(row.verdict.name()),
                             row.justification})
                 << "\n";
      }
    }
  }

  const fs::path defense_path = ctx.out_dir / "attack_defense.csv";
  write_text_file(defense_path, defense.str());
  result.outputs.push_back(defense_path);

  const fs::path distribution_path = ctx.out_dir / "attack_distribution.csv";
  write_text_file(distribution_path, distribution.str());
  result.outputs.push_back(distribution_path);

  const fs::path failures_path = ctx.out_dir / "attack_failures.csv";
  write_text_file(failures_path, failures.str());
  result.outputs.push_back(failures_path);

  const fs::path svg_path = ctx.out_dir / "attack_distribution.svg";
  write_text_file(
      svg_path,
      with_svg_provenance(svg::stacked_bar_chart("Verdict distribution under prompt injection",
                                                 "fraction of items", columns),
                          run.run_id, run.fingerprint));
  result.outputs.push_back(svg_path);

  write_manifest(ctx, "attack", run, {scheme}, conditions, result);
  return result;
}

ExperimentResult run_grade(const RunContext& ctx, SchemeId scheme) {
  require_gold(ctx.corpus, scheme);

  DirLock lock(ctx.out_dir);
  RunSetup run = setup_run(ctx, "grade", {scheme});
  ExperimentResult result;
  result.run_id = run.run_id;
  const std::string sname(scheme_name(scheme));
  const std::string condition = "control@" + sname;

  const std::vector<JudgeResponse> responses =
      grade_corpus(ctx.corpus, scheme, ctx.config.judge, *run.backend, condition, run.log.get(),
                   run.budget.get());
  const std::map<std::string, Label> preds = plurality_predictions(responses);

  std::ostringstream pred_csv;
  pred_csv << provenance_line(run.run_id, run.fingerprint);
  pred_csv << csv_row({"item_id", "gold", "prediction", "n_parsed", "n_requested"}) << "\n";
  std::map<std::string, std::pair<int, int>> run_counts;  // item -> (parsed, requested)
  for (const JudgeResponse& r : responses) {
    auto& [parsed, requested] = run_counts[r.item_id];
    ++requested;
    if (r.parsed) ++parsed;
  }
  for (const GradingItem& item : ctx.corpus.items) {
    auto it = preds.find(item.id);
    const auto counts = run_counts[item.id];
    pred_csv << csv_row({item.id, std::string(gold_for(item, scheme)->name()),
                         it != preds.end() ? std::string(it->second.name()) : "",
                         std::to_string(counts.first), std::to_string(counts.second)})
             << "\n";
  }
  const fs::path pred_path = ctx.out_dir / "grade_predictions.csv";
  write_text_file(pred_path, pred_csv.str());
  result.outputs.push_back(pred_path);

  const Aligned aligned = align_predictions(ctx.corpus, preds, scheme);
  if (aligned.missing > 0) {
    result.warnings.push_back(std::to_string(aligned.missing) +
                              " item(s) had no parsed verdict and were dropped from metrics");
  }
  if (aligned.preds.size() >= 2) {
    const MetricsReport rep =
        compute_metrics_report(aligned.preds, aligned.golds, ctx.config.seed);
    const fs::path metrics_path = ctx.out_dir / ("metrics_" + sname + ".json");
    write_text_file(metrics_path,
                    metrics_to_json(rep, run.run_id, run.fingerprint).dump(2) + "\n");
    result.outputs.push_back(metrics_path);
    const fs::path grid_path = ctx.out_dir / ("confusion_" + sname + ".txt");
    write_text_file(grid_path, provenance_line(run.run_id, run.fingerprint) + confusion_grid(rep));
    result.outputs.push_back(grid_path);
  } else {
    result.warnings.push_back("too few parsed verdicts for metrics, metrics files skipped");
  }

  write_manifest(ctx, "grade", run, {scheme}, {condition}, result);
  return result;
}

std::vector<fs::path> regenerate_reports(const fs::path& out_dir) {
  std::vector<fs::path> rebuilt;

  auto load_rows = [](const fs::path& path, std::string& run_id, std::string& fingerprint)
      -> std::vector<std::vector<std::string>> {
    std::string text = read_text_file(path);
    if (!text.empty() && text[0] == '#') {
      const auto eol = text.find('\n');
      const std::string head = text.substr(0, eol);
      auto [rid, fp] = parse_provenance(head);
      run_id = rid;
      fingerprint = fp;
      text = eol == std::string::npos ? std::string() : text.substr(eol + 1);
    }
    return csv_parse(text);
  };

  const fs::path trust_csv = out_dir / "trust_curve.csv";
  if (fs::exists(trust_csv)) {
    std::string run_id, fingerprint;
    const auto rows = load_rows(trust_csv, run_id, fingerprint);
    std::vector<TrustCurvePoint> points;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const auto& row = rows[i];
      if (row.size() < 6) continue;
      TrustCurvePoint p;
      p.scheme = require_scheme(row[0]);
      p.threshold = std::stod(row[1]);
      p.coverage = std::stod(row[2]);
      if (!row[3].empty()) p.effective_accuracy = std::stod(row[3]);
      p.n_graded = std::stoi(row[4]);
      p.n_total = std::stoi(row[5]);
      points.push_back(p);
    }
    const fs::path svg_path = out_dir / "trust_curve.svg";
    write_text_file(svg_path,
                    with_svg_provenance(trust_curve_svg_text(points), run_id, fingerprint));
    rebuilt.push_back(svg_path);
  }

  for (const auto& [csv_name, svg_name, title] :
       {std::tuple<const char*, const char*, const char*>{"complexity.csv", "complexity.svg",
                                                          "Grading agreement by label scheme"},
        std::tuple<const char*, const char*, const char*>{"robustness.csv", "robustness.svg",
                                                          "Perturbation robustness"}}) {
    const fs::path csv_path = out_dir / csv_name;
    if (!fs::exists(csv_path)) continue;
    std::string run_id, fingerprint;
    const auto rows = load_rows(csv_path, run_id, fingerprint);
    std::vector<svg::Bar> acc_bars;
    std::vector<svg::Bar> kappa_points;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const auto& row = rows[i];
      if (row.size() < 8) continue;
      acc_bars.push_back(
          svg::Bar{row[0], std::stod(row[2]), std::stod(row[3]), std::stod(row[4])});
      kappa_points.push_back(
          svg::Bar{row[0], std::stod(row[5]), std::stod(row[6]), std::stod(row[7])});
    }
    const fs::path svg_path = out_dir / svg_name;
    write_text_file(svg_path, with_svg_provenance(metrics_bar_chart(title, acc_bars, kappa_points),
                                                  run_id, fingerprint));
    rebuilt.push_back(svg_path);
  }

  const fs::path dist_csv = out_dir / "attack_distribution.csv";
  if (fs::exists(dist_csv)) {
    std::string run_id, fingerprint;
    const auto rows = load_rows(dist_csv, run_id, fingerprint);
    std::vector<svg::StackColumn> columns;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const auto& row = rows[i];
      if (row.size() < 4) continue;
      if (columns.empty() || columns.back().label != row[0]) {
        columns.push_back(svg::StackColumn{row[0], {}});
      }
      columns.back().segments.push_back({row[1], std::stod(row[3])});
    }
    const fs::path svg_path = out_dir / "attack_distribution.svg";
    write_text_file(
        svg_path,
        with_svg_provenance(svg::stacked_bar_chart("Verdict distribution under prompt injection",
                                                   "fraction of items", columns),
                            run_id, fingerprint));
    rebuilt.push_back(svg_path);
  }

  return rebuilt;
}

}  // namespace rubricjudge
