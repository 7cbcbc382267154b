#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rubricjudge/runner.hpp"

namespace {

using namespace rubricjudge;

CorpusFormat resolve_format(const std::string& format, const std::string& path) {
  if (format == "jsonl") return CorpusFormat::Jsonl;
  if (format == "csv") return CorpusFormat::Csv;
  const auto dot = path.rfind('.');
  if (dot != std::string::npos && path.substr(dot) == ".csv") return CorpusFormat::Csv;
  return CorpusFormat::Jsonl;
}

SchemeId resolve_scheme(const std::string& flag, const Corpus& corpus) {
  if (!flag.empty()) return require_scheme(flag);
  const std::vector<SchemeId> available = schemes_available(corpus);
  if (available.empty()) {
    throw MissingGold("no scheme has gold labels for every item; pass --scheme explicitly");
  }
  return available.back();  // finest fully covered scheme
}

void print_result(const ExperimentResult& result) {
  std::cout << "run " << result.run_id << "\n";
  for (const auto& path : result.outputs) std::cout << "wrote " << path.string() << "\n";
  for (const std::string& warning : result.warnings) {
    std::cerr << "warning: " << warning << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reliability harness for rubric-based LLM judging of short answers"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed_flag = 0;
  std::string backend_flag;
  std::string out_dir = "out";
  long long max_calls = 0;
  app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed_flag, "Override the config seed");
  app.add_option("--backend", backend_flag, "Override the judge backend")
      ->check(CLI::IsMember({"mock", "http"}));
  app.add_option("--out-dir", out_dir, "Output directory (default: out)");
  app.add_option("--max-calls", max_calls,
                 "Abort after this many backend calls (testing aid; exit code 3)")
      ->group("");

  std::string corpus_path;
  std::string format = "auto";
  std::string scheme_flag;
  std::vector<std::string> scheme_list;
  std::string ingest_output;

  auto add_corpus_options = [&](CLI::App* cmd) {
    cmd->add_option("corpus", corpus_path, "Corpus file (JSONL or CSV)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--format", format, "Corpus format (default: by extension)")
        ->check(CLI::IsMember({"auto", "jsonl", "csv"}));
  };

  auto* ingest = app.add_subcommand("ingest", "Validate a corpus and write canonical JSONL");
  ingest->fallthrough();
  add_corpus_options(ingest);
  ingest->add_option("--output", ingest_output,
                     "Canonical JSONL path (default: <out-dir>/corpus.jsonl)");

  auto* grade = app.add_subcommand("grade", "Grade a corpus and report agreement metrics");
  grade->fallthrough();
  add_corpus_options(grade);
  grade->add_option("--scheme", scheme_flag, "Label scheme (2way, 3way, 5way)")
      ->check(CLI::IsMember({"2way", "3way", "5way"}));

  auto* trust = app.add_subcommand("trust-curve",
                                   "Sweep consensus thresholds for coverage and accuracy");
  trust->fallthrough();
  add_corpus_options(trust);
  trust->add_option("--scheme", scheme_list, "Scheme(s) to sweep (default: all with gold)")
      ->check(CLI::IsMember({"2way", "3way", "5way"}));

  auto* complexity =
      app.add_subcommand("complexity", "Compare agreement across the three label schemes");
  complexity->fallthrough();
  add_corpus_options(complexity);

  auto* robustness =
      app.add_subcommand("robustness", "Grade under text perturbations and report degradation");
  robustness->fallthrough();
  add_corpus_options(robustness);
  robustness->add_option("--scheme", scheme_flag, "Label scheme (2way, 3way, 5way)")
      ->check(CLI::IsMember({"2way", "3way", "5way"}));

  auto* attack =
      app.add_subcommand("attack", "Grade injected payloads and report defense rates");
  attack->fallthrough();
  add_corpus_options(attack);
  attack->add_option("--scheme", scheme_flag, "Label scheme (2way, 3way, 5way)")
      ->check(CLI::IsMember({"2way", "3way", "5way"}));

  auto* report = app.add_subcommand("report", "Rebuild charts from the CSVs in --out-dir");
  report->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    HarnessConfig config =
        config_path.empty() ? HarnessConfig{} : load_harness_config(config_path);
    if (seed_opt->count() > 0) config.seed = seed_flag;
    if (backend_flag == "mock") config.judge.backend = BackendKind::Mock;
    if (backend_flag == "http") config.judge.backend = BackendKind::Http;

    if (*report) {
      for (const auto& path : regenerate_reports(out_dir)) {
        std::cout << "wrote " << path.string() << "\n";
      }
      return 0;
    }

    Corpus corpus = load_corpus(corpus_path, resolve_format(format, corpus_path));

    if (*ingest) {
      const std::string target =
          ingest_output.empty() ? (std::filesystem::path(out_dir) / "corpus.jsonl").string()
                                : ingest_output;
      std::filesystem::path target_path(target);
      if (target_path.has_parent_path()) std::filesystem::create_directories(target_path.parent_path());
      save_corpus_jsonl(corpus, target_path);
      std::cout << "items " << corpus.size() << "\n";
      std::cout << "fingerprint " << corpus_fingerprint(corpus) << "\n";
      std::cout << "schemes";
      for (SchemeId s : schemes_available(corpus)) std::cout << " " << scheme_name(s);
      std::cout << "\n";
      std::cout << "wrote " << target_path.string() << "\n";
      return 0;
    }

    RunContext ctx;
    ctx.corpus = std::move(corpus);
    ctx.config = std::move(config);
    ctx.out_dir = out_dir;
    ctx.max_calls = max_calls;

    if (*grade) {
      print_result(run_grade(ctx, resolve_scheme(scheme_flag, ctx.corpus)));
    } else if (*trust) {
      std::vector<SchemeId> schemes;
      for (const std::string& name : scheme_list) schemes.push_back(require_scheme(name));
      print_result(run_trust_curve(ctx, schemes));
    } else if (*complexity) {
      print_result(run_complexity(ctx));
    } else if (*robustness) {
      print_result(run_robustness(ctx, resolve_scheme(scheme_flag, ctx.corpus)));
    } else if (*attack) {
      print_result(run_attack(ctx, resolve_scheme(scheme_flag, ctx.corpus)));
    }
    return 0;
  } catch (const CallBudgetExhausted& e) {
    std::cerr << "aborted: " << e.what() << "; re-run the same command to resume\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
