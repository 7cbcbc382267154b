#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "rubricjudge/judge.hpp"

namespace rubricjudge {

// Append-only JSONL response log backing resumable runs. One response per
// line; every line carries the owning run_id and the (item_id, run_index,
// condition) key. append() flushes after each line so a killed process
// loses at most the line being written.
class JsonlRunLog : public ResponseStore {
 public:
  // Opens `path` (creating it if absent) and loads any rows already present.
  // Throws std::runtime_error on unparseable lines, duplicate keys, or rows
  // written by a different run_id.
  JsonlRunLog(std::filesystem::path path, std::string run_id);

  bool contains(const std::string& item_id, int run_index,
                const std::string& condition) const override;
  const JudgeResponse* find(const std::string& item_id, int run_index,
                            const std::string& condition) const override;
  void append(const JudgeResponse& response) override;
  std::size_t size() const override { return responses_.size(); }

  const std::string& run_id() const { return run_id_; }
  const std::filesystem::path& path() const { return path_; }

  // Re-reads a log in file order without key checks, for audits and tests.
  static std::vector<JudgeResponse> read_all(const std::filesystem::path& path);

 private:
  std::filesystem::path path_;
  std::string run_id_;
  std::map<std::string, JudgeResponse> responses_;
  std::ofstream out_;
};

}  // namespace rubricjudge
