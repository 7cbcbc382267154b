#include <sstream>
#include <stdexcept>
#include <utility>

#include "json.hpp"
#include "rubricjudge/runlog.hpp"

namespace rubricjudge {

namespace {

using nlohmann::json;

json to_json(const std::string& run_id, const JudgeResponse& r) {
  json row = {
      {"run_id", run_id},
      {"item_id", r.item_id},
      {"run_index", r.run_index},
      {"condition", r.condition},
      {"scheme", std::string(scheme_name(r.scheme))},
      {"raw_text", r.raw_text},
      {"latency_ms", r.latency_ms},
  };
  if (r.parsed) {
    row["label_code"] = r.parsed->label.code;
    row["label_name"] = std::string(r.parsed->label.name());
    row["justification"] = r.parsed->justification;
  }
  if (r.error) {
    row["error_kind"] = r.error->kind;
    row["error_message"] = r.error->message;
  }
  return row;
}

JudgeResponse from_json(const json& row, std::size_t line_no) {
  auto fail = [line_no](const std::string& why) -> std::runtime_error {
    std::ostringstream msg;
    msg << "run log line " << line_no << ": " << why;
    return std::runtime_error(msg.str());
  };
  JudgeResponse r;
  try {
    r.item_id = row.at("item_id").get<std::string>();
    r.run_index = row.at("run_index").get<int>();
    r.condition = row.at("condition").get<std::string>();
    r.scheme = require_scheme(row.at("scheme").get<std::string>());
    r.raw_text = row.value("raw_text", std::string());
    r.latency_ms = row.value("latency_ms", 0.0);
    if (row.contains("label_code")) {
      ParsedVerdict verdict;
      verdict.label = make_label(r.scheme, row.at("label_code").get<int>());
      verdict.justification = row.value("justification", std::string());
      r.parsed = std::move(verdict);
    }
    if (row.contains("error_kind")) {
      r.error = ResponseError{row.at("error_kind").get<std::string>(),
                              row.value("error_message", std::string())};
    }
  } catch (const std::exception& e) {
    throw fail(e.what());
  }
  if (r.parsed.has_value() == r.error.has_value()) {
    throw fail("row must carry exactly one of a verdict or an error");
  }
  return r;
}

}  // namespace

JsonlRunLog::JsonlRunLog(std::filesystem::path path, std::string run_id)
    : path_(std::move(path)), run_id_(std::move(run_id)) {
  std::ifstream in(path_);
  if (in) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      json row = json::parse(line, nullptr, false);
      if (row.is_discarded()) {
        std::ostringstream msg;
        msg << "run log line " << line_no << " is not valid JSON";
        throw std::runtime_error(msg.str());
      }
      const std::string owner = row.value("run_id", std::string());
      if (owner != run_id_) {
        std::ostringstream msg;
        msg << "run log line " << line_no << " belongs to run " << owner << ", expected "
            << run_id_;
        throw std::runtime_error(msg.str());
      }
      JudgeResponse r = from_json(row, line_no);
      const std::string key = response_key(r.item_id, r.run_index, r.condition);
      if (!responses_.emplace(key, std::move(r)).second) {
        std::ostringstream msg;
        msg << "run log line " << line_no << " duplicates key (" << row.at("item_id")
            << ", " << row.at("run_index") << ", " << row.at("condition") << ")";
        throw std::runtime_error(msg.str());
      }
    }
  }
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  out_.open(path_, std::ios::app);
  if (!out_) throw std::runtime_error("cannot open run log for append: " + path_.string());
}

bool JsonlRunLog::contains(const std::string& item_id, int run_index,
                           const std::string& condition) const {
  return responses_.count(response_key(item_id, run_index, condition)) > 0;
}

const JudgeResponse* JsonlRunLog::find(const std::string& item_id, int run_index,
                                       const std::string& condition) const {
  auto it = responses_.find(response_key(item_id, run_index, condition));
  return it != responses_.end() ? &it->second : nullptr;
}

void JsonlRunLog::append(const JudgeResponse& response) {
  const std::string key = response_key(response.item_id, response.run_index, response.condition);
  if (responses_.count(key) > 0) return;
  out_ << to_json(run_id_, response).dump() << '\n';
  out_.flush();
  if (!out_) throw std::runtime_error("write to run log failed: " + path_.string());
  responses_.emplace(key, response);
}

std::vector<JudgeResponse> JsonlRunLog::read_all(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open run log: " + path.string());
  std::vector<JudgeResponse> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json row = json::parse(line, nullptr, false);
    if (row.is_discarded()) {
      std::ostringstream msg;
      msg << "run log line " << line_no << " is not valid JSON";
      throw std::runtime_error(msg.str());
    }
    rows.push_back(from_json(row, line_no));
  }
  return rows;
}

}  // namespace rubricjudge
