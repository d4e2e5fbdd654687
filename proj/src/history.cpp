#include "pacbandit/history.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <utility>

#include "json.hpp"

namespace pacbandit {

using ordered_json = nlohmann::ordered_json;

History::History(std::size_t num_actions, std::optional<std::size_t> num_contexts,
                 double eps, std::vector<LoggedStep> steps)
    : num_actions_(num_actions),
      num_contexts_(num_contexts),
      eps_(eps),
      steps_(std::move(steps)) {
  if (num_actions_ == 0) throw precondition_error("history needs K >= 1");
  if (num_contexts_ && *num_contexts_ == 0)
    throw precondition_error("contextual history needs C >= 1");
  if (!(eps_ > 0.0) || !(eps_ <= 1.0))
    throw precondition_error("history eps must lie in (0, 1]");
  for (const LoggedStep& s : steps_) {
    if (s.action >= num_actions_)
      throw precondition_error("logged action out of range");
    if (!(s.reward >= 0.0) || !(s.reward <= 1.0))
      throw precondition_error("logged reward must lie in [0, 1]");
    if (!(s.logging_prob >= eps_) || !(s.logging_prob <= 1.0))
      throw precondition_error("logging probability must lie in [eps, 1]");
    if (s.context.has_value() != num_contexts_.has_value())
      throw precondition_error(
          "step context presence must match the history's contextual flag");
    if (s.context && *s.context >= *num_contexts_)
      throw precondition_error("logged context out of range");
  }
}

void write_history_jsonl(const History& h, std::ostream& out) {
  ordered_json header;
  header["epsilon"] = h.eps();
  header["K"] = h.num_actions();
  if (h.num_contexts())
    header["C"] = *h.num_contexts();
  else
    header["C"] = nullptr;
  out << header.dump() << '\n';
  long long n = 0;
  for (const LoggedStep& s : h.steps()) {
    ordered_json line;
    line["n"] = ++n;
    line["action"] = s.action;
    if (s.context)
      line["context"] = *s.context;
    else
      line["context"] = nullptr;
    line["reward"] = s.reward;
    line["logging_prob"] = s.logging_prob;
    out << line.dump() << '\n';
  }
}

std::string history_to_jsonl(const History& h) {
  std::ostringstream os;
  write_history_jsonl(h, os);
  return os.str();
}

namespace {

ordered_json parse_line(const std::string& line, long long lineno) {
  try {
    return ordered_json::parse(line);
  } catch (const ordered_json::parse_error& e) {
    throw parse_error(std::string("invalid JSON: ") + e.what(), lineno);
  }
}

template <typename T>
T require_field(const ordered_json& j, const char* key, long long lineno) {
  if (!j.contains(key))
    throw parse_error(std::string("missing field \"") + key + "\"", lineno);
  try {
    return j.at(key).get<T>();
  } catch (const ordered_json::exception&) {
    throw parse_error(std::string("field \"") + key + "\" has the wrong type",
                      lineno);
  }
}

}  // namespace

History read_history_jsonl(std::istream& in) {
  std::string line;
  long long lineno = 0;
  while (std::getline(in, line) && line.empty()) ++lineno;
  if (line.empty()) throw parse_error("empty history stream");
  ++lineno;
  const ordered_json header = parse_line(line, lineno);
  const double eps = require_field<double>(header, "epsilon", lineno);
  const auto k = require_field<std::size_t>(header, "K", lineno);
  std::optional<std::size_t> c;
  if (!header.contains("C"))
    throw parse_error("missing field \"C\"", lineno);
  if (!header.at("C").is_null()) c = require_field<std::size_t>(header, "C", lineno);

  std::vector<LoggedStep> steps;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const ordered_json j = parse_line(line, lineno);
    LoggedStep s;
    const auto n = require_field<long long>(j, "n", lineno);
    if (n != static_cast<long long>(steps.size()) + 1)
      throw parse_error("step numbers must be consecutive starting at 1", lineno);
    s.action = require_field<std::size_t>(j, "action", lineno);
    if (j.contains("context") && !j.at("context").is_null())
      s.context = require_field<std::size_t>(j, "context", lineno);
    s.reward = require_field<double>(j, "reward", lineno);
    s.logging_prob = require_field<double>(j, "logging_prob", lineno);
    steps.push_back(s);
  }
  try {
    return History(k, c, eps, std::move(steps));
  } catch (const precondition_error& e) {
    // A structurally readable file with out-of-range values is still a bad
    // input file, not a caller bug.
    throw parse_error(std::string("invalid history: ") + e.what());
  }
}

History read_history_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw parse_error("cannot open history file: " + path);
  return read_history_jsonl(in);
}

void write_history_file(const History& h, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw parse_error("cannot open output file: " + path);
  write_history_jsonl(h, out);
  if (!out.good()) throw parse_error("error while writing: " + path);
}

}  // namespace pacbandit
