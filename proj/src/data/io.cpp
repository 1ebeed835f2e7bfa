#include "klan/data/io.hpp"

#include <fstream>
#include <functional>

#include <json.hpp>

#include "klan/error.hpp"

namespace klan::data {

using nlohmann::json;

namespace {

template <typename Record>
void write_jsonl(const std::string& file, const std::vector<Record>& rows,
                 const std::function<json(const Record&)>& to_json) {
  std::ofstream out(file);
  if (!out) throw DataError("cannot open for writing: " + file);
  for (const auto& r : rows) out << to_json(r).dump() << "\n";
  if (!out) throw DataError("write failed: " + file);
}

template <typename Record>
std::vector<Record> read_jsonl(
    const std::string& file,
    const std::function<Record(const json&)>& from_json) {
  std::ifstream in(file);
  if (!in) throw DataError("cannot open: " + file);
  std::vector<Record> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      rows.push_back(from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw DataError(file + ":" + std::to_string(lineno) + ": bad record: " +
                      e.what());
    }
  }
  return rows;
}

}  // namespace

void write_rct_instances(const std::string& file,
                         const std::vector<RctInstance>& rows) {
  write_jsonl<RctInstance>(file, rows, [](const RctInstance& r) {
    return json{{"user_id", r.user_id},
                {"treatment", r.treatment},
                {"response", r.response},
                {"numeric", r.numeric},
                {"categorical", r.categorical}};
  });
}

std::vector<RctInstance> read_rct_instances(const std::string& file) {
  return read_jsonl<RctInstance>(file, [](const json& j) {
    RctInstance r;
    r.user_id = j.at("user_id").get<int>();
    r.treatment = j.at("treatment").get<int>();
    r.response = j.at("response").get<double>();
    r.numeric = j.at("numeric").get<std::vector<double>>();
    r.categorical = j.at("categorical").get<std::vector<int>>();
    return r;
  });
}

void write_transitions(const std::string& file,
                       const std::vector<Transition>& rows) {
  write_jsonl<Transition>(file, rows, [](const Transition& r) {
    return json{{"user_id", r.user_id},
                {"day", r.day},
                {"hour", r.hour},
                {"state", r.state},
                {"action", r.action},
                {"reward", r.reward},
                {"next_state", r.next_state},
                {"terminal", r.terminal}};
  });
}

std::vector<Transition> read_transitions(const std::string& file) {
  return read_jsonl<Transition>(file, [](const json& j) {
    Transition r;
    r.user_id = j.at("user_id").get<int>();
    r.day = j.at("day").get<int>();
    r.hour = j.at("hour").get<int>();
    r.state = j.at("state").get<std::vector<double>>();
    r.action = j.at("action").get<int>();
    r.reward = j.at("reward").get<double>();
    r.next_state = j.at("next_state").get<std::vector<double>>();
    r.terminal = j.at("terminal").get<bool>();
    return r;
  });
}

void write_stream_instances(const std::string& file,
                            const std::vector<StreamInstance>& rows) {
  write_jsonl<StreamInstance>(file, rows, [](const StreamInstance& r) {
    return json{{"user_id", r.user_id},
                {"day", r.day},
                {"context", r.context},
                {"stats", r.stats},
                {"page", r.page},
                {"page_switches", r.page_switches},
                {"usage_seconds", r.usage_seconds},
                {"label", r.label}};
  });
}

std::vector<StreamInstance> read_stream_instances(const std::string& file) {
  return read_jsonl<StreamInstance>(file, [](const json& j) {
    StreamInstance r;
    r.user_id = j.at("user_id").get<int>();
    r.day = j.at("day").get<int>();
    r.context = j.at("context").get<std::vector<double>>();
    r.stats = j.at("stats").get<std::vector<double>>();
    r.page = j.at("page").get<int>();
    r.page_switches = j.at("page_switches").get<int>();
    r.usage_seconds = j.at("usage_seconds").get<double>();
    r.label = j.at("label").get<int>();
    return r;
  });
}

}  // namespace klan::data
