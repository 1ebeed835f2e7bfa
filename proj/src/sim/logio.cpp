#include "klan/sim/logio.hpp"

#include <fstream>

#include <json.hpp>

#include "klan/checkpoint.hpp"
#include "klan/error.hpp"

namespace klan::sim {

using nlohmann::json;

void write_session_logs(const std::string& file,
                        const std::vector<SessionLog>& logs,
                        bool include_oracle) {
  std::ofstream out(file);
  if (!out) throw DataError("cannot open session log for writing: " + file);
  for (const SessionLog& s : logs) {
    json j = {
        {"user_id", s.user_id},
        {"day", s.day},
        {"hour", s.hour},
        {"entry_index", s.entry_index},
        {"landing_page", s.landing_page},
        {"usage_seconds", s.usage_seconds},
        {"page_switches", s.page_switches},
        {"dropped_off", s.dropped_off},
        {"trigger_active", s.trigger_active},
    };
    if (include_oracle) j["hidden_interest"] = s.hidden_interest;
    out << j.dump() << "\n";
  }
  if (!out) throw DataError("write failed for session log: " + file);
}

std::vector<SessionLog> read_session_logs(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw DataError("cannot open session log: " + file);
  std::vector<SessionLog> logs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError(file + ":" + std::to_string(lineno) +
                      ": bad session record: " + e.what());
    }
    SessionLog s;
    s.user_id = j.at("user_id").get<int>();
    s.day = j.at("day").get<int>();
    s.hour = j.at("hour").get<int>();
    s.entry_index = j.at("entry_index").get<int>();
    s.landing_page = j.at("landing_page").get<int>();
    s.usage_seconds = j.at("usage_seconds").get<double>();
    s.page_switches = j.at("page_switches").get<int>();
    s.dropped_off = j.at("dropped_off").get<bool>();
    s.trigger_active = j.value("trigger_active", false);
    s.hidden_interest = j.value("hidden_interest", -1);
    logs.push_back(s);
  }
  return logs;
}

}  // namespace klan::sim
