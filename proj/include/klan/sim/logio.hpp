#pragma once

#include <string>
#include <vector>

#include "klan/sim/types.hpp"

namespace klan::sim {

// Line-delimited JSON, one session per line, keys sorted. Oracle-only fields
// (hidden_interest, trigger flag is observable and always written) are
// included only when include_oracle is set.
void write_session_logs(const std::string& file,
                        const std::vector<SessionLog>& logs,
                        bool include_oracle);

std::vector<SessionLog> read_session_logs(const std::string& file);

}  // namespace klan::sim
