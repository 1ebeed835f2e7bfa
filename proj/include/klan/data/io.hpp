#pragma once

#include <string>
#include <vector>

#include "klan/data/records.hpp"

namespace klan::data {

// JSONL files, one record per line, keys sorted. Round-trips exactly for
// the values we produce (doubles are serialized at full precision).
void write_rct_instances(const std::string& file,
                         const std::vector<RctInstance>& rows);
std::vector<RctInstance> read_rct_instances(const std::string& file);

void write_transitions(const std::string& file,
                       const std::vector<Transition>& rows);
std::vector<Transition> read_transitions(const std::string& file);

void write_stream_instances(const std::string& file,
                            const std::vector<StreamInstance>& rows);
std::vector<StreamInstance> read_stream_instances(const std::string& file);

}  // namespace klan::data
