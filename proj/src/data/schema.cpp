#include "klan/data/schema.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "klan/error.hpp"

namespace klan::data {

using nlohmann::json;

namespace {
constexpr double kStdFloor = 1e-8;

void mean_std(const std::vector<double>& xs, double* mean, double* sd) {
  if (xs.empty()) {
    *mean = 0.0;
    *sd = 1.0;
    return;
  }
  double m = 0.0;
  for (double x : xs) m += x;
  m /= xs.size();
  double v = 0.0;
  for (double x : xs) v += (x - m) * (x - m);
  v /= xs.size();
  *mean = m;
  *sd = std::sqrt(v) > kStdFloor ? std::sqrt(v) : 1.0;
}
}  // namespace

std::size_t RctSchema::numeric_count() const {
  std::size_t n = 0;
  for (const auto& f : fields)
    if (f.kind == FieldKind::kNumeric) ++n;
  return n;
}

std::size_t RctSchema::categorical_count() const {
  return fields.size() - numeric_count();
}

void RctSchema::fit(const std::vector<RctInstance>& train) {
  if (train.empty()) throw DataError("RctSchema::fit: empty training split");
  std::size_t ni = 0;
  for (auto& f : fields) {
    if (f.kind != FieldKind::kNumeric) continue;
    std::vector<double> col;
    col.reserve(train.size());
    for (const auto& inst : train) {
      if (inst.numeric.size() != numeric_count())
        throw DataError("RctSchema::fit: instance numeric size mismatch");
      col.push_back(inst.numeric[ni]);
    }
    mean_std(col, &f.mean, &f.std);
    f.normalize = true;
    ++ni;
  }
  std::vector<double> ys;
  ys.reserve(train.size());
  for (const auto& inst : train) ys.push_back(inst.response);
  mean_std(ys, &response_mean, &response_std);
}

std::vector<double> RctSchema::normalized_numeric(const RctInstance& inst) const {
  if (inst.numeric.size() != numeric_count())
    throw DataError("normalized_numeric: instance does not match schema");
  std::vector<double> out(inst.numeric.size());
  std::size_t ni = 0;
  for (const auto& f : fields) {
    if (f.kind != FieldKind::kNumeric) continue;
    double v = inst.numeric[ni];
    out[ni] = f.normalize ? (v - f.mean) / f.std : v;
    ++ni;
  }
  return out;
}

double RctSchema::normalize_response(double y) const {
  return (y - response_mean) / response_std;
}

double RctSchema::denormalize_response(double y_z) const {
  return y_z * response_std + response_mean;
}

RctSchema default_rct_schema(int pages) {
  RctSchema s;
  s.treatments = pages;
  s.fields.push_back({"activity_bucket", FieldKind::kCategorical, 8});
  for (const char* n : {"usage_7d", "usage_30d", "entries_7d", "switch_rate_7d"})
    s.fields.push_back({n, FieldKind::kNumeric});
  for (int k = 0; k < pages; ++k)
    s.fields.push_back({"stay7_p" + std::to_string(k), FieldKind::kNumeric});
  for (int k = 0; k < pages; ++k)
    s.fields.push_back({"stay14_p" + std::to_string(k), FieldKind::kNumeric});
  return s;
}

void VectorSchema::fit(const std::vector<const std::vector<double>*>& rows) {
  if (rows.empty()) throw DataError("VectorSchema::fit: no rows");
  mean.assign(dim(), 0.0);
  std.assign(dim(), 1.0);
  for (std::size_t j = 0; j < dim(); ++j) {
    if (!normalize[j]) continue;
    std::vector<double> col;
    col.reserve(rows.size());
    for (const auto* r : rows) {
      if (r->size() != dim())
        throw DataError("VectorSchema::fit: row size mismatch");
      col.push_back((*r)[j]);
    }
    mean_std(col, &mean[j], &std[j]);
  }
}

std::vector<double> VectorSchema::apply(const std::vector<double>& raw) const {
  if (raw.size() != dim()) throw DataError("VectorSchema::apply: size mismatch");
  std::vector<double> out(raw.size());
  for (std::size_t j = 0; j < raw.size(); ++j)
    out[j] = normalize[j] ? (raw[j] - mean[j]) / std[j] : raw[j];
  return out;
}

namespace {
VectorSchema make_schema(std::vector<std::pair<std::string, bool>> dims) {
  VectorSchema s;
  for (auto& [n, z] : dims) {
    s.names.push_back(n);
    s.normalize.push_back(z);
  }
  s.mean.assign(s.dim(), 0.0);
  s.std.assign(s.dim(), 1.0);
  return s;
}

std::vector<std::pair<std::string, bool>> realtime_dims(int pages) {
  std::vector<std::pair<std::string, bool>> dims;
  for (int k = 0; k < pages; ++k)
    dims.emplace_back("today_usage_p" + std::to_string(k), true);
  dims.emplace_back("prior_entries", true);
  dims.emplace_back("trigger", false);
  for (int h = 0; h < 24; ++h) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "hour_%02d", h);
    dims.emplace_back(buf, false);
  }
  return dims;
}
}  // namespace

VectorSchema state_schema(int pages) {
  auto dims = realtime_dims(pages);
  for (int k = 0; k < pages; ++k)
    dims.emplace_back("stay7_p" + std::to_string(k), true);
  return make_schema(std::move(dims));
}

VectorSchema context_schema(int pages) { return make_schema(realtime_dims(pages)); }

VectorSchema stats_schema(int pages) {
  std::vector<std::pair<std::string, bool>> dims = {
      {"usage_7d", true}, {"entries_7d", true}, {"switch_rate_7d", true}};
  for (int k = 0; k < pages; ++k)
    dims.emplace_back("stay7_p" + std::to_string(k), true);
  return make_schema(std::move(dims));
}

void TransitionSchema::fit(const std::vector<Transition>& train) {
  if (train.empty()) throw DataError("TransitionSchema::fit: empty split");
  std::vector<const std::vector<double>*> rows;
  rows.reserve(train.size());
  for (const auto& t : train) rows.push_back(&t.state);
  state.fit(rows);
  std::vector<double> rs;
  rs.reserve(train.size());
  for (const auto& t : train) rs.push_back(t.reward);
  double m, sd;
  mean_std(rs, &m, &sd);
  reward_mean = m;
  reward_std = sd;
}

double TransitionSchema::normalize_reward(double r) const {
  return (r - reward_mean) / reward_std;
}

void StreamSchema::fit(const std::vector<StreamInstance>& train) {
  if (train.empty()) throw DataError("StreamSchema::fit: empty split");
  std::vector<const std::vector<double>*> crows, srows;
  for (const auto& t : train) {
    crows.push_back(&t.context);
    srows.push_back(&t.stats);
  }
  context.fit(crows);
  stats.fit(srows);
}

// --- manifests ---

namespace {
json vector_schema_to_json(const VectorSchema& s) {
  return json{{"names", s.names},
              {"normalize", s.normalize},
              {"mean", s.mean},
              {"std", s.std}};
}

VectorSchema vector_schema_from_json(const json& j) {
  VectorSchema s;
  s.names = j.at("names").get<std::vector<std::string>>();
  s.normalize = j.at("normalize").get<std::vector<bool>>();
  s.mean = j.at("mean").get<std::vector<double>>();
  s.std = j.at("std").get<std::vector<double>>();
  if (s.normalize.size() != s.names.size() || s.mean.size() != s.names.size() ||
      s.std.size() != s.names.size())
    throw DataError("vector schema: inconsistent array lengths");
  return s;
}

json load_json_file(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw DataError("cannot open schema manifest: " + file);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw DataError(file + ": bad manifest: " + e.what());
  }
  return j;
}

void write_json_file(const json& j, const std::string& file) {
  std::ofstream out(file);
  if (!out) throw DataError("cannot open manifest for writing: " + file);
  out << j.dump(2) << "\n";
}
}  // namespace

void save_rct_schema(const RctSchema& s, const std::string& file) {
  json fields = json::array();
  for (const auto& f : s.fields) {
    json fj = {{"name", f.name},
               {"type", f.kind == FieldKind::kNumeric ? "numeric" : "categorical"}};
    if (f.kind == FieldKind::kCategorical) fj["cardinality"] = f.cardinality;
    if (f.kind == FieldKind::kNumeric) {
      fj["normalize"] = f.normalize;
      fj["mean"] = f.mean;
      fj["std"] = f.std;
    }
    fields.push_back(fj);
  }
  write_json_file(json{{"kind", "rct"},
                       {"fields", fields},
                       {"response", {{"mean", s.response_mean}, {"std", s.response_std}}},
                       {"treatments", s.treatments}},
                  file);
}

RctSchema load_rct_schema(const std::string& file) {
  json j = load_json_file(file);
  if (j.value("kind", "") != "rct") throw DataError(file + ": not an rct schema");
  RctSchema s;
  for (const auto& fj : j.at("fields")) {
    Field f;
    f.name = fj.at("name").get<std::string>();
    f.kind = fj.at("type") == "numeric" ? FieldKind::kNumeric : FieldKind::kCategorical;
    if (f.kind == FieldKind::kCategorical)
      f.cardinality = fj.at("cardinality").get<int>();
    else {
      f.normalize = fj.value("normalize", false);
      f.mean = fj.value("mean", 0.0);
      f.std = fj.value("std", 1.0);
    }
    s.fields.push_back(f);
  }
  s.response_mean = j.at("response").at("mean").get<double>();
  s.response_std = j.at("response").at("std").get<double>();
  s.treatments = j.at("treatments").get<int>();
  return s;
}

void save_transition_schema(const TransitionSchema& s, const std::string& file) {
  write_json_file(json{{"kind", "transitions"},
                       {"state", vector_schema_to_json(s.state)},
                       {"reward", {{"mean", s.reward_mean}, {"std", s.reward_std}}},
                       {"actions", s.actions}},
                  file);
}

TransitionSchema load_transition_schema(const std::string& file) {
  json j = load_json_file(file);
  if (j.value("kind", "") != "transitions")
    throw DataError(file + ": not a transitions schema");
  TransitionSchema s;
  s.state = vector_schema_from_json(j.at("state"));
  s.reward_mean = j.at("reward").at("mean").get<double>();
  s.reward_std = j.at("reward").at("std").get<double>();
  s.actions = j.at("actions").get<int>();
  return s;
}

void save_stream_schema(const StreamSchema& s, const std::string& file) {
  write_json_file(json{{"kind", "stream"},
                       {"context", vector_schema_to_json(s.context)},
                       {"stats", vector_schema_to_json(s.stats)},
                       {"threshold", s.threshold},
                       {"pages", s.pages}},
                  file);
}

StreamSchema load_stream_schema(const std::string& file) {
  json j = load_json_file(file);
  if (j.value("kind", "") != "stream")
    throw DataError(file + ": not a stream schema");
  StreamSchema s;
  s.context = vector_schema_from_json(j.at("context"));
  s.stats = vector_schema_from_json(j.at("stats"));
  s.threshold = j.at("threshold").get<double>();
  s.pages = j.at("pages").get<int>();
  return s;
}

}  // namespace klan::data
