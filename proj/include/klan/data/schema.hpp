#pragma once

#include <string>
#include <vector>

#include "klan/data/records.hpp"

namespace klan::data {

enum class FieldKind { kNumeric, kCategorical };

struct Field {
  std::string name;
  FieldKind kind = FieldKind::kNumeric;
  int cardinality = 0;     // categorical only
  bool normalize = false;  // numeric only
  double mean = 0.0;
  double std = 1.0;
};

// Feature layout for uplift instances plus normalization constants. Stats
// always come from the training split; eval and serving reuse them.
struct RctSchema {
  std::vector<Field> fields;  // categorical and numeric interleaved in order
  double response_mean = 0.0;
  double response_std = 1.0;
  int treatments = 0;  // number of non-control treatments (= pages)

  std::size_t numeric_count() const;
  std::size_t categorical_count() const;
  void fit(const std::vector<RctInstance>& train);
  // z-scores the numeric fields into a flat vector, schema order
  std::vector<double> normalized_numeric(const RctInstance& inst) const;
  double normalize_response(double y) const;
  double denormalize_response(double y_z) const;
};

RctSchema default_rct_schema(int pages);

// Flat-vector layout shared by the intra-day state and stream features.
struct VectorSchema {
  std::vector<std::string> names;
  std::vector<bool> normalize;
  std::vector<double> mean;
  std::vector<double> std;

  std::size_t dim() const { return names.size(); }
  void fit(const std::vector<const std::vector<double>*>& rows);
  std::vector<double> apply(const std::vector<double>& raw) const;
};

VectorSchema state_schema(int pages);    // intra-day decision state
VectorSchema context_schema(int pages);  // stream real-time part
VectorSchema stats_schema(int pages);    // stream long-term part

struct TransitionSchema {
  VectorSchema state;
  double reward_mean = 0.0;
  double reward_std = 1.0;
  int actions = 0;

  void fit(const std::vector<Transition>& train);
  double normalize_reward(double r) const;
};

struct StreamSchema {
  VectorSchema context;
  VectorSchema stats;
  double threshold = 0.0;  // switch-ratio cutoff for the settled label
  int pages = 0;

  void fit(const std::vector<StreamInstance>& train);
};

// JSON (de)serialization for the three manifests
void save_rct_schema(const RctSchema& s, const std::string& file);
RctSchema load_rct_schema(const std::string& file);
void save_transition_schema(const TransitionSchema& s, const std::string& file);
TransitionSchema load_transition_schema(const std::string& file);
void save_stream_schema(const StreamSchema& s, const std::string& file);
StreamSchema load_stream_schema(const std::string& file);

}  // namespace klan::data
